//! Bilinear scorer with one full `d1 × d1` matrix per relation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{TensorMut, TensorRef};
use crate::linalg::{self, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearParams {
    /// Indexed by relation id.
    pub m: Vec<Matrix>,
}

impl BilinearParams {
    pub fn forward(&self, relation: usize, h: &[f64], t: &[f64]) -> f64 {
        let m = &self.m[relation];
        let mut mt = vec![0.0; m.rows()];
        m.matvec(t, &mut mt);
        linalg::dot(h, &mt)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn backward(
        &self,
        relation: usize,
        h: &[f64],
        t: &[f64],
        ds: f64,
        g: &mut BilinearParams,
        dh: &mut [f64],
        dt: &mut [f64],
    ) {
        let m = &self.m[relation];
        g.m[relation].add_outer(ds, h, t);
        let mut mt = vec![0.0; m.rows()];
        m.matvec(t, &mut mt);
        linalg::axpy(ds, &mt, dh);
        let scaled: Vec<f64> = h.iter().map(|v| v * ds).collect();
        m.matvec_t_acc(&scaled, dt);
    }

    pub(super) fn tensors<'a>(&'a self, out: &mut Vec<TensorRef<'a>>) {
        for (r, m) in self.m.iter().enumerate() {
            out.push(TensorRef {
                name: format!("m.{r}"),
                shape: vec![m.rows(), m.cols()],
                data: m.as_slice(),
            });
        }
    }

    pub(super) fn tensors_mut<'a>(&'a mut self, out: &mut Vec<TensorMut<'a>>) {
        for (r, m) in self.m.iter_mut().enumerate() {
            let shape = vec![m.rows(), m.cols()];
            out.push(TensorMut { name: format!("m.{r}"), shape, data: m.as_mut_slice() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_score() {
        let p = BilinearParams { m: vec![Matrix::from_vec(2, 2, vec![0.0, 1.0, 0.0, 0.0])] };
        assert_eq!(p.forward(0, &[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(p.forward(0, &[0.0, 1.0], &[1.0, 0.0]), 0.0);
    }
}
