//! Factorized scorer: a weighted sum of the three pairwise interactions
//! head–tail, relation–tail and relation–head. Prototypical is the same
//! model with the head–tail term masked out.

use alloc::vec;
use alloc::vec::Vec;

use super::{ModelConfig, TensorMut, TensorRef};
use crate::linalg::{self, Matrix};

/// Which interaction terms contribute to the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermMask {
    pub head_tail: bool,
    pub relation_tail: bool,
    pub relation_head: bool,
}

impl TermMask {
    pub const ALL: TermMask = TermMask { head_tail: true, relation_tail: true, relation_head: true };
    pub const PROTOTYPICAL: TermMask =
        TermMask { head_tail: false, relation_tail: true, relation_head: true };
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedParams {
    /// Projection applied to head and relation, `d2 × d1`.
    pub a: Matrix,
    /// Projection applied to tail and head, `d2 × d1`.
    pub b: Matrix,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Projected inputs, computed only for active terms.
struct Projections {
    ph: Vec<f64>,
    qt: Vec<f64>,
    pr: Vec<f64>,
    qh: Vec<f64>,
}

impl FactorizedParams {
    fn project(&self, mask: TermMask, h: &[f64], r: &[f64], t: &[f64]) -> Projections {
        let d2 = self.b1.len();
        let affine = |m: &Matrix, x: &[f64], bias: &[f64]| {
            let mut out = vec![0.0; d2];
            m.matvec(x, &mut out);
            linalg::axpy(1.0, bias, &mut out);
            out
        };
        let empty = Vec::new;
        Projections {
            ph: if mask.head_tail { affine(&self.a, h, &self.b1) } else { empty() },
            qt: if mask.head_tail || mask.relation_tail { affine(&self.b, t, &self.b2) } else { empty() },
            pr: if mask.relation_tail || mask.relation_head {
                affine(&self.a, r, &self.b1)
            } else {
                empty()
            },
            qh: if mask.relation_head { affine(&self.b, h, &self.b2) } else { empty() },
        }
    }

    pub fn forward(&self, cfg: &ModelConfig, h: &[f64], r: &[f64], t: &[f64]) -> f64 {
        let mask = cfg.term_mask;
        let p = self.project(mask, h, r, t);
        let mut s = 0.0;
        if mask.head_tail {
            s += self.alpha * linalg::dot(&p.ph, &p.qt);
        }
        if mask.relation_tail {
            s += self.beta * linalg::dot(&p.pr, &p.qt);
        }
        if mask.relation_head {
            s += self.gamma * linalg::dot(&p.pr, &p.qh);
        }
        s
    }

    pub fn backward(
        &self,
        cfg: &ModelConfig,
        (h, r, t): (&[f64], &[f64], &[f64]),
        ds: f64,
        g: &mut FactorizedParams,
        (dh, dr, dt): (&mut [f64], &mut [f64], &mut [f64]),
    ) {
        let mask = cfg.term_mask;
        let p = self.project(mask, h, r, t);
        let d2 = self.b1.len();
        let mut dph = vec![0.0; d2];
        let mut dqt = vec![0.0; d2];
        let mut dpr = vec![0.0; d2];
        let mut dqh = vec![0.0; d2];
        if mask.head_tail {
            g.alpha += ds * linalg::dot(&p.ph, &p.qt);
            linalg::axpy(ds * self.alpha, &p.qt, &mut dph);
            linalg::axpy(ds * self.alpha, &p.ph, &mut dqt);
        }
        if mask.relation_tail {
            g.beta += ds * linalg::dot(&p.pr, &p.qt);
            linalg::axpy(ds * self.beta, &p.qt, &mut dpr);
            linalg::axpy(ds * self.beta, &p.pr, &mut dqt);
        }
        if mask.relation_head {
            g.gamma += ds * linalg::dot(&p.pr, &p.qh);
            linalg::axpy(ds * self.gamma, &p.qh, &mut dpr);
            linalg::axpy(ds * self.gamma, &p.pr, &mut dqh);
        }

        if mask.head_tail {
            g.a.add_outer(1.0, &dph, h);
            linalg::axpy(1.0, &dph, &mut g.b1);
            self.a.matvec_t_acc(&dph, dh);
        }
        if mask.relation_tail || mask.relation_head {
            g.a.add_outer(1.0, &dpr, r);
            linalg::axpy(1.0, &dpr, &mut g.b1);
            self.a.matvec_t_acc(&dpr, dr);
        }
        if mask.head_tail || mask.relation_tail {
            g.b.add_outer(1.0, &dqt, t);
            linalg::axpy(1.0, &dqt, &mut g.b2);
            self.b.matvec_t_acc(&dqt, dt);
        }
        if mask.relation_head {
            g.b.add_outer(1.0, &dqh, h);
            linalg::axpy(1.0, &dqh, &mut g.b2);
            self.b.matvec_t_acc(&dqh, dh);
        }
    }

    pub(super) fn tensors<'a>(&'a self, out: &mut Vec<TensorRef<'a>>) {
        let (ra, ca) = (self.a.rows(), self.a.cols());
        let (rb, cb) = (self.b.rows(), self.b.cols());
        out.push(TensorRef { name: "a".into(), shape: vec![ra, ca], data: self.a.as_slice() });
        out.push(TensorRef { name: "b".into(), shape: vec![rb, cb], data: self.b.as_slice() });
        out.push(TensorRef { name: "b1".into(), shape: vec![self.b1.len()], data: &self.b1 });
        out.push(TensorRef { name: "b2".into(), shape: vec![self.b2.len()], data: &self.b2 });
        out.push(TensorRef { name: "alpha".into(), shape: vec![1], data: core::slice::from_ref(&self.alpha) });
        out.push(TensorRef { name: "beta".into(), shape: vec![1], data: core::slice::from_ref(&self.beta) });
        out.push(TensorRef { name: "gamma".into(), shape: vec![1], data: core::slice::from_ref(&self.gamma) });
    }

    pub(super) fn tensors_mut<'a>(&'a mut self, out: &mut Vec<TensorMut<'a>>) {
        let (ra, ca) = (self.a.rows(), self.a.cols());
        let (rb, cb) = (self.b.rows(), self.b.cols());
        out.push(TensorMut { name: "a".into(), shape: vec![ra, ca], data: self.a.as_mut_slice() });
        out.push(TensorMut { name: "b".into(), shape: vec![rb, cb], data: self.b.as_mut_slice() });
        let (n1, n2) = (self.b1.len(), self.b2.len());
        out.push(TensorMut { name: "b1".into(), shape: vec![n1], data: &mut self.b1 });
        out.push(TensorMut { name: "b2".into(), shape: vec![n2], data: &mut self.b2 });
        out.push(TensorMut { name: "alpha".into(), shape: vec![1], data: core::slice::from_mut(&mut self.alpha) });
        out.push(TensorMut { name: "beta".into(), shape: vec![1], data: core::slice::from_mut(&mut self.beta) });
        out.push(TensorMut { name: "gamma".into(), shape: vec![1], data: core::slice::from_mut(&mut self.gamma) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorers::{ModelConfig, ModelKind};

    #[test]
    fn identity_projections_give_dot_product() {
        let p = FactorizedParams {
            a: Matrix::identity(2),
            b: Matrix::identity(2),
            b1: vec![0.0; 2],
            b2: vec![0.0; 2],
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
        };
        let cfg = ModelConfig::new(ModelKind::Factorized).with_d2(2);
        assert_eq!(p.forward(&cfg, &[1.0, 2.0], &[5.0, -3.0], &[3.0, 4.0]), 11.0);
    }

    #[test]
    fn prototypical_mask_drops_head_tail_term() {
        let p = FactorizedParams {
            a: Matrix::identity(2),
            b: Matrix::identity(2),
            b1: vec![0.0; 2],
            b2: vec![0.0; 2],
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
        };
        let cfg = ModelConfig::new(ModelKind::Prototypical).with_d2(2);
        assert_eq!(p.forward(&cfg, &[1.0, 2.0], &[5.0, -3.0], &[3.0, 4.0]), 0.0);
    }
}
