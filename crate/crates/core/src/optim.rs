//! Adagrad.
//!
//! Per coordinate: `acc += g²; θ -= lr · g / sqrt(acc + ε)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::scorers::Params;
use crate::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdagradState {
    accumulators: Vec<Vec<f64>>,
    epsilon: f64,
}

impl AdagradState {
    /// Zeroed accumulators shaped like `params`.
    pub fn new(params: &Params) -> Self {
        Self::with_sizes(params.tensors().iter().map(|t| t.data.len()), DEFAULT_EPSILON)
    }

    pub fn with_sizes(sizes: impl IntoIterator<Item = usize>, epsilon: f64) -> Self {
        Self { accumulators: sizes.into_iter().map(|n| vec![0.0; n]).collect(), epsilon }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn accumulators(&self) -> &[Vec<f64>] {
        &self.accumulators
    }

    /// Applies one update to every tensor of `params`.
    ///
    /// The whole step is rejected, leaving params and state untouched, if any
    /// gradient value is non-finite.
    pub fn step(&mut self, params: &mut Params, grads: &Params, lr: f64) -> Result<()> {
        let grads = grads.tensors();
        for g in &grads {
            if g.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient(g.name.clone()));
            }
        }
        let mut tensors = params.tensors_mut();
        if tensors.len() != self.accumulators.len() || grads.len() != tensors.len() {
            return Err(Error::LengthMismatch(tensors.len(), self.accumulators.len()));
        }
        for ((p, g), acc) in tensors.iter_mut().zip(&grads).zip(&mut self.accumulators) {
            if p.data.len() != g.data.len() || acc.len() != p.data.len() {
                return Err(Error::TensorShape {
                    name: p.name.clone(),
                    expected: acc.len(),
                    found: g.data.len(),
                });
            }
        }
        for ((p, g), acc) in tensors.into_iter().zip(&grads).zip(&mut self.accumulators) {
            update(p.data, g.data, acc, lr, self.epsilon);
        }
        Ok(())
    }

    /// Slice-level update for callers outside the model parameter layout.
    pub fn step_slice(&mut self, index: usize, param: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient(alloc::format!("#{index}")));
        }
        let acc = &mut self.accumulators[index];
        if acc.len() != param.len() || grad.len() != param.len() {
            return Err(Error::LengthMismatch(param.len(), grad.len()));
        }
        update(param, grad, acc, lr, self.epsilon);
        Ok(())
    }
}

fn update(param: &mut [f64], grad: &[f64], acc: &mut [f64], lr: f64, eps: f64) {
    for ((p, &g), a) in param.iter_mut().zip(grad).zip(acc.iter_mut()) {
        if g == 0.0 {
            continue;
        }
        *a += g * g;
        *p -= lr * g / libm::sqrt(*a + eps);
    }
}
