//! Single-hidden-layer scorer over additively combined head, relation and
//! tail projections.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use super::{ModelConfig, TensorMut, TensorRef};
use crate::linalg::{self, Matrix};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => libm::tanh(z),
        }
    }

    /// Derivative given the pre-activation `z` and output `u`.
    fn derivative(self, z: f64, u: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - u * u,
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::InvalidConfig(format!("unknown activation `{other}` (relu, tanh)"))),
        }
    }
}

/// Whether the relation vector feeds the hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnnRelation {
    /// Hidden pre-activation is `Ah + Cr + Bt + b1`.
    Add,
    /// Relation-blind: `Ah + Bt + b1`.
    None,
}

impl DnnRelation {
    pub fn as_str(self) -> &'static str {
        match self {
            DnnRelation::Add => "add",
            DnnRelation::None => "none",
        }
    }
}

impl FromStr for DnnRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "add" => Ok(DnnRelation::Add),
            "none" => Ok(DnnRelation::None),
            other => Err(Error::InvalidConfig(format!("unknown dnn_relation `{other}` (add, none)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DnnParams {
    pub a: Matrix,
    pub b: Matrix,
    /// Relation path, `d2 × d1`.
    pub c: Matrix,
    pub b1: Vec<f64>,
    pub w: Vec<f64>,
    pub b2: f64,
}

impl DnnParams {
    fn hidden(&self, cfg: &ModelConfig, h: &[f64], r: &[f64], t: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d2 = self.b1.len();
        let mut z = self.b1.clone();
        let mut tmp = vec![0.0; d2];
        self.a.matvec(h, &mut tmp);
        linalg::axpy(1.0, &tmp, &mut z);
        self.b.matvec(t, &mut tmp);
        linalg::axpy(1.0, &tmp, &mut z);
        if cfg.dnn_relation == DnnRelation::Add {
            self.c.matvec(r, &mut tmp);
            linalg::axpy(1.0, &tmp, &mut z);
        }
        let u = z.iter().map(|&v| cfg.activation.apply(v)).collect();
        (z, u)
    }

    pub fn forward(&self, cfg: &ModelConfig, h: &[f64], r: &[f64], t: &[f64]) -> f64 {
        let (_, u) = self.hidden(cfg, h, r, t);
        linalg::dot(&self.w, &u) + self.b2
    }

    pub fn backward(
        &self,
        cfg: &ModelConfig,
        (h, r, t): (&[f64], &[f64], &[f64]),
        ds: f64,
        g: &mut DnnParams,
        (dh, dr, dt): (&mut [f64], &mut [f64], &mut [f64]),
    ) {
        let (z, u) = self.hidden(cfg, h, r, t);
        linalg::axpy(ds, &u, &mut g.w);
        g.b2 += ds;
        let dz: Vec<f64> = z
            .iter()
            .zip(&u)
            .zip(&self.w)
            .map(|((&zi, &ui), &wi)| ds * wi * cfg.activation.derivative(zi, ui))
            .collect();
        linalg::axpy(1.0, &dz, &mut g.b1);
        g.a.add_outer(1.0, &dz, h);
        g.b.add_outer(1.0, &dz, t);
        self.a.matvec_t_acc(&dz, dh);
        self.b.matvec_t_acc(&dz, dt);
        if cfg.dnn_relation == DnnRelation::Add {
            g.c.add_outer(1.0, &dz, r);
            self.c.matvec_t_acc(&dz, dr);
        }
    }

    pub(super) fn tensors<'a>(&'a self, out: &mut Vec<TensorRef<'a>>) {
        for (name, m) in [("a", &self.a), ("b", &self.b), ("c", &self.c)] {
            out.push(TensorRef { name: name.into(), shape: vec![m.rows(), m.cols()], data: m.as_slice() });
        }
        out.push(TensorRef { name: "b1".into(), shape: vec![self.b1.len()], data: &self.b1 });
        out.push(TensorRef { name: "w".into(), shape: vec![self.w.len()], data: &self.w });
        out.push(TensorRef { name: "b2".into(), shape: vec![1], data: core::slice::from_ref(&self.b2) });
    }

    pub(super) fn tensors_mut<'a>(&'a mut self, out: &mut Vec<TensorMut<'a>>) {
        for (name, m) in [("a", &mut self.a), ("b", &mut self.b), ("c", &mut self.c)] {
            let shape = vec![m.rows(), m.cols()];
            out.push(TensorMut { name: name.into(), shape, data: m.as_mut_slice() });
        }
        let (n1, nw) = (self.b1.len(), self.w.len());
        out.push(TensorMut { name: "b1".into(), shape: vec![n1], data: &mut self.b1 });
        out.push(TensorMut { name: "w".into(), shape: vec![nw], data: &mut self.w });
        out.push(TensorMut { name: "b2".into(), shape: vec![1], data: core::slice::from_mut(&mut self.b2) });
    }
}
