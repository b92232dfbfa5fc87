//! Triple scoring models.
//!
//! All four models compose head and tail by summing word vectors and turn a
//! real score into a probability with the logistic sigmoid:
//!
//! | kind         | score                                                          |
//! |--------------|----------------------------------------------------------------|
//! | Factorized   | α⟨Ah+b₁, Bt+b₂⟩ + β⟨Ar+b₁, Bt+b₂⟩ + γ⟨Ar+b₁, Bh+b₂⟩            |
//! | Prototypical | the two relation terms of Factorized only                      |
//! | DNN          | W·φ(Ah + Cr + Bt + b₁) + b₂                                     |
//! | Bilinear     | hᵀ M_r t                                                        |
//!
//! Projection matrices map word space (d1) to hidden space (d2) and are
//! stored as `d2 × d1`, so `Ah` is an ordinary matrix-vector product.
//!
//! Gradients are analytic. [`Params`] doubles as the gradient container:
//! [`Params::zeros_like`] gives an accumulator with identical shapes.

pub mod bilinear;
pub mod dnn;
pub mod factorized;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng as _;

use crate::corpus::{Label, RelationSchema, Triple};
use crate::embeddings::{EmbeddingTable, RelationEmbeddings, Vocabulary};
use crate::linalg::{self, Matrix};
use crate::rng::{self, Rng};
use crate::{Error, Result};

pub use bilinear::BilinearParams;
pub use dnn::{Activation, DnnParams, DnnRelation};
pub use factorized::{FactorizedParams, TermMask};

/// Default hidden width.
pub const DEFAULT_D2: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Factorized,
    Prototypical,
    Dnn,
    Bilinear,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] =
        [ModelKind::Factorized, ModelKind::Prototypical, ModelKind::Dnn, ModelKind::Bilinear];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Factorized => "factorized",
            ModelKind::Prototypical => "prototypical",
            ModelKind::Dnn => "dnn",
            ModelKind::Bilinear => "bilinear",
        }
    }

    /// 200 for DNN, 600 for Factorized and Prototypical. Bilinear shares the
    /// DNN value.
    pub fn default_batch_size(self) -> usize {
        match self {
            ModelKind::Factorized | ModelKind::Prototypical => 600,
            ModelKind::Dnn | ModelKind::Bilinear => 200,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown model `{s}` (valid: factorized, prototypical, dnn, bilinear)"
            ))
        })
    }
}

/// Architecture choices fixed at construction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub d2: usize,
    pub activation: Activation,
    pub dnn_relation: DnnRelation,
    /// Active Factorized terms. Ignored by DNN and Bilinear.
    pub term_mask: TermMask,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            d2: DEFAULT_D2,
            activation: Activation::Relu,
            dnn_relation: DnnRelation::Add,
            term_mask: match kind {
                ModelKind::Prototypical => TermMask::PROTOTYPICAL,
                _ => TermMask::ALL,
            },
        }
    }

    pub fn with_d2(mut self, d2: usize) -> Self {
        self.d2 = d2;
        self
    }
}

/// Model-specific tensors.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Factorized(FactorizedParams),
    Dnn(DnnParams),
    Bilinear(BilinearParams),
}

/// Every trainable tensor of a model.
///
/// `words` is the trainable copy of the pretrained embedding table
/// (`vocab × d1`), `relations` holds one vector per schema relation and is
/// empty (zero rows) for Bilinear.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub words: Matrix,
    pub relations: Matrix,
    pub body: Body,
}

/// A named view of one parameter tensor.
pub struct TensorRef<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

pub struct TensorMut<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a mut [f64],
}

impl Params {
    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = vec![
            TensorRef {
                name: "words".into(),
                shape: vec![self.words.rows(), self.words.cols()],
                data: self.words.as_slice(),
            },
            TensorRef {
                name: "relations".into(),
                shape: vec![self.relations.rows(), self.relations.cols()],
                data: self.relations.as_slice(),
            },
        ];
        match &self.body {
            Body::Factorized(p) => p.tensors(&mut out),
            Body::Dnn(p) => p.tensors(&mut out),
            Body::Bilinear(p) => p.tensors(&mut out),
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = vec![
            TensorMut {
                name: "words".into(),
                shape: vec![self.words.rows(), self.words.cols()],
                data: self.words.as_mut_slice(),
            },
            TensorMut {
                name: "relations".into(),
                shape: vec![self.relations.rows(), self.relations.cols()],
                data: self.relations.as_mut_slice(),
            },
        ];
        match &mut self.body {
            Body::Factorized(p) => p.tensors_mut(&mut out),
            Body::Dnn(p) => p.tensors_mut(&mut out),
            Body::Bilinear(p) => p.tensors_mut(&mut out),
        }
        out
    }

    pub fn num_values(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    /// `self += scale · other`, tensor by tensor.
    pub fn add_scaled(&mut self, scale: f64, other: &Params) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            linalg::axpy(scale, src.data, dst.data);
        }
    }
}

/// A triple resolved to word and relation ids.
///
/// `head` and `tail` hold the in-vocabulary token ids; both are non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedTriple {
    pub head: Vec<usize>,
    pub relation: usize,
    pub tail: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub triple: EncodedTriple,
    pub label: Label,
}

/// A scorer with its vocabulary, schema and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    vocab: Vocabulary,
    schema: RelationSchema,
    pub params: Params,
}

impl Model {
    /// Fresh model: word vectors copied from `pretrained`, relation vectors
    /// from N(0, 0.05²), projection matrices uniform in ±√(6/(fan_in+fan_out)),
    /// score weights α=β=γ=1, biases 0.
    pub fn init(
        config: ModelConfig,
        pretrained: &EmbeddingTable,
        schema: &RelationSchema,
        seed: u64,
    ) -> Result<Self> {
        if config.d2 == 0 {
            return Err(Error::InvalidConfig("d2 must be positive".into()));
        }
        if pretrained.dim() == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
        }
        if schema.is_empty() {
            return Err(Error::InvalidConfig("relation schema is empty".into()));
        }
        let d1 = pretrained.dim();
        let d2 = config.d2;
        let words =
            Matrix::from_vec(pretrained.len(), d1, pretrained.as_slice().to_vec());
        let mut rng = rng::substream(seed, 1);
        let (relations, body) = match config.kind {
            ModelKind::Factorized | ModelKind::Prototypical => (
                relation_matrix(schema, d1, seed),
                Body::Factorized(FactorizedParams {
                    a: glorot(d2, d1, &mut rng),
                    b: glorot(d2, d1, &mut rng),
                    b1: vec![0.0; d2],
                    b2: vec![0.0; d2],
                    alpha: 1.0,
                    beta: 1.0,
                    gamma: 1.0,
                }),
            ),
            ModelKind::Dnn => (
                relation_matrix(schema, d1, seed),
                Body::Dnn(DnnParams {
                    a: glorot(d2, d1, &mut rng),
                    b: glorot(d2, d1, &mut rng),
                    c: glorot(d2, d1, &mut rng),
                    b1: vec![0.0; d2],
                    w: glorot(1, d2, &mut rng).as_slice().to_vec(),
                    b2: 0.0,
                }),
            ),
            ModelKind::Bilinear => (
                Matrix::zeros(0, d1),
                Body::Bilinear(BilinearParams {
                    m: (0..schema.len()).map(|_| glorot(d1, d1, &mut rng)).collect(),
                }),
            ),
        };
        Ok(Self {
            config,
            vocab: pretrained.vocab().clone(),
            schema: schema.clone(),
            params: Params { words, relations, body },
        })
    }

    /// Reassembles a model from stored parts. Shapes are validated.
    pub fn from_parts(
        config: ModelConfig,
        vocab: Vocabulary,
        schema: RelationSchema,
        params: Params,
    ) -> Result<Self> {
        let model = Self { config, vocab, schema, params };
        model.check_shapes()?;
        Ok(model)
    }

    fn check_shapes(&self) -> Result<()> {
        let d1 = self.d1();
        let d2 = self.config.d2;
        let r = self.schema.len();
        let expect = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::TensorShape { name: name.into(), expected: want, found: got })
            }
        };
        expect("words", self.params.words.rows(), self.vocab.len())?;
        let rel_rows = if self.config.kind == ModelKind::Bilinear { 0 } else { r };
        expect("relations", self.params.relations.rows(), rel_rows)?;
        expect("relations.cols", self.params.relations.cols(), d1)?;
        match (&self.params.body, self.config.kind) {
            (Body::Factorized(p), ModelKind::Factorized | ModelKind::Prototypical) => {
                for (n, m) in [("a", &p.a), ("b", &p.b)] {
                    expect(n, m.rows() * m.cols(), d2 * d1)?;
                    expect(n, m.rows(), d2)?;
                }
                expect("b1", p.b1.len(), d2)?;
                expect("b2", p.b2.len(), d2)?;
            }
            (Body::Dnn(p), ModelKind::Dnn) => {
                for (n, m) in [("a", &p.a), ("b", &p.b), ("c", &p.c)] {
                    expect(n, m.rows() * m.cols(), d2 * d1)?;
                    expect(n, m.rows(), d2)?;
                }
                expect("b1", p.b1.len(), d2)?;
                expect("w", p.w.len(), d2)?;
            }
            (Body::Bilinear(p), ModelKind::Bilinear) => {
                expect("m", p.m.len(), r)?;
                for m in &p.m {
                    expect("m", m.rows() * m.cols(), d1 * d1)?;
                    expect("m", m.rows(), d1)?;
                }
            }
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "parameters do not match model kind {}",
                    self.config.kind
                )))
            }
        }
        if !self.params.all_finite() {
            return Err(Error::InvalidConfig("non-finite parameter value".into()));
        }
        Ok(())
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    pub fn d1(&self) -> usize {
        self.params.words.cols()
    }

    pub fn d2(&self) -> usize {
        self.config.d2
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn schema(&self) -> &RelationSchema {
        &self.schema
    }

    /// The current (trained) word vectors as a table.
    pub fn word_table(&self) -> EmbeddingTable {
        EmbeddingTable::from_parts(
            self.vocab.clone(),
            self.d1(),
            self.params.words.as_slice().to_vec(),
            false,
        )
        .expect("word matrix matches vocabulary")
    }

    /// Resolves words and relation to ids. A side with no in-vocabulary
    /// token makes the triple unscorable.
    pub fn encode(&self, triple: &Triple) -> Result<EncodedTriple> {
        let relation = self.schema.id(&triple.relation)?;
        let head = self.vocab.token_ids(&triple.head);
        if head.is_empty() {
            return Err(Error::Unscorable("head"));
        }
        let tail = self.vocab.token_ids(&triple.tail);
        if tail.is_empty() {
            return Err(Error::Unscorable("tail"));
        }
        Ok(EncodedTriple { head, relation, tail })
    }

    pub fn score(&self, triple: &Triple) -> Result<f64> {
        Ok(self.score_encoded(&self.encode(triple)?))
    }

    pub fn score_encoded(&self, t: &EncodedTriple) -> f64 {
        let inputs = self.inputs(t);
        match &self.params.body {
            Body::Factorized(p) => p.forward(&self.config, &inputs.h, &inputs.r, &inputs.t),
            Body::Dnn(p) => p.forward(&self.config, &inputs.h, &inputs.r, &inputs.t),
            Body::Bilinear(p) => p.forward(t.relation, &inputs.h, &inputs.t),
        }
    }

    pub fn predict_prob(&self, triple: &Triple) -> Result<f64> {
        self.score(triple).map(predict_prob)
    }

    fn inputs(&self, t: &EncodedTriple) -> Inputs {
        let d1 = self.d1();
        let mut h = vec![0.0; d1];
        let mut tail = vec![0.0; d1];
        sum_rows(&self.params.words, &t.head, &mut h);
        sum_rows(&self.params.words, &t.tail, &mut tail);
        let r = if self.params.relations.rows() > 0 {
            self.params.relations.row(t.relation).to_vec()
        } else {
            Vec::new()
        };
        Inputs { h, r, t: tail }
    }

    /// Adds `dscore · ∂score/∂θ` for one triple into `grad`.
    pub fn accumulate_score_grad(&self, t: &EncodedTriple, dscore: f64, grad: &mut Params) {
        let inputs = self.inputs(t);
        let d1 = self.d1();
        let mut dh = vec![0.0; d1];
        let mut dr = vec![0.0; d1];
        let mut dt = vec![0.0; d1];
        match (&self.params.body, &mut grad.body) {
            (Body::Factorized(p), Body::Factorized(g)) => p.backward(
                &self.config,
                (&inputs.h, &inputs.r, &inputs.t),
                dscore,
                g,
                (&mut dh, &mut dr, &mut dt),
            ),
            (Body::Dnn(p), Body::Dnn(g)) => p.backward(
                &self.config,
                (&inputs.h, &inputs.r, &inputs.t),
                dscore,
                g,
                (&mut dh, &mut dr, &mut dt),
            ),
            (Body::Bilinear(p), Body::Bilinear(g)) => {
                p.backward(t.relation, &inputs.h, &inputs.t, dscore, g, &mut dh, &mut dt)
            }
            _ => panic!("gradient container does not match model kind"),
        }
        // a repeated token receives the phrase gradient once per occurrence
        let words = grad.words.as_mut_slice();
        for (ids, d) in [(&t.head, &dh), (&t.tail, &dt)] {
            for &id in ids {
                linalg::axpy(1.0, d, &mut words[id * d1..(id + 1) * d1]);
            }
        }
        if grad.relations.rows() > 0 {
            let rel = &mut grad.relations.as_mut_slice()[t.relation * d1..(t.relation + 1) * d1];
            linalg::axpy(1.0, &dr, rel);
        }
    }

    /// Mean binary cross-entropy of the batch plus `l2_weight · ‖E‖²` over
    /// the word embedding matrix.
    pub fn batch_loss(&self, batch: &[Example], l2_weight: f64) -> f64 {
        assert!(!batch.is_empty(), "batch_loss on an empty batch");
        let ce: f64 = batch
            .iter()
            .map(|ex| cross_entropy(self.score_encoded(&ex.triple), ex.label))
            .sum::<f64>()
            / batch.len() as f64;
        ce + l2_weight * linalg::squared_norm(self.params.words.as_slice())
    }

    /// Loss and its exact gradient with respect to every tensor.
    pub fn loss_and_gradients(&self, batch: &[Example], l2_weight: f64) -> (f64, Params) {
        assert!(!batch.is_empty(), "gradients on an empty batch");
        let mut grad = self.params.zeros_like();
        let n = batch.len() as f64;
        let mut ce = 0.0;
        for ex in batch {
            let s = self.score_encoded(&ex.triple);
            ce += cross_entropy(s, ex.label);
            let dscore = (predict_prob_raw(s) - ex.label.as_f64()) / n;
            self.accumulate_score_grad(&ex.triple, dscore, &mut grad);
        }
        if l2_weight != 0.0 {
            linalg::axpy(2.0 * l2_weight, self.params.words.as_slice(), grad.words.as_mut_slice());
        }
        let loss = ce / n + l2_weight * linalg::squared_norm(self.params.words.as_slice());
        (loss, grad)
    }

    pub fn gradients(&self, batch: &[Example], l2_weight: f64) -> Params {
        self.loss_and_gradients(batch, l2_weight).1
    }
}

struct Inputs {
    h: Vec<f64>,
    r: Vec<f64>,
    t: Vec<f64>,
}

fn sum_rows(m: &Matrix, ids: &[usize], out: &mut [f64]) {
    for &id in ids {
        linalg::axpy(1.0, m.row(id), out);
    }
}

fn relation_matrix(schema: &RelationSchema, d1: usize, seed: u64) -> Matrix {
    let rel = RelationEmbeddings::init(schema, d1, seed);
    Matrix::from_vec(schema.len(), d1, rel.as_slice().to_vec())
}

fn glorot(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    let limit = libm::sqrt(6.0 / (rows + cols) as f64);
    let data = (0..rows * cols).map(|_| rng.random_range(-limit..limit)).collect();
    Matrix::from_vec(rows, cols, data)
}

fn predict_prob_raw(score: f64) -> f64 {
    if score >= 0.0 {
        1.0 / (1.0 + libm::exp(-score))
    } else {
        let e = libm::exp(score);
        e / (1.0 + e)
    }
}

/// Logistic sigmoid, kept strictly inside (0, 1) for every finite score.
pub fn predict_prob(score: f64) -> f64 {
    predict_prob_raw(score).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Binary cross-entropy of `sigmoid(score)` against `label`, computed from
/// the logit as `softplus(s) − y·s` so it never takes the log of 0 or 1.
pub fn cross_entropy(score: f64, label: Label) -> f64 {
    let softplus = if score > 0.0 {
        score + libm::log1p(libm::exp(-score))
    } else {
        libm::log1p(libm::exp(score))
    };
    softplus - label.as_f64() * score
}
