//! Versioned JSON checkpoints.
//!
//! A checkpoint stores the model kind, both dimensions, the architecture
//! switches, the relation schema, the vocabulary, every named tensor
//! (row-major `data` with its `shape`) and the decision threshold chosen on
//! the dev set. See `FORMATS.md` at the repository root for the layout.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use kbnovelty_core::corpus::RelationSchema;
use kbnovelty_core::embeddings::{EmbeddingTable, Vocabulary};
use kbnovelty_core::scorers::{Model, ModelConfig, ModelKind, TermMask};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::triples::{create, open};

pub const CHECKPOINT_FORMAT: &str = "kbnovelty-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tensor {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct File {
    format: String,
    kind: String,
    d1: usize,
    d2: usize,
    activation: String,
    dnn_relation: String,
    /// head_tail, relation_tail, relation_head
    term_mask: [bool; 3],
    /// Decimal text so that the infinite thresholds survive JSON.
    threshold: String,
    relations: Vec<String>,
    vocab: Vec<String>,
    tensors: Vec<Tensor>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

/// A trained model, its threshold and free-form metadata.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: Model,
    pub threshold: f64,
    pub metadata: BTreeMap<String, String>,
}

impl Checkpoint {
    pub fn to_writer(&self, w: &mut impl Write) -> std::result::Result<(), serde_json::Error> {
        let m = &self.model;
        let cfg = m.config();
        let mask = cfg.term_mask;
        let file = File {
            format: CHECKPOINT_FORMAT.into(),
            kind: m.kind().as_str().into(),
            d1: m.d1(),
            d2: m.d2(),
            activation: cfg.activation.as_str().into(),
            dnn_relation: cfg.dnn_relation.as_str().into(),
            term_mask: [mask.head_tail, mask.relation_tail, mask.relation_head],
            threshold: self.threshold.to_string(),
            relations: m.schema().names().to_vec(),
            vocab: m.vocab().words().to_vec(),
            tensors: m
                .params
                .tensors()
                .into_iter()
                .map(|t| Tensor { name: t.name, shape: t.shape, data: t.data.to_vec() })
                .collect(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_writer(w, &file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if !self.model.params.all_finite() {
            return Err(Error::format(path, "refusing to save non-finite parameters"));
        }
        let mut w = create(path)?;
        self.to_writer(&mut w).map_err(|e| Error::format(path, e.to_string()))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn from_reader(r: impl std::io::Read, path: &Path) -> Result<Self> {
        let bad = |m: String| Error::format(path, m);
        let file: File = serde_json::from_reader(r).map_err(|e| bad(e.to_string()))?;
        if file.format != CHECKPOINT_FORMAT {
            return Err(bad(format!("unsupported checkpoint format `{}`", file.format)));
        }
        let kind: ModelKind = file.kind.parse()?;
        let mut config = ModelConfig::new(kind).with_d2(file.d2);
        config.activation = file.activation.parse()?;
        config.dnn_relation = file.dnn_relation.parse()?;
        let [head_tail, relation_tail, relation_head] = file.term_mask;
        config.term_mask = TermMask { head_tail, relation_tail, relation_head };
        let schema = RelationSchema::new(file.relations)?;
        let vocab = Vocabulary::new(file.vocab)?;
        let n_words = vocab.len();

        // Build a skeleton of the right shapes, then fill every tensor.
        let blank = EmbeddingTable::from_parts(vocab.clone(), file.d1, vec![0.0; n_words * file.d1], true)?;
        let mut model = Model::init(config, &blank, &schema, 0)?;
        let mut stored: BTreeMap<String, Tensor> = file.tensors.into_iter().map(|t| (t.name.clone(), t)).collect();
        for slot in model.params.tensors_mut() {
            let t = stored.remove(&slot.name).ok_or_else(|| bad(format!("missing tensor `{}`", slot.name)))?;
            if t.shape != slot.shape || t.data.len() != slot.data.len() {
                return Err(bad(format!("tensor `{}` has shape {:?}, expected {:?}", t.name, t.shape, slot.shape)));
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("tensor `{}` holds non-finite values", t.name)));
            }
            slot.data.copy_from_slice(&t.data);
        }
        if let Some(extra) = stored.keys().next() {
            return Err(bad(format!("unexpected tensor `{extra}`")));
        }
        let threshold: f64 = file.threshold.parse().map_err(|_| bad(format!("bad threshold `{}`", file.threshold)))?;
        if threshold.is_nan() {
            return Err(bad("threshold is NaN".into()));
        }
        let model = Model::from_parts(config, vocab, schema, model.params)?;
        Ok(Self { model, threshold, metadata: file.metadata })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_reader(open(path)?, path)
    }
}
