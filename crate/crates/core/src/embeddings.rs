//! Word vector tables and bag-of-words phrase composition.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use crate::corpus::{Phrase, RelationSchema};
use crate::rng;
use crate::{Error, Result};

/// Standard deviation of the Gaussian used for fresh relation vectors.
pub const RELATION_INIT_STD: f64 = 0.05;

/// Word ↔ id mapping. Ids are insertion positions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = Self::default();
        for w in words {
            v.push(w.as_ref())?;
        }
        Ok(v)
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// In-vocabulary token ids of `phrase`, in order, repeats kept.
    pub fn token_ids(&self, phrase: &Phrase) -> Vec<usize> {
        phrase.words().iter().filter_map(|w| self.id(w)).collect()
    }

    fn push(&mut self, word: &str) -> Result<usize> {
        if self.index.contains_key(word) {
            return Err(Error::DuplicateWord(word.to_string()));
        }
        let id = self.words.len();
        self.index.insert(word.to_string(), id);
        self.words.push(word.to_string());
        Ok(id)
    }
}

/// Word → vector map with a fixed dimension.
///
/// Vectors are stored contiguously in vocabulary id order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: Vocabulary,
    data: Vec<f64>,
    frozen: bool,
}

/// A composed phrase vector together with how many tokens contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    pub vector: Vec<f64>,
    pub in_vocab: usize,
}

impl Composed {
    /// No token of the phrase was in the vocabulary; the vector is zero.
    pub fn is_oov(&self) -> bool {
        self.in_vocab == 0
    }
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self { dim, vocab: Vocabulary::default(), data: Vec::new(), frozen: true }
    }

    pub fn with_capacity(dim: usize, words: usize) -> Self {
        let mut t = Self::new(dim);
        t.vocab.words.reserve(words);
        t.data.reserve(words * dim);
        t
    }

    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<usize> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: vector.len() });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEmbedding(word.to_string()));
        }
        let id = self.vocab.push(word)?;
        self.data.extend_from_slice(vector);
        Ok(id)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Rebuilds a table from a vocabulary and row-major vectors.
    pub fn from_parts(vocab: Vocabulary, dim: usize, data: Vec<f64>, frozen: bool) -> Result<Self> {
        if data.len() != vocab.len() * dim {
            return Err(Error::DimensionMismatch { expected: vocab.len() * dim, found: data.len() });
        }
        Ok(Self { dim, vocab, data, frozen })
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// A mutable copy for use as model parameters.
    pub fn trainable_copy(&self) -> Self {
        Self { frozen: false, ..self.clone() }
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.vocab.id(word)
    }

    pub fn word(&self, id: usize) -> &str {
        self.vocab.word(id)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.id(word).map(|id| self.vector(id))
    }

    pub fn vector(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Panics on a frozen table: frozen tables back the novelty metric and
    /// must keep their pretrained values.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        assert!(!self.frozen, "attempt to mutate a frozen embedding table");
        &mut self.data
    }

    pub fn token_ids(&self, phrase: &Phrase) -> Vec<usize> {
        self.vocab.token_ids(phrase)
    }

    /// Sum of the vectors of `ids`.
    pub fn sum_ids(&self, ids: &[usize], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &id in ids {
            for (o, v) in out.iter_mut().zip(self.vector(id)) {
                *o += v;
            }
        }
    }

    /// Elementwise sum of in-vocabulary token vectors. OOV tokens are
    /// skipped; an all-OOV phrase gives the zero vector with the OOV flag.
    pub fn phrase_sum(&self, phrase: &Phrase) -> Composed {
        let ids = self.token_ids(phrase);
        let mut vector = vec![0.0; self.dim];
        self.sum_ids(&ids, &mut vector);
        Composed { vector, in_vocab: ids.len() }
    }

    /// [`EmbeddingTable::phrase_sum`] divided by the in-vocabulary count.
    pub fn phrase_average(&self, phrase: &Phrase) -> Composed {
        let mut c = self.phrase_sum(phrase);
        if c.in_vocab > 0 {
            let k = c.in_vocab as f64;
            c.vector.iter_mut().for_each(|v| *v /= k);
        }
        c
    }
}

/// One trainable vector per schema relation.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationEmbeddings {
    dim: usize,
    data: Vec<f64>,
}

impl RelationEmbeddings {
    pub fn zeros(relations: usize, dim: usize) -> Self {
        Self { dim, data: vec![0.0; relations * dim] }
    }

    /// Entries drawn i.i.d. from N(0, 0.05²), deterministic under `seed`.
    pub fn init(schema: &RelationSchema, dim: usize, seed: u64) -> Self {
        let normal = Normal::new(0.0, RELATION_INIT_STD).expect("valid std");
        let mut rng = rng::seeded(seed);
        let data = (0..schema.len() * dim).map(|_| normal.sample(&mut rng)).collect();
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self, relation: usize) -> &[f64] {
        &self.data[relation * self.dim..(relation + 1) * self.dim]
    }

    pub fn vector_mut(&mut self, relation: usize) -> &mut [f64] {
        &mut self.data[relation * self.dim..(relation + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Frozen table with i.i.d. N(0, 1/dim) entries for `words`, used when no
/// pretrained vectors are available. Deterministic under `seed`.
pub fn random_table<I, S>(words: I, dim: usize, seed: u64) -> Result<EmbeddingTable>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if dim == 0 {
        return Err(Error::InvalidConfig("embedding dimension must be positive".to_string()));
    }
    let normal = Normal::new(0.0, 1.0 / libm::sqrt(dim as f64)).expect("valid std");
    let mut rng = rng::seeded(seed);
    let mut table = EmbeddingTable::new(dim);
    let mut v = vec![0.0; dim];
    for w in words {
        v.iter_mut().for_each(|x| *x = normal.sample(&mut rng));
        table.insert(w.as_ref(), &v)?;
    }
    Ok(table)
}

/// Free function form of [`RelationEmbeddings::init`].
pub fn init_relation_embeddings(schema: &RelationSchema, dim: usize, seed: u64) -> RelationEmbeddings {
    RelationEmbeddings::init(schema, dim, seed)
}
