//! Deterministic synthetic knowledge bases for tests, benchmarks and demos.
//!
//! Two generators:
//!
//! - [`random_kb`]: unstructured random triples over a small vocabulary,
//!   useful for capacity (overfit) checks.
//! - [`novelty_benchmark`]: a clustered world where truth depends only on
//!   the word clusters of head and tail. Test positives are either one-token
//!   rewordings of training triples or built entirely from held-out words,
//!   so near and far items are known by construction.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::corpus::{DatasetSplit, LabeledTriple, Phrase, RelationSchema, SplitRule, Triple};
use crate::embeddings::EmbeddingTable;
use crate::rng;
use crate::Result;

fn relation_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("Rel{i}")).collect()
}

fn phrase(words: &[&str]) -> Phrase {
    Phrase::from_words(words.iter().copied()).expect("generated words are normalized")
}

#[derive(Debug, Clone)]
pub struct RandomKb {
    pub table: EmbeddingTable,
    pub schema: RelationSchema,
    pub positives: Vec<Triple>,
}

/// `n_positives` distinct random triples over `n_relations` relations and a
/// `vocab`-word vocabulary; every phrase is a single word. Word vectors are
/// i.i.d. N(0, 1/dim).
///
/// With `split_roles` the first half of the vocabulary only appears in heads
/// and the second half only in tails.
pub fn random_kb(
    n_positives: usize,
    n_relations: usize,
    vocab: usize,
    dim: usize,
    split_roles: bool,
    seed: u64,
) -> RandomKb {
    let (heads, tails) = if split_roles { (0..vocab / 2, vocab / 2..vocab) } else { (0..vocab, 0..vocab) };
    assert!(n_positives <= heads.len() * tails.len() * n_relations, "not enough distinct triples");
    let mut rng = rng::seeded(seed);
    let normal = Normal::new(0.0, 1.0 / libm::sqrt(dim as f64)).expect("valid std");
    let words: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    let mut table = EmbeddingTable::with_capacity(dim, vocab);
    for w in &words {
        let v: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
        table.insert(w, &v).expect("fresh word");
    }
    let names = relation_names(n_relations);
    let schema = RelationSchema::new(names.iter().cloned()).expect("valid names");
    let mut seen = BTreeSet::new();
    let mut positives = Vec::with_capacity(n_positives);
    while positives.len() < n_positives {
        let (h, r, t) = (
            rng.random_range(heads.clone()),
            rng.random_range(0..n_relations),
            rng.random_range(tails.clone()),
        );
        if seen.insert((h, r, t)) {
            positives.push(Triple::new(names[r].clone(), phrase(&[&words[h]]), phrase(&[&words[t]])));
        }
    }
    RandomKb { table, schema, positives }
}

/// Shape of the clustered world built by [`novelty_benchmark`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkShape {
    pub clusters: usize,
    /// Words per cluster that may appear in training.
    pub seen_words: usize,
    /// Words per cluster reserved for held-out test phrases.
    pub held_out_words: usize,
    pub relations: usize,
    /// Allowed tail clusters per (relation, head cluster).
    pub tails_per_head: usize,
    pub dim: usize,
    /// Spread of words around their cluster centroid.
    pub word_noise: f64,
    pub train: usize,
    /// Dev and test each hold this many positives, half reworded and half
    /// held out.
    pub eval: usize,
}

impl Default for BenchmarkShape {
    fn default() -> Self {
        Self {
            clusters: 12,
            seen_words: 8,
            held_out_words: 4,
            relations: 4,
            tails_per_head: 2,
            dim: 16,
            word_noise: 0.35,
            train: 600,
            eval: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// One token of a training triple swapped for a same-cluster word.
    Reworded,
    /// Head and tail built only from held-out words.
    HeldOut,
}

#[derive(Debug, Clone)]
pub struct NoveltyBenchmark {
    pub table: EmbeddingTable,
    pub schema: RelationSchema,
    /// Dev and test carry frozen swap negatives.
    pub split: DatasetSplit,
    /// Origin of each test positive, in `split.test` order.
    pub test_origins: Vec<Origin>,
}

struct World {
    shape: BenchmarkShape,
    names: Vec<String>,
    /// `allowed[r][head_cluster]` lists the true tail clusters.
    allowed: Vec<Vec<Vec<usize>>>,
}

impl World {
    fn word(&self, cluster: usize, i: usize) -> String {
        format!("c{cluster}w{i}")
    }

    fn seen_word(&self, cluster: usize, rng: &mut rng::Rng) -> String {
        self.word(cluster, rng.random_range(0..self.shape.seen_words))
    }

    fn held_word(&self, cluster: usize, rng: &mut rng::Rng) -> String {
        self.word(cluster, self.shape.seen_words + rng.random_range(0..self.shape.held_out_words))
    }

    /// Two-word phrase from one cluster.
    fn phrase(&self, cluster: usize, held_out: bool, rng: &mut rng::Rng) -> Phrase {
        let mut pick = || if held_out { self.held_word(cluster, rng) } else { self.seen_word(cluster, rng) };
        let (a, b) = (pick(), pick());
        phrase(&[&a, &b])
    }

    fn true_triple(&self, held_out: bool, rng: &mut rng::Rng) -> (Triple, usize, usize) {
        let r = rng.random_range(0..self.shape.relations);
        let hc = rng.random_range(0..self.shape.clusters);
        let tc = *self.allowed[r][hc].choose(rng).expect("non-empty");
        let t = Triple::new(self.names[r].clone(), self.phrase(hc, held_out, rng), self.phrase(tc, held_out, rng));
        (t, hc, tc)
    }
}

/// Builds the clustered benchmark. Everything is a pure function of
/// `shape` and `seed`.
pub fn novelty_benchmark(shape: BenchmarkShape, seed: u64) -> Result<NoveltyBenchmark> {
    let mut rng = rng::seeded(seed);
    let names = relation_names(shape.relations);
    let schema = RelationSchema::new(names.iter().cloned())?;
    let allowed = (0..shape.relations)
        .map(|_| {
            (0..shape.clusters)
                .map(|_| {
                    let all: Vec<usize> = (0..shape.clusters).collect();
                    all.choose_multiple(&mut rng, shape.tails_per_head).copied().collect()
                })
                .collect()
        })
        .collect();
    let world = World { shape, names, allowed };

    let unit = Normal::new(0.0, 1.0).expect("valid std");
    let noise = Normal::new(0.0, shape.word_noise).expect("valid std");
    let scale = 1.0 / libm::sqrt(shape.dim as f64);
    let mut table = EmbeddingTable::with_capacity(shape.dim, shape.clusters * (shape.seen_words + shape.held_out_words));
    for c in 0..shape.clusters {
        let centroid: Vec<f64> = (0..shape.dim).map(|_| unit.sample(&mut rng)).collect();
        for i in 0..shape.seen_words + shape.held_out_words {
            let v: Vec<f64> =
                centroid.iter().map(|m| (m + noise.sample(&mut rng)) * scale * 3.0).collect();
            table.insert(&world.word(c, i), &v)?;
        }
    }

    let mut known = BTreeSet::new();
    let mut train = Vec::with_capacity(shape.train);
    let mut clusters = Vec::with_capacity(shape.train);
    while train.len() < shape.train {
        let (t, hc, tc) = world.true_triple(false, &mut rng);
        if known.insert(t.clone()) {
            train.push(t);
            clusters.push((hc, tc));
        }
    }

    let eval_set = |rng: &mut rng::Rng, known: &mut BTreeSet<Triple>| {
        let mut out = Vec::with_capacity(shape.eval);
        let mut origins = Vec::with_capacity(shape.eval);
        while out.len() < shape.eval {
            let reworded = out.len() % 2 == 0;
            let t = if reworded {
                let i = rng.random_range(0..train.len());
                let src: &Triple = &train[i];
                let (hc, tc) = clusters[i];
                let on_head = rng.random_bool(0.5);
                let (p, c) = if on_head { (&src.head, hc) } else { (&src.tail, tc) };
                let mut words: Vec<String> = p.words().to_vec();
                let slot = rng.random_range(0..words.len());
                words[slot] = world.seen_word(c, rng);
                let refs: Vec<&str> = words.iter().map(String::as_str).collect();
                let np = phrase(&refs);
                let mut t = src.clone();
                if on_head {
                    t.head = np;
                } else {
                    t.tail = np;
                }
                t
            } else {
                world.true_triple(true, rng).0
            };
            if known.insert(t.clone()) {
                out.push(LabeledTriple::positive(t, None));
                origins.push(if reworded { Origin::Reworded } else { Origin::HeldOut });
            }
        }
        (out, origins)
    };
    let (dev, _) = eval_set(&mut rng, &mut known);
    let (test, test_origins) = eval_set(&mut rng, &mut known);

    let mut split = DatasetSplit {
        train: train.into_iter().map(|t| LabeledTriple::positive(t, None)).collect(),
        dev,
        test,
        rule: SplitRule::Random,
        seed,
    };
    split.attach_eval_negatives(1, seed ^ 0x5eed)?;
    Ok(NoveltyBenchmark { table, schema, split, test_origins })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_kb_shape() {
        let kb = random_kb(200, 8, 50, 16, true, 1);
        assert_eq!(kb.positives.len(), 200);
        assert_eq!(kb.schema.len(), 8);
        assert_eq!(kb.table.len(), 50);
        let distinct: BTreeSet<_> = kb.positives.iter().collect();
        assert_eq!(distinct.len(), 200);
    }

    #[test]
    fn benchmark_is_deterministic_and_disjoint() {
        let shape = BenchmarkShape { train: 100, eval: 20, ..BenchmarkShape::default() };
        let a = novelty_benchmark(shape, 3).unwrap();
        let b = novelty_benchmark(shape, 3).unwrap();
        assert_eq!(a.split, b.split);
        let train: BTreeSet<_> = a.split.train.iter().map(|t| &t.triple).collect();
        for t in a.split.dev.iter().chain(&a.split.test) {
            assert!(!train.contains(&t.triple));
        }
        assert_eq!(a.test_origins.len(), 20);
        assert!(a.split.test.iter().any(|t| !t.label.is_positive()));
    }
}
