#![allow(dead_code)]

use kbnovelty_core::corpus::{Label, Phrase, RelationSchema, Triple};
use kbnovelty_core::embeddings::EmbeddingTable;
use kbnovelty_core::rng;
use kbnovelty_core::scorers::{Example, Model, ModelConfig, ModelKind};
use rand::Rng;

pub fn table(vocab: usize, dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = rng::seeded(seed);
    let mut t = EmbeddingTable::with_capacity(dim, vocab);
    for i in 0..vocab {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        t.insert(&format!("w{i}"), &v).unwrap();
    }
    t
}

pub fn schema(n: usize) -> RelationSchema {
    RelationSchema::new((0..n).map(|i| format!("R{i}"))).unwrap()
}

pub fn random_phrase(vocab: usize, rng: &mut rng::Rng) -> Phrase {
    let n = rng.random_range(1..=3);
    Phrase::from_words((0..n).map(|_| format!("w{}", rng.random_range(0..vocab)))).unwrap()
}

pub fn random_triple(vocab: usize, relations: usize, rng: &mut rng::Rng) -> Triple {
    Triple::new(
        format!("R{}", rng.random_range(0..relations)),
        random_phrase(vocab, rng),
        random_phrase(vocab, rng),
    )
}

/// A model whose every parameter, including α, β, γ and the biases, is
/// drawn uniformly from ±`spread`.
pub fn random_model(config: ModelConfig, vocab: usize, d1: usize, relations: usize, seed: u64) -> Model {
    let mut model = Model::init(config, &table(vocab, d1, seed), &schema(relations), seed).unwrap();
    let mut rng = rng::substream(seed, 99);
    for t in model.params.tensors_mut() {
        for v in t.data.iter_mut() {
            *v = rng.random_range(-0.8..0.8);
        }
    }
    model
}

pub fn random_batch(model: &Model, vocab: usize, relations: usize, n: usize, rng: &mut rng::Rng) -> Vec<Example> {
    (0..n)
        .map(|_| Example {
            triple: model.encode(&random_triple(vocab, relations, rng)).unwrap(),
            label: if rng.random_bool(0.5) { Label::Positive } else { Label::Negative },
        })
        .collect()
}

pub fn small_config(kind: ModelKind) -> ModelConfig {
    ModelConfig::new(kind).with_d2(5)
}

/// Largest violation of `|analytic - numeric| <= rel * max(|analytic|, |numeric|) + floor`
/// over all parameters, using central differences with `step`.
/// Returns (worst excess ratio, name of worst tensor).
pub fn gradient_check(model: &Model, batch: &[Example], l2: f64, step: f64, rel: f64, floor: f64) -> (f64, String) {
    let analytic = model.gradients(batch, l2);
    let analytic: Vec<(String, Vec<f64>)> =
        analytic.tensors().into_iter().map(|t| (t.name, t.data.to_vec())).collect();
    let mut probe = model.clone();
    let mut worst = (0.0_f64, String::new());
    for (ti, (name, grad)) in analytic.iter().enumerate() {
        for (j, &a) in grad.iter().enumerate() {
            let orig = probe.params.tensors_mut()[ti].data[j];
            probe.params.tensors_mut()[ti].data[j] = orig + step;
            let up = probe.batch_loss(batch, l2);
            probe.params.tensors_mut()[ti].data[j] = orig - step;
            let down = probe.batch_loss(batch, l2);
            probe.params.tensors_mut()[ti].data[j] = orig;
            let numeric = (up - down) / (2.0 * step);
            let allowed = rel * a.abs().max(numeric.abs()) + floor;
            let ratio = (a - numeric).abs() / allowed;
            if ratio > worst.0 {
                worst = (ratio, format!("{name}[{j}] analytic={a:e} numeric={numeric:e}"));
            }
        }
    }
    worst
}
