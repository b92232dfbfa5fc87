mod common;

use common::*;
use kbnovelty_core::corpus::Label;
use kbnovelty_core::linalg::Matrix;
use kbnovelty_core::rng;
use kbnovelty_core::scorers::dnn::Activation;
use kbnovelty_core::scorers::{Body, Example, ModelConfig, ModelKind};

const STEP: f64 = 1e-4;
const REL: f64 = 1e-4;
const FLOOR: f64 = 1e-9;

fn check_kind(config: ModelConfig, batches: u64) {
    for b in 0..batches {
        let model = random_model(config, 12, 8, 3, 1000 + b);
        let mut rng = rng::substream(b, 7);
        let batch = random_batch(&model, 12, 3, 6, &mut rng);
        let (ratio, at) = gradient_check(&model, &batch, 1e-3, STEP, REL, FLOOR);
        assert!(ratio <= 1.0, "{:?} batch {b}: {at} (ratio {ratio})", config.kind);
    }
}

#[test]
fn finite_differences_match_every_model() {
    for kind in ModelKind::ALL {
        check_kind(small_config(kind), 5);
    }
}

#[test]
fn finite_differences_match_tanh_dnn() {
    let mut cfg = small_config(ModelKind::Dnn);
    cfg.activation = Activation::Tanh;
    check_kind(cfg, 5);
}

#[test]
fn finite_differences_match_dnn_without_relation_path() {
    let mut cfg = small_config(ModelKind::Dnn);
    cfg.dnn_relation = kbnovelty_core::scorers::dnn::DnnRelation::None;
    check_kind(cfg, 3);
}

#[test]
fn gradient_touches_only_batch_words() {
    for kind in ModelKind::ALL {
        let model = random_model(small_config(kind), 12, 8, 3, 5);
        let mut rng = rng::seeded(3);
        let batch = random_batch(&model, 12, 3, 2, &mut rng);
        let grads = model.gradients(&batch, 0.0);
        let used: std::collections::BTreeSet<usize> = batch
            .iter()
            .flat_map(|e| e.triple.head.iter().chain(&e.triple.tail).copied())
            .collect();
        for w in 0..12 {
            let row = grads.words.row(w);
            if !used.contains(&w) {
                assert!(row.iter().all(|&g| g == 0.0), "{kind:?}: word {w} untouched but has gradient");
            }
        }
        if kind != ModelKind::Bilinear {
            let rels: std::collections::BTreeSet<usize> = batch.iter().map(|e| e.triple.relation).collect();
            for r in 0..3 {
                if !rels.contains(&r) {
                    assert!(grads.relations.row(r).iter().all(|&g| g == 0.0));
                }
            }
        }
    }
}

#[test]
fn balanced_zero_scores_are_stationary_for_biases() {
    // With all scores at 0 the sigmoid is 1/2, so a balanced batch of the
    // same triple cancels every data gradient.
    for kind in ModelKind::ALL {
        let mut model = random_model(small_config(kind), 6, 4, 2, 9);
        for t in model.params.tensors_mut() {
            if t.name != "words" && t.name != "relations" {
                t.data.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let mut rng = rng::seeded(1);
        let ex = random_batch(&model, 6, 2, 1, &mut rng).remove(0);
        let batch = vec![
            Example { triple: ex.triple.clone(), label: Label::Positive },
            Example { triple: ex.triple, label: Label::Negative },
        ];
        let g = model.gradients(&batch, 0.0);
        for t in g.tensors() {
            assert!(t.data.iter().all(|v| v.abs() < 1e-15), "{kind:?} {}", t.name);
        }
    }
}

#[test]
fn factorized_without_side_terms_is_bilinear() {
    let d1 = 6;
    for seed in 0..20 {
        let mut f = random_model(small_config(ModelKind::Factorized), 10, d1, 3, seed);
        let (a, b) = match &mut f.params.body {
            Body::Factorized(p) => {
                p.beta = 0.0;
                p.gamma = 0.0;
                p.b1.iter_mut().for_each(|v| *v = 0.0);
                p.b2.iter_mut().for_each(|v| *v = 0.0);
                let alpha = p.alpha;
                p.a.as_mut_slice().iter_mut().for_each(|v| *v *= alpha);
                p.alpha = 1.0;
                (p.a.clone(), p.b.clone())
            }
            _ => unreachable!(),
        };
        let m: Matrix = a.transpose().matmul(&b);
        let mut bl = random_model(small_config(ModelKind::Bilinear), 10, d1, 3, seed);
        bl.params.words = f.params.words.clone();
        if let Body::Bilinear(p) = &mut bl.params.body {
            p.m = vec![m.clone(); 3];
        }
        let mut rng = rng::seeded(seed);
        for _ in 0..10 {
            let t = random_triple(10, 3, &mut rng);
            let (x, y) = (f.score(&t).unwrap(), bl.score(&t).unwrap());
            assert!((x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-12), "{x} vs {y}");
        }
    }
}
