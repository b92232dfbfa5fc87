mod common;

use std::collections::BTreeSet;

use common::*;
use kbnovelty_core::corpus::{
    make_split, sample_negatives, Component, LabeledTriple, Phrase, SplitRule, SplitSizes, Triple,
};
use kbnovelty_core::miner::{bucketed_topk, cohen_kappa, RankedCandidate, TopN};
use kbnovelty_core::novelty::{
    bucket_assign, compute_quantile_thresholds, pearson, triple_distance, Bucket, BucketThresholds,
    NoveltyIndex, Provenance,
};
use kbnovelty_core::optim::AdagradState;
use kbnovelty_core::rng;
use kbnovelty_core::scorers::{ModelKind, Params};
use kbnovelty_core::train::{evaluate_f1, select_threshold};
use proptest::prelude::*;
use rand::Rng;

fn triples_from(seed: u64, n: usize, vocab: usize, relations: usize) -> Vec<Triple> {
    let mut rng = rng::seeded(seed);
    (0..n).map(|_| random_triple(vocab, relations, &mut rng)).collect()
}

/// F1 as the exact fraction 2tp / (2tp + fp + fn).
fn f1_fraction(scores: &[f64], labels: &[bool], threshold: f64) -> (usize, usize) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    (2 * tp, 2 * tp + fp + fn_)
}

fn frac_cmp(a: (usize, usize), b: (usize, usize)) -> std::cmp::Ordering {
    // a.0/a.1 vs b.0/b.1, with 0/0 read as 0
    let (an, ad) = if a.1 == 0 { (0, 1) } else { a };
    let (bn, bd) = if b.1 == 0 { (0, 1) } else { b };
    (an * bd).cmp(&(bn * ad))
}

fn sweep_best(scores: &[f64], labels: &[bool]) -> (usize, usize) {
    let mut sorted: Vec<f64> = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut cands = vec![f64::NEG_INFINITY, f64::INFINITY];
    cands.extend(sorted.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    cands
        .into_iter()
        .map(|t| f1_fraction(scores, labels, t))
        .max_by(|a, b| frac_cmp(*a, *b))
        .unwrap()
}

fn two_class(labels: &[bool]) -> bool {
    labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn threshold_matches_exhaustive_sweep(
        items in prop::collection::vec((0u8..20, any::<bool>()), 2..60)
    ) {
        // coarse scores force many ties
        let scores: Vec<f64> = items.iter().map(|(s, _)| f64::from(*s) / 20.0).collect();
        let labels: Vec<bool> = items.iter().map(|(_, l)| *l).collect();
        prop_assume!(two_class(&labels));
        let choice = select_threshold(&scores, &labels).unwrap();
        let best = sweep_best(&scores, &labels);
        let got = f1_fraction(&scores, &labels, choice.threshold);
        prop_assert_eq!(frac_cmp(got, best), std::cmp::Ordering::Equal);
        let exact = best.0 as f64 / best.1 as f64;
        prop_assert!((choice.f1 - exact).abs() <= 1e-15);
    }

    #[test]
    fn bucket_counts_partition_the_sample(
        ds in prop::collection::vec(0.0f64..6.0, 1..200),
        q in (0.0f64..6.0, 0.0f64..6.0),
        preset in 0usize..4,
    ) {
        let t = match preset {
            0 => BucketThresholds::PAPER_CONFIDENCE,
            1 => BucketThresholds::PAPER_RANDOM,
            2 => BucketThresholds::PAPER_WIKIPEDIA,
            _ => BucketThresholds::new(q.0.min(q.1), q.0.max(q.1), Provenance::Computed).unwrap(),
        };
        let mut counts = [0usize; 3];
        for &d in &ds {
            let b = bucket_assign(d, &t);
            counts[b as usize] += 1;
            match b {
                Bucket::Near => prop_assert!(d <= t.q33),
                Bucket::Mid => prop_assert!(d > t.q33 && d <= t.q66),
                Bucket::Far => prop_assert!(d > t.q66),
            }
        }
        prop_assert_eq!(counts.iter().sum::<usize>(), ds.len());
        prop_assert_eq!(bucket_assign(t.q33, &t), Bucket::Near);
    }

    #[test]
    fn computed_quantiles_are_ordered_and_in_range(ds in prop::collection::vec(0.0f64..10.0, 1..100)) {
        let t = compute_quantile_thresholds(&ds).unwrap();
        let lo = ds.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= t.q33 && t.q33 <= t.q66 && t.q66 <= hi);
        let near = ds.iter().filter(|&&d| d <= t.q33).count();
        // every item at or below the interpolation position is near
        let pos = ((ds.len() - 1) as f64 * 0.33).floor() as usize;
        prop_assert!(near > pos);
    }

    #[test]
    fn split_is_a_partition(n in 3usize..80, dev in 0usize..10, test in 0usize..10, seed in any::<u64>(), random in any::<bool>()) {
        prop_assume!(dev + test <= n);
        let mut rng = rng::seeded(seed);
        let items: Vec<LabeledTriple> = (0..n)
            .map(|_| LabeledTriple::positive(random_triple(6, 3, &mut rng), Some(rng.random_range(0.0..5.0))))
            .collect();
        let rule = if random { SplitRule::Random } else { SplitRule::Confidence };
        let unique: BTreeSet<&Triple> = items.iter().map(|t| &t.triple).collect();
        let res = make_split(&items, rule, SplitSizes { dev, test }, seed);
        if dev + test > unique.len() {
            prop_assert!(res.is_err());
            return Ok(());
        }
        let s = res.unwrap();
        prop_assert_eq!(s.dev.len(), dev);
        prop_assert_eq!(s.test.len(), test);
        let mut all: Vec<&Triple> = s.train.iter().chain(&s.dev).chain(&s.test).map(|t| &t.triple).collect();
        prop_assert_eq!(all.len(), unique.len());
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len(), unique.len());
        if !random {
            // every test item is at least as confident as every train item
            let min_test = s.test.iter().filter_map(|t| t.confidence()).fold(f64::INFINITY, f64::min);
            let max_rest = s.train.iter().filter_map(|t| t.confidence()).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(s.test.is_empty() || s.train.is_empty() || min_test >= max_rest);
        }
        let again = make_split(&items, rule, SplitSizes { dev, test }, seed).unwrap();
        prop_assert_eq!(again, s);
    }

    #[test]
    fn negatives_swap_exactly_one_component(seed in any::<u64>(), ratio in 1usize..4) {
        let pos = triples_from(seed, 30, 10, 4);
        let batch = sample_negatives(&pos, &pos, ratio, seed).unwrap();
        let known: BTreeSet<&Triple> = pos.iter().collect();
        let heads: BTreeSet<&Phrase> = pos.iter().map(|t| &t.head).collect();
        let tails: BTreeSet<&Phrase> = pos.iter().map(|t| &t.tail).collect();
        prop_assert_eq!(batch.negatives.len() + batch.skipped, pos.len() * ratio);
        for n in &batch.negatives {
            let src = &pos[n.source];
            prop_assert!(!known.contains(&n.triple));
            let diff = [src.head != n.triple.head, src.relation != n.triple.relation, src.tail != n.triple.tail];
            prop_assert_eq!(diff.iter().filter(|&&d| d).count(), 1);
            match n.component {
                Component::Head => prop_assert!(diff[0] && heads.contains(&n.triple.head)),
                Component::Relation => prop_assert!(diff[1]),
                Component::Tail => prop_assert!(diff[2] && tails.contains(&n.triple.tail)),
            }
        }
    }

    #[test]
    fn distance_is_a_pseudometric(seed in any::<u64>()) {
        let tab = table(15, 6, seed);
        let ts = triples_from(seed, 3, 15, 2);
        let d = |a: &Triple, b: &Triple| triple_distance(a, b, &tab).unwrap();
        prop_assert_eq!(d(&ts[0], &ts[1]), d(&ts[1], &ts[0]));
        prop_assert_eq!(d(&ts[0], &ts[0]), 0.0);
        prop_assert!(d(&ts[0], &ts[1]) >= 0.0);
        prop_assert!(d(&ts[0], &ts[2]) <= d(&ts[0], &ts[1]) + d(&ts[1], &ts[2]) + 1e-9);
        // the relation is ignored
        let mut r = ts[0].clone();
        r.relation = "R1".into();
        prop_assert_eq!(d(&ts[0], &r), 0.0);
    }

    #[test]
    fn knn_matches_full_scan(seed in any::<u64>(), k in 1usize..12) {
        let tab = table(8, 4, seed);
        let train = triples_from(seed, 60, 8, 2);
        let index = NoveltyIndex::build(&tab, &train);
        let q = triples_from(seed ^ 1, 1, 8, 2).remove(0);
        let got: Vec<(usize, f64)> = index.k_nearest(&q, k).unwrap().iter().map(|n| (n.position, n.distance)).collect();
        let mut oracle: Vec<(f64, &Triple, usize)> =
            train.iter().enumerate().map(|(i, t)| (triple_distance(&q, t, &tab).unwrap(), t, i)).collect();
        oracle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)).then(a.2.cmp(&b.2)));
        let want: Vec<(usize, f64)> = oracle.iter().take(k).map(|o| (o.2, o.0)).collect();
        prop_assert_eq!(got, want);
        prop_assert_eq!(index.min_distance(&q).unwrap(), oracle[0].0);
    }

    #[test]
    fn word_order_does_not_change_scores(seed in any::<u64>(), kind in 0usize..4) {
        let model = random_model(small_config(ModelKind::ALL[kind]), 10, 5, 3, seed);
        let t = triples_from(seed, 1, 10, 3).remove(0);
        let mut rev = t.clone();
        rev.head = Phrase::from_words(t.head.words().iter().rev()).unwrap();
        rev.tail = Phrase::from_words(t.tail.words().iter().rev()).unwrap();
        let (a, b) = (model.score(&t).unwrap(), model.score(&rev).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn prototypical_is_additive_in_head_and_tail(seed in any::<u64>()) {
        let model = random_model(small_config(ModelKind::Prototypical), 10, 5, 2, seed);
        let ts = triples_from(seed, 2, 10, 1);
        let swap = |h: &Triple, t: &Triple| Triple::new("R0", h.head.clone(), t.tail.clone());
        let s = |t: &Triple| model.score(t).unwrap();
        let lhs = s(&swap(&ts[0], &ts[0])) + s(&swap(&ts[1], &ts[1]));
        let rhs = s(&swap(&ts[0], &ts[1])) + s(&swap(&ts[1], &ts[0]));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn adagrad_accumulators_never_shrink(grads in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 1..10), lr in 1e-4f64..1.0) {
        let mut opt = AdagradState::with_sizes([4], 1e-8);
        let mut param = vec![0.0; 4];
        let mut prev = vec![0.0; 4];
        for g in &grads {
            let before = param.clone();
            opt.step_slice(0, &mut param, g, lr).unwrap();
            let acc = opt.accumulators()[0].clone();
            for j in 0..4 {
                prop_assert!(acc[j] >= prev[j]);
                prop_assert!((param[j] - before[j]).abs() <= lr * (1.0 + 1e-12));
                if g[j] != 0.0 {
                    prop_assert!((param[j] - before[j]).signum() == -g[j].signum());
                }
            }
            prev = acc;
        }
    }

    #[test]
    fn evaluate_f1_matches_recount(seed in any::<u64>(), threshold in 0.0f64..1.0) {
        let model = random_model(small_config(ModelKind::Factorized), 10, 5, 3, seed);
        let mut rng = rng::substream(seed, 3);
        let set: Vec<LabeledTriple> = (0..40)
            .map(|_| {
                let t = random_triple(10, 3, &mut rng);
                if rng.random_bool(0.5) { LabeledTriple::positive(t, None) } else { LabeledTriple::negative(t) }
            })
            .collect();
        let r = evaluate_f1(&model, threshold, &set);
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for item in &set {
            let p = 1.0 / (1.0 + (-model.score(&item.triple).unwrap()).exp());
            match (p >= threshold, item.label.is_positive()) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        prop_assert_eq!((r.tp, r.fp, r.tn, r.fn_), (tp, fp, tn, fn_));
    }

    #[test]
    fn pearson_matches_compensated_oracle(xs in prop::collection::vec(-100.0f64..100.0, 3..200), seed in any::<u64>()) {
        let mut rng = rng::seeded(seed);
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x + rng.random_range(-50.0..50.0)).collect();
        let got = pearson(&xs, &ys).unwrap();
        let want = compensated_pearson(&xs, &ys);
        prop_assert!((got - want).abs() <= 1e-12, "{} vs {}", got, want);
    }

    #[test]
    fn kappa_is_symmetric_and_bounded(a in prop::collection::vec(1i32..6, 5..50), seed in any::<u64>()) {
        let mut rng = rng::seeded(seed);
        let b: Vec<i32> = a.iter().map(|&x| if rng.random_bool(0.7) { x } else { rng.random_range(1..6) }).collect();
        if let (Ok(k1), Ok(k2)) = (cohen_kappa(&a, &b), cohen_kappa(&b, &a)) {
            prop_assert!((k1 - k2).abs() < 1e-12);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&k1));
        }
        if let Ok(k) = cohen_kappa(&a, &a) {
            prop_assert!((k - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn topn_matches_full_sort(scores in prop::collection::vec(0u8..30, 0..300), cap in 0usize..50) {
        let items: Vec<RankedCandidate> = scores.iter().enumerate().map(|(i, &s)| candidate(i + 1, f64::from(s), Bucket::ALL[i % 3])).collect();
        let mut top = TopN::new(cap);
        for c in items.iter().cloned() {
            top.push(c);
        }
        let mut sorted = items.clone();
        sorted.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.source_line.cmp(&b.source_line)));
        sorted.truncate(cap);
        prop_assert_eq!(top.into_sorted(), sorted.clone());

        let k = cap.max(1);
        let per = bucketed_topk(&items, k);
        for b in Bucket::ALL {
            let mut want: Vec<RankedCandidate> = items.iter().filter(|c| c.bucket == b).cloned().collect();
            want.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.source_line.cmp(&b.source_line)));
            want.truncate(k);
            prop_assert_eq!(per.get(&b).cloned().unwrap_or_default(), want);
        }
    }
}

fn candidate(line: usize, score: f64, bucket: Bucket) -> RankedCandidate {
    RankedCandidate {
        triple: Triple::parse("R0", &format!("h{line}"), "t").unwrap(),
        score,
        prob: 0.5,
        novelty_distance: 0.0,
        bucket,
        source_line: line,
    }
}

/// Neumaier-compensated sums of the centered moments.
fn compensated_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    fn ksum(it: impl Iterator<Item = f64>) -> f64 {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for v in it {
            let t = s + v;
            c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
            s = t;
        }
        s + c
    }
    let n = xs.len() as f64;
    let mx = ksum(xs.iter().copied()) / n;
    let my = ksum(ys.iter().copied()) / n;
    let sxy = ksum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = ksum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let syy = ksum(ys.iter().map(|y| (y - my) * (y - my)));
    sxy / (sxx * syy).sqrt()
}

#[test]
fn adagrad_step_over_all_params_skips_nothing() {
    let model = random_model(small_config(ModelKind::Dnn), 6, 4, 2, 1);
    let mut params: Params = model.params.clone();
    let grads = params.zeros_like();
    let mut opt = AdagradState::new(&params);
    opt.step(&mut params, &grads, 0.1).unwrap();
    assert_eq!(params, model.params);
}
