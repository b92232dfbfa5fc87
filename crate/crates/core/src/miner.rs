//! Candidate reranking, per-bucket top lists, annotation sheets and
//! annotator agreement.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::Triple;
use crate::novelty::{self, Bucket, BucketThresholds, NoveltyIndex, TripleRep};
use crate::scorers::{predict_prob, Model};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub triple: Triple,
    pub score: f64,
    pub prob: f64,
    pub novelty_distance: f64,
    pub bucket: Bucket,
    /// 1-based line of the candidate in its input file.
    pub source_line: usize,
}

/// Ranking order: score descending, then input order.
pub fn rank_order(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    b.score.total_cmp(&a.score).then(a.source_line.cmp(&b.source_line))
}

/// Why a candidate was left out of the ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub source_line: usize,
    pub error: Error,
}

/// Scores one candidate and places it in a novelty bucket.
pub fn score_candidate(
    triple: Triple,
    source_line: usize,
    model: &Model,
    index: &NoveltyIndex<'_>,
    thresholds: &BucketThresholds,
) -> core::result::Result<RankedCandidate, Rejected> {
    let reject = |error| Rejected { source_line, error };
    let score = model.score(&triple).map_err(reject)?;
    let rep = TripleRep::new(index.table(), &triple).map_err(reject)?;
    let distance = index.min_distance_rep(&rep).map_err(reject)?;
    Ok(RankedCandidate {
        prob: predict_prob(score),
        bucket: thresholds.bucket(distance),
        triple,
        score,
        novelty_distance: distance,
        source_line,
    })
}

#[derive(Debug, Clone, Default)]
pub struct Reranked {
    pub ranked: Vec<RankedCandidate>,
    pub rejected: Vec<Rejected>,
}

/// Scores every candidate once and sorts by score (stable). Unscorable
/// candidates are reported in `rejected`, never ranked.
pub fn rerank(
    candidates: impl IntoIterator<Item = (usize, Triple)>,
    model: &Model,
    index: &NoveltyIndex<'_>,
    thresholds: &BucketThresholds,
) -> Reranked {
    let mut out = Reranked::default();
    for (line, triple) in candidates {
        match score_candidate(triple, line, model, index, thresholds) {
            Ok(c) => out.ranked.push(c),
            Err(r) => out.rejected.push(r),
        }
    }
    out.ranked.sort_by(rank_order);
    out
}

/// Heap entry ordered so that the worst retained candidate is on top.
#[derive(Debug, Clone)]
struct Worst<T: Ranked>(T);

/// Anything that can take part in a score ranking.
pub trait Ranked {
    fn rank_score(&self) -> f64;
    fn rank_line(&self) -> usize;
}

impl Ranked for RankedCandidate {
    fn rank_score(&self) -> f64 {
        self.score
    }

    fn rank_line(&self) -> usize {
        self.source_line
    }
}

fn ranked_cmp<T: Ranked>(a: &T, b: &T) -> Ordering {
    b.rank_score().total_cmp(&a.rank_score()).then(a.rank_line().cmp(&b.rank_line()))
}

impl<T: Ranked> PartialEq for Worst<T> {
    fn eq(&self, other: &Self) -> bool {
        ranked_cmp(&self.0, &other.0) == Ordering::Equal
    }
}

impl<T: Ranked> Eq for Worst<T> {}

impl<T: Ranked> PartialOrd for Worst<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Ranked> Ord for Worst<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on "later in the ranking"
        ranked_cmp(&self.0, &other.0)
    }
}

/// Bounded collector of the best `n` items of a stream in ranking order.
/// Memory stays at `n` items whatever the stream length.
#[derive(Debug, Clone)]
pub struct TopN<T: Ranked> {
    cap: usize,
    heap: BinaryHeap<Worst<T>>,
    seen: usize,
}

impl<T: Ranked> TopN<T> {
    pub fn new(cap: usize) -> Self {
        Self { cap, heap: BinaryHeap::with_capacity(cap.saturating_add(1).min(1 << 20)), seen: 0 }
    }

    pub fn push(&mut self, item: T) {
        self.seen += 1;
        if self.cap == 0 {
            return;
        }
        if self.heap.len() < self.cap {
            self.heap.push(Worst(item));
        } else if let Some(worst) = self.heap.peek() {
            if ranked_cmp(&item, &worst.0) == Ordering::Less {
                self.heap.pop();
                self.heap.push(Worst(item));
            }
        }
    }

    /// Items pushed so far, retained or not.
    pub fn seen(&self) -> usize {
        self.seen
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Retained items, best first.
    pub fn into_sorted(self) -> Vec<T> {
        let mut v: Vec<T> = self.heap.into_iter().map(|w| w.0).collect();
        v.sort_by(ranked_cmp);
        v
    }
}

/// Per bucket, the `k` highest-scoring candidates in ranking order.
///
/// Buckets with fewer than `k` members yield shorter lists (with a
/// warning); buckets with no members are absent from the map.
pub fn bucketed_topk(ranked: &[RankedCandidate], k: usize) -> BTreeMap<Bucket, Vec<RankedCandidate>> {
    let mut tops: BTreeMap<Bucket, TopN<RankedCandidate>> = BTreeMap::new();
    for c in ranked {
        tops.entry(c.bucket).or_insert_with(|| TopN::new(k)).push(c.clone());
    }
    let out: BTreeMap<Bucket, Vec<RankedCandidate>> =
        tops.into_iter().map(|(b, t)| (b, t.into_sorted())).collect();
    for b in Bucket::ALL {
        let n = out.get(&b).map_or(0, Vec::len);
        if n < k {
            log::warn!("bucket {b} has only {n} of the requested {k} candidates");
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub triple: Triple,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SheetRow {
    pub bucket: Bucket,
    /// 1-based rank within the bucket.
    pub rank: usize,
    pub candidate: RankedCandidate,
    /// Closest training triples, ascending by distance.
    pub evidence: Vec<Evidence>,
}

/// Rows for human scoring; the score cell itself lives in the exported
/// file.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSheet {
    pub rows: Vec<SheetRow>,
    pub scale_min: i32,
    pub scale_max: i32,
}

impl AnnotationSheet {
    pub fn build(
        topk: &BTreeMap<Bucket, Vec<RankedCandidate>>,
        index: &NoveltyIndex<'_>,
        k_neighbors: usize,
        scale: (i32, i32),
    ) -> Result<Self> {
        if scale.0 >= scale.1 {
            return Err(Error::InvalidConfig(alloc::format!(
                "annotation scale {}..{} is empty",
                scale.0,
                scale.1
            )));
        }
        let mut rows = Vec::new();
        for (&bucket, list) in topk {
            for (i, c) in list.iter().enumerate() {
                let evidence = index
                    .k_nearest(&c.triple, k_neighbors)?
                    .into_iter()
                    .map(|n| Evidence { triple: n.triple.clone(), distance: n.distance })
                    .collect();
                rows.push(SheetRow { bucket, rank: i + 1, candidate: c.clone(), evidence });
            }
        }
        Ok(Self { rows, scale_min: scale.0, scale_max: scale.1 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub pearson: f64,
    pub cohen_kappa: f64,
    /// Mean over items of the two annotators' average score.
    pub mean_of_averages: f64,
}

/// Cohen's kappa over exact category agreement.
pub fn cohen_kappa(a: &[i32], b: &[i32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("kappa"));
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let categories: BTreeSet<i32> = a.iter().chain(b).copied().collect();
    let count = |xs: &[i32], c: i32| xs.iter().filter(|&&x| x == c).count() as f64 / n;
    let expected: f64 = categories.iter().map(|&c| count(a, c) * count(b, c)).sum();
    if expected >= 1.0 {
        return Err(Error::DegenerateKappa);
    }
    Ok((observed - expected) / (1.0 - expected))
}

pub fn agreement_stats(a: &[i32], b: &[i32]) -> Result<Agreement> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::EmptyInput("agreement needs at least 2 items"));
    }
    let xs: Vec<f64> = a.iter().map(|&v| f64::from(v)).collect();
    let ys: Vec<f64> = b.iter().map(|&v| f64::from(v)).collect();
    let mean_of_averages =
        xs.iter().zip(&ys).map(|(x, y)| (x + y) / 2.0).sum::<f64>() / xs.len() as f64;
    Ok(Agreement {
        pearson: novelty::pearson(&xs, &ys)?,
        cohen_kappa: cohen_kappa(a, b)?,
        mean_of_averages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cand(score: f64, line: usize, bucket: Bucket) -> RankedCandidate {
        RankedCandidate {
            triple: Triple::parse("IsA", "x", "y").unwrap(),
            score,
            prob: predict_prob(score),
            novelty_distance: 0.0,
            bucket,
            source_line: line,
        }
    }

    #[test]
    fn topn_keeps_best_in_order() {
        let mut top = TopN::new(3);
        for (i, s) in [0.5, 2.0, -1.0, 2.0, 1.0, 0.7].into_iter().enumerate() {
            top.push(cand(s, i + 1, Bucket::Near));
        }
        let kept: Vec<(f64, usize)> =
            top.into_sorted().into_iter().map(|c| (c.score, c.source_line)).collect();
        assert_eq!(kept, vec![(2.0, 2), (2.0, 4), (1.0, 5)]);
    }

    #[test]
    fn topk_per_bucket() {
        let ranked = vec![
            cand(3.0, 1, Bucket::Near),
            cand(2.0, 2, Bucket::Far),
            cand(5.0, 3, Bucket::Far),
            cand(1.0, 4, Bucket::Mid),
        ];
        let top = bucketed_topk(&ranked, 1);
        assert_eq!(top[&Bucket::Near][0].source_line, 1);
        assert_eq!(top[&Bucket::Far][0].source_line, 3);
        assert_eq!(top[&Bucket::Mid][0].source_line, 4);
        let two = bucketed_topk(&ranked, 2);
        assert_eq!(two[&Bucket::Near].len(), 1);
        assert_eq!(two[&Bucket::Far].len(), 2);
    }

    #[test]
    fn kappa_examples() {
        let a = [1, 2, 1, 2];
        let b = [2, 1, 2, 1];
        assert_eq!(cohen_kappa(&a, &b), Ok(-1.0));
        assert_eq!(cohen_kappa(&a, &a), Ok(1.0));
        assert_eq!(cohen_kappa(&[3, 3], &[3, 3]), Err(Error::DegenerateKappa));
    }

    #[test]
    fn agreement_examples() {
        let s = agreement_stats(&[1, 3, 4, 2], &[1, 3, 4, 2]).unwrap();
        assert_eq!((s.pearson, s.cohen_kappa), (1.0, 1.0));
        let m = agreement_stats(&[1, 3], &[3, 1]).unwrap();
        assert_eq!(m.mean_of_averages, 2.0);
        assert!(agreement_stats(&[1, 1], &[2, 3]).is_err());
    }
}
