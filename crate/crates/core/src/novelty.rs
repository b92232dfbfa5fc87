//! Embedding-distance novelty of triples with respect to a training set.
//!
//! The distance between two triples ignores the relation:
//!
//! ```text
//! d(a, b) = ‖head(a) − head(b)‖₂ + ‖tail(a) − tail(b)‖₂
//! ```
//!
//! where `head` and `tail` are averages of the frozen pretrained word
//! vectors. The distance of a triple to a training set is the distance to its
//! nearest training triple; quantiles of those distances define the
//! near/mid/far buckets.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::corpus::Triple;
use crate::embeddings::EmbeddingTable;
use crate::linalg;
use crate::{Error, Result};

/// Averaged head and tail vectors of one triple.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleRep {
    pub head: Vec<f64>,
    pub tail: Vec<f64>,
}

impl TripleRep {
    pub fn new(table: &EmbeddingTable, triple: &Triple) -> Result<Self> {
        let head = table.phrase_average(&triple.head);
        if head.is_oov() {
            return Err(Error::Unscorable("head"));
        }
        let tail = table.phrase_average(&triple.tail);
        if tail.is_oov() {
            return Err(Error::Unscorable("tail"));
        }
        Ok(Self { head: head.vector, tail: tail.vector })
    }

    pub fn distance(&self, other: &TripleRep) -> f64 {
        rep_distance(&self.head, &self.tail, &other.head, &other.tail)
    }
}

fn rep_distance(h1: &[f64], t1: &[f64], h2: &[f64], t2: &[f64]) -> f64 {
    linalg::euclidean(h1, h2) + linalg::euclidean(t1, t2)
}

/// Novelty distance between two triples under `table`.
pub fn triple_distance(a: &Triple, b: &Triple, table: &EmbeddingTable) -> Result<f64> {
    Ok(TripleRep::new(table, a)?.distance(&TripleRep::new(table, b)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<'a> {
    pub triple: &'a Triple,
    pub distance: f64,
    /// Position of the neighbour in the index.
    pub position: usize,
}

/// Exact nearest-neighbour index over the training triples.
#[derive(Debug, Clone)]
pub struct NoveltyIndex<'t> {
    table: &'t EmbeddingTable,
    triples: Vec<Triple>,
    heads: Vec<f64>,
    tails: Vec<f64>,
    unscorable: usize,
}

impl<'t> NoveltyIndex<'t> {
    /// Indexes every scorable triple; all-OOV triples are dropped and
    /// counted.
    pub fn build<'a>(table: &'t EmbeddingTable, train: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut index = Self {
            table,
            triples: Vec::new(),
            heads: Vec::new(),
            tails: Vec::new(),
            unscorable: 0,
        };
        for t in train {
            match TripleRep::new(table, t) {
                Ok(rep) => {
                    index.heads.extend_from_slice(&rep.head);
                    index.tails.extend_from_slice(&rep.tail);
                    index.triples.push(t.clone());
                }
                Err(_) => index.unscorable += 1,
            }
        }
        index
    }

    pub fn table(&self) -> &'t EmbeddingTable {
        self.table
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn unscorable(&self) -> usize {
        self.unscorable
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    fn rep_at(&self, i: usize) -> (&[f64], &[f64]) {
        let d = self.table.dim();
        (&self.heads[i * d..(i + 1) * d], &self.tails[i * d..(i + 1) * d])
    }

    /// Distances from `query` to every indexed triple, in index order.
    pub fn distances(&self, query: &TripleRep) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (h, t) = self.rep_at(i);
                rep_distance(&query.head, &query.tail, h, t)
            })
            .collect()
    }

    /// The `k` closest training triples, ascending by distance, ties broken
    /// by triple order and then by position. Exact full scan.
    pub fn k_nearest(&self, query: &Triple, k: usize) -> Result<Vec<Neighbor<'_>>> {
        let rep = TripleRep::new(self.table, query)?;
        self.k_nearest_rep(&rep, k)
    }

    pub fn k_nearest_rep(&self, rep: &TripleRep, k: usize) -> Result<Vec<Neighbor<'_>>> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.is_empty() {
            return Err(Error::EmptyInput("novelty index"));
        }
        let dist = self.distances(rep);
        let cmp = |&a: &usize, &b: &usize| {
            dist[a]
                .total_cmp(&dist[b])
                .then_with(|| self.triples[a].cmp(&self.triples[b]))
                .then(a.cmp(&b))
        };
        let mut order: Vec<usize> = (0..self.len()).collect();
        let k = k.min(order.len());
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable_by(cmp);
        Ok(order
            .into_iter()
            .map(|i| Neighbor { triple: &self.triples[i], distance: dist[i], position: i })
            .collect())
    }

    /// Distance to, and identity of, the closest training triple.
    pub fn min_distance_to_train(&self, query: &Triple) -> Result<(f64, &Triple)> {
        let nn = self.k_nearest(query, 1)?;
        Ok((nn[0].distance, nn[0].triple))
    }

    /// Distance only; skips the tie-break bookkeeping of
    /// [`NoveltyIndex::k_nearest`].
    pub fn min_distance_rep(&self, rep: &TripleRep) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyInput("novelty index"));
        }
        Ok((0..self.len())
            .map(|i| {
                let (h, t) = self.rep_at(i);
                rep_distance(&rep.head, &rep.tail, h, t)
            })
            .fold(f64::INFINITY, f64::min))
    }

    pub fn min_distance(&self, query: &Triple) -> Result<f64> {
        self.min_distance_rep(&TripleRep::new(self.table, query)?)
    }
}

/// Where a pair of bucket thresholds came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Published 33%/66% quantiles for a test set built from the most confident triples.
    PaperConfidence,
    /// Same, on a random split.
    PaperRandom,
    /// Same, on candidates mined from free text.
    PaperWikipedia,
    Computed,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::PaperConfidence => "paper_confidence",
            Provenance::PaperRandom => "paper_random",
            Provenance::PaperWikipedia => "paper_wikipedia",
            Provenance::Computed => "computed",
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_confidence" => Ok(Provenance::PaperConfidence),
            "paper_random" => Ok(Provenance::PaperRandom),
            "paper_wikipedia" => Ok(Provenance::PaperWikipedia),
            "computed" => Ok(Provenance::Computed),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown thresholds `{other}` (paper_confidence, paper_random, paper_wikipedia, computed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketThresholds {
    pub q33: f64,
    pub q66: f64,
    pub provenance: Provenance,
}

impl BucketThresholds {
    pub const PAPER_CONFIDENCE: BucketThresholds =
        BucketThresholds { q33: 1.93, q66: 2.80, provenance: Provenance::PaperConfidence };
    pub const PAPER_RANDOM: BucketThresholds =
        BucketThresholds { q33: 2.1, q66: 2.95, provenance: Provenance::PaperRandom };
    pub const PAPER_WIKIPEDIA: BucketThresholds =
        BucketThresholds { q33: 3.21, q66: 4.22, provenance: Provenance::PaperWikipedia };

    pub fn new(q33: f64, q66: f64, provenance: Provenance) -> Result<Self> {
        if !(q33.is_finite() && q66.is_finite() && 0.0 <= q33 && q33 <= q66) {
            return Err(Error::InvalidConfig(alloc::format!(
                "bucket thresholds must satisfy 0 <= q33 <= q66 (got {q33}, {q66})"
            )));
        }
        Ok(Self { q33, q66, provenance })
    }

    /// A published preset; `None` for [`Provenance::Computed`].
    pub fn preset(provenance: Provenance) -> Option<Self> {
        match provenance {
            Provenance::PaperConfidence => Some(Self::PAPER_CONFIDENCE),
            Provenance::PaperRandom => Some(Self::PAPER_RANDOM),
            Provenance::PaperWikipedia => Some(Self::PAPER_WIKIPEDIA),
            Provenance::Computed => None,
        }
    }

    pub fn bucket(&self, distance: f64) -> Bucket {
        bucket_assign(distance, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bucket {
    Near,
    Mid,
    Far,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::Near, Bucket::Mid, Bucket::Far];

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Near => "near",
            Bucket::Mid => "mid",
            Bucket::Far => "far",
        }
    }

    /// Row label in the quantile notation of the published tables.
    pub fn label(self) -> &'static str {
        match self {
            Bucket::Near => "<=33%",
            Bucket::Mid => "(33%,66%]",
            Bucket::Far => ">66%",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Bucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Bucket::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown bucket `{s}`")))
    }
}

/// `near` iff `d <= q33`, `mid` iff `q33 < d <= q66`, `far` otherwise.
pub fn bucket_assign(distance: f64, thresholds: &BucketThresholds) -> Bucket {
    if distance <= thresholds.q33 {
        Bucket::Near
    } else if distance <= thresholds.q66 {
        Bucket::Mid
    } else {
        Bucket::Far
    }
}

/// Quantile of already sorted data by linear interpolation between the
/// closest ranks: position `(n − 1)·q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// 33% and 66% quantiles of `distances`.
pub fn compute_quantile_thresholds(distances: &[f64]) -> Result<BucketThresholds> {
    compute_quantiles(distances, [0.33, 0.66])
}

pub fn compute_quantiles(distances: &[f64], quantiles: [f64; 2]) -> Result<BucketThresholds> {
    if distances.is_empty() {
        return Err(Error::EmptyInput("distances"));
    }
    if distances.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidConfig("non-finite distance".into()));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    BucketThresholds::new(
        quantile_sorted(&sorted, quantiles[0]),
        quantile_sorted(&sorted, quantiles[1]),
        Provenance::Computed,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// `(K, mean distance to train of the top K scorable items)`.
    pub points: Vec<(usize, f64)>,
    /// Unscorable items passed over while collecting the top items.
    pub skipped: usize,
}

/// Mean distance-to-train of the top K items of a ranked list, for each K.
///
/// Unscorable items are skipped, so "top K" means the first K scorable
/// items.
pub fn topk_mean_distance_curve(
    ranked: &[Triple],
    index: &NoveltyIndex<'_>,
    ks: &[usize],
) -> Result<Curve> {
    if ranked.is_empty() {
        return Err(Error::EmptyInput("ranked list"));
    }
    let Some(&max_k) = ks.iter().max() else {
        return Err(Error::EmptyInput("K values"));
    };
    if ks.contains(&0) {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    let mut prefix = Vec::with_capacity(max_k + 1);
    prefix.push(0.0);
    let mut skipped = 0;
    for t in ranked {
        if prefix.len() > max_k {
            break;
        }
        match index.min_distance(t) {
            Ok(d) => {
                let last = *prefix.last().expect("non-empty");
                prefix.push(last + d);
            }
            Err(Error::Unscorable(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let available = prefix.len() - 1;
    if max_k > available {
        return Err(Error::InvalidConfig(alloc::format!(
            "K = {max_k} exceeds the {available} scorable items"
        )));
    }
    let points = ks.iter().map(|&k| (k, prefix[k] / k as f64)).collect();
    Ok(Curve { points, skipped })
}

/// Sample Pearson correlation coefficient (two-pass).
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::EmptyInput("pearson needs at least 2 points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput("pearson"));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Orders neighbours as [`NoveltyIndex::k_nearest`] does.
pub fn neighbor_order(a: &Neighbor<'_>, b: &Neighbor<'_>) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.triple.cmp(b.triple))
        .then(a.position.cmp(&b.position))
}

/// Renders a neighbour list the way annotation sheets show it:
/// `(head, Rel, tail) 0.1234` joined by `; `.
pub fn format_neighbors(neighbors: &[Neighbor<'_>]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (i, n) in neighbors.iter().enumerate() {
        if i > 0 {
            s.push_str("; ");
        }
        let _ = write!(s, "{} {:.4}", n.triple, n.distance);
    }
    s
}
