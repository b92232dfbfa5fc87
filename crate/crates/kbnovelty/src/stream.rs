//! Streaming candidate reranking.
//!
//! Candidates are read in chunks and scored in parallel; results are merged
//! back in input order, so the output never depends on the thread count.
//! With a cutoff only the retained items stay in memory.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use kbnovelty_core::corpus::Triple;
use kbnovelty_core::miner::{rank_order, score_candidate, RankedCandidate, Ranked, TopN};
use kbnovelty_core::novelty::{Bucket, BucketThresholds, NoveltyIndex, TripleRep};
use kbnovelty_core::scorers::{predict_prob, Model};
use rayon::prelude::*;

use crate::error::Result;
use crate::triples::CandidateReader;

/// How much of the ranking to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// Everything, fully materialized.
    All,
    /// The best `n` candidates of the global ranking.
    Top(usize),
    /// The best `k` candidates of each novelty bucket, taken from the
    /// global ranking.
    PerBucket(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RerankOptions {
    pub cutoff: Cutoff,
    /// Drop exact repeats of an earlier candidate line. Keeps a set of every
    /// distinct triple seen, so memory grows with the input.
    pub dedup: bool,
    pub chunk_size: usize,
}

impl Default for RerankOptions {
    fn default() -> Self {
        Self { cutoff: Cutoff::All, dedup: false, chunk_size: 4096 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RerankSummary {
    /// Candidate lines read.
    pub read: usize,
    pub scored: usize,
    /// Unscorable or unknown-relation candidates.
    pub rejected: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RerankOutput {
    Ranked(Vec<RankedCandidate>),
    Bucketed(BTreeMap<Bucket, Vec<RankedCandidate>>),
}

/// A scored candidate whose novelty has not been looked up yet.
struct Scored {
    triple: Triple,
    score: f64,
    line: usize,
}

impl Ranked for Scored {
    fn rank_score(&self) -> f64 {
        self.score
    }

    fn rank_line(&self) -> usize {
        self.line
    }
}

enum Sink {
    All(Vec<RankedCandidate>),
    Top(TopN<Scored>),
    PerBucket(usize, BTreeMap<Bucket, TopN<RankedCandidate>>),
}

pub fn rerank_stream<R: BufRead>(
    candidates: CandidateReader<R>,
    model: &Model,
    index: &NoveltyIndex<'_>,
    thresholds: &BucketThresholds,
    options: RerankOptions,
) -> Result<(RerankOutput, RerankSummary)> {
    let mut summary = RerankSummary::default();
    let mut seen = BTreeSet::new();
    let mut sink = match options.cutoff {
        Cutoff::All => Sink::All(Vec::new()),
        Cutoff::Top(n) => Sink::Top(TopN::new(n)),
        Cutoff::PerBucket(k) => Sink::PerBucket(k, BTreeMap::new()),
    };
    let chunk_size = options.chunk_size.max(1);
    let mut chunk: Vec<(usize, Triple)> = Vec::with_capacity(chunk_size);
    let mut candidates = candidates.peekable();

    while candidates.peek().is_some() {
        chunk.clear();
        for item in candidates.by_ref() {
            let (line, triple) = item?;
            summary.read += 1;
            if options.dedup && !seen.insert(triple.clone()) {
                summary.duplicates += 1;
                continue;
            }
            chunk.push((line, triple));
            if chunk.len() == chunk_size {
                break;
            }
        }
        if let Sink::Top(top) = &mut sink {
                let scored: Vec<_> = chunk
                    .par_drain(..)
                    .map(|(line, triple)| {
                        // The novelty lookup is deferred, but its
                        // representability is checked now.
                        TripleRep::new(index.table(), &triple)
                            .and_then(|_| model.score(&triple))
                            .map(|score| Scored { triple, score, line })
                            .map_err(|e| (line, e))
                    })
                    .collect();
                for s in scored {
                    match s {
                        Ok(s) => {
                            summary.scored += 1;
                            top.push(s);
                        }
                        Err((line, e)) => reject(&mut summary, line, &e),
                    }
                }
        } else {
                let ranked: Vec<_> = chunk
                    .par_drain(..)
                    .map(|(line, triple)| score_candidate(triple, line, model, index, thresholds))
                    .collect();
                for r in ranked {
                    match r {
                        Ok(c) => {
                            summary.scored += 1;
                            match &mut sink {
                                Sink::All(v) => v.push(c),
                                Sink::PerBucket(k, tops) => tops.entry(c.bucket).or_insert_with(|| TopN::new(*k)).push(c),
                                Sink::Top(_) => unreachable!(),
                            }
                        }
                        Err(r) => reject(&mut summary, r.source_line, &r.error),
                    }
                }
        }
    }
    if summary.rejected > 0 {
        log::warn!("{} of {} candidates were unscorable and left out", summary.rejected, summary.read);
    }

    let output = match sink {
        Sink::All(mut v) => {
            v.sort_by(rank_order);
            RerankOutput::Ranked(v)
        }
        Sink::Top(top) => {
            let retained = top.into_sorted();
            let mut out = Vec::with_capacity(retained.len());
            for s in retained {
                let rep = TripleRep::new(index.table(), &s.triple)?;
                let distance = index.min_distance_rep(&rep)?;
                out.push(RankedCandidate {
                    prob: predict_prob(s.score),
                    bucket: thresholds.bucket(distance),
                    novelty_distance: distance,
                    triple: s.triple,
                    score: s.score,
                    source_line: s.line,
                });
            }
            RerankOutput::Ranked(out)
        }
        Sink::PerBucket(k, tops) => {
            let out: BTreeMap<_, _> = tops.into_iter().map(|(b, t)| (b, t.into_sorted())).collect();
            for b in Bucket::ALL {
                let n = out.get(&b).map_or(0, Vec::len);
                if n < k {
                    log::warn!("bucket {b} has only {n} of the requested {k} candidates");
                }
            }
            RerankOutput::Bucketed(out)
        }
    };
    Ok((output, summary))
}

fn reject(summary: &mut RerankSummary, line: usize, error: &kbnovelty_core::Error) {
    summary.rejected += 1;
    log::debug!("candidate line {line} skipped: {error}");
}
