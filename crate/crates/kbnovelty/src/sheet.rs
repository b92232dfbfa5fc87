//! Annotation sheets: export for human scoring and re-ingest of completed
//! sheets.
//!
//! Layout (UTF-8 TSV):
//!
//! ```text
//! # scale=1..5
//! bucket  rank  relation  head  tail  prob  distance  nn1  nn1_distance ... nnK  nnK_distance  score
//! ```
//!
//! Completed sheets are matched back by their `(bucket, rank)` key, so the
//! text cells may be edited freely.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use kbnovelty_core::miner::AnnotationSheet;
use kbnovelty_core::novelty::Bucket;

use crate::error::{Error, Result};

pub fn write_sheet(w: &mut (impl Write + ?Sized), sheet: &AnnotationSheet, k_neighbors: usize) -> std::io::Result<()> {
    writeln!(w, "# scale={}..{}", sheet.scale_min, sheet.scale_max)?;
    write!(w, "bucket\trank\trelation\thead\ttail\tprob\tdistance")?;
    for i in 1..=k_neighbors {
        write!(w, "\tnn{i}\tnn{i}_distance")?;
    }
    writeln!(w, "\tscore")?;
    for row in &sheet.rows {
        let c = &row.candidate;
        write!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}",
            row.bucket, row.rank, c.triple.relation, c.triple.head, c.triple.tail, c.prob, c.novelty_distance
        )?;
        for i in 0..k_neighbors {
            match row.evidence.get(i) {
                Some(e) => write!(w, "\t{}\t{:.6}", e.triple, e.distance)?,
                None => write!(w, "\t\t")?,
            }
        }
        writeln!(w, "\t")?;
    }
    Ok(())
}

/// Scores of a completed sheet keyed by `(bucket, rank)`. Blank score
/// cells map to `None`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompletedSheet {
    pub scale: Option<(i32, i32)>,
    pub scores: BTreeMap<(Bucket, usize), Option<i32>>,
}

fn parse_scale(comment: &str) -> Option<(i32, i32)> {
    let rest = comment.trim_start_matches('#').trim().strip_prefix("scale=")?;
    let (a, b) = rest.split_once("..")?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

pub fn parse_completed(reader: impl BufRead, path: &Path) -> Result<CompletedSheet> {
    let mut out = CompletedSheet::default();
    let mut columns: Option<(usize, usize, usize)> = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.starts_with('#') {
            if let Some(s) = parse_scale(&line) {
                out.scale = Some(s);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let Some((bc, rc, sc)) = columns else {
            let find = |name: &str| {
                fields
                    .iter()
                    .position(|f| f.trim() == name)
                    .ok_or_else(|| Error::parse(path, lineno, format!("header lacks a `{name}` column")))
            };
            columns = Some((find("bucket")?, find("rank")?, find("score")?));
            continue;
        };
        let err = |m: String| Error::parse(path, lineno, m);
        let cell = |c: usize| fields.get(c).map(|s| s.trim()).unwrap_or("");
        let bucket: Bucket = cell(bc).parse().map_err(|e: kbnovelty_core::Error| err(e.to_string()))?;
        let rank: usize = cell(rc).parse().map_err(|_| err(format!("bad rank `{}`", cell(rc))))?;
        let score = match cell(sc) {
            "" => None,
            s => {
                let v: i32 = s.parse().map_err(|_| err(format!("score `{s}` is not an integer")))?;
                if let Some((lo, hi)) = out.scale {
                    if !(lo..=hi).contains(&v) {
                        return Err(err(format!("score {v} outside the scale {lo}..{hi}")));
                    }
                }
                Some(v)
            }
        };
        if out.scores.insert((bucket, rank), score).is_some() {
            return Err(err(format!("duplicate row for ({bucket}, {rank})")));
        }
    }
    if columns.is_none() {
        return Err(Error::format(path, "no header row"));
    }
    Ok(out)
}

pub fn read_completed(path: &Path) -> Result<CompletedSheet> {
    parse_completed(crate::triples::open(path)?, path)
}

/// Pairs of scores for keys scored in both sheets, in key order, plus the
/// number of keys left out.
pub fn paired_scores(a: &CompletedSheet, b: &CompletedSheet) -> (Vec<i32>, Vec<i32>, usize) {
    let (mut xs, mut ys, mut dropped) = (Vec::new(), Vec::new(), 0);
    for (key, sa) in &a.scores {
        match (sa, b.scores.get(key).copied().flatten()) {
            (Some(x), Some(y)) => {
                xs.push(*x);
                ys.push(y);
            }
            _ => dropped += 1,
        }
    }
    dropped += b.scores.keys().filter(|k| !a.scores.contains_key(k)).count();
    (xs, ys, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHEET: &str = "# scale=1..5\nbucket\trank\trelation\thead\ttail\tprob\tdistance\tnn1\tnn1_distance\tscore\n\
near\t1\tIsA\tegg\tfood\t0.9\t0.1\t(egg, IsA, food)\t0.0\t4\n\
far\t1\tIsA\tcar\tfood\t0.8\t3.0\t(egg, IsA, food)\t3.0\t\n";

    #[test]
    fn parses_scores_by_key() {
        let s = parse_completed(SHEET.as_bytes(), Path::new("a.tsv")).unwrap();
        assert_eq!(s.scale, Some((1, 5)));
        assert_eq!(s.scores[&(Bucket::Near, 1)], Some(4));
        assert_eq!(s.scores[&(Bucket::Far, 1)], None);
    }

    #[test]
    fn out_of_scale_is_rejected() {
        let bad = SHEET.replace("\t4\n", "\t9\n");
        let e = parse_completed(bad.as_bytes(), Path::new("a.tsv")).unwrap_err();
        assert_eq!(e.to_string(), "a.tsv:3: score 9 outside the scale 1..5");
    }

    #[test]
    fn pairs_skip_blank_and_missing() {
        let a = parse_completed(SHEET.as_bytes(), Path::new("a")).unwrap();
        let (x, y, dropped) = paired_scores(&a, &a);
        assert_eq!((x, y, dropped), (vec![4], vec![4], 1));
    }
}
