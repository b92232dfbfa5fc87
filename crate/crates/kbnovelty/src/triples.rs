//! Triple TSV files.
//!
//! Plain triple files hold `relation<TAB>head<TAB>tail[<TAB>confidence]`.
//! Labeled files (split parts carrying negatives) hold
//! `relation<TAB>head<TAB>tail<TAB>label<TAB>confidence` with label `1` or
//! `0` and an empty confidence cell when there is none. In both, lines
//! starting with `#` and blank lines are skipped and phrases are
//! normalized on read.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use kbnovelty_core::corpus::{normalize_phrase, Label, LabeledTriple, Triple};

use crate::error::{Error, Result};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn is_skipped(line: &str) -> bool {
    line.trim().is_empty() || line.starts_with('#')
}

fn parse_triple(fields: &[&str]) -> Result<Triple, String> {
    let head = normalize_phrase(fields[1]).map_err(|_| "empty head phrase".to_string())?;
    let tail = normalize_phrase(fields[2]).map_err(|_| "empty tail phrase".to_string())?;
    let relation = fields[0].trim();
    if relation.is_empty() {
        return Err("empty relation".into());
    }
    Ok(Triple::new(relation, head, tail))
}

fn parse_confidence(cell: &str) -> Result<f64, String> {
    let value: f64 = cell.trim().parse().map_err(|_| format!("non-numeric confidence `{cell}`"))?;
    if !value.is_finite() || value < 0.0 {
        return Err(format!("confidence must be finite and non-negative, got `{cell}`"));
    }
    Ok(value)
}

fn split_fields(line: &str) -> Vec<&str> {
    line.trim_end_matches(['\r', '\n']).split('\t').collect()
}

/// Reads a plain triple file. With `has_confidence` every line needs the
/// fourth column, otherwise exactly three columns are expected. All lines
/// are positives.
pub fn parse_triples(reader: impl BufRead, path: &Path, has_confidence: bool) -> Result<Vec<LabeledTriple>> {
    let expected = if has_confidence { 4 } else { 3 };
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if is_skipped(&line) {
            continue;
        }
        let fields = split_fields(&line);
        if fields.len() != expected {
            return Err(Error::parse(path, lineno, format!("expected {expected} tab-separated fields, found {}", fields.len())));
        }
        let triple = parse_triple(&fields).map_err(|m| Error::parse(path, lineno, m))?;
        let confidence = if has_confidence {
            Some(parse_confidence(fields[3]).map_err(|m| Error::parse(path, lineno, m))?)
        } else {
            None
        };
        out.push(LabeledTriple::positive(triple, confidence));
    }
    Ok(out)
}

pub fn read_triples(path: &Path, has_confidence: bool) -> Result<Vec<LabeledTriple>> {
    parse_triples(open(path)?, path, has_confidence)
}

fn write_triple(w: &mut (impl Write + ?Sized), t: &Triple) -> std::io::Result<()> {
    write!(w, "{}\t{}\t{}", t.relation, t.head, t.tail)
}

/// Writes positives in the plain format; confidences are written when
/// present.
pub fn write_triples<'a>(w: &mut (impl Write + ?Sized), items: impl IntoIterator<Item = &'a LabeledTriple>) -> std::io::Result<()> {
    for item in items {
        write_triple(w, &item.triple)?;
        if let Some(c) = item.confidence() {
            write!(w, "\t{c}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn parse_labeled(reader: impl BufRead, path: &Path) -> Result<Vec<LabeledTriple>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if is_skipped(&line) {
            continue;
        }
        let fields = split_fields(&line);
        if fields.len() != 5 {
            return Err(Error::parse(path, lineno, format!("expected 5 tab-separated fields, found {}", fields.len())));
        }
        let err = |m: String| Error::parse(path, lineno, m);
        let triple = parse_triple(&fields).map_err(err)?;
        let label = match fields[3].trim() {
            "1" => Label::Positive,
            "0" => Label::Negative,
            other => return Err(err(format!("label must be 1 or 0, got `{other}`"))),
        };
        let confidence = match fields[4].trim() {
            "" => None,
            cell => Some(parse_confidence(cell).map_err(err)?),
        };
        out.push(LabeledTriple::new(triple, label, confidence).map_err(|e| err(e.to_string()))?);
    }
    Ok(out)
}

pub fn read_labeled(path: &Path) -> Result<Vec<LabeledTriple>> {
    parse_labeled(open(path)?, path)
}

pub const LABELED_HEADER: &str = "# relation\thead\ttail\tlabel\tconfidence";

pub fn write_labeled<'a>(w: &mut (impl Write + ?Sized), items: impl IntoIterator<Item = &'a LabeledTriple>) -> std::io::Result<()> {
    writeln!(w, "{LABELED_HEADER}")?;
    for item in items {
        write_triple(w, &item.triple)?;
        write!(w, "\t{}\t", u8::from(item.label.is_positive()))?;
        if let Some(c) = item.confidence() {
            write!(w, "{c}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Streams candidate triples with their 1-based line numbers. A fourth
/// column, if any, is ignored.
pub struct CandidateReader<R> {
    lines: std::io::Lines<R>,
    path: PathBuf,
    line: usize,
}

impl<R: BufRead> CandidateReader<R> {
    pub fn new(reader: R, path: &Path) -> Self {
        Self { lines: reader.lines(), path: path.to_path_buf(), line: 0 }
    }
}

impl<R: BufRead> Iterator for CandidateReader<R> {
    type Item = Result<(usize, Triple)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line += 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            if is_skipped(&line) {
                continue;
            }
            let fields = split_fields(&line);
            if !(3..=4).contains(&fields.len()) {
                return Some(Err(Error::parse(
                    &self.path,
                    self.line,
                    format!("expected 3 or 4 tab-separated fields, found {}", fields.len()),
                )));
            }
            return Some(
                parse_triple(&fields)
                    .map(|t| (self.line, t))
                    .map_err(|m| Error::parse(&self.path, self.line, m)),
            );
        }
    }
}
