//! Word-vector text files and relation schema files.
//!
//! Word vectors use the word2vec text layout: a header `vocab dim`, then one
//! line per word with the token followed by `dim` space-separated numbers.
//! Values are written with the shortest representation that parses back to
//! the same `f64`.

use std::io::{BufRead, Write};
use std::path::Path;

use kbnovelty_core::corpus::RelationSchema;
use kbnovelty_core::embeddings::EmbeddingTable;
use kbnovelty_core::Error as CoreError;

use crate::error::{Error, Result};
use crate::triples::open;

pub fn parse_vectors(reader: impl BufRead, path: &Path) -> Result<EmbeddingTable> {
    let mut lines = reader.lines().enumerate();
    let (vocab, dim) = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(v)), Some(Ok(d)), None) if d > 0 => (v, d),
                _ => return Err(Error::parse(path, 1, "header must be `<vocab size> <dimension>`")),
            }
        }
        None => return Err(Error::parse(path, 1, "empty vector file")),
    };
    let mut table = EmbeddingTable::with_capacity(dim, vocab);
    let mut values = Vec::with_capacity(dim);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ').filter(|s| !s.is_empty());
        let word = parts.next().expect("non-blank line");
        values.clear();
        for p in parts {
            let v: f64 = p.trim_end().parse().map_err(|_| Error::parse(path, lineno, format!("bad number `{p}`")))?;
            values.push(v);
        }
        table.insert(word, &values).map_err(|e| match e {
            CoreError::DimensionMismatch { expected, found } => {
                Error::parse(path, lineno, format!("expected {expected} values, found {found}"))
            }
            other => Error::parse(path, lineno, other.to_string()),
        })?;
    }
    if table.len() != vocab {
        log::warn!("{}: header announces {vocab} words, file holds {}", path.display(), table.len());
    }
    Ok(table)
}

pub fn read_vectors(path: &Path) -> Result<EmbeddingTable> {
    parse_vectors(open(path)?, path)
}

pub fn write_vectors(w: &mut (impl Write + ?Sized), table: &EmbeddingTable) -> std::io::Result<()> {
    writeln!(w, "{} {}", table.len(), table.dim())?;
    for id in 0..table.len() {
        write!(w, "{}", table.word(id))?;
        for v in table.vector(id) {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One relation name per line; blank and `#` lines are skipped.
pub fn parse_schema(reader: impl BufRead, path: &Path) -> Result<RelationSchema> {
    let mut names = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let name = line.trim();
        if !name.is_empty() && !name.starts_with('#') {
            names.push(name.to_string());
        }
    }
    RelationSchema::new(names).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_schema(path: &Path) -> Result<RelationSchema> {
    parse_schema(open(path)?, path)
}

pub fn write_schema(w: &mut (impl Write + ?Sized), schema: &RelationSchema) -> std::io::Result<()> {
    for name in schema.names() {
        writeln!(w, "{name}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_round_trip_exactly() {
        let mut t = EmbeddingTable::new(3);
        t.insert("egg", &[0.1, -2.5e-17, 1.0 / 3.0]).unwrap();
        t.insert("food", &[f64::MIN_POSITIVE, 7.0, -0.0]).unwrap();
        let mut buf = Vec::new();
        write_vectors(&mut buf, &t).unwrap();
        let back = parse_vectors(&buf[..], Path::new("v.txt")).unwrap();
        assert_eq!(back.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   t.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(back.vocab(), t.vocab());
        let mut again = Vec::new();
        write_vectors(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn dimension_mismatch_names_line() {
        let e = parse_vectors("2 2\na 1 2\nb 1\n".as_bytes(), Path::new("v.txt")).unwrap_err();
        assert_eq!(e.to_string(), "v.txt:3: expected 2 values, found 1");
    }

    #[test]
    fn duplicates_and_non_finite_rejected() {
        assert!(parse_vectors("2 1\na 1\na 2\n".as_bytes(), Path::new("v")).is_err());
        assert!(parse_vectors("1 1\na NaN\n".as_bytes(), Path::new("v")).is_err());
        assert!(parse_vectors("x\n".as_bytes(), Path::new("v")).is_err());
    }

    #[test]
    fn schema_round_trip() {
        let s = parse_schema("IsA\n# c\nUsedFor\n\n".as_bytes(), Path::new("s")).unwrap();
        assert_eq!(s.names(), ["IsA", "UsedFor"]);
        let mut buf = Vec::new();
        write_schema(&mut buf, &s).unwrap();
        assert_eq!(buf, b"IsA\nUsedFor\n");
    }
}
