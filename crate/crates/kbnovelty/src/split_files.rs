//! On-disk split: `train.tsv`, `dev.tsv`, `test.tsv` in the labeled triple
//! format plus `manifest.txt` recording how they were made.

use std::io::Write;
use std::path::Path;

use kbnovelty_core::corpus::{DatasetSplit, SplitRule};

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::triples::{create, read_labeled, write_labeled};

pub const SPLIT_FORMAT: &str = "kbnovelty-split/1";
pub const MANIFEST: &str = "manifest.txt";
pub const PARTS: [&str; 3] = ["train.tsv", "dev.tsv", "test.tsv"];

/// Extra facts recorded next to the split itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMeta {
    pub neg_ratio: usize,
    pub negatives_skipped: usize,
}

fn write_part(path: &Path, items: &[kbnovelty_core::corpus::LabeledTriple]) -> Result<()> {
    let mut w = create(path)?;
    write_labeled(&mut w, items).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn manifest(split: &DatasetSplit, meta: SplitMeta) -> KeyValues {
    let count = |part: &[kbnovelty_core::corpus::LabeledTriple], positive: bool| {
        part.iter().filter(|t| t.label.is_positive() == positive).count()
    };
    let mut kv = KeyValues::new();
    kv.set("format", SPLIT_FORMAT);
    kv.set("rule", split.rule.as_str());
    kv.set("seed", split.seed);
    kv.set("train_positives", count(&split.train, true));
    kv.set("dev_positives", count(&split.dev, true));
    kv.set("dev_negatives", count(&split.dev, false));
    kv.set("test_positives", count(&split.test, true));
    kv.set("test_negatives", count(&split.test, false));
    kv.set("neg_ratio", meta.neg_ratio);
    kv.set("negatives_skipped", meta.negatives_skipped);
    kv.set("train_file", PARTS[0]);
    kv.set("dev_file", PARTS[1]);
    kv.set("test_file", PARTS[2]);
    kv
}

pub fn write_split(dir: &Path, split: &DatasetSplit, meta: SplitMeta) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, part) in PARTS.iter().zip([&split.train, &split.dev, &split.test]) {
        write_part(&dir.join(name), part)?;
    }
    let path = dir.join(MANIFEST);
    let mut w = create(&path)?;
    manifest(split, meta).write(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))
}

pub fn read_split(dir: &Path) -> Result<(DatasetSplit, KeyValues)> {
    let path = dir.join(MANIFEST);
    let kv = KeyValues::read(&path)?;
    let format: String = kv.require("format", &path)?;
    if format != SPLIT_FORMAT {
        return Err(Error::format(&path, format!("unsupported split format `{format}`")));
    }
    let rule: SplitRule = kv.require("rule", &path)?;
    let seed: u64 = kv.require("seed", &path)?;
    let part = |key: &str| -> Result<_> {
        let name: String = kv.require(key, &path)?;
        read_labeled(&dir.join(name))
    };
    let split = DatasetSplit { train: part("train_file")?, dev: part("dev_file")?, test: part("test_file")?, rule, seed };
    Ok((split, kv))
}
