//! Text outputs: training history, evaluation reports, ranked candidates,
//! neighbour lists and distance curves.

use std::io::{self, Write};

use kbnovelty_core::miner::RankedCandidate;
use kbnovelty_core::novelty::{Bucket, BucketThresholds, Curve, Neighbor};
use kbnovelty_core::train::{EpochRecord, EvalReport};

use crate::config::KeyValues;

pub fn write_history(w: &mut (impl Write + ?Sized), history: &[EpochRecord]) -> io::Result<()> {
    writeln!(w, "epoch\ttrain_loss\tdev_f1\tthreshold")?;
    for r in history {
        writeln!(w, "{}\t{}\t{}\t{}", r.epoch, r.train_loss, r.dev_f1, r.threshold)?;
    }
    Ok(())
}

pub fn report_fields(r: &EvalReport) -> KeyValues {
    let mut kv = KeyValues::new();
    kv.set("precision", r.precision);
    kv.set("recall", r.recall);
    kv.set("f1", r.f1);
    kv.set("threshold", r.threshold);
    kv.set("tp", r.tp);
    kv.set("fp", r.fp);
    kv.set("tn", r.tn);
    kv.set("fn", r.fn_);
    kv.set("unscorable", r.unscorable);
    kv
}

/// One row of a per-bucket evaluation table. `bucket` is `None` on the
/// whole-set row.
pub struct BucketRow<'a> {
    pub bucket: Option<Bucket>,
    pub report: &'a EvalReport,
}

/// Table with one row per bucket and a final `all` row. Empty buckets show
/// `n/a` metrics.
pub fn write_bucket_table(w: &mut (impl Write + ?Sized), thresholds: &BucketThresholds, rows: &[BucketRow<'_>]) -> io::Result<()> {
    writeln!(
        w,
        "# thresholds={} q33={} q66={}",
        thresholds.provenance.as_str(),
        thresholds.q33,
        thresholds.q66
    )?;
    writeln!(w, "bucket\trange\tn\tprecision\trecall\tf1")?;
    for row in rows {
        let (name, range) = match row.bucket {
            Some(b) => (b.as_str(), b.label()),
            None => ("all", "entire set"),
        };
        let r = row.report;
        let n = r.total();
        if n == 0 {
            writeln!(w, "{name}\t{range}\t0\tn/a\tn/a\tn/a")?;
        } else {
            writeln!(w, "{name}\t{range}\t{n}\t{:.4}\t{:.4}\t{:.4}", r.precision, r.recall, r.f1)?;
        }
    }
    Ok(())
}

pub const RANKED_HEADER: &str = "rank\trelation\thead\ttail\tscore\tprob\tdistance\tbucket";

pub fn write_ranked_row(w: &mut (impl Write + ?Sized), rank: usize, c: &RankedCandidate) -> io::Result<()> {
    let t = &c.triple;
    writeln!(
        w,
        "{rank}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}",
        t.relation, t.head, t.tail, c.score, c.prob, c.novelty_distance, c.bucket
    )
}

pub fn write_ranked(w: &mut (impl Write + ?Sized), ranked: &[RankedCandidate]) -> io::Result<()> {
    writeln!(w, "{RANKED_HEADER}")?;
    for (i, c) in ranked.iter().enumerate() {
        write_ranked_row(w, i + 1, c)?;
    }
    Ok(())
}

pub fn write_curve(w: &mut (impl Write + ?Sized), curve: &Curve) -> io::Result<()> {
    writeln!(w, "K\tmean_distance")?;
    for (k, d) in &curve.points {
        writeln!(w, "{k}\t{d:.6}")?;
    }
    Ok(())
}

pub const NEIGHBOR_HEADER: &str = "query\trank\tneighbor\tdistance";

/// Neighbour rows as `(head, Rel, tail)` triples, closest first.
pub fn write_neighbors(w: &mut (impl Write + ?Sized), query: &kbnovelty_core::corpus::Triple, neighbors: &[Neighbor<'_>]) -> io::Result<()> {
    for (i, n) in neighbors.iter().enumerate() {
        writeln!(w, "{query}\t{}\t{}\t{:.4}", i + 1, n.triple, n.distance)?;
    }
    Ok(())
}
