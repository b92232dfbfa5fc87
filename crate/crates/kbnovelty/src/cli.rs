//! Command-line front end.
//!
//! Every subcommand also accepts `--config FILE` holding `key=value` lines
//! named after the long flags (`learning-rate=0.01`). Flags given on the
//! command line win over the file. The fully resolved configuration is
//! logged and, for commands with an output directory, saved as
//! `config.txt` next to the outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use kbnovelty_core::corpus::{make_split, LabeledTriple, RelationSchema, SplitRule, SplitSizes, Triple};
use kbnovelty_core::embeddings::random_table;
use kbnovelty_core::miner::{agreement_stats, AnnotationSheet};
use kbnovelty_core::novelty::{
    compute_quantile_thresholds, topk_mean_distance_curve, Bucket, BucketThresholds, NoveltyIndex, Provenance,
    TripleRep,
};
use kbnovelty_core::scorers::{Activation, DnnRelation, ModelKind};
use kbnovelty_core::train::{evaluate_f1, train, EvalReport, StopReason, TrainConfig};
use kbnovelty_core::Error as CoreError;

use crate::checkpoint::Checkpoint;
use crate::config::KeyValues;
use crate::error::{exit, Error, Result};
use crate::reports::{self, BucketRow};
use crate::sheet;
use crate::split_files::{self, SplitMeta};
use crate::stream::{rerank_stream, Cutoff, RerankOptions, RerankOutput};
use crate::triples::{self, CandidateReader};
use crate::vectors;

#[derive(Debug, Parser)]
#[command(name = "kbnovelty", version, about = "Commonsense triple scoring, novelty buckets and candidate mining")]
pub struct Cli {
    /// `key=value` file with defaults for any long flag of the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for scoring (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split positive triples into train/dev/test and attach frozen dev/test negatives.
    Split(SplitArgs),
    /// Train a scorer with Adagrad and dev-set early stopping.
    Train(TrainArgs),
    /// F1 per novelty bucket and on the entire set.
    Eval(EvalArgs),
    /// Rank candidate triples by model score, optionally per novelty bucket.
    Rerank(RerankArgs),
    /// Closest training triples to query triples.
    Neighbors(NeighborsArgs),
    /// Mean distance to the training set of the top K ranked triples.
    Curve(CurveArgs),
    /// Agreement between two completed annotation sheets.
    Agree(AgreeArgs),
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Positive triples: relation, head, tail[, confidence].
    #[arg(long)]
    pub input: PathBuf,
    /// `confidence` puts the most confident triples in test, `random` shuffles.
    #[arg(long, default_value = "confidence")]
    pub rule: SplitRule,
    /// Dev positives (no published default).
    #[arg(long)]
    pub dev: usize,
    /// Test positives.
    #[arg(long)]
    pub test: usize,
    /// Input carries a confidence column (implied by `--rule confidence`).
    #[arg(long)]
    pub has_confidence: bool,
    /// Frozen negatives per dev/test positive.
    #[arg(long, default_value_t = 1)]
    pub neg_ratio: usize,
    /// Relation schema file to validate against.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Split directory written by `split`.
    #[arg(long)]
    pub split: PathBuf,
    /// Pretrained word vectors (word2vec text). Random vectors are used when absent.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Word-vector dimension when no vector file is given.
    #[arg(long, default_value_t = 200)]
    pub d1: usize,
    /// Relation schema file; defaults to the relations present in the split.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// factorized, prototypical, dnn or bilinear.
    #[arg(long, default_value = "factorized")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    /// Default 600 for factorized/prototypical, 200 for dnn/bilinear.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub l2: f64,
    /// Hidden units.
    #[arg(long, default_value_t = 1000)]
    pub d2: usize,
    #[arg(long, default_value_t = 300)]
    pub max_epochs: usize,
    /// Epochs without dev F1 improvement before stopping.
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    /// Training negatives per positive, redrawn every epoch.
    #[arg(long, default_value_t = 1)]
    pub neg_ratio: usize,
    /// DNN nonlinearity: relu or tanh.
    #[arg(long, default_value = "relu")]
    pub activation: Activation,
    /// DNN relation path: add or none.
    #[arg(long, default_value = "add")]
    pub dnn_relation: DnnRelation,
    #[arg(long)]
    pub out: PathBuf,
}

/// Where the training triples for novelty distances come from.
#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Split directory; its train part is indexed.
    #[arg(long, required_unless_present = "train")]
    pub split: Option<PathBuf>,
    /// Plain triple file to index instead of a split.
    #[arg(long, conflicts_with = "split")]
    pub train: Option<PathBuf>,
    /// Frozen pretrained word vectors; novelty distances never use the fine-tuned copy.
    #[arg(long)]
    pub vectors: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub index: IndexArgs,
    /// Split part to evaluate: test or dev.
    #[arg(long, default_value = "test")]
    pub part: String,
    /// paper_confidence (1.93/2.80), paper_random (2.1/2.95), paper_wikipedia (3.21/4.22) or computed.
    #[arg(long, default_value = "computed")]
    pub thresholds: Provenance,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RerankArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Candidate triples: relation, head, tail.
    #[arg(long)]
    pub candidates: PathBuf,
    #[command(flatten)]
    pub index: IndexArgs,
    /// Preset name or `computed` (an extra pass over the candidates).
    #[arg(long, default_value = "paper_wikipedia")]
    pub thresholds: Provenance,
    /// Keep only the best N (per bucket with --buckets).
    #[arg(long)]
    pub top: Option<usize>,
    /// Top lists per novelty bucket plus an annotation sheet.
    #[arg(long, requires = "top")]
    pub buckets: bool,
    /// Drop repeated candidate lines.
    #[arg(long)]
    pub dedup: bool,
    /// Neighbours shown as evidence in the annotation sheet.
    #[arg(long, default_value_t = 5)]
    pub k_neighbors: usize,
    #[arg(long, default_value_t = 1)]
    pub scale_min: i32,
    #[arg(long, default_value_t = 5)]
    pub scale_max: i32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    #[command(flatten)]
    pub index: IndexArgs,
    /// Query as `relation<TAB>head<TAB>tail` (a literal `\t` also separates).
    #[arg(long)]
    pub query: Vec<String>,
    /// File of query triples.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Ranked TSV from `rerank`, or a plain triple file in ranked order.
    #[arg(long)]
    pub ranked: PathBuf,
    #[command(flatten)]
    pub index: IndexArgs,
    /// K values; default is every multiple of --step.
    #[arg(long, value_delimiter = ',')]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub step: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    /// First completed annotation sheet.
    pub a: PathBuf,
    /// Second completed annotation sheet.
    pub b: PathBuf,
}

/// Parses `args` (including the program name), merging `--config` values
/// for flags not given on the command line.
pub fn parse(args: Vec<OsString>) -> std::result::Result<(Cli, KeyValues), clap::Error> {
    let cmd = Cli::command().args_override_self(true);
    let first = cmd.clone().try_get_matches_from(&args)?;
    let mut merged = args.clone();
    if let Some(path) = first.get_one::<PathBuf>("config") {
        let kv = KeyValues::read(path).map_err(|e| cmd.clone().error(clap::error::ErrorKind::Io, e.to_string()))?;
        let (name, sub_m) = first.subcommand().expect("subcommand required");
        let sub = cmd.find_subcommand(name).expect("known subcommand");
        for (key, value) in kv.iter() {
            let flag = key.replace('_', "-");
            let arg = sub
                .get_arguments()
                .chain(cmd.get_arguments())
                .find(|a| a.get_long() == Some(flag.as_str()) && a.get_long() != Some("config"))
                .ok_or_else(|| cmd.clone().error(clap::error::ErrorKind::UnknownArgument, format!("unknown config key `{key}`")))?;
            if sub_m.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
                continue;
            }
            match arg.get_action() {
                ArgAction::SetTrue => {
                    if value == "true" {
                        merged.push(format!("--{flag}").into());
                    }
                }
                ArgAction::Count => {
                    for _ in 0..value.parse::<usize>().unwrap_or(0) {
                        merged.push(format!("--{flag}").into());
                    }
                }
                _ => {
                    for v in value.split(',') {
                        merged.push(format!("--{flag}").into());
                        merged.push(v.trim().into());
                    }
                }
            }
        }
    }
    let matches = cmd.try_get_matches_from(&merged)?;
    let cli = Cli::from_arg_matches(&matches)?;
    Ok((cli, resolved_config(&matches)))
}

/// Every flag of the chosen subcommand with its effective value.
fn resolved_config(matches: &clap::ArgMatches) -> KeyValues {
    let mut kv = KeyValues::new();
    let (name, sub_m) = matches.subcommand().expect("subcommand required");
    kv.set("command", name);
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(name).expect("known subcommand");
    let mut args: Vec<_> = cmd.get_arguments().chain(sub.get_arguments()).collect();
    args.dedup_by_key(|a| a.get_id().clone());
    let mut done = BTreeSet::new();
    for arg in args {
        let id = arg.get_id().as_str();
        if matches!(id, "help" | "version" | "config") || !done.insert(id.to_string()) {
            continue;
        }
        let key = arg.get_long().map(str::to_string).unwrap_or_else(|| id.to_string());
        let value = match sub_m.get_raw(id) {
            Some(vals) => vals.map(|v| v.to_string_lossy().into_owned()).collect::<Vec<_>>().join(","),
            None => continue,
        };
        kv.set(key, value);
    }
    kv
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: Cli, resolved: KeyValues) -> i32 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    for (k, v) in resolved.iter() {
        log::info!("config {k}={v}");
    }
    let result = match &cli.command {
        Command::Split(a) => cmd_split(a, cli.seed, &resolved),
        Command::Train(a) => cmd_train(a, cli.seed, &resolved),
        Command::Eval(a) => cmd_eval(a),
        Command::Rerank(a) => cmd_rerank(a, &resolved),
        Command::Neighbors(a) => cmd_neighbors(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Agree(a) => cmd_agree(a),
    };
    match result {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let mut w = triples::create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Writes to `path`, or to stdout when `None`.
fn write_out(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(p) => write_file(p, f),
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

fn save_config(dir: &Path, resolved: &KeyValues) -> Result<()> {
    write_file(&dir.join("config.txt"), |w| resolved.write(w))
}

pub fn cmd_split(a: &SplitArgs, seed: u64, resolved: &KeyValues) -> Result<()> {
    let with_conf = a.has_confidence || a.rule == SplitRule::Confidence;
    let positives = triples::read_triples(&a.input, with_conf)?;
    if let Some(path) = &a.schema {
        let schema = vectors::read_schema(path)?;
        schema.check(positives.iter().map(|t| &t.triple))?;
    }
    let mut split = make_split(&positives, a.rule, SplitSizes { dev: a.dev, test: a.test }, seed)?;
    let skipped = split.attach_eval_negatives(a.neg_ratio, seed)?;
    split_files::write_split(&a.out, &split, SplitMeta { neg_ratio: a.neg_ratio, negatives_skipped: skipped })?;
    save_config(&a.out, resolved)?;
    log::info!("split written to {}: {} train, {} dev, {} test rows", a.out.display(), split.train.len(), split.dev.len(), split.test.len());
    Ok(())
}

fn split_words(split: &kbnovelty_core::corpus::DatasetSplit) -> Vec<String> {
    let mut words = BTreeSet::new();
    for t in split.train.iter().chain(&split.dev).chain(&split.test) {
        for w in t.triple.head.words().iter().chain(t.triple.tail.words()) {
            words.insert(w.clone());
        }
    }
    words.into_iter().collect()
}

pub fn cmd_train(a: &TrainArgs, seed: u64, resolved: &KeyValues) -> Result<()> {
    let (split, _) = split_files::read_split(&a.split)?;
    let schema = match &a.schema {
        Some(p) => vectors::read_schema(p)?,
        None => RelationSchema::from_triples(split.train.iter().chain(&split.dev).chain(&split.test).map(|t| &t.triple)),
    };
    schema.check(split.train.iter().chain(&split.dev).chain(&split.test).map(|t| &t.triple))?;
    let pretrained = match &a.vectors {
        Some(p) => {
            let table = vectors::read_vectors(p)?;
            if table.dim() != a.d1 {
                log::info!("word dimension {} taken from {}", table.dim(), p.display());
            }
            table
        }
        None => random_table(split_words(&split), a.d1, kbnovelty_core::rng::substream_seed(seed, 0x5eed))?,
    };
    create_dir(&a.out)?;
    if a.vectors.is_none() {
        // These stand in for pretrained vectors, so later novelty distances need them.
        write_file(&a.out.join("vectors.txt"), |w| vectors::write_vectors(w, &pretrained))?;
    }
    let config = TrainConfig {
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        l2_weight: a.l2,
        d2: a.d2,
        max_epochs: a.max_epochs,
        patience: a.patience,
        neg_ratio: a.neg_ratio,
        seed,
        activation: a.activation,
        dnn_relation: a.dnn_relation,
        term_mask: None,
    };
    let outcome = train(a.model, &split, &pretrained, &schema, &config)?;

    save_config(&a.out, resolved)?;
    write_file(&a.out.join("history.tsv"), |w| reports::write_history(w, &outcome.history))?;
    let mut metadata = BTreeMap::new();
    for (k, v) in resolved.iter() {
        metadata.insert(k.to_string(), v.to_string());
    }
    metadata.insert("best_epoch".into(), outcome.best_epoch.map_or("none".into(), |e| e.to_string()));
    metadata.insert("stop".into(), format!("{:?}", outcome.stop));
    let ck = Checkpoint { model: outcome.model, threshold: outcome.threshold, metadata };
    if ck.model.params.all_finite() {
        ck.save(&a.out.join("checkpoint.json"))?;
    } else {
        log::error!("parameters are not finite; no checkpoint written");
    }
    for (name, part) in [("dev", &split.dev), ("test", &split.test)] {
        if part.is_empty() {
            continue;
        }
        let report = evaluate_f1(&ck.model, ck.threshold, part);
        write_file(&a.out.join(format!("{name}_report.txt")), |w| reports::report_fields(&report).write(w))?;
        log::info!("{name} F1 {:.4}", report.f1);
    }
    match outcome.stop {
        StopReason::Diverged { epoch } => Err(Error::Core(CoreError::Diverged { epoch })),
        _ => Ok(()),
    }
}

/// Training triples to index, from a split or a plain file.
fn index_triples(a: &IndexArgs) -> Result<Vec<Triple>> {
    match (&a.split, &a.train) {
        (Some(dir), _) => {
            let (split, _) = split_files::read_split(dir)?;
            Ok(split.train.into_iter().filter(|t| t.label.is_positive()).map(|t| t.triple).collect())
        }
        (None, Some(path)) => CandidateReader::new(triples::open(path)?, path).map(|r| r.map(|(_, t)| t)).collect(),
        (None, None) => Err(Error::Usage("either --split or --train is required".into())),
    }
}


fn thresholds_from(provenance: Provenance, distances: impl FnOnce() -> Result<Vec<f64>>) -> Result<BucketThresholds> {
    match BucketThresholds::preset(provenance) {
        Some(t) => Ok(t),
        None => Ok(compute_quantile_thresholds(&distances()?)?),
    }
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let dir = a.index.split.as_ref().ok_or_else(|| Error::Usage("eval needs --split".into()))?;
    let (split, _) = split_files::read_split(dir)?;
    let set = match a.part.as_str() {
        "test" => &split.test,
        "dev" => &split.dev,
        other => return Err(Error::Usage(format!("--part must be test or dev, got `{other}`"))),
    };
    let table = vectors::read_vectors(&a.index.vectors)?;
    let train: Vec<&Triple> = split.train_positives().collect();
    let index = NoveltyIndex::build(&table, train.iter().copied());
    let mut scored: Vec<(&LabeledTriple, f64)> = Vec::with_capacity(set.len());
    let mut unscorable = 0;
    for item in set {
        match index.min_distance(&item.triple) {
            Ok(d) => scored.push((item, d)),
            Err(CoreError::Unscorable(_)) => unscorable += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if unscorable > 0 {
        log::warn!("{unscorable} items have no in-vocabulary head or tail and were left out of the buckets");
    }
    let thresholds = thresholds_from(a.thresholds, || Ok(scored.iter().map(|(_, d)| *d).collect()))?;
    let mut per_bucket: BTreeMap<Bucket, Vec<LabeledTriple>> = BTreeMap::new();
    for (item, d) in &scored {
        per_bucket.entry(thresholds.bucket(*d)).or_default().push((*item).clone());
    }
    let reports: Vec<(Option<Bucket>, EvalReport)> = Bucket::ALL
        .iter()
        .map(|&b| (Some(b), evaluate_f1(&ck.model, ck.threshold, per_bucket.get(&b).map_or(&[][..], Vec::as_slice))))
        .chain(std::iter::once((None, evaluate_f1(&ck.model, ck.threshold, set))))
        .collect();
    let rows: Vec<BucketRow<'_>> = reports.iter().map(|(b, r)| BucketRow { bucket: *b, report: r }).collect();
    write_out(a.out.as_deref(), |w| reports::write_bucket_table(w, &thresholds, &rows))
}

pub fn cmd_rerank(a: &RerankArgs, resolved: &KeyValues) -> Result<()> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let table = vectors::read_vectors(&a.index.vectors)?;
    let train = index_triples(&a.index)?;
    let index = NoveltyIndex::build(&table, &train);
    let open_candidates = || -> Result<_> { Ok(CandidateReader::new(triples::open(&a.candidates)?, &a.candidates)) };
    let thresholds = thresholds_from(a.thresholds, || {
        let mut ds = Vec::new();
        for item in open_candidates()? {
            let (_, t) = item?;
            if let Ok(rep) = TripleRep::new(&table, &t) {
                ds.push(index.min_distance_rep(&rep)?);
            }
        }
        Ok(ds)
    })?;
    let cutoff = match (a.top, a.buckets) {
        (None, _) => Cutoff::All,
        (Some(n), false) => Cutoff::Top(n),
        (Some(k), true) => Cutoff::PerBucket(k),
    };
    let options = RerankOptions { cutoff, dedup: a.dedup, ..RerankOptions::default() };
    let (output, summary) = rerank_stream(open_candidates()?, &ck.model, &index, &thresholds, options)?;
    log::info!("read {} candidates, scored {}, rejected {}", summary.read, summary.scored, summary.rejected);

    create_dir(&a.out)?;
    save_config(&a.out, resolved)?;
    match output {
        RerankOutput::Ranked(ranked) => write_file(&a.out.join("ranked.tsv"), |w| reports::write_ranked(w, &ranked)),
        RerankOutput::Bucketed(tops) => {
            for b in Bucket::ALL {
                let list = tops.get(&b).map_or(&[][..], Vec::as_slice);
                write_file(&a.out.join(format!("top_{b}.tsv")), |w| reports::write_ranked(w, list))?;
            }
            let sheet = AnnotationSheet::build(&tops, &index, a.k_neighbors, (a.scale_min, a.scale_max))?;
            write_file(&a.out.join("annotation_sheet.tsv"), |w| sheet::write_sheet(w, &sheet, a.k_neighbors))
        }
    }
}

fn parse_query(q: &str) -> Result<Triple> {
    let q = q.replace("\\t", "\t");
    let fields: Vec<&str> = q.split('\t').collect();
    if fields.len() != 3 {
        return Err(Error::Usage(format!("query `{q}` must be relation<TAB>head<TAB>tail")));
    }
    Ok(Triple::parse(fields[0].trim(), fields[1], fields[2])?)
}

pub fn cmd_neighbors(a: &NeighborsArgs) -> Result<()> {
    let table = vectors::read_vectors(&a.index.vectors)?;
    let train = index_triples(&a.index)?;
    let index = NoveltyIndex::build(&table, &train);
    let mut queries: Vec<Triple> = a.query.iter().map(|q| parse_query(q)).collect::<Result<_>>()?;
    if let Some(path) = &a.queries {
        for item in CandidateReader::new(triples::open(path)?, path) {
            queries.push(item?.1);
        }
    }
    if queries.is_empty() {
        return Err(Error::Usage("give at least one --query or a --queries file".into()));
    }
    let mut results = Vec::with_capacity(queries.len());
    for q in &queries {
        results.push((q, index.k_nearest(q, a.k)?));
    }
    write_out(a.out.as_deref(), |w| {
        writeln!(w, "{}", reports::NEIGHBOR_HEADER)?;
        for (q, n) in &results {
            reports::write_neighbors(w, q, n)?;
        }
        Ok(())
    })
}

/// Triples of a ranked TSV (header starting with `rank`) or a plain file.
fn read_ranked(path: &Path) -> Result<Vec<Triple>> {
    use std::io::BufRead;
    let mut reader = triples::open(path)?;
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    if first.starts_with("rank\t") {
        let mut out = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() < 4 {
                return Err(Error::parse(path, i + 2, "ranked rows need rank, relation, head and tail"));
            }
            out.push(Triple::parse(f[1], f[2], f[3]).map_err(|e| Error::parse(path, i + 2, e.to_string()))?);
        }
        Ok(out)
    } else {
        let chained = io::Read::chain(io::Cursor::new(first.into_bytes()), reader);
        CandidateReader::new(io::BufReader::new(chained), path).map(|r| r.map(|(_, t)| t)).collect()
    }
}

pub fn cmd_curve(a: &CurveArgs) -> Result<()> {
    let table = vectors::read_vectors(&a.index.vectors)?;
    let train = index_triples(&a.index)?;
    let index = NoveltyIndex::build(&table, &train);
    let ranked = read_ranked(&a.ranked)?;
    let ks = if a.ks.is_empty() {
        if a.step == 0 {
            return Err(Error::Usage("--step must be positive".into()));
        }
        let scorable = ranked.iter().filter(|t| TripleRep::new(&table, t).is_ok()).count();
        (1..=scorable / a.step).map(|i| i * a.step).collect::<Vec<_>>()
    } else {
        a.ks.clone()
    };
    if ks.is_empty() {
        return Err(Error::Usage(format!("fewer than --step {} scorable ranked items", a.step)));
    }
    let curve = topk_mean_distance_curve(&ranked, &index, &ks)?;
    write_out(a.out.as_deref(), |w| reports::write_curve(w, &curve))
}

pub fn cmd_agree(a: &AgreeArgs) -> Result<()> {
    let sa = sheet::read_completed(&a.a)?;
    let sb = sheet::read_completed(&a.b)?;
    let (xs, ys, dropped) = sheet::paired_scores(&sa, &sb);
    if dropped > 0 {
        log::warn!("{dropped} rows are not scored in both sheets and were left out");
    }
    let stats = agreement_stats(&xs, &ys)?;
    let mut kv = KeyValues::new();
    kv.set("n", xs.len());
    kv.set("pearson", stats.pearson);
    kv.set("cohen_kappa", stats.cohen_kappa);
    kv.set("mean_of_averages", stats.mean_of_averages);
    write_out(None, |w| kv.write(w))
}
