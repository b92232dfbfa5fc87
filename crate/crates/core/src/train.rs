//! Training loop, dev-set threshold selection and F1 evaluation.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::corpus::{DatasetSplit, IdTriple, Label, LabeledTriple, NegativeSampler, Triple};
use crate::embeddings::EmbeddingTable;
use crate::corpus::RelationSchema;
use crate::optim::AdagradState;
use crate::rng;
use crate::scorers::{
    predict_prob, Activation, DnnRelation, EncodedTriple, Example, Model, ModelConfig, ModelKind,
    TermMask, DEFAULT_D2,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// `None` picks the per-model default (see [`ModelKind::default_batch_size`]).
    pub batch_size: Option<usize>,
    pub l2_weight: f64,
    pub d2: usize,
    pub max_epochs: usize,
    /// Epochs without dev F1 improvement tolerated before stopping.
    pub patience: usize,
    /// Training negatives per positive, redrawn every epoch.
    pub neg_ratio: usize,
    pub seed: u64,
    pub activation: Activation,
    pub dnn_relation: DnnRelation,
    /// Overrides the kind's default Factorized term mask.
    pub term_mask: Option<TermMask>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: None,
            l2_weight: 1e-6,
            d2: DEFAULT_D2,
            max_epochs: 300,
            patience: 10,
            neg_ratio: 1,
            seed: 0,
            activation: Activation::Relu,
            dnn_relation: DnnRelation::Add,
            term_mask: None,
        }
    }
}

impl TrainConfig {
    pub fn model_config(&self, kind: ModelKind) -> ModelConfig {
        let mut cfg = ModelConfig::new(kind).with_d2(self.d2);
        cfg.activation = self.activation;
        cfg.dnn_relation = self.dnn_relation;
        if let Some(mask) = self.term_mask {
            cfg.term_mask = mask;
        }
        cfg
    }

    pub fn batch_size_for(&self, kind: ModelKind) -> usize {
        self.batch_size.unwrap_or_else(|| kind.default_batch_size())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(alloc::format!("{what} must be positive")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if !(self.l2_weight >= 0.0 && self.l2_weight.is_finite()) {
            return Err(Error::InvalidConfig("l2_weight must be non-negative".into()));
        }
        if self.batch_size == Some(0) {
            return bad("batch_size");
        }
        if self.d2 == 0 {
            return bad("d2");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs");
        }
        if self.neg_ratio == 0 {
            return bad("neg_ratio");
        }
        Ok(())
    }
}

/// Confusion counts and the derived precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    /// Items excluded because head or tail had no in-vocabulary token.
    pub unscorable: usize,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize, threshold: f64) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Self { precision, recall, f1: f1(precision, recall), threshold, tp, fp, tn, fn_, unscorable: 0 }
    }

    /// `predictions[i]` is the predicted class of an item labelled `labels[i]`.
    pub fn from_predictions(predictions: &[bool], labels: &[bool], threshold: f64) -> Self {
        assert_eq!(predictions.len(), labels.len());
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&p, &l) in predictions.iter().zip(labels) {
            match (p, l) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_, threshold)
    }

    /// Predicts positive iff `prob >= threshold`.
    pub fn from_probs(probs: &[f64], labels: &[bool], threshold: f64) -> Self {
        let preds: Vec<bool> = probs.iter().map(|&p| p >= threshold).collect();
        Self::from_predictions(&preds, labels, threshold)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub f1: f64,
}

/// Picks the decision threshold that maximizes F1 on a dev set.
///
/// Candidates are `-∞`, the midpoints between consecutive distinct sorted
/// scores, and `+∞`; an item is predicted positive iff `score >= threshold`.
/// Ties go to the smallest threshold.
pub fn select_threshold(scores: &[f64], labels: &[bool]) -> Result<ThresholdChoice> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidConfig("NaN dev score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Threshold -∞: everything predicted positive.
    let negatives = labels.len() - positives;
    let (mut tp, mut fp) = (positives, negatives);
    let score_at = |tp: usize, fp: usize| {
        let fn_ = positives - tp;
        f1(ratio(tp, tp + fp), ratio(tp, tp + fn_))
    };
    let mut best = ThresholdChoice { threshold: f64::NEG_INFINITY, f1: score_at(tp, fp) };

    let mut i = 0;
    while i < order.len() {
        let value = scores[order[i]];
        // Move the whole group of equal scores below the threshold.
        while i < order.len() && scores[order[i]] == value {
            if labels[order[i]] {
                tp -= 1;
            } else {
                fp -= 1;
            }
            i += 1;
        }
        let threshold = match order.get(i) {
            Some(&next) => midpoint(value, scores[next]),
            None => f64::INFINITY,
        };
        let f = score_at(tp, fp);
        if f > best.f1 {
            best = ThresholdChoice { threshold, f1: f };
        }
    }
    Ok(best)
}

/// A value strictly above `lo` and at most `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

/// Scores `set` with `model` and reports F1 at `threshold` on probabilities.
/// Unscorable items are excluded and counted.
pub fn evaluate_f1(model: &Model, threshold: f64, set: &[LabeledTriple]) -> EvalReport {
    let mut probs = Vec::with_capacity(set.len());
    let mut labels = Vec::with_capacity(set.len());
    let mut unscorable = 0;
    for item in set {
        match model.score(&item.triple) {
            Ok(s) => {
                probs.push(predict_prob(s));
                labels.push(item.label.is_positive());
            }
            Err(_) => unscorable += 1,
        }
    }
    let mut report = EvalReport::from_probs(&probs, &labels, threshold);
    report.unscorable = unscorable;
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_f1: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxEpochs,
    Patience,
    /// A non-finite loss or gradient appeared in this epoch.
    Diverged { epoch: usize },
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best dev-F1 epoch (or the last finite state if
    /// training diverged before any evaluation).
    pub model: Model,
    pub best_epoch: Option<usize>,
    pub threshold: f64,
    pub dev_f1: f64,
    pub history: Vec<EpochRecord>,
    pub stop: StopReason,
    /// Training positives skipped because a side was all-OOV.
    pub unscorable_train: usize,
    pub unscorable_dev: usize,
}

/// Encoded view of the training positives plus the machinery to draw fresh
/// negatives in id space.
struct TrainingPool {
    sampler: NegativeSampler,
    ids: Vec<IdTriple>,
    positives: Vec<EncodedTriple>,
    phrase_tokens: Vec<Vec<usize>>,
    relation_ids: Vec<usize>,
}

impl TrainingPool {
    fn new(model: &Model, train: &[&Triple]) -> Result<(Self, usize)> {
        let mut scorable = Vec::with_capacity(train.len());
        let mut positives = Vec::with_capacity(train.len());
        for &t in train {
            match model.encode(t) {
                Ok(e) => {
                    scorable.push(t.clone());
                    positives.push(e);
                }
                Err(Error::Unscorable(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let skipped = train.len() - scorable.len();
        if scorable.is_empty() {
            return Err(Error::EmptyInput("no scorable training triple"));
        }
        let sampler = NegativeSampler::new(&scorable, &scorable)?;
        let interner = sampler.interner();
        let ids: Vec<IdTriple> =
            scorable.iter().map(|t| interner.lookup(t).expect("interned")).collect();
        let max_phrase = ids.iter().map(|t| t.head.max(t.tail)).max().unwrap_or(0) as usize;
        let phrase_tokens = (0..=max_phrase as u32)
            .map(|id| model.vocab().token_ids(interner.phrase(id)))
            .collect();
        let max_rel = ids.iter().map(|t| t.relation).max().unwrap_or(0);
        let relation_ids = (0..=max_rel)
            .map(|id| model.schema().id(interner.relation(id)))
            .collect::<Result<Vec<_>>>()?;
        Ok((Self { sampler, ids, positives, phrase_tokens, relation_ids }, skipped))
    }

    fn encode(&self, t: IdTriple) -> EncodedTriple {
        EncodedTriple {
            head: self.phrase_tokens[t.head as usize].clone(),
            relation: self.relation_ids[t.relation as usize],
            tail: self.phrase_tokens[t.tail as usize].clone(),
        }
    }

    fn epoch_examples(&self, ratio: usize, rng: &mut rng::Rng) -> Vec<Example> {
        let negatives = self.sampler.sample(&self.ids, ratio, rng);
        let mut out: Vec<Example> = self
            .positives
            .iter()
            .map(|t| Example { triple: t.clone(), label: Label::Positive })
            .collect();
        out.extend(
            negatives
                .negatives
                .into_iter()
                .map(|n| Example { triple: self.encode(n.triple), label: Label::Negative }),
        );
        out.shuffle(rng);
        out
    }
}

/// Trains `kind` on `split.train` with Adagrad, redrawing swap negatives
/// each epoch, and keeps the parameters with the best dev F1.
///
/// `split.dev` must already hold its frozen negatives.
pub fn train(
    kind: ModelKind,
    split: &DatasetSplit,
    pretrained: &EmbeddingTable,
    schema: &RelationSchema,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let model = Model::init(config.model_config(kind), pretrained, schema, config.seed)?;
    train_model(model, split, config)
}

/// As [`train`], starting from an existing model.
pub fn train_model(mut model: Model, split: &DatasetSplit, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let train: Vec<&Triple> = split.train_positives().collect();
    if train.is_empty() || split.dev.is_empty() {
        return Err(Error::EmptyInput("train and dev must be non-empty"));
    }
    let (pool, unscorable_train) = TrainingPool::new(&model, &train)?;
    if unscorable_train > 0 {
        log::warn!("{unscorable_train} training triples are unscorable and were dropped");
    }

    let mut dev = Vec::with_capacity(split.dev.len());
    for item in &split.dev {
        match model.encode(&item.triple) {
            Ok(e) => dev.push(Example { triple: e, label: item.label }),
            Err(Error::Unscorable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let unscorable_dev = split.dev.len() - dev.len();
    let dev_labels: Vec<bool> = dev.iter().map(|e| e.label.is_positive()).collect();

    let batch_size = config.batch_size_for(model.kind());
    let mut state = AdagradState::new(&model.params);
    let mut history = Vec::new();
    let mut best: Option<(usize, Model, ThresholdChoice)> = None;
    let mut since_best = 0;
    let mut stop = StopReason::MaxEpochs;

    'epochs: for epoch in 1..=config.max_epochs {
        let mut rng = rng::substream(config.seed, epoch as u64);
        let examples = pool.epoch_examples(config.neg_ratio, &mut rng);
        let mut loss_sum = 0.0;
        for batch in examples.chunks(batch_size) {
            let (loss, grads) = model.loss_and_gradients(batch, config.l2_weight);
            if !loss.is_finite() || state.step(&mut model.params, &grads, config.learning_rate).is_err() {
                log::error!("non-finite loss or gradient in epoch {epoch}; stopping");
                stop = StopReason::Diverged { epoch };
                break 'epochs;
            }
            loss_sum += loss * batch.len() as f64;
        }
        if !model.params.all_finite() {
            stop = StopReason::Diverged { epoch };
            break;
        }
        let train_loss = loss_sum / examples.len() as f64;

        let probs: Vec<f64> = dev.iter().map(|e| predict_prob(model.score_encoded(&e.triple))).collect();
        let choice = select_threshold(&probs, &dev_labels)?;
        history.push(EpochRecord { epoch, train_loss, dev_f1: choice.f1, threshold: choice.threshold });
        log::debug!("epoch {epoch}: loss {train_loss:.6} dev F1 {:.4}", choice.f1);

        if best.as_ref().is_none_or(|(_, _, b)| choice.f1 > b.f1) {
            best = Some((epoch, model.clone(), choice));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > config.patience {
                stop = StopReason::Patience;
                break;
            }
        }
    }

    Ok(match best {
        Some((epoch, best_model, choice)) => TrainOutcome {
            model: best_model,
            best_epoch: Some(epoch),
            threshold: choice.threshold,
            dev_f1: choice.f1,
            history,
            stop,
            unscorable_train,
            unscorable_dev,
        },
        None => TrainOutcome {
            model,
            best_epoch: None,
            threshold: 0.5,
            dev_f1: 0.0,
            history,
            stop,
            unscorable_train,
            unscorable_dev,
        },
    })
}
