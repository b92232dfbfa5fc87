//! Phrases, triples, dataset splits and swap negatives.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Retries spent on a corruption that collides with a known positive before
/// the source triple is skipped.
pub const MAX_NEGATIVE_RETRIES: usize = 20;

/// A normalized, non-empty sequence of lowercase word tokens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phrase(Vec<String>);

impl Phrase {
    /// Normalizes raw text: lowercase, split on whitespace, strip leading and
    /// trailing ASCII punctuation from each token and drop tokens left empty.
    pub fn normalize(raw: &str) -> Result<Self> {
        let lower = raw.to_lowercase();
        let words: Vec<String> = lower
            .split_whitespace()
            .map(|tok| tok.trim_matches(|c: char| c.is_ascii_punctuation()))
            .filter(|tok| !tok.is_empty())
            .map(ToString::to_string)
            .collect();
        if words.is_empty() {
            return Err(Error::EmptyPhrase);
        }
        Ok(Self(words))
    }

    /// Builds a phrase from tokens that are already normalized.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        let mut joined = String::new();
        for w in &words {
            joined.push_str(w);
            joined.push(' ');
        }
        let normalized = Self::normalize(&joined)?;
        if normalized.0 != words {
            return Err(Error::InvalidConfig(alloc::format!(
                "tokens {words:?} are not in normalized form"
            )));
        }
        Ok(normalized)
    }

    pub fn words(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(w)?;
        }
        Ok(())
    }
}

/// Free function form of [`Phrase::normalize`].
pub fn normalize_phrase(raw: &str) -> Result<Phrase> {
    Phrase::normalize(raw)
}

/// A `(head, relation, tail)` assertion.
///
/// Triples order lexicographically by head, then relation, then tail. That
/// order breaks every tie in the crate (confidence splits, neighbour lists).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub head: Phrase,
    pub relation: String,
    pub tail: Phrase,
}

impl Triple {
    pub fn new(relation: impl Into<String>, head: Phrase, tail: Phrase) -> Self {
        Self { head, relation: relation.into(), tail }
    }

    /// Normalizes both phrases. Mostly useful in tests and examples.
    pub fn parse(relation: &str, head: &str, tail: &str) -> Result<Self> {
        Ok(Self::new(relation, Phrase::normalize(head)?, Phrase::normalize(tail)?))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Positive)
    }

    pub fn as_f64(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTriple {
    pub triple: Triple,
    pub label: Label,
    confidence: Option<f64>,
}

impl LabeledTriple {
    pub fn positive(triple: Triple, confidence: Option<f64>) -> Self {
        Self { triple, label: Label::Positive, confidence }
    }

    pub fn negative(triple: Triple) -> Self {
        Self { triple, label: Label::Negative, confidence: None }
    }

    pub fn new(triple: Triple, label: Label, confidence: Option<f64>) -> Result<Self> {
        if confidence.is_some() && !label.is_positive() {
            return Err(Error::ConfidenceOnNegative);
        }
        Ok(Self { triple, label, confidence })
    }

    pub fn confidence(&self) -> Option<f64> {
        self.confidence
    }
}

/// The fixed relation vocabulary. Ids are positions in load order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelationSchema {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl RelationSchema {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut schema = Self::default();
        for name in names {
            let name = name.into();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::InvalidConfig(alloc::format!("bad relation name `{name}`")));
            }
            if schema.index.contains_key(&name) {
                return Err(Error::InvalidConfig(alloc::format!("duplicate relation `{name}`")));
            }
            schema.index.insert(name.clone(), schema.names.len());
            schema.names.push(name);
        }
        Ok(schema)
    }

    /// Collects the distinct relations of `triples`, sorted by name.
    pub fn from_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let names: BTreeSet<&str> = triples.into_iter().map(|t| t.relation.as_str()).collect();
        // names are distinct and whitespace-free because they came from parsed triples
        Self::new(names).unwrap_or_default()
    }

    pub fn id(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Fails on the first triple whose relation is outside the schema.
    pub fn check<'a>(&self, triples: impl IntoIterator<Item = &'a Triple>) -> Result<()> {
        for t in triples {
            self.id(&t.relation)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRule {
    /// Highest-confidence triples go to test, the next highest to dev.
    Confidence,
    /// Seeded shuffle, then slice.
    Random,
}

impl SplitRule {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitRule::Confidence => "confidence",
            SplitRule::Random => "random",
        }
    }
}

impl core::str::FromStr for SplitRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "confidence" => Ok(SplitRule::Confidence),
            "random" => Ok(SplitRule::Random),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown split rule `{other}` (expected confidence or random)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub dev: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<LabeledTriple>,
    pub dev: Vec<LabeledTriple>,
    pub test: Vec<LabeledTriple>,
    pub rule: SplitRule,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn train_positives(&self) -> impl Iterator<Item = &Triple> {
        self.train.iter().filter(|t| t.label.is_positive()).map(|t| &t.triple)
    }

    pub fn all_positives(&self) -> impl Iterator<Item = &Triple> {
        self.train
            .iter()
            .chain(&self.dev)
            .chain(&self.test)
            .filter(|t| t.label.is_positive())
            .map(|t| &t.triple)
    }

    /// Appends frozen swap negatives to dev and test, drawn from the pools of
    /// the whole dataset and checked against every known positive.
    pub fn attach_eval_negatives(&mut self, ratio: usize, seed: u64) -> Result<usize> {
        let all: Vec<Triple> = self.all_positives().cloned().collect();
        let sampler = NegativeSampler::new(&all, &all)?;
        let mut skipped = 0;
        for (stream, part) in [(1u64, &mut self.dev), (2u64, &mut self.test)] {
            let sources: Vec<Triple> =
                part.iter().filter(|t| t.label.is_positive()).map(|t| t.triple.clone()).collect();
            let mut rng = rng::substream(seed, stream);
            let batch = sampler.sample_triples(&sources, ratio, &mut rng)?;
            skipped += batch.skipped;
            part.extend(batch.negatives.into_iter().map(|n| LabeledTriple::negative(n.triple)));
        }
        Ok(skipped)
    }
}

/// Partitions `positives` into train/dev/test.
///
/// Exact duplicate triples are collapsed to their first occurrence first so
/// the three parts stay disjoint. Train keeps input order.
pub fn make_split(
    positives: &[LabeledTriple],
    rule: SplitRule,
    sizes: SplitSizes,
    seed: u64,
) -> Result<DatasetSplit> {
    let mut seen = BTreeSet::new();
    let unique: Vec<&LabeledTriple> = positives
        .iter()
        .filter(|t| t.label.is_positive())
        .filter(|t| seen.insert(&t.triple))
        .collect();
    let dup = positives.iter().filter(|t| t.label.is_positive()).count() - unique.len();
    if dup > 0 {
        log::warn!("collapsed {dup} duplicate positive triples before splitting");
    }
    if sizes.dev + sizes.test > unique.len() {
        return Err(Error::SplitTooLarge {
            dev: sizes.dev,
            test: sizes.test,
            available: unique.len(),
        });
    }

    let mut order: Vec<usize> = (0..unique.len()).collect();
    match rule {
        SplitRule::Confidence => {
            let mut conf = Vec::with_capacity(unique.len());
            for (i, t) in unique.iter().enumerate() {
                match t.confidence {
                    Some(c) if c.is_finite() => conf.push(c),
                    _ => return Err(Error::MissingConfidence(i)),
                }
            }
            order.sort_by(|&a, &b| {
                conf[b]
                    .total_cmp(&conf[a])
                    .then_with(|| unique[a].triple.cmp(&unique[b].triple))
            });
        }
        SplitRule::Random => {
            let mut rng = rng::seeded(seed);
            order.shuffle(&mut rng);
        }
    }

    let test_idx = &order[..sizes.test];
    let dev_idx = &order[sizes.test..sizes.test + sizes.dev];
    let mut held = alloc::vec![false; unique.len()];
    for &i in test_idx.iter().chain(dev_idx) {
        held[i] = true;
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| unique[i].clone()).collect::<Vec<_>>();
    Ok(DatasetSplit {
        test: pick(test_idx),
        dev: pick(dev_idx),
        train: unique
            .iter()
            .zip(&held)
            .filter(|(_, &h)| !h)
            .map(|(t, _)| (*t).clone())
            .collect(),
        rule,
        seed,
    })
}

/// Which component of a triple a negative replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Head,
    Relation,
    Tail,
}

/// A triple with phrases and relation replaced by dense ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IdTriple {
    pub head: u32,
    pub relation: u32,
    pub tail: u32,
}

/// Interns phrases and relation names so triples can be swapped and compared
/// as integers.
#[derive(Debug, Clone, Default)]
pub struct TripleInterner {
    phrases: Vec<Phrase>,
    phrase_ids: BTreeMap<Phrase, u32>,
    relations: Vec<String>,
    relation_ids: BTreeMap<String, u32>,
}

impl TripleInterner {
    pub fn intern(&mut self, t: &Triple) -> IdTriple {
        IdTriple {
            head: self.intern_phrase(&t.head),
            relation: self.intern_relation(&t.relation),
            tail: self.intern_phrase(&t.tail),
        }
    }

    fn intern_phrase(&mut self, p: &Phrase) -> u32 {
        if let Some(&id) = self.phrase_ids.get(p) {
            return id;
        }
        let id = self.phrases.len() as u32;
        self.phrases.push(p.clone());
        self.phrase_ids.insert(p.clone(), id);
        id
    }

    fn intern_relation(&mut self, r: &str) -> u32 {
        if let Some(&id) = self.relation_ids.get(r) {
            return id;
        }
        let id = self.relations.len() as u32;
        self.relations.push(r.to_string());
        self.relation_ids.insert(r.to_string(), id);
        id
    }

    pub fn lookup(&self, t: &Triple) -> Option<IdTriple> {
        Some(IdTriple {
            head: *self.phrase_ids.get(&t.head)?,
            relation: *self.relation_ids.get(&t.relation)?,
            tail: *self.phrase_ids.get(&t.tail)?,
        })
    }

    pub fn resolve(&self, t: IdTriple) -> Triple {
        Triple {
            head: self.phrases[t.head as usize].clone(),
            relation: self.relations[t.relation as usize].clone(),
            tail: self.phrases[t.tail as usize].clone(),
        }
    }

    pub fn phrase(&self, id: u32) -> &Phrase {
        &self.phrases[id as usize]
    }

    pub fn relation(&self, id: u32) -> &str {
        &self.relations[id as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapNegative {
    /// Index of the source positive in the input slice.
    pub source: usize,
    pub component: Component,
    pub triple: IdTriple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedNegative {
    pub source: usize,
    pub component: Component,
    pub triple: Triple,
}

#[derive(Debug, Clone, Default)]
pub struct NegativeBatch<T> {
    pub negatives: Vec<T>,
    /// Draws abandoned after [`MAX_NEGATIVE_RETRIES`] collisions.
    pub skipped: usize,
}

/// Draws swap negatives: one component of a positive is replaced by a
/// different value from the reference pools. Corruptions equal to a known
/// positive are redrawn.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    interner: TripleInterner,
    heads: Vec<u32>,
    relations: Vec<u32>,
    tails: Vec<u32>,
    known: BTreeSet<IdTriple>,
}

impl NegativeSampler {
    /// `reference` supplies the swap pools, `known` the positives a negative
    /// must never reproduce.
    pub fn new(reference: &[Triple], known: &[Triple]) -> Result<Self> {
        let mut interner = TripleInterner::default();
        let (mut heads, mut relations, mut tails) =
            (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        for t in reference {
            let id = interner.intern(t);
            heads.insert(id.head);
            relations.insert(id.relation);
            tails.insert(id.tail);
        }
        let known = known.iter().map(|t| interner.intern(t)).collect();
        let sampler = Self {
            interner,
            heads: heads.into_iter().collect(),
            relations: relations.into_iter().collect(),
            tails: tails.into_iter().collect(),
            known,
        };
        for (name, pool) in [
            ("head", &sampler.heads),
            ("relation", &sampler.relations),
            ("tail", &sampler.tails),
        ] {
            if pool.len() < 2 {
                return Err(Error::PoolTooSmall(name));
            }
        }
        Ok(sampler)
    }

    pub fn interner(&self) -> &TripleInterner {
        &self.interner
    }

    /// Interns extra triples (e.g. positives outside the reference set) so
    /// they can be passed to [`NegativeSampler::sample`].
    pub fn intern(&mut self, t: &Triple) -> IdTriple {
        self.interner.intern(t)
    }

    pub fn is_known(&self, t: &IdTriple) -> bool {
        self.known.contains(t)
    }

    /// `ratio` negatives per positive, in source order.
    pub fn sample(
        &self,
        positives: &[IdTriple],
        ratio: usize,
        rng: &mut Rng,
    ) -> NegativeBatch<SwapNegative> {
        let mut out = NegativeBatch {
            negatives: Vec::with_capacity(positives.len() * ratio),
            skipped: 0,
        };
        for (source, pos) in positives.iter().enumerate() {
            for _ in 0..ratio {
                match self.corrupt(pos, rng) {
                    Some((component, triple)) => {
                        out.negatives.push(SwapNegative { source, component, triple })
                    }
                    None => out.skipped += 1,
                }
            }
        }
        if out.skipped > 0 {
            log::warn!(
                "skipped {} negatives after {} colliding draws each",
                out.skipped,
                MAX_NEGATIVE_RETRIES
            );
        }
        out
    }

    /// Convenience wrapper over [`NegativeSampler::sample`] for owned triples.
    pub fn sample_triples(
        &self,
        positives: &[Triple],
        ratio: usize,
        rng: &mut Rng,
    ) -> Result<NegativeBatch<ResolvedNegative>> {
        let mut interner = self.interner.clone();
        let ids: Vec<IdTriple> = positives.iter().map(|t| interner.intern(t)).collect();
        let batch = self.sample(&ids, ratio, rng);
        Ok(NegativeBatch {
            negatives: batch
                .negatives
                .into_iter()
                .map(|n| ResolvedNegative {
                    source: n.source,
                    component: n.component,
                    triple: interner.resolve(n.triple),
                })
                .collect(),
            skipped: batch.skipped,
        })
    }

    fn corrupt(&self, pos: &IdTriple, rng: &mut Rng) -> Option<(Component, IdTriple)> {
        for _ in 0..=MAX_NEGATIVE_RETRIES {
            let component = match rng.random_range(0..3) {
                0 => Component::Head,
                1 => Component::Relation,
                _ => Component::Tail,
            };
            let mut neg = *pos;
            match component {
                Component::Head => neg.head = draw_other(&self.heads, pos.head, rng),
                Component::Relation => {
                    neg.relation = draw_other(&self.relations, pos.relation, rng)
                }
                Component::Tail => neg.tail = draw_other(&self.tails, pos.tail, rng),
            }
            if !self.known.contains(&neg) {
                return Some((component, neg));
            }
        }
        None
    }
}

/// Uniform draw from a sorted pool of at least two values, excluding
/// `current`.
fn draw_other(pool: &[u32], current: u32, rng: &mut Rng) -> u32 {
    match pool.binary_search(&current) {
        Ok(pos) => {
            let i = rng.random_range(0..pool.len() - 1);
            pool[if i >= pos { i + 1 } else { i }]
        }
        Err(_) => pool[rng.random_range(0..pool.len())],
    }
}

/// Swap negatives for `positives`, with `reference` as the pool and every
/// triple of `reference ∪ positives` treated as known.
pub fn sample_negatives(
    positives: &[Triple],
    reference: &[Triple],
    ratio: usize,
    seed: u64,
) -> Result<NegativeBatch<ResolvedNegative>> {
    let mut known: Vec<Triple> = reference.to_vec();
    known.extend_from_slice(positives);
    let sampler = NegativeSampler::new(reference, &known)?;
    let mut rng = rng::seeded(seed);
    sampler.sample_triples(positives, ratio, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn t(r: &str, h: &str, tl: &str) -> Triple {
        Triple::parse(r, h, tl).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(Phrase::normalize("Type of Food").unwrap().words(), ["type", "of", "food"]);
        assert_eq!(Phrase::normalize("water").unwrap().words(), ["water"]);
        assert_eq!(Phrase::normalize("  in   water ").unwrap().words(), ["in", "water"]);
        assert_eq!(Phrase::normalize("(u.s president),").unwrap().words(), ["u.s", "president"]);
        assert_eq!(Phrase::normalize("safety-pins").unwrap().words(), ["safety-pins"]);
    }

    #[test]
    fn normalize_rejects_empty() {
        assert_eq!(Phrase::normalize(""), Err(Error::EmptyPhrase));
        assert_eq!(Phrase::normalize("  ... , ! "), Err(Error::EmptyPhrase));
    }

    #[test]
    fn from_words_requires_normal_form() {
        assert!(Phrase::from_words(["egg"]).is_ok());
        assert!(Phrase::from_words(["Egg"]).is_err());
        assert!(Phrase::from_words(["two words"]).is_err());
    }

    #[test]
    fn negatives_cannot_carry_confidence() {
        let triple = t("IsA", "egg", "food");
        assert_eq!(
            LabeledTriple::new(triple.clone(), Label::Negative, Some(1.0)),
            Err(Error::ConfidenceOnNegative)
        );
        assert!(LabeledTriple::new(triple, Label::Positive, Some(1.0)).is_ok());
    }

    #[test]
    fn schema_lookup() {
        let schema = RelationSchema::new(["IsA", "UsedFor"]).unwrap();
        assert_eq!(schema.id("UsedFor"), Ok(1));
        assert_eq!(schema.id("PartOf"), Err(Error::UnknownRelation("PartOf".into())));
        assert!(RelationSchema::new(["IsA", "IsA"]).is_err());
    }

    fn confident(n: usize) -> Vec<LabeledTriple> {
        (0..n)
            .map(|i| {
                LabeledTriple::positive(
                    t("IsA", &format!("thing{i}"), "object"),
                    Some((i * 7 % n) as f64),
                )
            })
            .collect()
    }

    #[test]
    fn confidence_split_takes_top_confidences() {
        let data = confident(10);
        let split =
            make_split(&data, SplitRule::Confidence, SplitSizes { dev: 2, test: 3 }, 0).unwrap();
        let conf: Vec<f64> = split.test.iter().map(|t| t.confidence().unwrap()).collect();
        assert_eq!(conf, [9.0, 8.0, 7.0]);
        let dev: Vec<f64> = split.dev.iter().map(|t| t.confidence().unwrap()).collect();
        assert_eq!(dev, [6.0, 5.0]);
        assert_eq!(split.train.len(), 5);
    }

    #[test]
    fn confidence_ties_break_on_triple_order() {
        let data = vec![
            LabeledTriple::positive(t("IsA", "b", "x"), Some(1.0)),
            LabeledTriple::positive(t("IsA", "a", "x"), Some(1.0)),
            LabeledTriple::positive(t("IsA", "c", "x"), Some(0.5)),
        ];
        let split =
            make_split(&data, SplitRule::Confidence, SplitSizes { dev: 0, test: 1 }, 0).unwrap();
        assert_eq!(split.test[0].triple, t("IsA", "a", "x"));
    }

    #[test]
    fn confidence_split_needs_confidences() {
        let data = vec![
            LabeledTriple::positive(t("IsA", "a", "x"), Some(1.0)),
            LabeledTriple::positive(t("IsA", "b", "x"), None),
        ];
        let err = make_split(&data, SplitRule::Confidence, SplitSizes { dev: 0, test: 1 }, 0);
        assert_eq!(err, Err(Error::MissingConfidence(1)));
    }

    #[test]
    fn split_sizes_bounded_by_corpus() {
        let data = confident(4);
        let err = make_split(&data, SplitRule::Random, SplitSizes { dev: 2, test: 3 }, 0);
        assert!(matches!(err, Err(Error::SplitTooLarge { available: 4, .. })));
    }

    #[test]
    fn random_split_is_seed_deterministic() {
        let data = confident(1000);
        let sizes = SplitSizes { dev: 50, test: 100 };
        let a = make_split(&data, SplitRule::Random, sizes, 7).unwrap();
        let b = make_split(&data, SplitRule::Random, sizes, 7).unwrap();
        let c = make_split(&data, SplitRule::Random, sizes, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.test, c.test);
    }

    #[test]
    fn duplicates_are_collapsed() {
        let mut data = confident(5);
        data.push(data[0].clone());
        let split =
            make_split(&data, SplitRule::Random, SplitSizes { dev: 1, test: 1 }, 3).unwrap();
        assert_eq!(split.train.len() + split.dev.len() + split.test.len(), 5);
    }

    #[test]
    fn head_swap_replaces_head_only() {
        let reference = vec![
            t("AtLocation", "fish", "water"),
            t("AtLocation", "boat", "lake"),
            t("IsA", "cat", "pet"),
        ];
        let sampler = NegativeSampler::new(&reference, &reference).unwrap();
        let mut rng = rng::seeded(1);
        let batch = sampler.sample_triples(&reference[..1], 50, &mut rng).unwrap();
        assert_eq!(batch.negatives.len() + batch.skipped, 50);
        for n in &batch.negatives {
            let src = &reference[0];
            match n.component {
                Component::Head => {
                    assert_ne!(n.triple.head, src.head);
                    assert_eq!((&n.triple.relation, &n.triple.tail), (&src.relation, &src.tail));
                }
                Component::Relation => {
                    assert_ne!(n.triple.relation, src.relation);
                    assert_eq!((&n.triple.head, &n.triple.tail), (&src.head, &src.tail));
                }
                Component::Tail => {
                    assert_ne!(n.triple.tail, src.tail);
                    assert_eq!((&n.triple.head, &n.triple.relation), (&src.head, &src.relation));
                }
            }
        }
    }

    #[test]
    fn tiny_pools_are_rejected() {
        let reference = vec![t("IsA", "a", "x"), t("IsA", "b", "y")];
        assert_eq!(
            NegativeSampler::new(&reference, &reference).unwrap_err(),
            Error::PoolTooSmall("relation")
        );
    }

    #[test]
    fn exhausted_retries_skip() {
        // Every possible corruption of the first triple is itself known.
        let reference = vec![
            t("A", "h1", "t1"),
            t("A", "h2", "t1"),
            t("A", "h1", "t2"),
            t("B", "h1", "t1"),
        ];
        let sampler = NegativeSampler::new(&reference, &reference).unwrap();
        let mut rng = rng::seeded(5);
        let batch = sampler.sample_triples(&reference[..1], 3, &mut rng).unwrap();
        assert_eq!(batch.negatives.len(), 0);
        assert_eq!(batch.skipped, 3);
    }
}
