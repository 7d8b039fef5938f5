//! Pairwise-trained linear re-ranker.
//!
//! Features per (topic, document): the baseline and PRF run scores, each
//! min-max normalized within the topic; the embedding distance between the
//! topic text and the document title; one-hot topic type; one-hot topic
//! field. A linear model is fitted by full-batch gradient descent on the
//! pairwise logistic loss and re-sorts the top of a run.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{cosine, Corpus, Document, EmbeddingTable, Topic, TopicField, TopicType};
use crate::error::{Error, Result};
use crate::eval::{RankedRun, SampledQrels};
use crate::ranking::ScoredDoc;
use crate::text::tokenize;

pub const FEATURE_NAMES: [&str; FeatureVector::DIM] = [
    "f_bm25",
    "f_prf",
    "f_title_dist",
    "f_type_treatment",
    "f_type_diagnosis",
    "f_type_test",
    "f_field_note",
    "f_field_desc",
    "f_field_sum",
];

pub const DEFAULT_RERANK_DEPTH: usize = 100;
pub const DEFAULT_TRAINING_DEPTH: usize = 100;
pub const DEFAULT_MAX_PAIRS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector(pub [f64; FeatureVector::DIM]);

impl FeatureVector {
    pub const DIM: usize = 9;

    pub fn new(bm25: f64, prf: f64, title_dist: f64, topic_type: TopicType, field: TopicField) -> Self {
        let mut v = [0.0; Self::DIM];
        v[0] = bm25;
        v[1] = prf;
        v[2] = title_dist;
        match topic_type {
            TopicType::Treatment => v[3] = 1.0,
            TopicType::Diagnosis => v[4] = 1.0,
            TopicType::Test => v[5] = 1.0,
            TopicType::Unknown => {}
        }
        v[6 + field as usize] = 1.0;
        Self(v)
    }

    pub fn bm25(&self) -> f64 {
        self.0[0]
    }

    pub fn prf(&self) -> f64 {
        self.0[1]
    }

    pub fn title_dist(&self) -> f64 {
        self.0[2]
    }

    pub fn as_array(&self) -> &[f64; Self::DIM] {
        &self.0
    }

    pub fn dot(&self, w: &[f64; Self::DIM]) -> f64 {
        self.0.iter().zip(w).map(|(x, w)| x * w).sum()
    }

    fn minus(&self, other: &Self) -> [f64; Self::DIM] {
        std::array::from_fn(|i| self.0[i] - other.0[i])
    }
}

/// Per-topic state shared by every document's features.
pub struct FeatureContext<'a> {
    topic_type: TopicType,
    field: TopicField,
    baseline: NormalizedScores,
    prf: NormalizedScores,
    topic_vector: Option<Vec<f64>>,
    table: &'a EmbeddingTable,
}

struct NormalizedScores {
    scores: HashMap<String, f64>,
    min: f64,
    max: f64,
}

impl NormalizedScores {
    fn new(ranked: &[ScoredDoc]) -> Self {
        let scores: HashMap<String, f64> = ranked.iter().map(|d| (d.doc_id.clone(), d.score)).collect();
        let min = ranked.iter().map(|d| d.score).fold(f64::INFINITY, f64::min);
        let max = ranked.iter().map(|d| d.score).fold(f64::NEG_INFINITY, f64::max);
        Self { scores, min, max }
    }

    fn get(&self, doc_id: &str) -> f64 {
        match self.scores.get(doc_id) {
            None => 0.0,
            Some(_) if self.max <= self.min => 1.0,
            Some(s) => (s - self.min) / (self.max - self.min),
        }
    }
}

impl<'a> FeatureContext<'a> {
    pub fn new(
        topic: &Topic,
        field: TopicField,
        baseline: &[ScoredDoc],
        prf: &[ScoredDoc],
        table: &'a EmbeddingTable,
    ) -> Self {
        let words: Vec<String> = tokenize(topic.text(field)).collect();
        Self {
            topic_type: topic.topic_type,
            field,
            baseline: NormalizedScores::new(baseline),
            prf: NormalizedScores::new(prf),
            topic_vector: table.mean_vector(words.iter().map(String::as_str)),
            table,
        }
    }

    pub fn features(&self, doc: &Document) -> FeatureVector {
        let title: Vec<String> = tokenize(&doc.title).collect();
        let title_vector = self.table.mean_vector(title.iter().map(String::as_str));
        let dist = match (&self.topic_vector, &title_vector) {
            (Some(t), Some(d)) => (1.0 - cosine(t, d)).clamp(0.0, 2.0),
            _ => 1.0,
        };
        FeatureVector::new(
            self.baseline.get(&doc.doc_id),
            self.prf.get(&doc.doc_id),
            dist,
            self.topic_type,
            self.field,
        )
    }
}

pub fn extract_features(
    topic: &Topic,
    field: TopicField,
    doc: &Document,
    baseline: &[ScoredDoc],
    prf: &[ScoredDoc],
    table: &EmbeddingTable,
) -> FeatureVector {
    FeatureContext::new(topic, field, baseline, prf, table).features(doc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreferencePair {
    pub topic: u32,
    pub preferred: FeatureVector,
    pub other: FeatureVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingSetParams {
    pub depth: usize,
    pub max_pairs_per_topic: usize,
    pub seed: u64,
}

impl Default for TrainingSetParams {
    fn default() -> Self {
        Self { depth: DEFAULT_TRAINING_DEPTH, max_pairs_per_topic: DEFAULT_MAX_PAIRS, seed: 42 }
    }
}

/// Feature sources for one training topic.
pub struct TrainingTopic<'a> {
    pub topic: &'a Topic,
    pub baseline: &'a [ScoredDoc],
    pub prf: &'a [ScoredDoc],
}

/// One pair per (relevant, judged nonrelevant) combination among the judged
/// documents in the top `depth` of each topic's baseline ranking. Topics over
/// the cap are subsampled with a generator seeded from `seed` and the topic id.
pub fn build_training_set(
    topics: &[TrainingTopic<'_>],
    field: TopicField,
    qrels: &SampledQrels,
    corpus: &Corpus,
    table: &EmbeddingTable,
    params: &TrainingSetParams,
) -> Vec<PreferencePair> {
    let per_topic: Vec<Vec<PreferencePair>> = topics
        .par_iter()
        .map(|t| {
            let Some(judged) = qrels.topic(t.topic.topic_id) else { return Vec::new() };
            let ctx = FeatureContext::new(t.topic, field, t.baseline, t.prf, table);
            let (mut rel, mut non) = (Vec::new(), Vec::new());
            for d in t.baseline.iter().take(params.depth) {
                let (Some(grade), Some(doc)) = (judged.grade(&d.doc_id), corpus.get(&d.doc_id)) else {
                    continue;
                };
                let fv = ctx.features(doc);
                if grade > 0 {
                    rel.push(fv);
                } else {
                    non.push(fv);
                }
            }
            let total = rel.len() * non.len();
            let pair = |i: usize| PreferencePair {
                topic: t.topic.topic_id,
                preferred: rel[i / non.len()],
                other: non[i % non.len()],
            };
            if total <= params.max_pairs_per_topic {
                return (0..total).map(pair).collect();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ u64::from(t.topic.topic_id).rotate_left(32));
            let mut picked = rand::seq::index::sample(&mut rng, total, params.max_pairs_per_topic).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(pair).collect()
        })
        .collect();
    per_topic.into_iter().flatten().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainingParams {
    fn default() -> Self {
        Self { learning_rate: 0.1, epochs: 200, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetadata {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub pairs: usize,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRankModel {
    pub weights: [f64; FeatureVector::DIM],
    pub metadata: Option<ModelMetadata>,
}

impl LinearRankModel {
    pub fn new(weights: [f64; FeatureVector::DIM]) -> Self {
        Self { weights, metadata: None }
    }

    pub fn zero() -> Self {
        Self::new([0.0; FeatureVector::DIM])
    }

    pub fn score(&self, fv: &FeatureVector) -> f64 {
        fv.dot(&self.weights)
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.weights[i])
    }

    pub fn parse(raw: &str) -> Result<Self> {
        let mut weights: [Option<f64>; FeatureVector::DIM] = [None; FeatureVector::DIM];
        let mut meta: HashMap<String, String> = HashMap::new();
        for (n, line) in raw.lines().enumerate() {
            let line_no = n + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.trim().split_once(char::is_whitespace) {
                    meta.insert(k.to_string(), v.trim().to_string());
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::format_at(line_no, "expected 'feature weight'"));
            };
            let i = FEATURE_NAMES
                .iter()
                .position(|f| *f == name)
                .ok_or_else(|| Error::format_at(line_no, format!("unknown feature '{name}'")))?;
            let w: f64 = value
                .parse()
                .ok()
                .filter(|w: &f64| w.is_finite())
                .ok_or_else(|| Error::format_at(line_no, format!("bad weight '{value}'")))?;
            if weights[i].replace(w).is_some() {
                return Err(Error::format_at(line_no, format!("feature '{name}' listed twice")));
            }
        }
        if let Some(v) = meta.get("version") {
            if v != "1" {
                return Err(Error::format(format!("unsupported model version {v}")));
            }
        }
        let mut out = [0.0; FeatureVector::DIM];
        for (i, w) in weights.iter().enumerate() {
            out[i] = w.ok_or_else(|| Error::format(format!("missing feature '{}'", FEATURE_NAMES[i])))?;
        }
        let metadata = if meta.contains_key("seed") {
            let get = |k: &str| {
                meta.get(k).ok_or_else(|| Error::format(format!("missing metadata '{k}'")))
            };
            let bad = |k: &str| Error::format(format!("bad metadata '{k}'"));
            Some(ModelMetadata {
                seed: get("seed")?.parse().map_err(|_| bad("seed"))?,
                epochs: get("epochs")?.parse().map_err(|_| bad("epochs"))?,
                learning_rate: get("learning_rate")?.parse().map_err(|_| bad("learning_rate"))?,
                pairs: get("pairs")?.parse().map_err(|_| bad("pairs"))?,
                train_accuracy: get("train_accuracy")?.parse().map_err(|_| bad("train_accuracy"))?,
            })
        } else {
            None
        };
        Ok(Self { weights: out, metadata })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_string().as_bytes())
    }
}

impl fmt::Display for LinearRankModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::from("# linear rank model\n# version 1\n");
        if let Some(m) = &self.metadata {
            writeln!(out, "# seed {}", m.seed)?;
            writeln!(out, "# epochs {}", m.epochs)?;
            writeln!(out, "# learning_rate {}", m.learning_rate)?;
            writeln!(out, "# pairs {}", m.pairs)?;
            writeln!(out, "# train_accuracy {}", m.train_accuracy)?;
        }
        for (name, w) in FEATURE_NAMES.iter().zip(&self.weights) {
            writeln!(out, "{name} {w}")?;
        }
        f.write_str(&out)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean pairwise logistic loss.
pub fn pairwise_loss(weights: &[f64; FeatureVector::DIM], pairs: &[PreferencePair]) -> f64 {
    let sum: f64 = pairs.iter().map(|p| softplus(-p.preferred.minus(&p.other).iter().zip(weights).map(|(d, w)| d * w).sum::<f64>())).sum();
    sum / pairs.len().max(1) as f64
}

/// Fraction of pairs ordered correctly; ties count half.
pub fn pair_accuracy(model: &LinearRankModel, pairs: &[PreferencePair]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let hits: f64 = pairs
        .iter()
        .map(|p| {
            let (a, b) = (model.score(&p.preferred), model.score(&p.other));
            if a > b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            }
        })
        .sum();
    hits / pairs.len() as f64
}

pub fn train_ranker(pairs: &[PreferencePair], params: &TrainingParams) -> Result<LinearRankModel> {
    train_ranker_traced(pairs, params).map(|(m, _)| m)
}

/// Also returns the mean loss after each epoch.
pub fn train_ranker_traced(
    pairs: &[PreferencePair],
    params: &TrainingParams,
) -> Result<(LinearRankModel, Vec<f64>)> {
    if pairs.is_empty() {
        return Err(Error::Config("cannot train on an empty pair set".into()));
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(Error::Config(format!("learning rate must be positive, got {}", params.learning_rate)));
    }
    let mut diffs: Vec<[f64; FeatureVector::DIM]> =
        pairs.iter().map(|p| p.preferred.minus(&p.other)).collect();
    diffs.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));

    let n = diffs.len() as f64;
    let mut w = [0.0; FeatureVector::DIM];
    let mut losses = Vec::with_capacity(params.epochs);
    for _ in 0..params.epochs {
        let mut grad = [0.0; FeatureVector::DIM];
        for d in &diffs {
            let margin: f64 = d.iter().zip(&w).map(|(d, w)| d * w).sum();
            let g = sigmoid(-margin);
            for (gi, di) in grad.iter_mut().zip(d) {
                *gi -= g * di;
            }
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= params.learning_rate * gi / n;
        }
        losses.push(pairwise_loss(&w, pairs));
    }
    let mut model = LinearRankModel::new(w);
    model.metadata = Some(ModelMetadata {
        seed: params.seed,
        epochs: params.epochs,
        learning_rate: params.learning_rate,
        pairs: pairs.len(),
        train_accuracy: pair_accuracy(&model, pairs),
    });
    Ok((model, losses))
}

/// Re-sort the top `depth` documents of every topic by model score (stable).
/// `features(topic, doc_id)` must cover every document in the prefix. A
/// topic whose order does not change is returned untouched; otherwise the
/// prefix is rescored with integer steps above the remainder's top score.
pub fn rerank<F>(model: &LinearRankModel, run: &RankedRun, depth: usize, features: F) -> Result<RankedRun>
where
    F: Fn(u32, &str) -> Option<FeatureVector>,
{
    let mut out = RankedRun::new(run.tag())?;
    for (topic, docs) in run.topics() {
        let p = depth.min(docs.len());
        let mut keyed = Vec::with_capacity(p);
        for (i, d) in docs[..p].iter().enumerate() {
            let fv = features(topic, &d.doc_id).ok_or_else(|| {
                Error::Config(format!("no features for topic {topic} document {}", d.doc_id))
            })?;
            keyed.push((model.score(&fv), i));
        }
        keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
        if keyed.iter().enumerate().all(|(pos, &(_, i))| pos == i) {
            out.insert_topic(topic, docs.to_vec())?;
            continue;
        }
        let floor = docs.get(p).map_or(0.0, |d| d.score.max(0.0)).ceil();
        let mut new_docs: Vec<ScoredDoc> = keyed
            .iter()
            .enumerate()
            .map(|(pos, &(_, i))| ScoredDoc { doc_id: docs[i].doc_id.clone(), score: floor + (p - pos) as f64 })
            .collect();
        new_docs.extend_from_slice(&docs[p..]);
        out.insert_topic(topic, new_docs)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(bm25: f64, prf: f64) -> FeatureVector {
        FeatureVector::new(bm25, prf, 1.0, TopicType::Diagnosis, TopicField::Sum)
    }

    #[test]
    fn one_hots() {
        let v = FeatureVector::new(0.5, 0.2, 1.0, TopicType::Test, TopicField::Note);
        assert_eq!(v.0, [0.5, 0.2, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let u = FeatureVector::new(0.0, 0.0, 0.0, TopicType::Unknown, TopicField::Desc);
        assert_eq!(u.0[3..6], [0.0; 3]);
        assert_eq!(u.0[6..], [0.0, 1.0, 0.0]);
    }

    #[test]
    fn model_round_trip() {
        let pairs = vec![PreferencePair { topic: 1, preferred: fv(1.0, 0.3), other: fv(0.2, 0.7) }];
        let m = train_ranker(&pairs, &TrainingParams { learning_rate: 0.3, epochs: 17, seed: 5 }).unwrap();
        let text = m.to_string();
        let back = LinearRankModel::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_string(), text);
    }

    #[test]
    fn model_parse_errors() {
        assert!(LinearRankModel::parse("f_bm25 1\n").is_err());
        let mut text = LinearRankModel::zero().to_string();
        text.push_str("f_bogus 1\n");
        assert!(LinearRankModel::parse(&text).is_err());
        let dup = LinearRankModel::zero().to_string() + "f_prf 2\n";
        assert!(LinearRankModel::parse(&dup).is_err());
    }

    #[test]
    fn empty_pairs_rejected() {
        assert!(train_ranker(&[], &TrainingParams::default()).is_err());
    }

    #[test]
    fn normalization_degenerate_range() {
        let one = vec![ScoredDoc { doc_id: "a".into(), score: 3.0 }];
        let n = NormalizedScores::new(&one);
        assert_eq!(n.get("a"), 1.0);
        assert_eq!(n.get("b"), 0.0);
    }
}
