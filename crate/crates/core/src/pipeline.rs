//! Declarative experiment configuration and the pipeline that turns a
//! configuration plus loaded resources into a ranked run.
//!
//! Config files are line oriented. Top-level `key = value` lines come first,
//! then one `[stage:<name>]` section per stage in execution order:
//!
//! ```text
//! corpus = docs.txt
//! topics = topics.txt
//! field = sum
//! weights = title:1.5,all:1
//!
//! [stage:negation]
//! window = 5
//!
//! [stage:prf]
//! feedback_docs = 30
//! weight = 0.2
//! ```
//!
//! Stages run in three phases: text stages (demographics, negation) rewrite
//! the topic text, expansion stages (concepts, prf, rf, embeddings) grow the
//! query, and an optional final ltr stage re-ranks the search output. The
//! written order must respect the phases. Relative paths resolve against the
//! directory holding the config file.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{
    augment_document, load_keyword_map, load_topics, parse_documents, ConceptLexicon, Corpus, Document,
    EmbeddingTable, Topic, TopicField,
};
use crate::error::{Error, Result};
use crate::eval::{read_qrels, RankedRun, SampledQrels};
use crate::expansion::{expand_concepts, expand_embeddings, expand_prf, expand_rf, ExpansionParams};
use crate::index::InvertedIndex;
use crate::ltr::{
    build_training_set, rerank, train_ranker, FeatureContext, LinearRankModel, TrainingParams,
    TrainingSetParams, TrainingTopic, DEFAULT_RERANK_DEPTH,
};
use crate::ranking::{search, FacetWeights, QueryRep, RankingParams, ScoredDoc};
use crate::text::{normalize_demographics, remove_negated, AnalyzerConfig, DemographicRules, NegationRules};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageKind {
    Demographics,
    Negation,
    Concepts,
    Prf,
    Rf,
    Embeddings,
    Ltr,
}

impl StageKind {
    pub fn name(self) -> &'static str {
        match self {
            StageKind::Demographics => "demographics",
            StageKind::Negation => "negation",
            StageKind::Concepts => "concepts",
            StageKind::Prf => "prf",
            StageKind::Rf => "rf",
            StageKind::Embeddings => "embeddings",
            StageKind::Ltr => "ltr",
        }
    }

    fn phase(self) -> u8 {
        match self {
            StageKind::Demographics | StageKind::Negation => 0,
            StageKind::Ltr => 2,
            _ => 1,
        }
    }
}

impl FromStr for StageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "demographics" => StageKind::Demographics,
            "negation" => StageKind::Negation,
            "concepts" => StageKind::Concepts,
            "prf" => StageKind::Prf,
            "rf" => StageKind::Rf,
            "embeddings" => StageKind::Embeddings,
            "ltr" => StageKind::Ltr,
            other => return Err(Error::Config(format!("unknown stage '{other}'"))),
        })
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Demographics,
    Negation { window: Option<usize> },
    Concepts { weight: Option<f64> },
    Prf(FeedbackStage),
    Rf(FeedbackStage),
    Embeddings(EmbeddingStage),
    Ltr { model: String, depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackStage {
    pub feedback_docs: usize,
    pub expansion_terms: usize,
    /// Defaults to the topic field's expansion weight.
    pub weight: Option<f64>,
}

impl Default for FeedbackStage {
    fn default() -> Self {
        let d = ExpansionParams::default();
        Self { feedback_docs: d.feedback_docs, expansion_terms: d.expansion_terms, weight: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingStage {
    pub neighbors: usize,
    pub word_cap: usize,
    pub threshold: f64,
    pub weight: Option<f64>,
}

impl Default for EmbeddingStage {
    fn default() -> Self {
        let d = ExpansionParams::default();
        Self {
            neighbors: d.max_neighbors_per_word,
            word_cap: d.query_word_cap,
            threshold: d.similarity_threshold,
            weight: None,
        }
    }
}

impl Stage {
    pub fn kind(&self) -> StageKind {
        match self {
            Stage::Demographics => StageKind::Demographics,
            Stage::Negation { .. } => StageKind::Negation,
            Stage::Concepts { .. } => StageKind::Concepts,
            Stage::Prf(_) => StageKind::Prf,
            Stage::Rf(_) => StageKind::Rf,
            Stage::Embeddings(_) => StageKind::Embeddings,
            Stage::Ltr { .. } => StageKind::Ltr,
        }
    }

    fn new(kind: StageKind) -> Self {
        match kind {
            StageKind::Demographics => Stage::Demographics,
            StageKind::Negation => Stage::Negation { window: None },
            StageKind::Concepts => Stage::Concepts { weight: None },
            StageKind::Prf => Stage::Prf(FeedbackStage::default()),
            StageKind::Rf => Stage::Rf(FeedbackStage::default()),
            StageKind::Embeddings => Stage::Embeddings(EmbeddingStage::default()),
            StageKind::Ltr => Stage::Ltr { model: String::new(), depth: DEFAULT_RERANK_DEPTH },
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let kind = self.kind();
        let unknown = || Error::Config(format!("unknown key '{key}' in stage '{kind}'"));
        match self {
            Stage::Demographics => return Err(unknown()),
            Stage::Negation { window } => match key {
                "window" => *window = Some(parse_value(key, value)?),
                _ => return Err(unknown()),
            },
            Stage::Concepts { weight } => match key {
                "weight" => *weight = Some(parse_value(key, value)?),
                _ => return Err(unknown()),
            },
            Stage::Prf(s) | Stage::Rf(s) => match key {
                "feedback_docs" => s.feedback_docs = parse_value(key, value)?,
                "expansion_terms" => s.expansion_terms = parse_value(key, value)?,
                "weight" => s.weight = Some(parse_value(key, value)?),
                _ => return Err(unknown()),
            },
            Stage::Embeddings(s) => match key {
                "neighbors" => s.neighbors = parse_value(key, value)?,
                "word_cap" => s.word_cap = parse_value(key, value)?,
                "threshold" => s.threshold = parse_value(key, value)?,
                "weight" => s.weight = Some(parse_value(key, value)?),
                _ => return Err(unknown()),
            },
            Stage::Ltr { model, depth } => match key {
                "model" => *model = value.to_string(),
                "depth" => *depth = parse_value(key, value)?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }

    fn write(&self, out: &mut String) {
        let _ = writeln!(out, "[stage:{}]", self.kind());
        let mut kv = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match self {
            Stage::Demographics => {}
            Stage::Negation { window } => {
                if let Some(w) = window {
                    kv("window", w);
                }
            }
            Stage::Concepts { weight } => {
                if let Some(w) = weight {
                    kv("weight", w);
                }
            }
            Stage::Prf(s) | Stage::Rf(s) => {
                kv("feedback_docs", &s.feedback_docs);
                kv("expansion_terms", &s.expansion_terms);
                if let Some(w) = s.weight {
                    kv("weight", &w);
                }
            }
            Stage::Embeddings(s) => {
                kv("neighbors", &s.neighbors);
                kv("word_cap", &s.word_cap);
                kv("threshold", &s.threshold);
                if let Some(w) = s.weight {
                    kv("weight", &w);
                }
            }
            Stage::Ltr { model, depth } => {
                kv("model", model);
                kv("depth", depth);
            }
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid value '{value}' for '{key}'"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Directory relative paths resolve against.
    pub base_dir: PathBuf,
    pub corpus: Vec<String>,
    pub topics: Option<String>,
    pub index: Option<String>,
    pub keywords: Option<String>,
    pub lexicon: Option<String>,
    pub embeddings: Option<String>,
    pub qrels: Option<String>,
    pub strata: Option<String>,
    pub stopwords: Option<String>,
    pub negation_rules: Option<String>,
    pub demographic_rules: Option<String>,
    pub stem: bool,
    pub field: TopicField,
    pub weights: FacetWeights,
    pub ranking: RankingParams,
    pub seed: u64,
    pub run_tag: String,
    pub stages: Vec<Stage>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            base_dir: PathBuf::from("."),
            corpus: Vec::new(),
            topics: None,
            index: None,
            keywords: None,
            lexicon: None,
            embeddings: None,
            qrels: None,
            strata: None,
            stopwords: None,
            negation_rules: None,
            demographic_rules: None,
            stem: true,
            field: TopicField::Sum,
            weights: FacetWeights::baseline(),
            ranking: RankingParams::default(),
            seed: 42,
            run_tag: "baseline".into(),
            stages: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg = Self { base_dir: base_dir.into(), ..Self::default() };
        let mut seen = HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |e: Error| Error::Config(format!("line {}: {}", n + 1, e.to_string().trim_start_matches("configuration error: ")));
            if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = section
                    .strip_prefix("stage:")
                    .ok_or_else(|| at(Error::Config(format!("unknown section '{section}'"))))?;
                cfg.stages.push(Stage::new(name.parse().map_err(at)?));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(Error::Config(format!("expected 'key = value', got '{line}'"))))?;
            let (key, value) = (key.trim(), value.trim());
            match cfg.stages.last_mut() {
                Some(stage) => stage.set(key, value).map_err(at)?,
                None => {
                    if !seen.insert(key.to_string()) {
                        return Err(at(Error::Config(format!("key '{key}' set twice"))));
                    }
                    cfg.set(key, value).map_err(at)?;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let path = || Some(value.to_string());
        match key {
            "corpus" => {
                self.corpus = value.split(',').map(str::trim).filter(|p| !p.is_empty()).map(String::from).collect()
            }
            "topics" => self.topics = path(),
            "index" => self.index = path(),
            "keywords" => self.keywords = path(),
            "lexicon" => self.lexicon = path(),
            "embeddings" => self.embeddings = path(),
            "qrels" => self.qrels = path(),
            "strata" => self.strata = path(),
            "stopwords" => self.stopwords = path(),
            "negation_rules" => self.negation_rules = path(),
            "demographic_rules" => self.demographic_rules = path(),
            "stem" => self.stem = parse_bool(key, value)?,
            "field" => self.field = value.parse()?,
            "weights" => self.weights = value.parse()?,
            "k1" => self.ranking.k1 = parse_value(key, value)?,
            "b" => self.ranking.b = parse_value(key, value)?,
            "top_k" => self.ranking.top_k = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "run_tag" => self.run_tag = value.to_string(),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Structural checks that need no files.
    pub fn validate(&self) -> Result<()> {
        self.ranking.validate()?;
        if self.run_tag.is_empty() || self.run_tag.chars().any(char::is_whitespace) {
            return Err(Error::Config(format!("run_tag '{}' must be one nonempty word", self.run_tag)));
        }
        let mut phase = 0;
        for stage in &self.stages {
            let p = stage.kind().phase();
            if p < phase || (p == 2 && phase == 2) {
                return Err(Error::Config(format!(
                    "stage '{}' is out of order: text stages come first, then expansions, then a single ltr",
                    stage.kind()
                )));
            }
            phase = p;
            match stage {
                Stage::Concepts { weight: Some(w) } => check_weight(*w)?,
                Stage::Prf(s) | Stage::Rf(s) => self.expansion_params(s.feedback_docs, s.expansion_terms, s.weight, None)
                    .validate()?,
                Stage::Embeddings(s) => self.expansion_params(1, 1, s.weight, Some(s)).validate()?,
                Stage::Ltr { model, depth } => {
                    if model.is_empty() {
                        return Err(Error::Config("ltr stage needs a model path".into()));
                    }
                    if *depth == 0 {
                        return Err(Error::Config("ltr depth must be at least 1".into()));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn expansion_params(
        &self,
        feedback_docs: usize,
        expansion_terms: usize,
        weight: Option<f64>,
        embedding: Option<&EmbeddingStage>,
    ) -> ExpansionParams {
        let mut p = ExpansionParams::for_field(self.field);
        p.feedback_docs = feedback_docs;
        p.expansion_terms = expansion_terms;
        if let Some(w) = weight {
            p.expansion_weight = w;
        }
        if let Some(e) = embedding {
            p.max_neighbors_per_word = e.neighbors;
            p.query_word_cap = e.word_cap;
            p.similarity_threshold = e.threshold;
        }
        p
    }

    /// Fill every defaulted stage parameter with its resolved value.
    pub fn normalized(&self) -> Self {
        let lambda = ExpansionParams::default_weight(self.field);
        let mut out = self.clone();
        for stage in &mut out.stages {
            match stage {
                Stage::Negation { window } => {
                    window.get_or_insert(NegationRules::default().scope_window());
                }
                Stage::Concepts { weight } => {
                    weight.get_or_insert(lambda);
                }
                Stage::Prf(s) | Stage::Rf(s) => {
                    s.weight.get_or_insert(lambda);
                }
                Stage::Embeddings(s) => {
                    s.weight.get_or_insert(lambda);
                }
                _ => {}
            }
        }
        out
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn analyzer(&self) -> Result<AnalyzerConfig> {
        match &self.stopwords {
            None if self.stem => Ok(AnalyzerConfig::default()),
            None => Ok(AnalyzerConfig::unstemmed()),
            Some(p) => Ok(AnalyzerConfig::from_stopword_list(&std::fs::read_to_string(self.resolve(p))?, self.stem)),
        }
    }

    pub fn has_stage(&self, kind: StageKind) -> bool {
        self.stages.iter().any(|s| s.kind() == kind)
    }

    /// Read the corpus files, attaching keywords and concept ids when a
    /// keyword map or lexicon is configured.
    pub fn load_documents(&self) -> Result<Vec<Document>> {
        if self.corpus.is_empty() {
            return Err(Error::Config("no corpus files configured".into()));
        }
        let mut docs = Vec::new();
        for p in &self.corpus {
            docs.extend(parse_documents(&std::fs::read(self.resolve(p))?)?);
        }
        let keywords = match &self.keywords {
            Some(p) => Some(load_keyword_map(&std::fs::read(self.resolve(p))?)?),
            None => None,
        };
        let lexicon = match &self.lexicon {
            Some(p) => Some(ConceptLexicon::parse(&std::fs::read(self.resolve(p))?)?),
            None => None,
        };
        if keywords.is_none() && lexicon.is_none() {
            return Ok(docs);
        }
        let empty_map = HashMap::new();
        let empty_lexicon = ConceptLexicon::new(Vec::new())?;
        Ok(docs
            .par_iter()
            .map(|d| {
                let aug = augment_document(
                    d,
                    keywords.as_ref().unwrap_or(&empty_map),
                    lexicon.as_ref().unwrap_or(&empty_lexicon),
                );
                Document {
                    mesh_keywords: if keywords.is_some() { aug.mesh_keywords } else { d.mesh_keywords.clone() },
                    concept_ids: if lexicon.is_some() { aug.concept_ids } else { d.concept_ids.clone() },
                    ..d.clone()
                }
            })
            .collect())
    }

    /// Build the index the configuration describes.
    pub fn build_index(&self) -> Result<InvertedIndex> {
        InvertedIndex::build(&self.load_documents()?, &self.analyzer()?)
    }
}

fn check_weight(w: f64) -> Result<()> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(Error::Config(format!("expansion weight must lie in [0, 1], got {w}")))
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if !self.corpus.is_empty() {
            writeln!(out, "corpus = {}", self.corpus.join(", "))?;
        }
        let paths = [
            ("topics", &self.topics),
            ("index", &self.index),
            ("keywords", &self.keywords),
            ("lexicon", &self.lexicon),
            ("embeddings", &self.embeddings),
            ("qrels", &self.qrels),
            ("strata", &self.strata),
            ("stopwords", &self.stopwords),
            ("negation_rules", &self.negation_rules),
            ("demographic_rules", &self.demographic_rules),
        ];
        for (k, v) in paths {
            if let Some(v) = v {
                writeln!(out, "{k} = {v}")?;
            }
        }
        writeln!(out, "stem = {}", self.stem)?;
        writeln!(out, "field = {}", self.field)?;
        writeln!(out, "weights = {}", self.weights)?;
        writeln!(out, "k1 = {}", self.ranking.k1)?;
        writeln!(out, "b = {}", self.ranking.b)?;
        writeln!(out, "top_k = {}", self.ranking.top_k)?;
        writeln!(out, "seed = {}", self.seed)?;
        writeln!(out, "run_tag = {}", self.run_tag)?;
        for stage in &self.stages {
            out.push('\n');
            stage.write(&mut out);
        }
        f.write_str(&out)
    }
}

/// Files a pipeline reads besides the index.
#[derive(Debug, Clone)]
pub struct Resources {
    pub corpus: Corpus,
    pub topics: Vec<Topic>,
    pub qrels: Option<SampledQrels>,
    pub lexicon: Option<ConceptLexicon>,
    pub embeddings: Option<EmbeddingTable>,
    pub ltr_model: Option<LinearRankModel>,
    pub negation: NegationRules,
    pub demographics: DemographicRules,
}

impl Resources {
    pub fn new(corpus: Corpus, topics: Vec<Topic>) -> Self {
        Self {
            corpus,
            topics,
            qrels: None,
            lexicon: None,
            embeddings: None,
            ltr_model: None,
            negation: NegationRules::default(),
            demographics: DemographicRules::default(),
        }
    }

    /// Load every file the configuration names.
    pub fn load(config: &PipelineConfig) -> Result<Self> {
        let read = |p: &String| std::fs::read(config.resolve(p));
        let topics = match &config.topics {
            Some(p) => load_topics(&read(p)?)?,
            None => return Err(Error::Config("no topics file configured".into())),
        };
        let mut res = Self::new(Corpus::new(config.load_documents()?)?, topics);
        if let Some(p) = &config.qrels {
            let strata = config.strata.as_ref().map(|s| config.resolve(s));
            res.qrels = Some(read_qrels(config.resolve(p), strata.as_deref())?);
        }
        if let Some(p) = &config.lexicon {
            res.lexicon = Some(ConceptLexicon::parse(&read(p)?)?);
        }
        if let Some(p) = &config.embeddings {
            res.embeddings = Some(EmbeddingTable::parse(&read(p)?)?);
        }
        if let Some(p) = &config.negation_rules {
            res.negation = NegationRules::parse(&String::from_utf8_lossy(&read(p)?))?;
        }
        if let Some(p) = &config.demographic_rules {
            res.demographics = DemographicRules::parse(&String::from_utf8_lossy(&read(p)?))?;
        }
        for stage in &config.stages {
            if let Stage::Ltr { model, .. } = stage {
                res.ltr_model = Some(LinearRankModel::load(config.resolve(model))?);
            }
        }
        Ok(res)
    }
}

/// A validated configuration bound to its index and resources.
pub struct Pipeline<'a> {
    config: PipelineConfig,
    index: &'a InvertedIndex,
    resources: &'a Resources,
}

impl<'a> Pipeline<'a> {
    /// Fails with a configuration error when a stage lacks its resource or
    /// the index was built with a different analyzer.
    pub fn new(config: &PipelineConfig, index: &'a InvertedIndex, resources: &'a Resources) -> Result<Self> {
        config.validate()?;
        let config = config.normalized();
        if index.analyzer() != &config.analyzer()? {
            return Err(Error::Config("index was built with a different analyzer than the config describes".into()));
        }
        if !config.weights.is_searchable() {
            return Err(Error::Config("facet weights are all zero".into()));
        }
        let missing = |stage: StageKind, what: &str| {
            Err(Error::Config(format!("stage '{stage}' needs {what}, which is not configured")))
        };
        for stage in &config.stages {
            let kind = stage.kind();
            match kind {
                StageKind::Concepts if resources.lexicon.is_none() => return missing(kind, "a lexicon"),
                StageKind::Rf if resources.qrels.is_none() => return missing(kind, "qrels"),
                StageKind::Embeddings if resources.embeddings.is_none() => return missing(kind, "embeddings"),
                StageKind::Ltr if resources.ltr_model.is_none() => return missing(kind, "a model"),
                StageKind::Ltr if resources.embeddings.is_none() => return missing(kind, "embeddings"),
                _ => {}
            }
        }
        if config.has_stage(StageKind::Prf) || config.has_stage(StageKind::Rf) || config.has_stage(StageKind::Ltr) {
            if let Some(id) = index.doc_ids().iter().find(|id| resources.corpus.get(id).is_none()) {
                return Err(Error::Config(format!("indexed document '{id}' is missing from the corpus")));
            }
        }
        Ok(Self { config, index, resources })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn index(&self) -> &InvertedIndex {
        self.index
    }

    pub fn resources(&self) -> &Resources {
        self.resources
    }

    /// Topic text after the text stages.
    pub fn topic_text(&self, topic: &Topic) -> String {
        let mut text = topic.text(self.config.field).to_string();
        for stage in &self.config.stages {
            match stage {
                Stage::Demographics => text = normalize_demographics(&text, &self.resources.demographics),
                Stage::Negation { window } => {
                    let rules = match window {
                        Some(w) => self.resources.negation.clone().with_scope_window(*w),
                        None => self.resources.negation.clone(),
                    };
                    text = remove_negated(&text, &rules);
                }
                _ => {}
            }
        }
        text
    }

    /// The topic's final query under the given facet weights.
    pub fn query(&self, topic: &Topic, weights: &FacetWeights) -> Result<QueryRep> {
        let cfg = &self.config;
        let text = self.topic_text(topic);
        let mut query = QueryRep::from_text(&text, self.index);
        for stage in &cfg.stages {
            query = match stage {
                Stage::Concepts { weight } => expand_concepts(
                    &query,
                    &text,
                    self.resources.lexicon.as_ref().expect("checked in new"),
                    self.index.analyzer(),
                    weight.unwrap_or(ExpansionParams::default_weight(cfg.field)),
                )?,
                Stage::Prf(s) => {
                    let p = cfg.expansion_params(s.feedback_docs, s.expansion_terms, s.weight, None);
                    expand_prf(&query, self.index, &self.resources.corpus, weights, &cfg.ranking, &p)?
                }
                Stage::Rf(s) => {
                    let p = cfg.expansion_params(s.feedback_docs, s.expansion_terms, s.weight, None);
                    let qrels = self.resources.qrels.as_ref().and_then(|q| q.topic(topic.topic_id));
                    expand_rf(&query, self.index, &self.resources.corpus, weights, &cfg.ranking, qrels, &p)?
                }
                Stage::Embeddings(s) => {
                    let p = cfg.expansion_params(1, 1, s.weight, Some(s));
                    let table = self.resources.embeddings.as_ref().expect("checked in new");
                    expand_embeddings(&query, table, self.index.analyzer(), &p)?
                }
                _ => continue,
            };
        }
        Ok(query)
    }

    /// Baseline and PRF rankings of the unprocessed topic field, the score
    /// sources of the re-ranking features.
    pub fn feature_sources(&self, topic: &Topic) -> Result<(Vec<ScoredDoc>, Vec<ScoredDoc>)> {
        let cfg = &self.config;
        let weights = FacetWeights::baseline();
        let query = QueryRep::from_text(topic.text(cfg.field), self.index);
        let baseline = search(self.index, &query, &weights, &cfg.ranking)?;
        let params = ExpansionParams::for_field(cfg.field);
        let expanded = expand_prf(&query, self.index, &self.resources.corpus, &weights, &cfg.ranking, &params)?;
        let prf = search(self.index, &expanded, &weights, &cfg.ranking)?;
        Ok((baseline, prf))
    }

    pub fn run(&self) -> Result<RankedRun> {
        self.run_with_weights(&self.config.weights)
    }

    pub fn run_with_weights(&self, weights: &FacetWeights) -> Result<RankedRun> {
        let ranked: Vec<(u32, Vec<ScoredDoc>)> = self
            .resources
            .topics
            .par_iter()
            .map(|t| {
                let query = self.query(t, weights)?;
                Ok((t.topic_id, search(self.index, &query, weights, &self.config.ranking)?))
            })
            .collect::<Result<_>>()?;
        let mut run = RankedRun::new(self.config.run_tag.clone())?;
        for (topic, docs) in ranked {
            run.insert_topic(topic, docs)?;
        }
        match self.config.stages.iter().find_map(|s| match s {
            Stage::Ltr { depth, .. } => Some(*depth),
            _ => None,
        }) {
            Some(depth) => self.rerank(&run, depth),
            None => Ok(run),
        }
    }

    fn rerank(&self, run: &RankedRun, depth: usize) -> Result<RankedRun> {
        let model = self.resources.ltr_model.as_ref().expect("checked in new");
        let table = self.resources.embeddings.as_ref().expect("checked in new");
        let topics: HashMap<u32, &Topic> = self.resources.topics.iter().map(|t| (t.topic_id, t)).collect();
        let sources: HashMap<u32, (Vec<ScoredDoc>, Vec<ScoredDoc>)> = self
            .resources
            .topics
            .par_iter()
            .map(|t| Ok((t.topic_id, self.feature_sources(t)?)))
            .collect::<Result<_>>()?;
        let contexts: HashMap<u32, FeatureContext<'_>> = sources
            .iter()
            .map(|(&id, (b, p))| (id, FeatureContext::new(topics[&id], self.config.field, b, p, table)))
            .collect();
        rerank(model, run, depth, |topic, doc_id| {
            let doc = self.resources.corpus.get(doc_id)?;
            Some(contexts.get(&topic)?.features(doc))
        })
    }

    /// Fit a re-ranker on the resources' topics judged by `qrels`.
    pub fn train_ltr(
        &self,
        qrels: &SampledQrels,
        set_params: &TrainingSetParams,
        params: &TrainingParams,
    ) -> Result<LinearRankModel> {
        let table = self
            .resources
            .embeddings
            .as_ref()
            .ok_or_else(|| Error::Config("training a re-ranker needs embeddings".into()))?;
        let sources: Vec<(Vec<ScoredDoc>, Vec<ScoredDoc>)> =
            self.resources.topics.par_iter().map(|t| self.feature_sources(t)).collect::<Result<_>>()?;
        let topics: Vec<TrainingTopic<'_>> = self
            .resources
            .topics
            .iter()
            .zip(&sources)
            .map(|(topic, (baseline, prf))| TrainingTopic { topic, baseline, prf })
            .collect();
        let pairs = build_training_set(&topics, self.config.field, qrels, &self.resources.corpus, table, set_params);
        if pairs.is_empty() {
            return Err(Error::Eval("no relevant/nonrelevant pairs among the judged training documents".into()));
        }
        train_ranker(&pairs, params)
    }
}

pub fn run_pipeline(config: &PipelineConfig, index: &InvertedIndex, resources: &Resources) -> Result<RankedRun> {
    Pipeline::new(config, index, resources)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_baseline() {
        let c = PipelineConfig::parse("corpus = d.txt\n", "/x").unwrap();
        assert_eq!(c.weights, FacetWeights::baseline());
        assert!(c.stages.is_empty());
        assert_eq!(c.resolve("d.txt"), PathBuf::from("/x/d.txt"));
    }

    #[test]
    fn stage_order_kept() {
        let text = "corpus = d.txt\n[stage:demographics]\n[stage:negation]\nwindow = 3\n[stage:prf]\nweight = 0\n[stage:embeddings]\n";
        let c = PipelineConfig::parse(text, ".").unwrap();
        let kinds: Vec<_> = c.stages.iter().map(Stage::kind).collect();
        assert_eq!(kinds, [StageKind::Demographics, StageKind::Negation, StageKind::Prf, StageKind::Embeddings]);
        assert_eq!(c.stages[1], Stage::Negation { window: Some(3) });
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "[stage:rocchio]\n",
            "colour = red\n",
            "seed = 1\nseed = 2\n",
            "[stage:prf]\n[stage:negation]\n",
            "[stage:prf]\nwindow = 3\n",
            "[stage:ltr]\n",
            "[stage:prf]\nweight = 1.5\n",
            "[other]\n",
            "field = abstract\n",
            "just words\n",
        ] {
            assert!(PipelineConfig::parse(bad, ".").is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trip() {
        let text = "corpus = a.txt, b.txt\ntopics = t.txt\nfield = note\nweights = title:1.5,all:0.5\nk1 = 0.9\nseed = 7\nrun_tag = mine\n\
                    [stage:negation]\n[stage:concepts]\n[stage:rf]\nfeedback_docs = 5\n[stage:embeddings]\nthreshold = 0.7\n[stage:ltr]\nmodel = m.txt\ndepth = 50\n";
        let c = PipelineConfig::parse(text, ".").unwrap();
        let n = c.normalized();
        let back = PipelineConfig::parse(&n.to_string(), ".").unwrap();
        assert_eq!(back, n);
        assert_eq!(PipelineConfig::parse(&c.to_string(), ".").unwrap(), c);
        assert_eq!(n.stages[1], Stage::Concepts { weight: Some(0.9) });
    }
}
