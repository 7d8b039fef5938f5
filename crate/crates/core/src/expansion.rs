//! Query expansion: pseudo-relevance feedback, relevance feedback, embedding
//! neighbors and concept names.
//!
//! Every expansion keeps the original terms (weight 1) in front and appends
//! new terms weighted by the expansion weight.

use std::collections::{BTreeMap, HashSet};

use crate::corpus::{ConceptLexicon, Corpus, Document, EmbeddingTable, TopicField};
use crate::error::{Error, Result};
use crate::eval::TopicQrels;
use crate::index::{Facet, InvertedIndex};
use crate::ranking::{idf, search, FacetWeights, QueryRep, RankingParams};
use crate::text::{analyze, extract_concepts, AnalyzerConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionParams {
    /// Documents taken from the initial ranking as feedback.
    pub feedback_docs: usize,
    /// Terms appended by feedback expansion.
    pub expansion_terms: usize,
    /// Weight multiplier for appended terms, in `[0, 1]`.
    pub expansion_weight: f64,
    pub max_neighbors_per_word: usize,
    /// Embedding expansion stops once the query has this many distinct words.
    pub query_word_cap: usize,
    pub similarity_threshold: f64,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        Self {
            feedback_docs: 30,
            expansion_terms: 10,
            expansion_weight: Self::default_weight(TopicField::Desc),
            max_neighbors_per_word: 3,
            query_word_cap: 40,
            similarity_threshold: 0.6,
        }
    }
}

impl ExpansionParams {
    /// Expansion weight tuned per topic field.
    pub fn default_weight(field: TopicField) -> f64 {
        match field {
            TopicField::Note => 0.9,
            TopicField::Desc => 0.8,
            TopicField::Sum => 0.2,
        }
    }

    pub fn for_field(field: TopicField) -> Self {
        Self { expansion_weight: Self::default_weight(field), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feedback_docs == 0 {
            return Err(Error::Config("feedback_docs must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.expansion_weight) {
            return Err(Error::Config(format!(
                "expansion weight must lie in [0, 1], got {}",
                self.expansion_weight
            )));
        }
        if self.max_neighbors_per_word == 0 || self.query_word_cap == 0 {
            return Err(Error::Config("neighbor and word caps must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&self.similarity_threshold) {
            return Err(Error::Config("similarity threshold must lie in [-1, 1]".into()));
        }
        Ok(())
    }
}

/// Candidate terms from the feedback documents scored by summed
/// `tf * idf_all`, best `n` kept and scaled so the top term scores 1.
pub fn select_feedback_terms(
    docs: &[&Document],
    n: usize,
    exclude: &HashSet<String>,
    index: &InvertedIndex,
) -> Vec<(String, f64)> {
    let mut tf: BTreeMap<String, u32> = BTreeMap::new();
    for doc in docs {
        for text in doc.text_fields() {
            for term in index.analyze(text) {
                if !exclude.contains(&term) {
                    *tf.entry(term).or_default() += 1;
                }
            }
        }
    }
    let num_docs = index.num_docs();
    let mut scored: Vec<(String, f64)> = tf
        .into_iter()
        .map(|(term, count)| {
            let w = f64::from(count) * idf(num_docs, index.doc_freq(Facet::All, &term));
            (term, w)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(n);
    if let Some(max) = scored.first().map(|s| s.1).filter(|&m| m > 0.0) {
        scored.iter_mut().for_each(|s| s.1 /= max);
    }
    scored
}

fn append_feedback(
    query: &QueryRep,
    feedback: &[&Document],
    index: &InvertedIndex,
    params: &ExpansionParams,
    stage: &str,
) -> QueryRep {
    let selected = select_feedback_terms(feedback, params.expansion_terms, &query.term_set(), index);
    let mut out = query.clone();
    for (term, score) in selected {
        out.push_expansion(term, params.expansion_weight * score);
    }
    out.record_stage(stage);
    out
}

/// Expand with terms from the top `feedback_docs` of an initial search.
pub fn expand_prf(
    query: &QueryRep,
    index: &InvertedIndex,
    corpus: &Corpus,
    weights: &FacetWeights,
    ranking: &RankingParams,
    params: &ExpansionParams,
) -> Result<QueryRep> {
    params.validate()?;
    let initial = search(index, query, weights, ranking)?;
    let feedback: Vec<&Document> = initial
        .iter()
        .take(params.feedback_docs)
        .map(|d| lookup(corpus, &d.doc_id))
        .collect::<Result<_>>()?;
    Ok(append_feedback(query, &feedback, index, params, "prf"))
}

/// Like [`expand_prf`], but only documents judged relevant among the top
/// `feedback_docs` are used. Without any, the query is returned unchanged.
pub fn expand_rf(
    query: &QueryRep,
    index: &InvertedIndex,
    corpus: &Corpus,
    weights: &FacetWeights,
    ranking: &RankingParams,
    qrels: Option<&TopicQrels>,
    params: &ExpansionParams,
) -> Result<QueryRep> {
    params.validate()?;
    let Some(qrels) = qrels else { return Ok(query.clone()) };
    let initial = search(index, query, weights, ranking)?;
    let feedback: Vec<&Document> = initial
        .iter()
        .take(params.feedback_docs)
        .filter(|d| qrels.is_relevant(&d.doc_id))
        .map(|d| lookup(corpus, &d.doc_id))
        .collect::<Result<_>>()?;
    if feedback.is_empty() {
        return Ok(query.clone());
    }
    Ok(append_feedback(query, &feedback, index, params, "rf"))
}

fn lookup<'a>(corpus: &'a Corpus, doc_id: &str) -> Result<&'a Document> {
    corpus
        .get(doc_id)
        .ok_or_else(|| Error::Config(format!("document '{doc_id}' is indexed but missing from the corpus")))
}

/// Append up to `max_neighbors_per_word` embedding neighbors per original
/// query word until the query holds `query_word_cap` distinct words.
pub fn expand_embeddings(
    query: &QueryRep,
    table: &EmbeddingTable,
    analyzer: &AnalyzerConfig,
    params: &ExpansionParams,
) -> Result<QueryRep> {
    params.validate()?;
    let mut out = query.clone();
    let originals = query.surface_words().to_vec();
    let mut words: HashSet<String> = originals.iter().cloned().collect();
    'outer: for word in &originals {
        let mut added = 0;
        for neighbor in table.nearest(word, usize::MAX, params.similarity_threshold) {
            if words.len() >= params.query_word_cap {
                break 'outer;
            }
            if added == params.max_neighbors_per_word {
                break;
            }
            let terms = analyze(&neighbor.word, analyzer);
            if terms.iter().all(|t| out.contains_term(t)) || !words.insert(neighbor.word.clone()) {
                continue;
            }
            added += 1;
            for term in terms {
                if !out.contains_term(&term) {
                    out.push_expansion(term, params.expansion_weight);
                }
            }
            out.push_surface_word(neighbor.word);
        }
    }
    out.record_stage("embeddings");
    Ok(out)
}

/// Append the preferred-name terms and ids of concepts found in the raw
/// topic text. Ids are matched against the concepts facet.
pub fn expand_concepts(
    query: &QueryRep,
    raw_topic_text: &str,
    lexicon: &ConceptLexicon,
    analyzer: &AnalyzerConfig,
    weight: f64,
) -> Result<QueryRep> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::Config(format!("expansion weight must lie in [0, 1], got {weight}")));
    }
    let concepts = extract_concepts(raw_topic_text, lexicon);
    if concepts.is_empty() {
        return Ok(query.clone());
    }
    let mut out = query.clone();
    let mut appended = HashSet::new();
    for c in concepts {
        for term in analyze(&c.preferred_name, analyzer) {
            if appended.insert(term.clone()) {
                out.push_expansion(term, weight);
            }
        }
        if appended.insert(c.concept_id.clone()) {
            out.push_expansion(c.concept_id, weight);
        }
    }
    out.record_stage("concepts");
    Ok(out)
}
