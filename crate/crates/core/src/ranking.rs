//! BM25 with per-facet weights combined disjunction-max style.
//!
//! A document's score is the sum over query terms of the term weight times
//! the best weighted facet score for that term:
//!
//! ```text
//! score(d) = sum_t w_t * max_f ( w_f * bm25(f, t, d) )
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::index::{Facet, InvertedIndex};

pub const MAX_FACET_WEIGHT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingParams {
    pub k1: f64,
    pub b: f64,
    pub top_k: usize,
}

impl Default for RankingParams {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75, top_k: 1000 }
    }
}

impl RankingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 >= 0.0 && self.k1.is_finite()) {
            return Err(Error::Config(format!("k1 must be >= 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::Config(format!("b must lie in [0, 1], got {}", self.b)));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Facet weights in `[0, 2]`; facets not listed weigh 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FacetWeights(BTreeMap<Facet, f64>);

impl FacetWeights {
    pub fn new(weights: impl IntoIterator<Item = (Facet, f64)>) -> Result<Self> {
        let mut out = Self::default();
        for (facet, w) in weights {
            out.set(facet, w)?;
        }
        Ok(out)
    }

    /// `{all: 1}`: plain BM25 over the full text.
    pub fn baseline() -> Self {
        Self(BTreeMap::from([(Facet::All, 1.0)]))
    }

    /// Weight 1 on a single facet: search that facet's index alone.
    pub fn only(facet: Facet) -> Self {
        Self(BTreeMap::from([(facet, 1.0)]))
    }

    pub fn set(&mut self, facet: Facet, weight: f64) -> Result<()> {
        if !(0.0..=MAX_FACET_WEIGHT).contains(&weight) {
            return Err(Error::Config(format!("weight for {facet} must lie in [0, 2], got {weight}")));
        }
        if weight == 0.0 {
            self.0.remove(&facet);
        } else {
            self.0.insert(facet, weight);
        }
        Ok(())
    }

    pub fn get(&self, facet: Facet) -> f64 {
        self.0.get(&facet).copied().unwrap_or(0.0)
    }

    /// Facets with positive weight, in facet order.
    pub fn active(&self) -> impl Iterator<Item = (Facet, f64)> + '_ {
        self.0.iter().map(|(&f, &w)| (f, w)).filter(|&(_, w)| w > 0.0)
    }

    pub fn is_searchable(&self) -> bool {
        self.active().next().is_some()
    }
}

impl fmt::Display for FacetWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.active().map(|(facet, w)| format!("{facet}:{w}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for FacetWeights {
    type Err = Error;

    /// `title:1.5,abstract:0.5`
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Self::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (facet, w) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("expected facet:weight, got '{part}'")))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid weight '{w}'")))?;
            out.set(facet.parse()?, w)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTerm {
    pub term: String,
    pub weight: f64,
}

/// An analyzed query: original terms (weight 1) followed by expansion terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryRep {
    terms: Vec<WeightedTerm>,
    original_len: usize,
    surface_words: Vec<String>,
    trace: Vec<String>,
}

impl QueryRep {
    /// Analyze `text` with the index's analyzer. Surface words are the
    /// distinct unstemmed non-stopword tokens.
    pub fn from_text(text: &str, index: &InvertedIndex) -> Self {
        let terms: Vec<WeightedTerm> = index
            .analyze(text)
            .into_iter()
            .map(|term| WeightedTerm { term, weight: 1.0 })
            .collect();
        let mut seen = HashSet::new();
        let surface_words =
            index.surface_words(text).into_iter().filter(|w| seen.insert(w.clone())).collect();
        Self { original_len: terms.len(), terms, surface_words, trace: Vec::new() }
    }

    /// Already-analyzed terms, each with weight 1.
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let terms: Vec<WeightedTerm> =
            terms.into_iter().map(|t| WeightedTerm { term: t.into(), weight: 1.0 }).collect();
        Self { original_len: terms.len(), terms, surface_words: Vec::new(), trace: Vec::new() }
    }

    pub fn terms(&self) -> &[WeightedTerm] {
        &self.terms
    }

    pub fn original(&self) -> &[WeightedTerm] {
        &self.terms[..self.original_len]
    }

    pub fn expansions(&self) -> &[WeightedTerm] {
        &self.terms[self.original_len..]
    }

    pub fn surface_words(&self) -> &[String] {
        &self.surface_words
    }

    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn contains_term(&self, term: &str) -> bool {
        self.terms.iter().any(|t| t.term == term)
    }

    pub fn term_set(&self) -> HashSet<String> {
        self.terms.iter().map(|t| t.term.clone()).collect()
    }

    pub fn push_expansion(&mut self, term: impl Into<String>, weight: f64) {
        debug_assert!(weight >= 0.0);
        self.terms.push(WeightedTerm { term: term.into(), weight });
    }

    pub(crate) fn push_surface_word(&mut self, word: impl Into<String>) {
        self.surface_words.push(word.into());
    }

    pub fn record_stage(&mut self, label: impl Into<String>) {
        self.trace.push(label.into());
    }
}

/// `ln(1 + (N - df + 0.5) / (df + 0.5))`, never negative.
pub fn idf(num_docs: usize, doc_freq: usize) -> f64 {
    let (n, df) = (num_docs as f64, doc_freq as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

fn tf_component(tf: u32, len: u32, avg_len: f64, params: &RankingParams) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    let tf = f64::from(tf);
    let norm = if avg_len > 0.0 { f64::from(len) / avg_len } else { 1.0 };
    tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm))
}

/// BM25 contribution of `term` in `facet` of one document.
pub fn bm25(
    index: &InvertedIndex,
    facet: Facet,
    term: &str,
    doc_id: &str,
    params: &RankingParams,
) -> Result<f64> {
    let ordinal = index
        .ordinal(doc_id)
        .ok_or_else(|| Error::Index(format!("unknown document '{doc_id}'")))?;
    let tf = index.term_freq(facet, term, ordinal);
    if tf == 0 {
        return Ok(0.0);
    }
    let idf = idf(index.num_docs(), index.doc_freq(facet, term));
    Ok(idf * tf_component(tf, index.doc_len(facet, ordinal), index.avg_len(facet), params))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

/// Score descending, then doc id ascending.
pub fn sort_scored(docs: &mut [ScoredDoc]) {
    docs.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
}

/// Rank every document with a positive score; at most `top_k` results.
pub fn search(
    index: &InvertedIndex,
    query: &QueryRep,
    weights: &FacetWeights,
    params: &RankingParams,
) -> Result<Vec<ScoredDoc>> {
    params.validate()?;
    if !weights.is_searchable() {
        return Err(Error::Config("at least one facet weight must be positive".into()));
    }
    let n = index.num_docs();
    let mut total = vec![0.0f64; n];
    let mut best = vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    let facets: Vec<(Facet, f64, f64)> =
        weights.active().map(|(f, w)| (f, w, index.avg_len(f))).collect();

    for term in query.terms().iter().filter(|t| t.weight > 0.0) {
        for &(facet, facet_weight, avg_len) in &facets {
            let postings = index.postings(facet, &term.term);
            if postings.is_empty() {
                continue;
            }
            let idf = idf(n, postings.len());
            for p in postings {
                let s = facet_weight
                    * idf
                    * tf_component(p.tf, index.doc_len(facet, p.doc), avg_len, params);
                let slot = &mut best[p.doc as usize];
                if *slot == 0.0 {
                    touched.push(p.doc);
                }
                if s > *slot {
                    *slot = s;
                }
            }
        }
        for doc in touched.drain(..) {
            total[doc as usize] += term.weight * best[doc as usize];
            best[doc as usize] = 0.0;
        }
    }

    let mut ranked: Vec<ScoredDoc> = total
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(i, &score)| ScoredDoc { doc_id: index.doc_id(i as u32).to_string(), score })
        .collect();
    sort_scored(&mut ranked);
    ranked.truncate(params.top_k);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::text::AnalyzerConfig;

    fn index(docs: &[(&str, &str, &str)]) -> InvertedIndex {
        let docs: Vec<Document> = docs
            .iter()
            .map(|(id, title, body)| Document {
                doc_id: id.to_string(),
                title: title.to_string(),
                body: body.to_string(),
                ..Default::default()
            })
            .collect();
        InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap()
    }

    #[test]
    fn single_doc_score() {
        let idx = index(&[("d", "", "fever")]);
        let s = bm25(&idx, Facet::Body, "fever", "d", &RankingParams::default()).unwrap();
        assert!((s - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((s - 0.287682).abs() < 1e-6);
    }

    #[test]
    fn absent_term_scores_zero() {
        let idx = index(&[("d", "", "fever")]);
        assert_eq!(bm25(&idx, Facet::Body, "cough", "d", &RankingParams::default()).unwrap(), 0.0);
        assert!(bm25(&idx, Facet::Body, "fever", "nope", &RankingParams::default()).is_err());
    }

    #[test]
    fn b_zero_ignores_length() {
        let idx = index(&[("a", "", "fever"), ("b", "", "fever cough rash sepsis shock")]);
        let params = RankingParams { b: 0.0, ..Default::default() };
        let a = bm25(&idx, Facet::Body, "fever", "a", &params).unwrap();
        let b = bm25(&idx, Facet::Body, "fever", "b", &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_weights_rejected() {
        let idx = index(&[("a", "", "fever")]);
        let q = QueryRep::from_text("fever", &idx);
        let err = search(&idx, &q, &FacetWeights::default(), &RankingParams::default());
        assert!(matches!(err, Err(Error::Config(_))));
        assert!(FacetWeights::new([(Facet::Title, 2.5)]).is_err());
    }

    #[test]
    fn ties_break_by_doc_id_and_zero_scores_dropped() {
        let idx = index(&[("b", "", "fever"), ("a", "", "fever"), ("c", "", "cough")]);
        let q = QueryRep::from_text("fever", &idx);
        let ranked = search(&idx, &q, &FacetWeights::baseline(), &RankingParams::default()).unwrap();
        let ids: Vec<_> = ranked.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn top_k_truncates() {
        let idx = index(&[("a", "", "fever"), ("b", "", "fever fever"), ("c", "", "fever")]);
        let q = QueryRep::from_text("fever", &idx);
        let params = RankingParams { top_k: 2, ..Default::default() };
        assert_eq!(search(&idx, &q, &FacetWeights::baseline(), &params).unwrap().len(), 2);
    }

    #[test]
    fn weights_parse_and_display() {
        let w: FacetWeights = "title:1.5, all:1".parse().unwrap();
        assert_eq!(w.get(Facet::Title), 1.5);
        assert_eq!(w.to_string(), "title:1.5,all:1");
        assert_eq!(w.to_string().parse::<FacetWeights>().unwrap(), w);
        assert!("bogus:1".parse::<FacetWeights>().is_err());
    }
}
