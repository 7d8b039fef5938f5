use std::collections::BTreeSet;

use super::porter::porter_stem;

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Lowercasing, stopword removal and optional Porter stemming.
///
/// An index and every query run against it must share one configuration;
/// the index stores the configuration it was built with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzerConfig {
    stopwords: BTreeSet<String>,
    stem: bool,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self::new(parse_word_list(BUNDLED_STOPWORDS), true)
    }
}

impl AnalyzerConfig {
    pub fn new(stopwords: impl IntoIterator<Item = String>, stem: bool) -> Self {
        let stopwords = stopwords.into_iter().map(|w| w.to_ascii_lowercase()).collect();
        Self { stopwords, stem }
    }

    /// Stopwords read from a one-word-per-line list.
    pub fn from_stopword_list(raw: &str, stem: bool) -> Self {
        Self::new(parse_word_list(raw), stem)
    }

    /// Bundled stopword list without stemming.
    pub fn unstemmed() -> Self {
        Self { stem: false, ..Self::default() }
    }

    /// No stopwords, no stemming: lowercase tokens only.
    pub fn raw() -> Self {
        Self { stopwords: BTreeSet::new(), stem: false }
    }

    pub fn stem(&self) -> bool {
        self.stem
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Analyze one already-lowercased token. `None` for stopwords.
    pub fn term(&self, token: &str) -> Option<String> {
        if token.is_empty() || self.is_stopword(token) {
            return None;
        }
        Some(if self.stem { porter_stem(token) } else { token.to_string() })
    }
}

fn parse_word_list(raw: &str) -> Vec<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Lowercased runs of ASCII alphanumerics. Every other character separates.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_ascii_lowercase)
}

/// Tokenize, drop stopwords, stem. Surviving terms keep their relative order.
pub fn analyze(text: &str, config: &AnalyzerConfig) -> Vec<String> {
    tokenize(text).filter_map(|t| config.term(&t)).collect()
}
