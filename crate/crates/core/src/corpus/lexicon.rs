use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::text::concept_tokens;

/// Semantic types kept by concept extraction unless configured otherwise.
pub const DEFAULT_ALLOWED_TYPES: [&str; 9] = [
    "Disease or Syndrome",
    "Sign or Symptom",
    "Pathologic Function",
    "Diagnostic Procedure",
    "Anatomical Abnormality",
    "Laboratory Procedure",
    "Pharmacologic Substance",
    "Neoplastic Process",
    "Therapeutic or Preventive Procedure",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub phrase: Vec<String>,
    pub concept_id: String,
    pub semantic_type: String,
    pub preferred_name: String,
}

/// Phrase dictionary mapping token sequences to typed concepts.
#[derive(Debug, Clone)]
pub struct ConceptLexicon {
    entries: Vec<LexiconEntry>,
    by_phrase: HashMap<Vec<String>, usize>,
    allowed_types: BTreeSet<String>,
    max_phrase_len: usize,
}

impl ConceptLexicon {
    pub fn new(entries: Vec<LexiconEntry>) -> Result<Self> {
        let mut by_phrase = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.phrase.is_empty() {
                return Err(Error::format(format!("empty phrase for concept {}", e.concept_id)));
            }
            if by_phrase.insert(e.phrase.clone(), i).is_some() {
                return Err(Error::format(format!("duplicate phrase '{}'", e.phrase.join(" "))));
            }
        }
        let max_phrase_len = entries.iter().map(|e| e.phrase.len()).max().unwrap_or(0);
        Ok(Self {
            entries,
            by_phrase,
            allowed_types: DEFAULT_ALLOWED_TYPES.iter().map(|s| s.to_string()).collect(),
            max_phrase_len,
        })
    }

    /// Parse `phrase|concept_id|semantic_type|preferred_name` lines.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(raw: &[u8]) -> Result<Self> {
        let text = String::from_utf8_lossy(raw);
        let mut entries = Vec::new();
        let mut seen = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            let [phrase, concept_id, semantic_type, preferred_name] = fields[..] else {
                return Err(Error::format_at(
                    line_no,
                    format!("expected 4 '|'-separated fields, found {}", fields.len()),
                ));
            };
            let phrase = concept_tokens(phrase);
            if phrase.is_empty() || concept_id.is_empty() {
                return Err(Error::format_at(line_no, "empty phrase or concept id"));
            }
            if let Some(first) = seen.insert(phrase.clone(), line_no) {
                return Err(Error::format_at(
                    line_no,
                    format!("duplicate phrase '{}' (first on line {first})", phrase.join(" ")),
                ));
            }
            entries.push(LexiconEntry {
                phrase,
                concept_id: concept_id.to_string(),
                semantic_type: semantic_type.to_string(),
                preferred_name: preferred_name.to_string(),
            });
        }
        Self::new(entries)
    }

    pub fn with_allowed_types<I, S>(mut self, types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.allowed_types = types.into_iter().map(Into::into).collect();
        self
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn allowed_types(&self) -> &BTreeSet<String> {
        &self.allowed_types
    }

    pub fn is_allowed(&self, semantic_type: &str) -> bool {
        self.allowed_types.contains(semantic_type)
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    pub fn lookup(&self, phrase: &[String]) -> Option<&LexiconEntry> {
        self.by_phrase.get(phrase).map(|&i| &self.entries[i])
    }

    pub fn contains_concept(&self, concept_id: &str) -> bool {
        self.entries.iter().any(|e| e.concept_id == concept_id)
    }
}
