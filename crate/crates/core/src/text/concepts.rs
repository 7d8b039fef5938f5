use std::collections::HashSet;

use crate::corpus::ConceptLexicon;

/// A concept found in text, in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedConcept {
    pub concept_id: String,
    pub preferred_name: String,
}

/// Lowercased alphanumeric tokens with stopwords kept and no stemming; the
/// form both lexicon phrases and input text are matched in.
pub fn concept_tokens(text: &str) -> Vec<String> {
    super::tokenize(text).collect()
}

/// Greedy left-to-right longest match against the lexicon. Matches of a
/// semantic type outside the lexicon's allowed set are consumed, then dropped.
pub fn extract_concepts(text: &str, lexicon: &ConceptLexicon) -> Vec<ExtractedConcept> {
    let tokens = concept_tokens(text);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = (1..=lexicon.max_phrase_len().min(tokens.len() - i))
            .rev()
            .find_map(|len| lexicon.lookup(&tokens[i..i + len]).map(|e| (len, e)));
        match longest {
            Some((len, entry)) => {
                if lexicon.is_allowed(&entry.semantic_type) && seen.insert(entry.concept_id.clone())
                {
                    out.push(ExtractedConcept {
                        concept_id: entry.concept_id.clone(),
                        preferred_name: entry.preferred_name.clone(),
                    });
                }
                i += len;
            }
            None => i += 1,
        }
    }
    out
}
