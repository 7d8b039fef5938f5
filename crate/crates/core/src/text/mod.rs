//! Text processing shared by indexing and query construction.

mod analyzer;
mod concepts;
mod demographics;
mod negation;
mod porter;

pub use analyzer::{analyze, tokenize, AnalyzerConfig};
pub use concepts::{concept_tokens, extract_concepts, ExtractedConcept};
pub use demographics::{normalize_demographics, AgeBand, DemographicRules, Gender};
pub use negation::{detect_negation, remove_negated, NegationMatch, NegationRules};
pub use porter::porter_stem;
