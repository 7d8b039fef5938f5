//! Negation removal, demographic normalization, stemming and concept extraction.

use std::path::Path;

use cdsbench::corpus::ConceptLexicon;
use cdsbench::text::{
    analyze, detect_negation, extract_concepts, normalize_demographics, remove_negated, AnalyzerConfig,
    DemographicRules, NegationRules,
};

fn main() -> cdsbench::Result<()> {
    let note = "86 y/o m with fever and hypotension. Denies chest pain, no wheezing. Blood cultures positive.";
    let negation = NegationRules::default();
    let demographics = DemographicRules::default();

    println!("input:        {note}");
    println!("triggers:     {}", detect_negation(note, &negation).len());
    let cleaned = remove_negated(note, &negation);
    println!("negation off: {cleaned}");
    let normalized = normalize_demographics(&cleaned, &demographics);
    println!("demographics: {normalized}");
    println!("analyzed:     {:?}", analyze(&normalized, &AnalyzerConfig::default()));

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/minicorpus");
    let lexicon = ConceptLexicon::parse(&std::fs::read(dir.join("lexicon.txt"))?)?;
    for c in extract_concepts(&normalized, &lexicon) {
        println!("concept:      {} {}", c.concept_id, c.preferred_name);
    }
    Ok(())
}
