mod common;

use cdsbench::text::{
    analyze, detect_negation, normalize_demographics, porter_stem, remove_negated, tokenize, AnalyzerConfig,
    DemographicRules, NegationRules,
};

#[test]
fn porter_matches_frozen_reference_stems() {
    let text = std::fs::read_to_string(common::data_dir().join("suites/porter_oracle.txt")).unwrap();
    let mut failures = Vec::new();
    let mut n = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let (word, stem) = line.split_once(' ').unwrap();
        n += 1;
        if porter_stem(word) != stem {
            failures.push(format!("{word}: got {}, want {stem}", porter_stem(word)));
        }
    }
    assert!(n > 1000);
    assert!(failures.is_empty(), "{} mismatches:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn negation_suite() {
    let rules = NegationRules::default();
    for (input, expected) in common::read_suite("negation.tsv") {
        assert_eq!(remove_negated(&input, &rules), expected, "input: {input}");
    }
}

#[test]
fn demographic_suite() {
    let rules = DemographicRules::default();
    for (input, expected) in common::read_suite("demographics.tsv") {
        assert_eq!(normalize_demographics(&input, &rules), expected, "input: {input}");
    }
}

#[test]
fn negation_window_bounds_scope() {
    let text = "no a b c d e f g";
    let wide = NegationRules::default().with_scope_window(10);
    let narrow = NegationRules::default().with_scope_window(2);
    assert_eq!(remove_negated(text, &wide), "");
    assert_eq!(remove_negated(text, &narrow), "c d e f g");
    let m = &detect_negation(text, &narrow)[0];
    assert_eq!((m.trigger.clone(), m.negated.clone()), (0..1, 1..3));
}

#[test]
fn custom_rules_file() {
    let rules = NegationRules::parse("[pre]\nabsent\n[post]\nexcluded\n[term]\nyet\n").unwrap();
    assert_eq!(remove_negated("absent wheeze yet crackles", &rules), "yet crackles");
    assert_eq!(remove_negated("fracture excluded", &rules), "");
    assert!(NegationRules::parse("[pre]\nno\n[term]\nno\n").is_err());
}

#[test]
fn analyzer_stops_and_stems() {
    let cfg = AnalyzerConfig::default();
    assert_eq!(analyze("The patients were treated for sepsis", &cfg), ["patient", "treat", "sepsi"]);
    let toks: Vec<String> = tokenize("Chest-pain, 2x daily").collect();
    assert_eq!(toks, ["chest", "pain", "2x", "daily"]);
    assert_eq!(analyze("The patients", &AnalyzerConfig::raw()), ["the", "patients"]);
}
