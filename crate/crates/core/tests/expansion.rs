mod common;

use std::collections::{BTreeMap, HashSet};

use cdsbench::corpus::{cosine, ConceptLexicon, Corpus, Document, EmbeddingTable};
use cdsbench::eval::SampledQrels;
use cdsbench::expansion::{
    expand_concepts, expand_embeddings, expand_prf, expand_rf, select_feedback_terms, ExpansionParams,
};
use cdsbench::index::{Facet, InvertedIndex};
use cdsbench::ranking::{search, FacetWeights, QueryRep, RankingParams};
use cdsbench::text::{analyze, AnalyzerConfig};

fn doc(id: &str, title: &str, body: &str) -> Document {
    Document { doc_id: id.into(), title: title.into(), body: body.into(), ..Default::default() }
}

fn synonym_corpus() -> Vec<Document> {
    let mut docs = vec![
        doc("A", "Myocardial infarction", "myocardial infarction also called heart attack"),
        doc("B", "Heart attack outcomes", "heart attack survivors and rehabilitation"),
        doc("C", "Asthma", "wheezing in children"),
        doc("D", "Fractures", "hip fracture surgery"),
    ];
    for i in 0..6 {
        docs.push(doc(&format!("F{i}"), "Filler", "unrelated text about hospital staffing"));
    }
    docs
}

#[test]
fn zero_weight_prf_leaves_ranking_unchanged() {
    let docs = common::random_corpus(21, 200);
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
    let corpus = Corpus::new(docs).unwrap();
    let params = RankingParams::default();
    let w = FacetWeights::baseline();
    let q = QueryRep::from_text("sepsis fever elderly", &index);
    let zero = ExpansionParams { expansion_weight: 0.0, ..ExpansionParams::default() };
    let expanded = expand_prf(&q, &index, &corpus, &w, &params, &zero).unwrap();
    assert!(!expanded.expansions().is_empty());
    assert_eq!(search(&index, &expanded, &w, &params).unwrap(), search(&index, &q, &w, &params).unwrap());

    let none = ExpansionParams { expansion_terms: 0, ..ExpansionParams::default() };
    let expanded = expand_prf(&q, &index, &corpus, &w, &params, &none).unwrap();
    assert!(expanded.expansions().is_empty());
    assert_eq!(expanded.trace(), ["prf"]);
}

#[test]
fn feedback_selection_matches_brute_force() {
    let docs = common::random_corpus(8, 60);
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
    let feedback: Vec<&Document> = docs.iter().take(3).collect();
    let exclude: HashSet<String> = ["sepsi".to_string(), "fever".to_string()].into();
    let got = select_feedback_terms(&feedback, 7, &exclude, &index);

    let n = docs.len() as f64;
    let cfg = AnalyzerConfig::default();
    let all_terms = |d: &Document| {
        [analyze(&d.title, &cfg), analyze(&d.abstract_text, &cfg), analyze(&d.body, &cfg)].concat()
    };
    let mut candidates: BTreeMap<String, f64> = BTreeMap::new();
    for d in &feedback {
        for t in all_terms(d) {
            if exclude.contains(&t) {
                continue;
            }
            let df = docs.iter().filter(|x| all_terms(x).contains(&t)).count() as f64;
            *candidates.entry(t).or_default() += (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        }
    }
    let mut want: Vec<(String, f64)> = candidates.into_iter().collect();
    want.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    want.truncate(7);
    let top = want[0].1;
    assert_eq!(got.len(), 7);
    for (g, (t, s)) in got.iter().zip(&want) {
        assert_eq!(&g.0, t);
        assert!((g.1 - s / top).abs() < 1e-12);
    }
    assert_eq!(got[0].1, 1.0);
    assert!(got.iter().all(|(t, _)| !exclude.contains(t)));
}

#[test]
fn single_term_feedback() {
    let docs = vec![doc("A", "", "sepsis sepsis"), doc("B", "", "sepsis"), doc("C", "", "asthma")];
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
    let got = select_feedback_terms(&[&docs[0], &docs[1]], 5, &HashSet::new(), &index);
    assert_eq!(got, [("sepsi".to_string(), 1.0)]);
}

#[test]
fn prf_pulls_in_synonym_document() {
    let docs = synonym_corpus();
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
    let corpus = Corpus::new(docs.clone()).unwrap();
    let w = FacetWeights::baseline();
    let params = RankingParams::default();
    let q = QueryRep::from_text("myocardial infarction", &index);
    let before: Vec<String> = search(&index, &q, &w, &params).unwrap().into_iter().map(|d| d.doc_id).collect();
    assert_eq!(before, ["A"]);

    let p = ExpansionParams { feedback_docs: 1, expansion_terms: 4, expansion_weight: 0.5, ..Default::default() };
    let expanded = expand_prf(&q, &index, &corpus, &w, &params, &p).unwrap();
    assert_eq!(expanded.original(), q.terms());
    let terms: Vec<&str> = expanded.expansions().iter().map(|t| t.term.as_str()).collect();
    assert!(terms.contains(&"heart") && terms.contains(&"attack"), "{terms:?}");

    let after = search(&index, &expanded, &w, &params).unwrap();
    let oracle = common::exhaustive_search(&docs, index.analyzer(), &expanded, &w, &params);
    assert_eq!(after.iter().map(|d| d.doc_id.as_str()).collect::<Vec<_>>()[..2], ["A", "B"]);
    for (g, (id, s)) in after.iter().zip(&oracle) {
        assert_eq!(&g.doc_id, id);
        assert!((g.score - s).abs() < 1e-9);
    }
}

#[test]
fn prf_with_more_feedback_than_documents() {
    let docs = synonym_corpus();
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
    let corpus = Corpus::new(docs).unwrap();
    let q = QueryRep::from_text("heart", &index);
    let p = ExpansionParams { feedback_docs: 500, ..Default::default() };
    assert!(expand_prf(&q, &index, &corpus, &FacetWeights::baseline(), &RankingParams::default(), &p).is_ok());
}

#[test]
fn relevance_feedback_uses_only_judged_relevant() {
    let docs = synonym_corpus();
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
    let corpus = Corpus::new(docs.clone()).unwrap();
    let w = FacetWeights::baseline();
    let rp = RankingParams::default();
    let q = QueryRep::from_text("heart attack hip", &index);
    let p = ExpansionParams { expansion_terms: 20, ..Default::default() };

    let none = SampledQrels::fully_judged([(1u32, "A", 0u8), (1, "B", 0)]).unwrap();
    let unchanged = expand_rf(&q, &index, &corpus, &w, &rp, none.topic(1), &p).unwrap();
    assert_eq!(unchanged, q);
    assert_eq!(expand_rf(&q, &index, &corpus, &w, &rp, None, &p).unwrap(), q);

    let two = SampledQrels::fully_judged([(1u32, "A", 1u8), (1, "B", 2), (1, "D", 0)]).unwrap();
    let rf = expand_rf(&q, &index, &corpus, &w, &rp, two.topic(1), &p).unwrap();
    let allowed = select_feedback_terms(&[&docs[0], &docs[1]], 20, &q.term_set(), &index);
    let got: Vec<(String, f64)> =
        rf.expansions().iter().map(|t| (t.term.clone(), t.weight / p.expansion_weight)).collect();
    assert_eq!(got.len(), allowed.len());
    for ((a, x), (b, y)) in got.iter().zip(&allowed) {
        assert_eq!(a, b);
        assert!((x - y).abs() < 1e-12);
    }
    assert!(!rf.contains_term("fractur"));
    assert_eq!(rf.trace(), ["rf"]);

    let retrieved = search(&index, &q, &w, &rp).unwrap();
    let all = SampledQrels::fully_judged(retrieved.iter().map(|d| (1u32, d.doc_id.clone(), 1u8))).unwrap();
    let rf_all = expand_rf(&q, &index, &corpus, &w, &rp, all.topic(1), &p).unwrap();
    let prf = expand_prf(&q, &index, &corpus, &w, &rp, &p).unwrap();
    assert_eq!(rf_all.terms(), prf.terms());
}

fn table(words: &[(&str, [f64; 3])]) -> EmbeddingTable {
    EmbeddingTable::from_vectors(3, words.iter().map(|(w, v)| (w.to_string(), v.to_vec()))).unwrap()
}

#[test]
fn embedding_neighbors_match_cosine_scan() {
    let vocab = [
        ("fever", [1.0, 0.1, 0.0]),
        ("pyrexia", [0.9, 0.2, 0.1]),
        ("febrile", [0.8, 0.0, 0.3]),
        ("cough", [0.0, 1.0, 0.2]),
        ("wheeze", [0.1, 0.9, 0.5]),
    ];
    let t = table(&vocab);
    let index = InvertedIndex::build(&[doc("X", "", "x")], &AnalyzerConfig::default()).unwrap();
    let q = QueryRep::from_text("fever", &index);
    let params = ExpansionParams { max_neighbors_per_word: 3, similarity_threshold: 0.6, ..Default::default() };
    let out = expand_embeddings(&q, &t, index.analyzer(), &params).unwrap();

    let fever = vocab[0].1;
    let mut want: Vec<(&str, f64)> = vocab[1..]
        .iter()
        .map(|(w, v)| {
            let dot: f64 = fever.iter().zip(v).map(|(a, b)| a * b).sum();
            let na = fever.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (*w, dot / (na * nb))
        })
        .filter(|(_, s)| *s >= 0.6)
        .collect();
    want.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let added: Vec<&str> = out.surface_words()[1..].iter().map(String::as_str).collect();
    assert_eq!(added, want.iter().map(|w| w.0).collect::<Vec<_>>());
    assert!((cosine(&fever, &vocab[1].1) - want[0].1).abs() < 1e-12);

    let absent = expand_embeddings(&QueryRep::from_text("rash", &index), &t, index.analyzer(), &params).unwrap();
    assert!(absent.expansions().is_empty());
}

#[test]
fn embedding_expansion_respects_word_cap() {
    let mut words: Vec<(String, Vec<f64>)> = Vec::new();
    for i in 0..38 {
        words.push((format!("w{i}"), vec![1.0, i as f64 * 1e-3]));
        for j in 0..3 {
            words.push((format!("n{i}x{j}"), vec![1.0, i as f64 * 1e-3 + (j + 1) as f64 * 1e-4]));
        }
    }
    let t = EmbeddingTable::from_vectors(2, words).unwrap();
    let index = InvertedIndex::build(&[doc("X", "", "x")], &AnalyzerConfig::raw()).unwrap();
    let text: Vec<String> = (0..38).map(|i| format!("w{i}")).collect();
    let q = QueryRep::from_text(&text.join(" "), &index);
    assert_eq!(q.surface_words().len(), 38);
    let out = expand_embeddings(&q, &t, index.analyzer(), &ExpansionParams::default()).unwrap();
    assert_eq!(out.surface_words().len(), 40);
    assert_eq!(out.expansions().len(), 2);
    assert!(out.expansions().iter().all(|x| x.weight == ExpansionParams::default().expansion_weight));
}

#[test]
fn concept_names_appended_once() {
    let lexicon = ConceptLexicon::parse(&std::fs::read(common::minicorpus().join("lexicon.txt")).unwrap()).unwrap();
    let docs = synonym_corpus();
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
    let text = "myocardial infarction with chest pain after a prior myocardial infarction";
    let q = QueryRep::from_text(text, &index);
    let out = expand_concepts(&q, text, &lexicon, index.analyzer(), 0.3).unwrap();
    let appended: Vec<&str> = out.expansions().iter().map(|t| t.term.as_str()).collect();
    assert_eq!(appended, ["myocardi", "infarct", "C0027051", "chest", "pain", "C0008031"]);
    assert!(out.expansions().iter().all(|t| t.weight == 0.3));

    let none = expand_concepts(&q, "nothing relevant here", &lexicon, index.analyzer(), 0.3).unwrap();
    assert_eq!(none, q);
}

#[test]
fn concept_ids_hit_concepts_facet() {
    let mut docs = synonym_corpus();
    docs[1].concept_ids = vec!["C0027051".into()];
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default()).unwrap();
    let lexicon = ConceptLexicon::parse(b"myocardial infarction|C0027051|Disease or Syndrome|MI\n").unwrap();
    let q = QueryRep::from_text("infarction", &index);
    let out = expand_concepts(&q, "myocardial infarction", &lexicon, index.analyzer(), 1.0).unwrap();
    let ranked = search(&index, &out, &FacetWeights::only(Facet::Concepts), &RankingParams::default()).unwrap();
    assert_eq!(ranked.len(), 1);
    assert_eq!(ranked[0].doc_id, "B");
}
