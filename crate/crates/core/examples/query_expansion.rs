//! Expand one topic with concepts, pseudo relevance feedback and embeddings.

use std::path::Path;

use cdsbench::corpus::{load_topics, parse_documents, ConceptLexicon, Corpus, EmbeddingTable};
use cdsbench::expansion::{expand_concepts, expand_embeddings, expand_prf, ExpansionParams};
use cdsbench::index::InvertedIndex;
use cdsbench::ranking::{search, FacetWeights, QueryRep, RankingParams};
use cdsbench::text::AnalyzerConfig;

fn main() -> cdsbench::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/minicorpus");
    let read = |name: &str| std::fs::read(dir.join(name));
    let docs = parse_documents(&read("documents.txt")?)?;
    let analyzer = AnalyzerConfig::default();
    let index = InvertedIndex::build(&docs, &analyzer)?;
    let corpus = Corpus::new(docs)?;
    let lexicon = ConceptLexicon::parse(&read("lexicon.txt")?)?;
    let table = EmbeddingTable::parse(&read("embeddings.txt")?)?;
    let topic = &load_topics(&read("topics.txt")?)?[0];

    let weights = FacetWeights::baseline();
    let ranking = RankingParams::default();
    let params = ExpansionParams { feedback_docs: 5, expansion_terms: 5, ..ExpansionParams::default() };

    let base = QueryRep::from_text(&topic.summary, &index);
    let q = expand_concepts(&base, &topic.summary, &lexicon, &analyzer, 0.5)?;
    let q = expand_prf(&q, &index, &corpus, &weights, &ranking, &params)?;
    let q = expand_embeddings(&q, &table, &analyzer, &params)?;

    println!("topic {}: {}", topic.topic_id, topic.summary);
    println!("stages: {:?}", q.trace());
    for t in q.expansions() {
        println!("  + {:<16} {:.3}", t.term, t.weight);
    }
    let before = search(&index, &base, &weights, &ranking)?;
    let after = search(&index, &q, &weights, &ranking)?;
    println!("top 5 before: {:?}", before.iter().take(5).map(|d| d.doc_id.as_str()).collect::<Vec<_>>());
    println!("top 5 after:  {:?}", after.iter().take(5).map(|d| d.doc_id.as_str()).collect::<Vec<_>>());
    Ok(())
}
