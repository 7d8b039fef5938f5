//! Index the mini-corpus and run one query under two facet weightings.
//!
//! `cargo run --example build_and_search -- "chest pain troponin"`

use std::path::Path;

use cdsbench::corpus::parse_documents;
use cdsbench::index::{Facet, InvertedIndex};
use cdsbench::ranking::{search, FacetWeights, QueryRep, RankingParams};
use cdsbench::text::AnalyzerConfig;

fn main() -> cdsbench::Result<()> {
    let query = std::env::args().nth(1).unwrap_or_else(|| "chest pain troponin".into());
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/minicorpus");
    let docs = parse_documents(&std::fs::read(dir.join("documents.txt"))?)?;
    let index = InvertedIndex::build(&docs, &AnalyzerConfig::default())?;
    println!("{} documents indexed", index.num_docs());

    let q = QueryRep::from_text(&query, &index);
    let params = RankingParams { top_k: 5, ..RankingParams::default() };
    let weightings = [
        ("all fields", FacetWeights::baseline()),
        ("title 1.5, body 0.5", FacetWeights::new([(Facet::Title, 1.5), (Facet::Body, 0.5)])?),
    ];
    for (label, weights) in weightings {
        println!("\n{label}:");
        for hit in search(&index, &q, &weights, &params)? {
            println!("  {:<8} {:.4}", hit.doc_id, hit.score);
        }
    }
    Ok(())
}
