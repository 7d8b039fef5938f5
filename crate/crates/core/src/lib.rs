//! Clinical-literature retrieval benchmarking: faceted BM25 search, query
//! rewriting and expansion, facet-weight optimization, pairwise re-ranking,
//! and exact and inferred TREC-style evaluation with significance testing.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod expansion;
pub mod index;
mod io;
pub mod ltr;
pub mod optimizer;
pub mod pipeline;
pub mod ranking;
pub mod text;

pub use error::{Error, Result};
pub use io::write_atomic;
