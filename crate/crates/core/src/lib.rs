//! Synonym-expansion search: a chained-hash synonym table feeding query
//! expansion over a positional inverted index, with a crawler, link-based
//! popularity, and a recall evaluation harness.

pub mod crawler;
pub mod evaluation;
pub mod hash;
pub mod link_rank;
pub mod query_engine;
pub mod robots;
pub mod synonym_table;
pub mod term;
pub mod text_index;
pub mod workspace;

pub use term::{normalize_term, InvalidTerm, Term};
