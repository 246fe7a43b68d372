//! Divide-and-conquer seeded graph matching.
//!
//! Given two graphs on the same vertex set and a handful of known
//! correspondences (seeds), the pipeline spectrally embeds both graphs,
//! aligns the embeddings with an orthogonal Procrustes fit anchored on the
//! seeds, jointly clusters the union of embedded points, balances cluster
//! sizes so each cluster admits a bijection, and then solves one seeded
//! quadratic-assignment subproblem per cluster in parallel. The per-cluster
//! alignments are assembled into one global matching.

pub mod cluster;
pub mod embed;
pub mod error;
pub mod graph;
pub mod matching;
pub mod pipeline;
pub mod seedsel;

pub use error::{Error, Result};
