//! Artistic knowledge graph engine.
//!
//! - [`graph`]: the typed property store, file ingestion and snapshots.
//! - [`query`]: knowledge-discovery queries (influence paths, displaced
//!   artworks, works at a location, entity profiles).
//! - [`embed`]: node2vec context embeddings.
//! - [`model`]: the multi-task multi-modal artist/style/genre classifier.
//! - [`experiment`]: splits, leakage-safe dataset assembly, synthetic data
//!   and the three-mode comparison.

mod codec;
pub mod error;
pub mod graph;
pub mod embed;
pub mod experiment;
pub mod model;
pub mod query;

pub use error::{Error, Result};
