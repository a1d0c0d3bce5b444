//! node2vec context embeddings: biased second-order random walks over the
//! graph followed by skip-gram training with negative sampling.

mod alias;
mod io;
mod skipgram;
mod walk;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, PropertyGraph};

pub use alias::AliasTable;
pub use io::{decode_embeddings, encode_embeddings, load_embeddings, save_embeddings};
pub(crate) use io::{decode_vectors, encode_vectors};
pub use skipgram::train_skipgram;
pub use walk::{generate_walks, transition_weights, WalkGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Node2VecConfig {
    pub dim: usize,
    /// Return parameter: weight 1/p for stepping back to the previous node.
    pub p: f64,
    /// In-out parameter: weight 1/q for moving away from the previous node.
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial SGD step, decayed linearly to 1e-4 of itself.
    pub learning_rate: f64,
    pub seed: u64,
    /// Walk along edge direction only. Off by default: an artwork should
    /// reach its artist and the artist its artworks.
    pub directed: bool,
    /// Bound on cached second-order alias tables per walker.
    pub alias_cache: usize,
}

impl Default for Node2VecConfig {
    fn default() -> Self {
        Node2VecConfig {
            dim: 128,
            p: 1.0,
            q: 1.0,
            walk_length: 40,
            walks_per_node: 10,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
            directed: false,
            alias_cache: 1 << 16,
        }
    }
}

impl Node2VecConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("dim", self.dim),
            ("walk_length", self.walk_length),
            ("walks_per_node", self.walks_per_node),
            ("window", self.window),
            ("negatives", self.negatives),
            ("alias_cache", self.alias_cache),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::validation(format!("node2vec {name} must be at least 1")));
            }
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("learning_rate", self.learning_rate)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("node2vec {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// One `dim`-long vector per node id.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    ids: Vec<NodeId>,
    data: Vec<f32>,
    index: HashMap<NodeId, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, ids: Vec<NodeId>, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("embedding dim must be at least 1"));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::Shape(format!(
                "{} ids x {dim} dims needs {} values, got {}",
                ids.len(),
                ids.len() * dim,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("embedding contains non-finite values"));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, &id) in ids.iter().enumerate() {
            if index.insert(id, i).is_some() {
                return Err(Error::validation(format!("duplicate embedding for node {id}")));
            }
        }
        Ok(EmbeddingTable {
            dim,
            ids,
            data,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn get(&self, id: NodeId) -> Option<&[f32]> {
        self.index
            .get(&id)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &[f32])> + '_ {
        self.ids.iter().copied().zip(self.data.chunks_exact(self.dim))
    }

    #[cfg(test)]
    pub(crate) fn raw(&self) -> &[f32] {
        &self.data
    }
}

/// Bitwise equality: same ids in the same order and identical float bits.
impl PartialEq for EmbeddingTable {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.ids == other.ids
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Walks then skip-gram; the graph is read as undirected unless
/// `config.directed` is set.
pub fn node2vec(graph: &PropertyGraph, config: &Node2VecConfig) -> Result<EmbeddingTable> {
    if graph.is_empty() {
        return Err(Error::validation("cannot embed an empty graph"));
    }
    let walks = generate_walks(graph, config)?;
    train_skipgram(&walks, config)
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        dot += x as f64 * y as f64;
        na += x as f64 * x as f64;
        nb += y as f64 * y as f64;
    }
    dot / (na.sqrt() * nb.sqrt())
}
