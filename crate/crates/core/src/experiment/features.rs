//! Visual feature file: `"AGFT"`, then the same layout as the embedding
//! file (version u16, dim u32, count u64, id u64 + f32 values per artwork).

use std::path::Path;

use crate::embed::{decode_vectors, encode_vectors, EmbeddingTable};
use crate::error::Result;
use crate::graph::NodeId;

const MAGIC: &[u8; 4] = b"AGFT";

/// Precomputed visual feature vectors keyed by artwork id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable(EmbeddingTable);

impl FeatureTable {
    pub fn new(dim: usize, ids: Vec<NodeId>, data: Vec<f32>) -> Result<Self> {
        let t = EmbeddingTable::new(dim, ids, data)?;
        if let Some((id, _)) = t.iter().find(|(_, v)| !v.iter().all(|x| x.is_finite())) {
            return Err(crate::Error::validation(format!("features for {id} are not finite")));
        }
        Ok(FeatureTable(t))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<&[f32]> {
        self.0.get(id)
    }

    pub fn ids(&self) -> &[NodeId] {
        self.0.ids()
    }
}

pub fn encode_features(table: &FeatureTable) -> Vec<u8> {
    encode_vectors(MAGIC, &table.0)
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureTable> {
    let t = decode_vectors(MAGIC, bytes, "feature file")?;
    FeatureTable::new(t.dim(), t.ids().to_vec(), t.iter().flat_map(|(_, v)| v.to_vec()).collect())
}

pub fn save_features(table: &FeatureTable, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, encode_features(table))?)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureTable> {
    decode_features(&std::fs::read(path)?)
}
