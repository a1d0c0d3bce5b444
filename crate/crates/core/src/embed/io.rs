//! Embedding file: `"AGEM"`, version u16, dim u32, count u64, then per node
//! an id u64 followed by `dim` little-endian f32 values.

use std::path::Path;

use super::EmbeddingTable;
use crate::codec::{Reader, Writer};
use crate::error::Result;
use crate::graph::NodeId;

const MAGIC: &[u8; 4] = b"AGEM";
const VERSION: u16 = 1;

pub fn encode_embeddings(table: &EmbeddingTable) -> Vec<u8> {
    encode_vectors(MAGIC, table)
}

pub(crate) fn encode_vectors(magic: &[u8; 4], table: &EmbeddingTable) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(magic);
    w.u16(VERSION);
    w.u32(table.dim() as u32);
    w.u64(table.len() as u64);
    for (id, v) in table.iter() {
        w.u64(id.0);
        w.f32s(v);
    }
    w.buf
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingTable> {
    decode_vectors(MAGIC, bytes, "embedding file")
}

pub(crate) fn decode_vectors(magic: &[u8; 4], bytes: &[u8], what: &'static str) -> Result<EmbeddingTable> {
    let mut r = Reader::new(bytes, what);
    r.magic(magic)?;
    r.version(VERSION)?;
    let dim = r.u32()? as usize;
    if dim == 0 {
        return Err(r.err("dim is zero"));
    }
    let count = r.count(8 + 4 * dim)?;
    let mut ids = Vec::with_capacity(count);
    let mut data = Vec::with_capacity(count * dim);
    for _ in 0..count {
        ids.push(NodeId(r.u64()?));
        data.extend(r.f32s(dim)?);
    }
    if r.remaining() != 0 {
        return Err(r.err(format!(
            "{} bytes left after {count} vectors of dim {dim}",
            r.remaining()
        )));
    }
    EmbeddingTable::new(dim, ids, data)
}

pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, encode_embeddings(table))?)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    decode_embeddings(&std::fs::read(path)?)
}
