//! Binary snapshot of a whole graph.
//!
//! ```text
//! "AGPH" | version u16
//! nodes section: u64 byte length | u64 slot count | per slot: u8 tag
//!     (0 = empty, 1 = node: u8 label, u32-prefixed name, u32-prefixed props JSON)
//! edges section: u64 byte length | u64 edge count | per edge: u64 src, u8 type, u64 dst
//! ```
//!
//! Empty slots are written explicitly so ids survive the round trip. Label
//! and name indexes are rebuilt on load.

use std::path::Path;

use super::{EdgeType, Node, NodeId, NodeLabel, PropertyGraph, Props};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AGPH";
const VERSION: u16 = 1;

pub fn encode_snapshot(graph: &PropertyGraph) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u16(VERSION);

    let mut nodes = Writer::new();
    nodes.u64(graph.slots.len() as u64);
    for slot in &graph.slots {
        match slot {
            None => nodes.u8(0),
            Some(node) => {
                nodes.u8(1);
                nodes.u8(node.label.ordinal() as u8);
                nodes.str_u32(&node.name);
                let props = serde_json::to_string(&node.props).expect("props serialize");
                nodes.str_u32(&props);
            }
        }
    }
    w.section(nodes);

    let mut edges = Writer::new();
    edges.u64(graph.edge_count() as u64);
    for (src, ty, dst) in graph.edges() {
        edges.u64(src.0);
        edges.u8(ty.ordinal() as u8);
        edges.u64(dst.0);
    }
    w.section(edges);
    w.buf
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<PropertyGraph> {
    let mut r = Reader::new(bytes, "graph snapshot");
    r.magic(MAGIC)?;
    r.version(VERSION)?;

    let mut graph = PropertyGraph::new();
    let mut nodes = r.section()?;
    let slots = nodes.count(1)?;
    for i in 0..slots {
        match nodes.u8()? {
            0 => {}
            1 => {
                let label = nodes.u8()?;
                let label = NodeLabel::from_ordinal(label)
                    .ok_or_else(|| nodes.err(format!("unknown label tag {label}")))?;
                let name = nodes.str_u32()?;
                if name.trim().is_empty() || name.trim() != name {
                    return Err(nodes.err(format!("slot {i}: invalid name {name:?}")));
                }
                if graph.find(label, name).is_some() {
                    return Err(nodes.err(format!("duplicate node {label} {name:?}")));
                }
                let props: Props = serde_json::from_str(nodes.str_u32()?)
                    .map_err(|e| nodes.err(format!("slot {i}: bad props: {e}")))?;
                graph.insert_at(Node {
                    id: NodeId(i as u64),
                    label,
                    name: name.to_owned(),
                    props,
                });
            }
            t => return Err(nodes.err(format!("slot {i}: bad tag {t}"))),
        }
    }
    nodes.finish()?;
    graph.slots.resize_with(slots, || None);
    graph.out_adj.resize_with(slots, Vec::new);
    graph.in_adj.resize_with(slots, Vec::new);

    let mut edges = r.section()?;
    let count = edges.count(17)?;
    for _ in 0..count {
        let src = NodeId(edges.u64()?);
        let tag = edges.u8()?;
        let ty = EdgeType::from_ordinal(tag)
            .ok_or_else(|| edges.err(format!("unknown edge tag {tag}")))?;
        let dst = NodeId(edges.u64()?);
        match graph.add_edge(src, ty, dst) {
            Ok(true) => {}
            Ok(false) => return Err(edges.err(format!("duplicate edge {src}-{ty}->{dst}"))),
            Err(e) => return Err(edges.err(e.to_string())),
        }
    }
    edges.finish()?;
    r.finish()?;
    Ok(graph)
}

pub fn save_snapshot(graph: &PropertyGraph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_snapshot(graph)).map_err(Error::from)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<PropertyGraph> {
    decode_snapshot(&std::fs::read(path)?)
}
