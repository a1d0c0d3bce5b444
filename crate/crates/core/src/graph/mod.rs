//! In-memory property graph for the art knowledge graph.
//!
//! Nodes live in id-indexed slots; a node id is the slot index and never
//! changes. Views derived with [`PropertyGraph::subgraph_excluding`] keep the
//! ids of the graph they were cut from, so embeddings learned on a view can
//! be joined back to the full graph.

mod ingest;
mod schema;
mod snapshot;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ingest::{
    load_graph, parse_edges_tsv, parse_nodes_tsv, EdgeRow, IngestReport, NodeRow, PropConflict,
    RejectedRow, UnknownProp,
};
pub use schema::{EdgeType, NodeLabel};
pub use snapshot::{decode_snapshot, encode_snapshot, load_snapshot, save_snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Scalar property value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropValue {
    Int(i64),
    Float(f64),
    Str(String),
}

impl fmt::Display for PropValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropValue::Int(v) => write!(f, "{v}"),
            PropValue::Float(v) => write!(f, "{v}"),
            PropValue::Str(v) => f.write_str(v),
        }
    }
}

pub type Props = BTreeMap<String, PropValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub label: NodeLabel,
    pub name: String,
    pub props: Props,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
    Both,
}

/// Outcome of an upsert: whether the node was created and which incoming
/// property values disagreed with the stored ones (the stored value wins).
#[derive(Debug, Clone, PartialEq)]
pub struct Upsert {
    pub id: NodeId,
    pub created: bool,
    pub conflicts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes_by_label: BTreeMap<NodeLabel, usize>,
    pub edges_by_type: BTreeMap<EdgeType, usize>,
    pub total_nodes: usize,
    pub total_edges: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    slots: Vec<Option<Node>>,
    out_adj: Vec<Vec<(EdgeType, NodeId)>>,
    in_adj: Vec<Vec<(EdgeType, NodeId)>>,
    label_index: Vec<Vec<NodeId>>,
    name_index: HashMap<(NodeLabel, String), NodeId>,
    edge_set: HashSet<(NodeId, EdgeType, NodeId)>,
    node_count: usize,
}

impl PropertyGraph {
    pub fn new() -> Self {
        PropertyGraph {
            label_index: vec![Vec::new(); NodeLabel::ALL.len()],
            ..Default::default()
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_count == 0
    }

    /// One past the largest id ever assigned in this graph.
    pub fn id_bound(&self) -> usize {
        self.slots.len()
    }

    pub fn add_node(&mut self, label: NodeLabel, name: &str, props: Props) -> Result<NodeId> {
        self.upsert_node(label, name, props).map(|u| u.id)
    }

    /// Inserts a node, or merges `props` into the existing node with the same
    /// `(label, name)`. New keys are added; keys whose values differ keep the
    /// stored value and are listed in [`Upsert::conflicts`].
    pub fn upsert_node(&mut self, label: NodeLabel, name: &str, props: Props) -> Result<Upsert> {
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::validation(format!("{label} node with empty name")));
        }
        if let Some(&id) = self.name_index.get(&(label, name.to_owned())) {
            let node = self.slots[id.index()].as_mut().expect("indexed node is live");
            let mut conflicts = Vec::new();
            for (k, v) in props {
                match node.props.get(&k) {
                    None => {
                        node.props.insert(k, v);
                    }
                    Some(old) if *old != v => conflicts.push(k),
                    Some(_) => {}
                }
            }
            return Ok(Upsert {
                id,
                created: false,
                conflicts,
            });
        }
        let id = NodeId(self.slots.len() as u64);
        self.insert_at(Node {
            id,
            label,
            name: name.to_owned(),
            props,
        });
        Ok(Upsert {
            id,
            created: true,
            conflicts: Vec::new(),
        })
    }

    // Places a node in its own id slot; callers guarantee the slot is free
    // and the (label, name) key is unused.
    fn insert_at(&mut self, node: Node) {
        let idx = node.id.index();
        if idx >= self.slots.len() {
            self.slots.resize_with(idx + 1, || None);
            self.out_adj.resize_with(idx + 1, Vec::new);
            self.in_adj.resize_with(idx + 1, Vec::new);
        }
        if self.label_index.is_empty() {
            self.label_index = vec![Vec::new(); NodeLabel::ALL.len()];
        }
        let ids = &mut self.label_index[node.label.ordinal()];
        // ids are appended in increasing order except when a snapshot is
        // replayed out of order; keep the index sorted either way.
        match ids.last() {
            Some(&last) if last > node.id => {
                let pos = ids.partition_point(|&x| x < node.id);
                ids.insert(pos, node.id);
            }
            _ => ids.push(node.id),
        }
        self.name_index
            .insert((node.label, node.name.clone()), node.id);
        self.slots[idx] = Some(node);
        self.node_count += 1;
    }

    /// Adds `src -[ty]-> dst`. Returns `Ok(false)` if the triple already exists.
    pub fn add_edge(&mut self, src: NodeId, ty: EdgeType, dst: NodeId) -> Result<bool> {
        let src_label = self.node(src)?.label;
        if src == dst {
            return Err(Error::validation(format!("self-loop {ty} on node {src}")));
        }
        let dst_label = self.node(dst)?.label;
        if !ty.permits(src_label, dst_label) {
            return Err(Error::Schema {
                src: src_label,
                edge: ty,
                dst: dst_label,
            });
        }
        if !self.edge_set.insert((src, ty, dst)) {
            return Ok(false);
        }
        self.out_adj[src.index()].push((ty, dst));
        self.in_adj[dst.index()].push((ty, src));
        Ok(true)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.get(id).is_some()
    }

    pub fn get(&self, id: NodeId) -> Option<&Node> {
        self.slots.get(id.index()).and_then(Option::as_ref)
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.get(id).ok_or(Error::NotFound(id))
    }

    pub fn label(&self, id: NodeId) -> Result<NodeLabel> {
        self.node(id).map(|n| n.label)
    }

    pub fn find(&self, label: NodeLabel, name: &str) -> Option<NodeId> {
        self.name_index.get(&(label, name.trim().to_owned())).copied()
    }

    pub fn has_edge(&self, src: NodeId, ty: EdgeType, dst: NodeId) -> bool {
        self.edge_set.contains(&(src, ty, dst))
    }

    /// Live nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.slots.iter().filter_map(Option::as_ref)
    }

    /// Ids carrying `label`, ascending.
    pub fn nodes_with_label(&self, label: NodeLabel) -> &[NodeId] {
        self.label_index
            .get(label.ordinal())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Every edge as `(src, type, dst)`, grouped by source id and in
    /// insertion order within a source.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, EdgeType, NodeId)> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(i, adj)| {
            adj.iter()
                .map(move |&(ty, dst)| (NodeId(i as u64), ty, dst))
        })
    }

    pub fn out_edges(&self, id: NodeId) -> &[(EdgeType, NodeId)] {
        self.out_adj.get(id.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn in_edges(&self, id: NodeId) -> &[(EdgeType, NodeId)] {
        self.in_adj.get(id.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Out-edges first, then in-edges, each in insertion order.
    pub fn neighbors(
        &self,
        id: NodeId,
        direction: Direction,
        types: Option<&[EdgeType]>,
    ) -> Result<Vec<(EdgeType, NodeId)>> {
        self.node(id)?;
        let keep = |&&(ty, _): &&(EdgeType, NodeId)| types.is_none_or(|ts| ts.contains(&ty));
        let outs = matches!(direction, Direction::Out | Direction::Both)
            .then(|| self.out_edges(id))
            .unwrap_or(&[]);
        let ins = matches!(direction, Direction::In | Direction::Both)
            .then(|| self.in_edges(id))
            .unwrap_or(&[]);
        Ok(outs.iter().chain(ins).filter(keep).copied().collect())
    }

    /// First target of `ty` from `id`, in insertion order.
    pub fn first_out(&self, id: NodeId, ty: EdgeType) -> Option<NodeId> {
        self.out_edges(id)
            .iter()
            .find(|(t, _)| *t == ty)
            .map(|&(_, d)| d)
    }

    /// A new graph without the nodes in `exclude` and without any edge
    /// touching them. Surviving nodes keep their ids.
    pub fn subgraph_excluding(&self, exclude: &HashSet<NodeId>) -> PropertyGraph {
        let mut out = PropertyGraph::new();
        for node in self.nodes().filter(|n| !exclude.contains(&n.id)) {
            out.insert_at(node.clone());
        }
        // keep the id space so ids stay valid indexes
        out.slots.resize_with(self.slots.len(), || None);
        out.out_adj.resize_with(self.slots.len(), Vec::new);
        out.in_adj.resize_with(self.slots.len(), Vec::new);
        for (src, ty, dst) in self.edges() {
            if exclude.contains(&src) || exclude.contains(&dst) {
                continue;
            }
            out.edge_set.insert((src, ty, dst));
            out.out_adj[src.index()].push((ty, dst));
            out.in_adj[dst.index()].push((ty, src));
        }
        out
    }

    pub fn stats(&self) -> GraphStats {
        let nodes_by_label: BTreeMap<_, _> = NodeLabel::ALL
            .into_iter()
            .map(|l| (l, self.nodes_with_label(l).len()))
            .collect();
        let mut edges_by_type: BTreeMap<_, _> = EdgeType::ALL.into_iter().map(|t| (t, 0)).collect();
        for adj in &self.out_adj {
            for (ty, _) in adj {
                *edges_by_type.get_mut(ty).unwrap() += 1;
            }
        }
        GraphStats {
            total_nodes: nodes_by_label.values().sum(),
            total_edges: edges_by_type.values().sum(),
            nodes_by_label,
            edges_by_type,
        }
    }

    /// Checks the adjacency-mirror, dedup and schema invariants. Returns a
    /// description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut mirrored = 0usize;
        for (src, ty, dst) in self.edges() {
            let (Some(s), Some(d)) = (self.get(src), self.get(dst)) else {
                return Err(format!("edge {src}-{ty}->{dst} touches a missing node"));
            };
            if !ty.permits(s.label, d.label) {
                return Err(format!("edge {src}-{ty}->{dst} violates the schema"));
            }
            if !self.in_edges(dst).contains(&(ty, src)) {
                return Err(format!("edge {src}-{ty}->{dst} missing from in_adj"));
            }
            if !self.edge_set.contains(&(src, ty, dst)) {
                return Err(format!("edge {src}-{ty}->{dst} missing from edge set"));
            }
            mirrored += 1;
        }
        let in_total: usize = self.in_adj.iter().map(Vec::len).sum();
        if in_total != mirrored || mirrored != self.edge_set.len() {
            return Err(format!(
                "out {mirrored}, in {in_total}, set {} disagree",
                self.edge_set.len()
            ));
        }
        for (i, adj) in self.in_adj.iter().enumerate() {
            for &(ty, src) in adj {
                if !self.out_edges(src).contains(&(ty, NodeId(i as u64))) {
                    return Err(format!("in-edge {src}-{ty}->{i} missing from out_adj"));
                }
            }
        }
        Ok(())
    }
}
