//! Tab-separated node and edge files.
//!
//! ```text
//! label<TAB>name<TAB>props            props: JSON object of scalars
//! src_label<TAB>src_name<TAB>type<TAB>dst_label<TAB>dst_name
//! ```
//!
//! A bad header or an unreadable file aborts the load. Anything wrong with an
//! individual row is recorded in the [`IngestReport`] and the row is skipped.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::{EdgeType, NodeLabel, PropertyGraph, Props};
use crate::error::{Error, Result};

pub const NODES_HEADER: &str = "label\tname\tprops";
pub const EDGES_HEADER: &str = "src_label\tsrc_name\ttype\tdst_label\tdst_name";

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRow {
    pub line: usize,
    pub label: NodeLabel,
    pub name: String,
    pub props: Props,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRow {
    pub line: usize,
    pub src_label: NodeLabel,
    pub src_name: String,
    pub ty: EdgeType,
    pub dst_label: NodeLabel,
    pub dst_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRow {
    pub file: &'static str,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropConflict {
    pub label: NodeLabel,
    pub name: String,
    pub key: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnknownProp {
    pub label: NodeLabel,
    pub key: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub node_rows: usize,
    pub edge_rows: usize,
    /// Nodes created by this load, per label.
    pub nodes_by_label: BTreeMap<NodeLabel, usize>,
    /// Edges created by this load, per type.
    pub edges_by_type: BTreeMap<EdgeType, usize>,
    /// Node rows whose (label, name) was already present and got merged.
    pub duplicate_nodes: usize,
    pub duplicate_edges: usize,
    pub conflicts: Vec<PropConflict>,
    pub unknown_props: Vec<UnknownProp>,
    pub rejected: Vec<RejectedRow>,
}

impl IngestReport {
    pub fn nodes_added(&self) -> usize {
        self.nodes_by_label.values().sum()
    }

    pub fn edges_added(&self) -> usize {
        self.edges_by_type.values().sum()
    }
}

fn data_lines<'a>(
    text: &'a str,
    header: &'static str,
    what: &'static str,
) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    match lines.next() {
        None => {}
        Some((_, h)) if h.trim_start_matches('\u{feff}') == header => {}
        Some((_, h)) => {
            return Err(Error::format(
                what,
                format!("expected header {header:?}, found {h:?}"),
            ))
        }
    }
    Ok(lines.filter(|(_, l)| !l.trim().is_empty()))
}

fn parse_props(raw: &str) -> std::result::Result<Props, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Props::new());
    }
    serde_json::from_str::<Props>(raw).map_err(|e| format!("props is not a JSON object of scalars: {e}"))
}

fn non_empty(field: &str, what: &str) -> std::result::Result<String, String> {
    let t = field.trim();
    if t.is_empty() {
        Err(format!("empty {what}"))
    } else {
        Ok(t.to_owned())
    }
}

/// Parses a nodes file. Errors only on a bad header.
pub fn parse_nodes_tsv(text: &str) -> Result<(Vec<NodeRow>, Vec<RejectedRow>)> {
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for (line, raw) in data_lines(text, NODES_HEADER, "nodes file")? {
        let parsed = (|| {
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 3 {
                return Err(format!("expected 3 fields, found {}", fields.len()));
            }
            Ok(NodeRow {
                line,
                label: fields[0].trim().parse()?,
                name: non_empty(fields[1], "name")?,
                props: parse_props(fields[2])?,
            })
        })();
        match parsed {
            Ok(row) => rows.push(row),
            Err(reason) => rejected.push(RejectedRow {
                file: "nodes",
                line,
                reason,
            }),
        }
    }
    Ok((rows, rejected))
}

/// Parses an edges file. Errors only on a bad header.
pub fn parse_edges_tsv(text: &str) -> Result<(Vec<EdgeRow>, Vec<RejectedRow>)> {
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for (line, raw) in data_lines(text, EDGES_HEADER, "edges file")? {
        let parsed = (|| {
            let f: Vec<&str> = raw.split('\t').collect();
            if f.len() != 5 {
                return Err(format!("expected 5 fields, found {}", f.len()));
            }
            Ok(EdgeRow {
                line,
                src_label: f[0].trim().parse()?,
                src_name: non_empty(f[1], "source name")?,
                ty: f[2].trim().parse()?,
                dst_label: f[3].trim().parse()?,
                dst_name: non_empty(f[4], "target name")?,
            })
        })();
        match parsed {
            Ok(row) => rows.push(row),
            Err(reason) => rejected.push(RejectedRow {
                file: "edges",
                line,
                reason,
            }),
        }
    }
    Ok((rows, rejected))
}

impl PropertyGraph {
    /// Loads node and edge file contents into this graph. Loading the same
    /// contents twice leaves the graph unchanged.
    pub fn ingest(&mut self, nodes_text: &str, edges_text: &str) -> Result<IngestReport> {
        let (node_rows, mut rejected) = parse_nodes_tsv(nodes_text)?;
        let (edge_rows, edge_rejected) = parse_edges_tsv(edges_text)?;
        rejected.extend(edge_rejected);

        let mut report = IngestReport {
            node_rows: node_rows.len(),
            edge_rows: edge_rows.len(),
            ..Default::default()
        };
        let mut unknown: BTreeMap<(NodeLabel, String), usize> = BTreeMap::new();

        for row in node_rows {
            let known = row.label.known_props();
            for key in row.props.keys().filter(|k| !known.contains(&k.as_str())) {
                *unknown.entry((row.label, key.clone())).or_default() += 1;
            }
            let up = self.upsert_node(row.label, &row.name, row.props)?;
            if up.created {
                *report.nodes_by_label.entry(row.label).or_default() += 1;
            } else {
                report.duplicate_nodes += 1;
            }
            report
                .conflicts
                .extend(up.conflicts.into_iter().map(|key| PropConflict {
                    label: row.label,
                    name: row.name.clone(),
                    key,
                }));
        }

        for row in edge_rows {
            let reject = |reason: String| RejectedRow {
                file: "edges",
                line: row.line,
                reason,
            };
            let Some(src) = self.find(row.src_label, &row.src_name) else {
                rejected.push(reject(format!(
                    "unknown source {} {:?}",
                    row.src_label, row.src_name
                )));
                continue;
            };
            let Some(dst) = self.find(row.dst_label, &row.dst_name) else {
                rejected.push(reject(format!(
                    "unknown target {} {:?}",
                    row.dst_label, row.dst_name
                )));
                continue;
            };
            match self.add_edge(src, row.ty, dst) {
                Ok(true) => *report.edges_by_type.entry(row.ty).or_default() += 1,
                Ok(false) => report.duplicate_edges += 1,
                Err(e) => rejected.push(reject(e.to_string())),
            }
        }

        rejected.sort_by_key(|r| (r.file != "nodes", r.line));
        report.rejected = rejected;
        report.unknown_props = unknown
            .into_iter()
            .map(|((label, key), rows)| UnknownProp { label, key, rows })
            .collect();
        Ok(report)
    }
}

/// Reads a nodes file and an edges file into a fresh graph.
pub fn load_graph(
    nodes_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
) -> Result<(PropertyGraph, IngestReport)> {
    let nodes = std::fs::read_to_string(nodes_path)?;
    let edges = std::fs::read_to_string(edges_path)?;
    let mut graph = PropertyGraph::new();
    let report = graph.ingest(&nodes, &edges)?;
    Ok((graph, report))
}
