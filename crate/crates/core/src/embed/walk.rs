use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::Arc;

use lru::LruCache;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{AliasTable, Node2VecConfig};
use crate::error::{Error, Result};
use crate::graph::{NodeId, PropertyGraph};

/// Compact unlabeled adjacency used for walking. Node `i` is `ids[i]`;
/// neighbour lists are sorted and duplicate-free, so parallel edges of
/// different types count once.
#[derive(Debug, Clone)]
pub struct WalkGraph {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, u32>,
    adj: Vec<Vec<u32>>,
}

impl WalkGraph {
    pub fn from_graph(graph: &PropertyGraph, directed: bool) -> Self {
        let ids: Vec<NodeId> = graph.nodes().map(|n| n.id).collect();
        let index: HashMap<NodeId, u32> =
            ids.iter().enumerate().map(|(i, &id)| (id, i as u32)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (src, _, dst) in graph.edges() {
            let (s, d) = (index[&src], index[&dst]);
            adj[s as usize].push(d);
            if !directed {
                adj[d as usize].push(s);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        WalkGraph { ids, index, adj }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: u32) -> NodeId {
        self.ids[i as usize]
    }

    pub fn position(&self, id: NodeId) -> Option<u32> {
        self.index.get(&id).copied()
    }

    pub fn neighbors(&self, i: u32) -> &[u32] {
        &self.adj[i as usize]
    }

    fn adjacent(&self, a: u32, b: u32) -> bool {
        self.adj[a as usize].binary_search(&b).is_ok()
    }

    /// Unnormalized weights for stepping from `curr` to each of its
    /// neighbours, having arrived from `prev`: 1/p back to `prev`, 1 to a
    /// common neighbour of `prev`, 1/q otherwise.
    pub fn transition_weights(&self, prev: u32, curr: u32, p: f64, q: f64) -> Vec<f64> {
        self.neighbors(curr)
            .iter()
            .map(|&x| {
                if x == prev {
                    1.0 / p
                } else if self.adjacent(prev, x) {
                    1.0
                } else {
                    1.0 / q
                }
            })
            .collect()
    }
}

/// Second-order transition weights out of `curr` on the undirected view of
/// `graph`, one entry per distinct neighbour in id order. Empty when `curr`
/// is isolated.
pub fn transition_weights(
    graph: &PropertyGraph,
    prev: NodeId,
    curr: NodeId,
    p: f64,
    q: f64,
) -> Result<Vec<(NodeId, f64)>> {
    graph.node(prev)?;
    graph.node(curr)?;
    let undirected = |id: NodeId| {
        let mut v: Vec<NodeId> = graph
            .out_edges(id)
            .iter()
            .chain(graph.in_edges(id))
            .map(|&(_, n)| n)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let around_prev = undirected(prev);
    Ok(undirected(curr)
        .into_iter()
        .map(|x| {
            let w = if x == prev {
                1.0 / p
            } else if around_prev.binary_search(&x).is_ok() {
                1.0
            } else {
                1.0 / q
            };
            (x, w)
        })
        .collect())
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn walk_seed(seed: u64, round: usize, start: NodeId) -> u64 {
    mix(mix(seed ^ mix(round as u64)) ^ start.0)
}

struct Walker<'a> {
    graph: &'a WalkGraph,
    config: &'a Node2VecConfig,
    cache: LruCache<(u32, u32), Arc<AliasTable>>,
}

impl Walker<'_> {
    fn walk(&mut self, start: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let uniform = self.config.p == 1.0 && self.config.q == 1.0;
        let mut walk = Vec::with_capacity(self.config.walk_length);
        walk.push(start);
        while walk.len() < self.config.walk_length {
            let curr = *walk.last().unwrap();
            let nbrs = self.graph.neighbors(curr);
            if nbrs.is_empty() {
                break;
            }
            let next = if walk.len() == 1 || uniform {
                nbrs[rng.random_range(0..nbrs.len())]
            } else {
                let prev = walk[walk.len() - 2];
                let table = self.table(prev, curr);
                nbrs[table.sample(rng)]
            };
            walk.push(next);
        }
        walk
    }

    fn table(&mut self, prev: u32, curr: u32) -> Arc<AliasTable> {
        if let Some(t) = self.cache.get(&(prev, curr)) {
            return Arc::clone(t);
        }
        let weights = self
            .graph
            .transition_weights(prev, curr, self.config.p, self.config.q);
        let t = Arc::new(AliasTable::new(&weights).expect("positive weights"));
        self.cache.put((prev, curr), Arc::clone(&t));
        t
    }
}

/// Index-space walks. Each walk has its own generator derived from the
/// global seed, the round and the start node, so the output does not
/// depend on how the work is scheduled.
pub(crate) fn walks_on(graph: &WalkGraph, config: &Node2VecConfig) -> Vec<Vec<u32>> {
    let cache_cap = NonZeroUsize::new(config.alias_cache.max(1)).unwrap();
    let mut out = Vec::with_capacity(graph.len() * config.walks_per_node);
    for round in 0..config.walks_per_node {
        let mut order: Vec<u32> = (0..graph.len() as u32).collect();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(mix(config.seed ^ mix(round as u64 + 1)));
        order.shuffle(&mut shuffle_rng);
        let walks: Vec<Vec<u32>> = order
            .par_iter()
            .map_init(
                || Walker {
                    graph,
                    config,
                    cache: LruCache::new(cache_cap),
                },
                |walker, &start| {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(walk_seed(config.seed, round, graph.id(start)));
                    walker.walk(start, &mut rng)
                },
            )
            .collect();
        out.extend(walks);
    }
    out
}

/// `walks_per_node` rounds; each round visits every node once as a start,
/// in a freshly shuffled order.
pub fn generate_walks(graph: &PropertyGraph, config: &Node2VecConfig) -> Result<Vec<Vec<NodeId>>> {
    config.validate()?;
    if graph.is_empty() {
        return Err(Error::validation("cannot walk an empty graph"));
    }
    let wg = WalkGraph::from_graph(graph, config.directed);
    Ok(walks_on(&wg, config)
        .into_iter()
        .map(|w| w.into_iter().map(|i| wg.id(i)).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeType, NodeLabel, Props};

    fn artists(g: &mut PropertyGraph, n: usize) -> Vec<NodeId> {
        (0..n)
            .map(|i| g.add_node(NodeLabel::Artist, &format!("a{i}"), Props::new()).unwrap())
            .collect()
    }

    #[test]
    fn uniform_when_p_q_one() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, 4);
        g.add_edge(v[0], EdgeType::Influenced, v[1]).unwrap();
        g.add_edge(v[1], EdgeType::Influenced, v[2]).unwrap();
        g.add_edge(v[1], EdgeType::Influenced, v[3]).unwrap();
        g.add_edge(v[2], EdgeType::Influenced, v[3]).unwrap();
        let w = transition_weights(&g, v[0], v[1], 1.0, 1.0).unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.iter().all(|&(_, x)| x == 1.0));
    }

    #[test]
    fn path_rule() {
        // t - v - x, x not adjacent to t
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, 3);
        let (t, mid, x) = (v[0], v[1], v[2]);
        g.add_edge(t, EdgeType::Influenced, mid).unwrap();
        g.add_edge(mid, EdgeType::Influenced, x).unwrap();
        let w = transition_weights(&g, t, mid, 0.5, 2.0).unwrap();
        assert_eq!(w, vec![(t, 2.0), (x, 0.5)]);
    }

    #[test]
    fn triangle_rule() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, 3);
        let (t, mid, x) = (v[0], v[1], v[2]);
        g.add_edge(t, EdgeType::Influenced, mid).unwrap();
        g.add_edge(mid, EdgeType::Influenced, x).unwrap();
        g.add_edge(x, EdgeType::Influenced, t).unwrap();
        let (p, q) = (4.0, 0.25);
        let w = transition_weights(&g, t, mid, p, q).unwrap();
        assert_eq!(w, vec![(t, 1.0 / p), (x, 1.0)]);
    }

    #[test]
    fn isolated_node_has_no_transitions() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, 2);
        assert!(transition_weights(&g, v[0], v[1], 1.0, 1.0).unwrap().is_empty());
    }

    #[test]
    fn isolated_node_walks_have_length_one() {
        let mut g = PropertyGraph::new();
        artists(&mut g, 1);
        let cfg = Node2VecConfig {
            walks_per_node: 3,
            ..Default::default()
        };
        let walks = generate_walks(&g, &cfg).unwrap();
        assert_eq!(walks.len(), 3);
        assert!(walks.iter().all(|w| w.len() == 1));
    }

    #[test]
    fn two_nodes_alternate() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, 2);
        g.add_edge(v[0], EdgeType::Influenced, v[1]).unwrap();
        let cfg = Node2VecConfig {
            walk_length: 9,
            walks_per_node: 4,
            ..Default::default()
        };
        let walks = generate_walks(&g, &cfg).unwrap();
        assert_eq!(walks.len(), 8);
        for w in &walks {
            assert_eq!(w.len(), 9);
            assert!(w.windows(2).all(|p| p[0] != p[1]));
        }
    }

    #[test]
    fn directed_walks_stop_at_sinks() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, 2);
        g.add_edge(v[0], EdgeType::Influenced, v[1]).unwrap();
        let cfg = Node2VecConfig {
            directed: true,
            walks_per_node: 1,
            ..Default::default()
        };
        let mut walks = generate_walks(&g, &cfg).unwrap();
        walks.sort();
        assert_eq!(walks, vec![vec![v[0], v[1]], vec![v[1]]]);
    }

    #[test]
    fn biased_walks_are_seeded() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, 12);
        for i in 0..12 {
            g.add_edge(v[i], EdgeType::Influenced, v[(i + 1) % 12]).unwrap();
            g.add_edge(v[i], EdgeType::Influenced, v[(i + 5) % 12]).unwrap();
        }
        let cfg = Node2VecConfig {
            p: 0.5,
            q: 3.0,
            alias_cache: 4,
            seed: 17,
            ..Default::default()
        };
        let a = generate_walks(&g, &cfg).unwrap();
        let b = generate_walks(&g, &cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_walks(&g, &Node2VecConfig { seed: 18, ..cfg }).unwrap();
        assert_ne!(a, c);
        for w in &a {
            for step in w.windows(2) {
                let (s, d) = (step[0], step[1]);
                assert!(g.has_edge(s, EdgeType::Influenced, d) || g.has_edge(d, EdgeType::Influenced, s));
            }
        }
    }
}
