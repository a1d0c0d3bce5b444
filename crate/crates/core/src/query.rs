//! Knowledge-discovery queries over a [`PropertyGraph`].
//!
//! All operations are read-only and return results in a deterministic order
//! so they can be compared across runs and served as stable JSON.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Direction, EdgeType, NodeId, NodeLabel, PropertyGraph, Props};

/// Upper bound on path length for influence queries.
pub const MAX_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathResult {
    pub nodes: Vec<NodeId>,
    pub edge_types: Vec<EdgeType>,
}

impl PathResult {
    pub fn len(&self) -> usize {
        self.edge_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_types.is_empty()
    }
}

/// Which artist-to-artist relations to follow, and in which direction.
/// The default follows `influenced` edges from influencer to influenced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceOptions {
    pub edge_types: Vec<EdgeType>,
    pub direction: Direction,
}

impl Default for InfluenceOptions {
    fn default() -> Self {
        InfluenceOptions {
            edge_types: vec![EdgeType::Influenced],
            direction: Direction::Out,
        }
    }
}

impl InfluenceOptions {
    fn validate(&self) -> Result<()> {
        if self.edge_types.is_empty() {
            return Err(Error::validation("influence query needs at least one edge type"));
        }
        for ty in &self.edge_types {
            if !EdgeType::ARTIST_TO_ARTIST.contains(ty) {
                return Err(Error::Type(format!("{ty} does not connect artists")));
            }
        }
        Ok(())
    }

    fn steps<'g>(
        &'g self,
        graph: &'g PropertyGraph,
        at: NodeId,
    ) -> impl Iterator<Item = (EdgeType, NodeId)> + 'g {
        let outs = matches!(self.direction, Direction::Out | Direction::Both)
            .then(|| graph.out_edges(at))
            .unwrap_or(&[]);
        let ins = matches!(self.direction, Direction::In | Direction::Both)
            .then(|| graph.in_edges(at))
            .unwrap_or(&[]);
        outs.iter()
            .chain(ins)
            .filter(|(ty, _)| self.edge_types.contains(ty))
            .copied()
    }
}

fn expect_label(graph: &PropertyGraph, id: NodeId, allowed: &[NodeLabel]) -> Result<NodeLabel> {
    let label = graph.label(id)?;
    if !allowed.contains(&label) {
        return Err(Error::Type(format!(
            "node {id} is a {label}, expected one of {allowed:?}"
        )));
    }
    Ok(label)
}

fn check_depth(depth: usize) -> Result<()> {
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(Error::validation(format!(
            "depth {depth} outside 1..={MAX_DEPTH}"
        )));
    }
    Ok(())
}

pub fn influence_paths(
    graph: &PropertyGraph,
    from: NodeId,
    to: NodeId,
    max_depth: usize,
) -> Result<Vec<PathResult>> {
    influence_paths_with(graph, from, to, max_depth, &InfluenceOptions::default())
}

/// Every simple path from `from` to `to` of at most `max_depth` hops,
/// shortest first, ties broken by node ids then edge types.
pub fn influence_paths_with(
    graph: &PropertyGraph,
    from: NodeId,
    to: NodeId,
    max_depth: usize,
    opts: &InfluenceOptions,
) -> Result<Vec<PathResult>> {
    expect_label(graph, from, &[NodeLabel::Artist])?;
    expect_label(graph, to, &[NodeLabel::Artist])?;
    check_depth(max_depth)?;
    opts.validate()?;

    let mut found = Vec::new();
    if from == to {
        return Ok(found);
    }
    let mut nodes = vec![from];
    let mut types = Vec::new();
    // explicit stack of neighbour cursors
    let mut stack: Vec<Vec<(EdgeType, NodeId)>> = vec![opts.steps(graph, from).collect()];
    while let Some(frontier) = stack.last_mut() {
        let Some((ty, next)) = frontier.pop() else {
            stack.pop();
            nodes.pop();
            types.pop();
            continue;
        };
        if nodes.contains(&next) {
            continue;
        }
        if next == to {
            let mut path_nodes = nodes.clone();
            path_nodes.push(next);
            let mut path_types = types.clone();
            path_types.push(ty);
            found.push(PathResult {
                nodes: path_nodes,
                edge_types: path_types,
            });
            continue;
        }
        if nodes.len() < max_depth {
            nodes.push(next);
            types.push(ty);
            stack.push(opts.steps(graph, next).collect());
        }
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found)
}

pub fn influence_reachable(
    graph: &PropertyGraph,
    artist: NodeId,
    degrees: usize,
) -> Result<BTreeMap<usize, BTreeSet<NodeId>>> {
    influence_reachable_with(graph, artist, degrees, &InfluenceOptions::default())
}

/// Artists grouped by shortest hop distance from `artist`, for every
/// distance `1..=degrees` (empty sets included).
pub fn influence_reachable_with(
    graph: &PropertyGraph,
    artist: NodeId,
    degrees: usize,
    opts: &InfluenceOptions,
) -> Result<BTreeMap<usize, BTreeSet<NodeId>>> {
    expect_label(graph, artist, &[NodeLabel::Artist])?;
    check_depth(degrees)?;
    opts.validate()?;

    let mut seen = BTreeSet::from([artist]);
    let mut frontier = vec![artist];
    let mut out = BTreeMap::new();
    for degree in 1..=degrees {
        let mut level = BTreeSet::new();
        for &at in &frontier {
            for (_, next) in opts.steps(graph, at) {
                if seen.insert(next) {
                    level.insert(next);
                }
            }
        }
        frontier = level.iter().copied().collect();
        out.insert(degree, level);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplacedArtwork {
    pub artwork: NodeId,
    pub completed_country: NodeId,
    pub stored_country: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplacedReport {
    pub rows: Vec<DisplacedArtwork>,
    /// Artworks whose completion or storage country could not be resolved.
    pub skipped: usize,
}

fn country_of_city(graph: &PropertyGraph, city: NodeId) -> Option<NodeId> {
    graph.first_out(city, EdgeType::InCountry)
}

/// Country an artwork was completed in: `completedIn` a country directly,
/// or `completedIn` a city and that city's `inCountry`.
pub fn completion_country(graph: &PropertyGraph, artwork: NodeId) -> Option<NodeId> {
    let place = graph.first_out(artwork, EdgeType::CompletedIn)?;
    match graph.get(place)?.label {
        NodeLabel::Country => Some(place),
        NodeLabel::City => country_of_city(graph, place),
        _ => None,
    }
}

/// Country an artwork is kept in, via its gallery's city.
pub fn storage_country(graph: &PropertyGraph, artwork: NodeId) -> Option<NodeId> {
    let gallery = graph.first_out(artwork, EdgeType::LocatedInGallery)?;
    let city = graph.first_out(gallery, EdgeType::InCity)?;
    country_of_city(graph, city)
}

/// Artworks kept in a country other than the one they were completed in,
/// ordered by artwork id.
pub fn artworks_displaced(graph: &PropertyGraph) -> DisplacedReport {
    let mut rows = Vec::new();
    let mut skipped = 0;
    for &artwork in graph.nodes_with_label(NodeLabel::Artwork) {
        match (
            completion_country(graph, artwork),
            storage_country(graph, artwork),
        ) {
            (Some(completed), Some(stored)) => {
                if completed != stored {
                    rows.push(DisplacedArtwork {
                        artwork,
                        completed_country: completed,
                        stored_country: stored,
                    });
                }
            }
            _ => skipped += 1,
        }
    }
    DisplacedReport { rows, skipped }
}

fn sources(graph: &PropertyGraph, id: NodeId, ty: EdgeType) -> impl Iterator<Item = NodeId> + '_ {
    graph
        .in_edges(id)
        .iter()
        .filter(move |(t, _)| *t == ty)
        .map(|&(_, s)| s)
}

/// Artworks kept at a gallery, or in any gallery within a city or country.
/// Sorted by id, without duplicates.
pub fn artworks_at_location(graph: &PropertyGraph, place: NodeId) -> Result<Vec<NodeId>> {
    let label = expect_label(
        graph,
        place,
        &[NodeLabel::Gallery, NodeLabel::City, NodeLabel::Country],
    )?;
    let cities: Vec<NodeId> = match label {
        NodeLabel::Country => sources(graph, place, EdgeType::InCountry).collect(),
        NodeLabel::City => vec![place],
        _ => Vec::new(),
    };
    let galleries: Vec<NodeId> = if label == NodeLabel::Gallery {
        vec![place]
    } else {
        cities
            .iter()
            .flat_map(|&c| sources(graph, c, EdgeType::InCity))
            .collect()
    };
    let works: BTreeSet<NodeId> = galleries
        .iter()
        .flat_map(|&g| sources(graph, g, EdgeType::LocatedInGallery))
        .collect();
    Ok(works.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborRef {
    pub id: NodeId,
    pub label: NodeLabel,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborGroup {
    pub edge_type: EdgeType,
    pub direction: Direction,
    pub neighbors: Vec<NeighborRef>,
}

/// Everything known about one entity: its properties and its neighbours
/// grouped by `(edge type, direction)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub id: NodeId,
    pub label: NodeLabel,
    pub name: String,
    pub props: Props,
    pub groups: Vec<NeighborGroup>,
}

pub fn entity_profile(graph: &PropertyGraph, id: NodeId) -> Result<ProfileDocument> {
    let node = graph.node(id)?;
    let mut groups: BTreeMap<(EdgeType, u8), Vec<NeighborRef>> = BTreeMap::new();
    let edges = graph
        .out_edges(id)
        .iter()
        .map(|e| (0u8, e))
        .chain(graph.in_edges(id).iter().map(|e| (1u8, e)));
    for (dir, &(ty, other)) in edges {
        let n = graph.node(other)?;
        groups.entry((ty, dir)).or_default().push(NeighborRef {
            id: other,
            label: n.label,
            name: n.name.clone(),
        });
    }
    Ok(ProfileDocument {
        id,
        label: node.label,
        name: node.name.clone(),
        props: node.props.clone(),
        groups: groups
            .into_iter()
            .map(|((edge_type, dir), neighbors)| NeighborGroup {
                edge_type,
                direction: if dir == 0 { Direction::Out } else { Direction::In },
                neighbors,
            })
            .collect(),
    })
}

/// Up to `n` distinct ids of `label`, chosen uniformly with a seeded
/// generator.
pub fn random_entities(graph: &PropertyGraph, label: NodeLabel, n: usize, seed: u64) -> Vec<NodeId> {
    let pool = graph.nodes_with_label(label);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, pool.len(), n.min(pool.len()))
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Props;

    fn artists(g: &mut PropertyGraph, names: &[&str]) -> Vec<NodeId> {
        names
            .iter()
            .map(|n| g.add_node(NodeLabel::Artist, n, Props::new()).unwrap())
            .collect()
    }

    #[test]
    fn chain_paths() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, &["a", "b", "c"]);
        g.add_edge(v[0], EdgeType::Influenced, v[1]).unwrap();
        g.add_edge(v[1], EdgeType::Influenced, v[2]).unwrap();

        assert!(influence_paths(&g, v[0], v[0], 3).unwrap().is_empty());
        let paths = influence_paths(&g, v[0], v[2], 2).unwrap();
        assert_eq!(
            paths,
            vec![PathResult {
                nodes: v.clone(),
                edge_types: vec![EdgeType::Influenced; 2]
            }]
        );
        assert!(influence_paths(&g, v[0], v[2], 1).unwrap().is_empty());
        // reversed direction finds nothing forward, one path backward
        assert!(influence_paths(&g, v[2], v[0], 2).unwrap().is_empty());
        let back = InfluenceOptions {
            direction: Direction::In,
            ..Default::default()
        };
        assert_eq!(influence_paths_with(&g, v[2], v[0], 2, &back).unwrap().len(), 1);
    }

    #[test]
    fn shortest_first() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, &["a", "b", "c", "d"]);
        g.add_edge(v[0], EdgeType::Influenced, v[1]).unwrap();
        g.add_edge(v[1], EdgeType::Influenced, v[2]).unwrap();
        g.add_edge(v[2], EdgeType::Influenced, v[3]).unwrap();
        g.add_edge(v[0], EdgeType::Influenced, v[3]).unwrap();
        g.add_edge(v[0], EdgeType::Influenced, v[2]).unwrap();
        let lens: Vec<_> = influence_paths(&g, v[0], v[3], 6)
            .unwrap()
            .iter()
            .map(PathResult::len)
            .collect();
        assert_eq!(lens, vec![1, 2, 3]);
    }

    #[test]
    fn type_and_depth_errors() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, &["a", "b"]);
        let w = g.add_node(NodeLabel::Artwork, "w", Props::new()).unwrap();
        assert!(matches!(influence_paths(&g, w, v[0], 2), Err(Error::Type(_))));
        assert!(matches!(influence_reachable(&g, w, 2), Err(Error::Type(_))));
        assert!(matches!(influence_paths(&g, v[0], v[1], 7), Err(Error::Validation(_))));
        assert!(influence_paths(&g, v[0], v[1], 0).is_err());
        let bad = InfluenceOptions {
            edge_types: vec![EdgeType::HasStyle],
            ..Default::default()
        };
        assert!(influence_paths_with(&g, v[0], v[1], 2, &bad).is_err());
        assert!(matches!(influence_paths(&g, NodeId(77), v[1], 2), Err(Error::NotFound(_))));
    }

    #[test]
    fn teaching_joins_when_requested() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, &["master", "pupil", "heir"]);
        g.add_edge(v[1], EdgeType::TaughtBy, v[0]).unwrap();
        g.add_edge(v[1], EdgeType::Influenced, v[2]).unwrap();
        let opts = InfluenceOptions {
            edge_types: vec![EdgeType::Influenced, EdgeType::TaughtBy],
            direction: Direction::Both,
        };
        let paths = influence_paths_with(&g, v[0], v[2], 2, &opts).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].edge_types, vec![EdgeType::TaughtBy, EdgeType::Influenced]);
    }

    #[test]
    fn reachable_by_degree() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, &["a", "b", "c", "d", "e"]);
        for i in 1..4 {
            g.add_edge(v[0], EdgeType::Influenced, v[i]).unwrap();
        }
        let r = influence_reachable(&g, v[0], 3).unwrap();
        assert_eq!(r[&1], BTreeSet::from([v[1], v[2], v[3]]));
        assert!(r[&2].is_empty() && r[&3].is_empty());
        let isolated = influence_reachable(&g, v[4], 6).unwrap();
        assert_eq!(isolated.len(), 6);
        assert!(isolated.values().all(BTreeSet::is_empty));
    }

    fn located(g: &mut PropertyGraph, label: NodeLabel, name: &str) -> NodeId {
        g.add_node(label, name, Props::new()).unwrap()
    }

    #[test]
    fn displaced_and_location() {
        let mut g = PropertyGraph::new();
        let france = located(&mut g, NodeLabel::Country, "France");
        let italy = located(&mut g, NodeLabel::Country, "Italy");
        let paris = located(&mut g, NodeLabel::City, "Paris");
        let rome = located(&mut g, NodeLabel::City, "Rome");
        let milan = located(&mut g, NodeLabel::City, "Milan");
        g.add_edge(paris, EdgeType::InCountry, france).unwrap();
        g.add_edge(rome, EdgeType::InCountry, italy).unwrap();
        g.add_edge(milan, EdgeType::InCountry, italy).unwrap();
        let borghese = located(&mut g, NodeLabel::Gallery, "Galleria Borghese");
        let brera = located(&mut g, NodeLabel::Gallery, "Pinacoteca di Brera");
        g.add_edge(borghese, EdgeType::InCity, rome).unwrap();
        g.add_edge(brera, EdgeType::InCity, milan).unwrap();

        let moved = located(&mut g, NodeLabel::Artwork, "moved");
        g.add_edge(moved, EdgeType::CompletedIn, paris).unwrap();
        g.add_edge(moved, EdgeType::LocatedInGallery, borghese).unwrap();
        let stayed = located(&mut g, NodeLabel::Artwork, "stayed");
        g.add_edge(stayed, EdgeType::CompletedIn, italy).unwrap();
        g.add_edge(stayed, EdgeType::LocatedInGallery, brera).unwrap();
        let unknown = located(&mut g, NodeLabel::Artwork, "unknown");
        g.add_edge(unknown, EdgeType::LocatedInGallery, brera).unwrap();

        let report = artworks_displaced(&g);
        assert_eq!(
            report.rows,
            vec![DisplacedArtwork {
                artwork: moved,
                completed_country: france,
                stored_country: italy
            }]
        );
        assert_eq!(report.skipped, 1);

        assert_eq!(artworks_at_location(&g, borghese).unwrap(), vec![moved]);
        assert_eq!(artworks_at_location(&g, milan).unwrap(), vec![stayed, unknown]);
        assert_eq!(
            artworks_at_location(&g, italy).unwrap(),
            vec![moved, stayed, unknown]
        );
        assert!(artworks_at_location(&g, france).unwrap().is_empty());
        assert!(matches!(artworks_at_location(&g, moved), Err(Error::Type(_))));
    }

    #[test]
    fn profile_groups() {
        let mut g = PropertyGraph::new();
        let mut props = Props::new();
        props.insert("biography".into(), crate::graph::PropValue::Str("bio".into()));
        let a = g.add_node(NodeLabel::Artist, "a", props).unwrap();
        let w1 = located(&mut g, NodeLabel::Artwork, "w1");
        let w2 = located(&mut g, NodeLabel::Artwork, "w2");
        let m = located(&mut g, NodeLabel::Movement, "Mannerism");
        let lone = located(&mut g, NodeLabel::Tag, "lone");
        g.add_edge(w1, EdgeType::CreatedBy, a).unwrap();
        g.add_edge(w2, EdgeType::CreatedBy, a).unwrap();
        g.add_edge(a, EdgeType::PartOfMovement, m).unwrap();

        let p = entity_profile(&g, a).unwrap();
        assert_eq!(p.props.len(), 1);
        let shape: Vec<_> = p
            .groups
            .iter()
            .map(|gr| (gr.edge_type, gr.direction, gr.neighbors.len()))
            .collect();
        assert_eq!(
            shape,
            vec![
                (EdgeType::CreatedBy, Direction::In, 2),
                (EdgeType::PartOfMovement, Direction::Out, 1)
            ]
        );
        assert_eq!(p.groups[0].neighbors[0].name, "w1");

        let p = entity_profile(&g, lone).unwrap();
        assert!(p.groups.is_empty());
        assert!(entity_profile(&g, NodeId(1000)).is_err());
    }

    #[test]
    fn random_entities_are_seeded_and_clamped() {
        let mut g = PropertyGraph::new();
        let v = artists(&mut g, &["a", "b", "c"]);
        assert!(random_entities(&g, NodeLabel::Artist, 0, 1).is_empty());
        let mut all = random_entities(&g, NodeLabel::Artist, 10, 1);
        all.sort();
        assert_eq!(all, v);
        assert_eq!(
            random_entities(&g, NodeLabel::Artist, 2, 9),
            random_entities(&g, NodeLabel::Artist, 2, 9)
        );
        assert!(random_entities(&g, NodeLabel::Genre, 3, 9).is_empty());
    }
}
