//! Brute-force oracles and random graph builders shared by integration
//! tests. Oracles only read the flat `(src, type, dst)` triple list, never
//! the store's adjacency indexes.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use artgraph::graph::{Direction, EdgeType, NodeId, NodeLabel, PropertyGraph, Props};
use artgraph::model::{backward, forward_batch, total_loss, ClassifierParams, LabeledInstance, Mode, ModelConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Triple = (NodeId, EdgeType, NodeId);

pub fn triples(g: &PropertyGraph) -> Vec<Triple> {
    g.edges().collect()
}

/// Random art graph with at most `max_nodes` nodes: artists linked by all
/// three artist relations, plus artworks, galleries, cities and countries.
pub fn random_art_graph(seed: u64, max_nodes: usize) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = PropertyGraph::new();
    let total = rng.random_range(8..=max_nodes);
    let n_countries = rng.random_range(1..=3);
    let n_cities = rng.random_range(1..=5);
    let n_galleries = rng.random_range(1..=8);
    let rest = total.saturating_sub(n_countries + n_cities + n_galleries).max(2);
    let n_artists = rng.random_range(1..rest);
    let n_artworks = rest - n_artists;
    let mut make = |label: NodeLabel, n: usize| -> Vec<NodeId> {
        (0..n)
            .map(|i| g.add_node(label, &format!("{label}{i}"), Props::new()).unwrap())
            .collect()
    };
    let countries = make(NodeLabel::Country, n_countries);
    let cities = make(NodeLabel::City, n_cities);
    let galleries = make(NodeLabel::Gallery, n_galleries);
    let artists = make(NodeLabel::Artist, n_artists);
    let artworks = make(NodeLabel::Artwork, n_artworks);
    let pick = |rng: &mut ChaCha8Rng, v: &[NodeId]| v[rng.random_range(0..v.len())];

    for &c in &cities {
        if rng.random_bool(0.9) {
            g.add_edge(c, EdgeType::InCountry, pick(&mut rng, &countries)).unwrap();
        }
    }
    for &gal in &galleries {
        if rng.random_bool(0.9) {
            g.add_edge(gal, EdgeType::InCity, pick(&mut rng, &cities)).unwrap();
        }
    }
    let density = rng.random_range(0.5..3.0);
    let artist_edges = (n_artists as f64 * density) as usize;
    for _ in 0..artist_edges {
        let a = pick(&mut rng, &artists);
        let b = pick(&mut rng, &artists);
        if a != b {
            let ty = EdgeType::ARTIST_TO_ARTIST[rng.random_range(0..3)];
            g.add_edge(a, ty, b).unwrap();
        }
    }
    for &w in &artworks {
        if rng.random_bool(0.8) {
            g.add_edge(w, EdgeType::LocatedInGallery, pick(&mut rng, &galleries)).unwrap();
        }
        if rng.random_bool(0.8) {
            let place = if rng.random_bool(0.5) {
                pick(&mut rng, &cities)
            } else {
                pick(&mut rng, &countries)
            };
            g.add_edge(w, EdgeType::CompletedIn, place).unwrap();
        }
        if rng.random_bool(0.9) {
            g.add_edge(w, EdgeType::CreatedBy, pick(&mut rng, &artists)).unwrap();
        }
    }
    g
}

fn steps(t: &[Triple], types: &[EdgeType], dir: Direction, at: NodeId) -> Vec<(EdgeType, NodeId)> {
    let mut out = Vec::new();
    for &(s, ty, d) in t {
        if !types.contains(&ty) {
            continue;
        }
        if s == at && matches!(dir, Direction::Out | Direction::Both) {
            out.push((ty, d));
        }
        if d == at && matches!(dir, Direction::In | Direction::Both) {
            out.push((ty, s));
        }
    }
    out
}

/// Every simple path of 1..=max hops, by exhaustive recursion, sorted by
/// length then lexicographically.
pub fn brute_paths(
    t: &[Triple],
    from: NodeId,
    to: NodeId,
    max: usize,
    types: &[EdgeType],
    dir: Direction,
) -> Vec<(Vec<NodeId>, Vec<EdgeType>)> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        t: &[Triple],
        to: NodeId,
        max: usize,
        types: &[EdgeType],
        dir: Direction,
        nodes: &mut Vec<NodeId>,
        tys: &mut Vec<EdgeType>,
        out: &mut Vec<(Vec<NodeId>, Vec<EdgeType>)>,
    ) {
        if tys.len() == max {
            return;
        }
        let at = *nodes.last().unwrap();
        for (ty, next) in steps(t, types, dir, at) {
            if nodes.contains(&next) {
                continue;
            }
            nodes.push(next);
            tys.push(ty);
            if next == to {
                out.push((nodes.clone(), tys.clone()));
            } else {
                go(t, to, max, types, dir, nodes, tys, out);
            }
            nodes.pop();
            tys.pop();
        }
    }
    let mut out = Vec::new();
    if from != to {
        go(t, to, max, types, dir, &mut vec![from], &mut Vec::new(), &mut out);
    }
    out.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.cmp(b)));
    out
}

/// Shortest hop distances by repeated relaxation over the triple list.
pub fn brute_levels(
    t: &[Triple],
    src: NodeId,
    max: usize,
    types: &[EdgeType],
    dir: Direction,
) -> BTreeMap<usize, BTreeSet<NodeId>> {
    let mut dist: HashMap<NodeId, usize> = HashMap::from([(src, 0)]);
    for round in 1..=max {
        let reached: Vec<NodeId> = dist.iter().filter(|(_, &d)| d == round - 1).map(|(&n, _)| n).collect();
        for at in reached {
            for (_, next) in steps(t, types, dir, at) {
                dist.entry(next).or_insert(round);
            }
        }
    }
    let mut out: BTreeMap<usize, BTreeSet<NodeId>> = (1..=max).map(|d| (d, BTreeSet::new())).collect();
    for (n, d) in dist {
        if d > 0 {
            out.get_mut(&d).unwrap().insert(n);
        }
    }
    out
}

/// Nested-loop join: artworks whose gallery lies at `place`.
pub fn brute_at_location(g: &PropertyGraph, t: &[Triple], place: NodeId) -> Vec<NodeId> {
    let label = g.label(place).unwrap();
    let mut out = BTreeSet::new();
    for &(w, ty, gal) in t {
        if ty != EdgeType::LocatedInGallery {
            continue;
        }
        let hit = match label {
            NodeLabel::Gallery => gal == place,
            _ => t.iter().any(|&(g2, ty2, city)| {
                g2 == gal
                    && ty2 == EdgeType::InCity
                    && (city == place
                        || (label == NodeLabel::Country
                            && t.iter().any(|&(c, ty3, k)| c == city && ty3 == EdgeType::InCountry && k == place)))
            }),
        };
        if hit {
            out.insert(w);
        }
    }
    out.into_iter().collect()
}

/// Country reached from `artwork` through completedIn (and inCountry for a
/// city), and through locatedInGallery, inCity, inCountry.
pub fn brute_countries(g: &PropertyGraph, t: &[Triple], artwork: NodeId) -> (Option<NodeId>, Option<NodeId>) {
    let first = |src: NodeId, ty: EdgeType| t.iter().find(|&&(s, y, _)| s == src && y == ty).map(|&(_, _, d)| d);
    let completed = first(artwork, EdgeType::CompletedIn).and_then(|p| match g.label(p).unwrap() {
        NodeLabel::Country => Some(p),
        _ => first(p, EdgeType::InCountry),
    });
    let stored = first(artwork, EdgeType::LocatedInGallery)
        .and_then(|gal| first(gal, EdgeType::InCity))
        .and_then(|c| first(c, EdgeType::InCountry));
    (completed, stored)
}

/// Undirected walk neighbourhoods straight from the triples.
pub fn undirected_neighbors(t: &[Triple]) -> HashMap<NodeId, BTreeSet<NodeId>> {
    let mut adj: HashMap<NodeId, BTreeSet<NodeId>> = HashMap::new();
    for &(s, _, d) in t {
        adj.entry(s).or_default().insert(d);
        adj.entry(d).or_default().insert(s);
    }
    adj
}

/// Random graph of at most `max_nodes` nodes with arbitrary valid edges,
/// for the walk tests.
pub fn random_walk_graph(seed: u64, max_nodes: usize) -> PropertyGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = PropertyGraph::new();
    let n = rng.random_range(2..=max_nodes);
    let ids: Vec<NodeId> = (0..n)
        .map(|i| g.add_node(NodeLabel::Artist, &format!("a{i}"), Props::new()).unwrap())
        .collect();
    let m = rng.random_range(n..=3 * n);
    for _ in 0..m {
        let a = ids[rng.random_range(0..n)];
        let b = ids[rng.random_range(0..n)];
        if a != b {
            g.add_edge(a, EdgeType::ARTIST_TO_ARTIST[rng.random_range(0..3)], b).unwrap();
        }
    }
    g
}

/// The three-case second-order weight.
pub fn oracle_weight(adj: &HashMap<NodeId, BTreeSet<NodeId>>, prev: NodeId, x: NodeId, p: f64, q: f64) -> f64 {
    if x == prev {
        1.0 / p
    } else if adj.get(&prev).is_some_and(|s| s.contains(&x)) {
        1.0
    } else {
        1.0 / q
    }
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Two 10-cliques of artists joined by a single edge.
pub fn barbell() -> (PropertyGraph, Vec<NodeId>, Vec<NodeId>) {
    let mut g = PropertyGraph::new();
    let side = |g: &mut PropertyGraph, tag: &str| -> Vec<NodeId> {
        let ids: Vec<NodeId> = (0..10)
            .map(|i| g.add_node(NodeLabel::Artist, &format!("{tag}{i}"), Props::new()).unwrap())
            .collect();
        for i in 0..10 {
            for j in (i + 1)..10 {
                g.add_edge(ids[i], EdgeType::Influenced, ids[j]).unwrap();
            }
        }
        ids
    };
    let left = side(&mut g, "l");
    let right = side(&mut g, "r");
    g.add_edge(left[9], EdgeType::Influenced, right[0]).unwrap();
    (g, left, right)
}

/// Mean intra-clique cosine minus mean inter-clique cosine.
pub fn separation(t: &artgraph::embed::EmbeddingTable, left: &[NodeId], right: &[NodeId]) -> f64 {
    use artgraph::embed::cosine;
    let mut intra = Vec::new();
    let mut inter = Vec::new();
    for side in [left, right] {
        for (i, &a) in side.iter().enumerate() {
            for &b in &side[i + 1..] {
                intra.push(cosine(t.get(a).unwrap(), t.get(b).unwrap()));
            }
        }
    }
    for &a in left {
        for &b in right {
            inter.push(cosine(t.get(a).unwrap(), t.get(b).unwrap()));
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    mean(&intra) - mean(&inter)
}

/// Worst wall time, in milliseconds, of each query family over a handful
/// of random arguments.
pub fn scale_latencies(g: &PropertyGraph) -> Vec<(&'static str, f64)> {
    use artgraph::query::*;
    use std::time::Instant;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let artists = g.nodes_with_label(NodeLabel::Artist);
    let countries = g.nodes_with_label(NodeLabel::Country);
    let cities = g.nodes_with_label(NodeLabel::City);
    let mut worst = |name: &'static str, f: &mut dyn FnMut(&mut ChaCha8Rng)| {
        let mut max = 0f64;
        for _ in 0..10 {
            let t = Instant::now();
            f(&mut rng);
            max = max.max(t.elapsed().as_secs_f64() * 1e3);
        }
        (name, max)
    };
    let pick = |rng: &mut ChaCha8Rng, v: &[NodeId]| v[rng.random_range(0..v.len())];
    vec![
        worst("influence_paths", &mut |rng| {
            let (a, b) = (pick(rng, artists), pick(rng, artists));
            influence_paths(g, a, b, 4).unwrap();
        }),
        worst("influence_reachable", &mut |rng| {
            influence_reachable(g, pick(rng, artists), 3).unwrap();
        }),
        worst("at_location(country)", &mut |rng| {
            artworks_at_location(g, pick(rng, countries)).unwrap();
        }),
        worst("at_location(city)", &mut |rng| {
            artworks_at_location(g, pick(rng, cities)).unwrap();
        }),
        worst("displaced", &mut |_| {
            artworks_displaced(g);
        }),
        worst("entity_profile", &mut |rng| {
            entity_profile(g, pick(rng, artists)).unwrap();
        }),
    ]
}

// Toy classifier for gradient and loss checks.

pub fn toy(mode: Mode, seed: u64) -> ModelConfig {
    ModelConfig {
        visual_dim: 8,
        context_dim: 4,
        encoder_hidden: 6,
        num_artists: 3,
        num_styles: 3,
        num_genres: 3,
        seed,
        mode,
        ..Default::default()
    }
}

pub fn batch(seed: u64, n: usize) -> Vec<LabeledInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xba7c);
    (0..n)
        .map(|i| LabeledInstance {
            artwork: NodeId(i as u64),
            name: format!("w{i}"),
            visual: (0..8).map(|_| rng.random_range(-1.5f32..1.5)).collect(),
            labels: [rng.random_range(0..3), rng.random_range(0..3), rng.random_range(0..3)],
            context: Some((0..4).map(|_| rng.random_range(-0.9f32..0.9)).collect()),
        })
        .collect()
}

pub fn matrix(b: &[LabeledInstance]) -> Array2<f64> {
    Array2::from_shape_fn((b.len(), 8), |(i, j)| b[i].visual[j] as f64)
}

pub fn loss_at(params: &ClassifierParams<f64>, b: &[LabeledInstance], cfg: &ModelConfig) -> f64 {
    let trace = forward_batch(matrix(b), params, cfg).unwrap();
    total_loss(b, &trace, cfg).unwrap().total
}

// Largest relative error over every parameter. The denominator is floored
// at 1e-3: the h^2 truncation term of a central difference does not shrink
// with the gradient, so entries below the floor are held to an absolute
// error of 1e-7 instead.
pub fn worst_gradient_error(cfg: &ModelConfig, b: &[LabeledInstance]) -> f64 {
    let params = ClassifierParams::<f64>::init(cfg).unwrap();
    let trace = forward_batch(matrix(b), &params, cfg).unwrap();
    let grads = backward(b, &trace, &params, cfg).unwrap();
    let analytic: Vec<f64> = grads.tensors().iter().flat_map(|(_, _, v)| v.to_vec()).collect();
    let h = 1e-3;
    let mut worst = 0.0f64;
    let mut k = 0;
    let n_tensors = params.tensors().len();
    for t in 0..n_tensors {
        let len = params.tensors()[t].2.len();
        for i in 0..len {
            let mut plus = params.clone();
            plus.tensors_mut()[t][i] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t][i] -= h;
            let numeric = (loss_at(&plus, b, cfg) - loss_at(&minus, b, cfg)) / (2.0 * h);
            let a = analytic[k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-3);
            worst = worst.max(rel);
            k += 1;
        }
    }
    assert_eq!(k, analytic.len());
    worst
}

/// Closed-form loss values: uniform logits give ln(classes), identical
/// vectors give zero distance, and the extreme weights split the total
/// into its two terms exactly.
pub fn loss_anchors() -> Result<(), String> {
    use artgraph::model::{cross_entropy, mse_loss, total_loss, ClassifierParams};
    for label in 0..4 {
        let ce = cross_entropy(&[0.0f64; 4], label).map_err(|e| e.to_string())?;
        if (ce - 4f64.ln()).abs() > 1e-9 {
            return Err(format!("uniform cross-entropy {ce}"));
        }
    }
    let v: Vec<f64> = (0..128).map(|k| (k as f64 * 0.3).sin()).collect();
    if mse_loss(&v, &v).map_err(|e| e.to_string())? != 0.0 {
        return Err("identical vectors give non-zero distance".into());
    }
    for mode in [Mode::Multimodal, Mode::RegularizationOnly] {
        let b = batch(9, 6);
        for gamma in [0.0, 1.0] {
            let cfg = ModelConfig { gamma, ..toy(mode, 9) };
            let p = ClassifierParams::<f64>::init(&cfg).map_err(|e| e.to_string())?;
            let trace = forward_batch(matrix(&b), &p, &cfg).map_err(|e| e.to_string())?;
            let l = total_loss(&b, &trace, &cfg).map_err(|e| e.to_string())?;
            let want = if gamma == 0.0 { l.classification } else { l.mse.ok_or("no distance term")? };
            if l.total != want {
                return Err(format!("{mode} gamma {gamma}: total {} vs term {want}", l.total));
            }
        }
    }
    Ok(())
}

fn influence_option_sets() -> Vec<artgraph::query::InfluenceOptions> {
    use artgraph::query::InfluenceOptions;
    vec![
        InfluenceOptions::default(),
        InfluenceOptions { edge_types: vec![EdgeType::Influenced], direction: Direction::In },
        InfluenceOptions { edge_types: EdgeType::ARTIST_TO_ARTIST.to_vec(), direction: Direction::Both },
        InfluenceOptions {
            edge_types: vec![EdgeType::TaughtBy, EdgeType::PatronOf],
            direction: Direction::Out,
        },
    ]
}

/// Path enumeration and reachability against the brute-force oracles on
/// `graphs` random graphs. Returns the number of queries compared.
pub fn check_influence_oracles(graphs: u64) -> Result<usize, String> {
    use artgraph::query::{influence_paths_with, influence_reachable_with};
    let mut compared = 0;
    for seed in 0..graphs {
        let g = random_art_graph(seed, 200);
        let t = triples(&g);
        let artists = g.nodes_with_label(NodeLabel::Artist).to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        for opts in influence_option_sets() {
            for _ in 0..4 {
                let a = artists[rng.random_range(0..artists.len())];
                let b = artists[rng.random_range(0..artists.len())];
                let depth = rng.random_range(1..=4);
                let got: Vec<_> = influence_paths_with(&g, a, b, depth, &opts)
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .map(|p| (p.nodes, p.edge_types))
                    .collect();
                if got != brute_paths(&t, a, b, depth, &opts.edge_types, opts.direction) {
                    return Err(format!("graph {seed}: paths {a}->{b} depth {depth} {opts:?}"));
                }
                let levels = influence_reachable_with(&g, a, depth, &opts).map_err(|e| e.to_string())?;
                if levels != brute_levels(&t, a, depth, &opts.edge_types, opts.direction) {
                    return Err(format!("graph {seed}: reachable from {a} depth {depth} {opts:?}"));
                }
                compared += 2;
            }
        }
    }
    Ok(compared)
}

/// Location and displacement joins against nested-loop oracles.
pub fn check_location_oracles(graphs: u64) -> Result<usize, String> {
    use artgraph::query::{artworks_at_location, artworks_displaced};
    let mut compared = 0;
    for seed in 0..graphs {
        let g = random_art_graph(seed, 200);
        let t = triples(&g);
        for label in [NodeLabel::Gallery, NodeLabel::City, NodeLabel::Country] {
            for &place in g.nodes_with_label(label) {
                let got = artworks_at_location(&g, place).map_err(|e| e.to_string())?;
                if got != brute_at_location(&g, &t, place) {
                    return Err(format!("graph {seed}: artworks at {place}"));
                }
                compared += 1;
            }
        }
        let report = artworks_displaced(&g);
        let mut rows = Vec::new();
        let mut skipped = 0;
        for &w in g.nodes_with_label(NodeLabel::Artwork) {
            match brute_countries(&g, &t, w) {
                (Some(c), Some(s)) if c != s => rows.push((w, c, s)),
                (Some(_), Some(_)) => {}
                _ => skipped += 1,
            }
        }
        let got: Vec<_> = report.rows.iter().map(|r| (r.artwork, r.completed_country, r.stored_country)).collect();
        if got != rows || report.skipped != skipped {
            return Err(format!("graph {seed}: displaced artworks"));
        }
        compared += 1;
    }
    Ok(compared)
}

/// Largest deviation of the walk transition weights from the three-case
/// rule, over every ordered node pair of `graphs` random graphs.
pub fn transition_rule_max_error(graphs: u64) -> Result<f64, String> {
    use artgraph::embed::transition_weights;
    let params = [(1.0, 1.0), (0.25, 4.0), (4.0, 0.25), (0.5, 2.0)];
    let mut worst = 0.0f64;
    for seed in 0..graphs {
        let g = random_walk_graph(seed, 50);
        let adj = undirected_neighbors(&triples(&g));
        let ids: Vec<NodeId> = g.nodes().map(|n| n.id).collect();
        let (p, q) = params[seed as usize % params.len()];
        for &prev in &ids {
            for &curr in &ids {
                let got = transition_weights(&g, prev, curr, p, q).map_err(|e| e.to_string())?;
                let want: Vec<(NodeId, f64)> = adj
                    .get(&curr)
                    .map(|s| s.iter().map(|&x| (x, oracle_weight(&adj, prev, x, p, q))).collect())
                    .unwrap_or_default();
                if got.len() != want.len() || got.iter().zip(&want).any(|(a, b)| a.0 != b.0) {
                    return Err(format!("graph {seed}: neighbours of {curr} differ"));
                }
                for ((_, gw), (_, ww)) in got.iter().zip(&want) {
                    worst = worst.max((gw - ww).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Total variation between alias-table draws and the normalised weights.
pub fn alias_total_variation(draws: usize) -> f64 {
    let weights = [0.5, 3.0, 0.01, 7.0, 1.0, 1.0, 2.5, 0.2];
    let table = artgraph::embed::AliasTable::new(&weights).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = vec![0usize; weights.len()];
    for _ in 0..draws {
        counts[table.sample(&mut rng)] += 1;
    }
    let total: f64 = weights.iter().sum();
    let target: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
    total_variation(&empirical, &target)
}
