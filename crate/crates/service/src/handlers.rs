use std::time::Instant;

use artgraph::graph::{Direction, EdgeType, NodeId, NodeLabel, PropertyGraph, Props};
use artgraph::model::{predict_proba, Task};
use artgraph::query::{
    artworks_at_location, artworks_displaced, entity_profile, influence_paths_with, random_entities,
    InfluenceOptions, NeighborRef, ProfileDocument,
};
use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::Uri;
use axum::Json;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::AppState;

const DEFAULT_HOME_N: usize = 8;
const MAX_HOME_N: usize = 100;
const DEFAULT_MAX_DEPTH: usize = 3;
const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySummary {
    pub id: NodeId,
    pub label: NodeLabel,
    pub name: String,
    pub props: Props,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomeResponse {
    pub seed: u64,
    pub artists: Vec<EntitySummary>,
    pub artworks: Vec<EntitySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathView {
    pub nodes: Vec<NeighborRef>,
    pub edge_types: Vec<EdgeType>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceResponse {
    pub from: NeighborRef,
    pub to: NeighborRef,
    pub max_depth: usize,
    pub paths: Vec<PathView>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacedRow {
    pub artwork: NeighborRef,
    pub completed_country: NeighborRef,
    pub stored_country: NeighborRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacedResponse {
    pub rows: Vec<DisplacedRow>,
    pub skipped: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationResponse {
    pub place: NeighborRef,
    pub artworks: Vec<NeighborRef>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: usize,
    pub name: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub artist: Vec<ClassScore>,
    pub style: Vec<ClassScore>,
    pub genre: Vec<ClassScore>,
}

fn node_ref(g: &PropertyGraph, id: NodeId) -> Result<NeighborRef, ApiError> {
    let n = g.node(id)?;
    Ok(NeighborRef {
        id,
        label: n.label,
        name: n.name.clone(),
    })
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

/// Short card fields only; long text stays on the entity page.
fn key_props(label: NodeLabel, props: &Props) -> Props {
    let keep: &[&str] = match label {
        NodeLabel::Artist => &["birth_date", "death_date", "nationality", "image_url"],
        NodeLabel::Artwork => &["completion_date", "image_url"],
        _ => &[],
    };
    props
        .iter()
        .filter(|(k, _)| keep.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

#[derive(Debug, Deserialize)]
pub struct HomeParams {
    seed: Option<u64>,
    n: Option<usize>,
}

pub async fn home(State(s): State<AppState>, q: Result<Query<HomeParams>, QueryRejection>) -> ApiResult<HomeResponse> {
    let p = query(q)?;
    let seed = p.seed.unwrap_or(0);
    let n = p.n.unwrap_or(DEFAULT_HOME_N).min(MAX_HOME_N);
    let cards = |label: NodeLabel, seed: u64| -> Result<Vec<EntitySummary>, ApiError> {
        random_entities(&s.graph, label, n, seed)
            .into_iter()
            .map(|id| {
                let node = s.graph.node(id)?;
                Ok(EntitySummary {
                    id,
                    label,
                    name: node.name.clone(),
                    props: key_props(label, &node.props),
                })
            })
            .collect()
    };
    Ok(Json(HomeResponse {
        seed,
        artists: cards(NodeLabel::Artist, seed)?,
        artworks: cards(NodeLabel::Artwork, seed.wrapping_add(1))?,
    }))
}

fn parse_id(raw: &str) -> Result<NodeId, ApiError> {
    raw.parse::<u64>()
        .map(NodeId)
        .map_err(|_| ApiError::bad_request(format!("invalid node id {raw:?}")))
}

pub async fn entity(State(s): State<AppState>, id: Result<Path<String>, PathRejection>) -> ApiResult<ProfileDocument> {
    let Path(raw) = id.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let id = parse_id(&raw)?;
    Ok(Json(entity_profile(&s.graph, id)?))
}

#[derive(Debug, Deserialize)]
pub struct InfluenceParams {
    from: u64,
    to: u64,
    max_depth: Option<usize>,
    /// Comma-separated artist-to-artist edge types.
    edge_types: Option<String>,
    direction: Option<Direction>,
}

pub async fn influence(
    State(s): State<AppState>,
    q: Result<Query<InfluenceParams>, QueryRejection>,
) -> ApiResult<InfluenceResponse> {
    let p = query(q)?;
    let mut opts = InfluenceOptions::default();
    if let Some(raw) = &p.edge_types {
        opts.edge_types = raw
            .split(',')
            .map(|t| t.trim().parse::<EdgeType>())
            .collect::<Result<_, _>>()
            .map_err(ApiError::bad_request)?;
    }
    if let Some(d) = p.direction {
        opts.direction = d;
    }
    let max_depth = p.max_depth.unwrap_or(DEFAULT_MAX_DEPTH);
    let (from, to) = (NodeId(p.from), NodeId(p.to));
    let t = Instant::now();
    let found = influence_paths_with(&s.graph, from, to, max_depth, &opts)?;
    let elapsed = elapsed_ms(t);
    let paths = found
        .into_iter()
        .map(|path| {
            Ok(PathView {
                nodes: path.nodes.iter().map(|&n| node_ref(&s.graph, n)).collect::<Result<_, ApiError>>()?,
                edge_types: path.edge_types,
            })
        })
        .collect::<Result<_, ApiError>>()?;
    Ok(Json(InfluenceResponse {
        from: node_ref(&s.graph, from)?,
        to: node_ref(&s.graph, to)?,
        max_depth,
        paths,
        elapsed_ms: elapsed,
    }))
}

pub async fn displaced(State(s): State<AppState>) -> ApiResult<DisplacedResponse> {
    let t = Instant::now();
    let report = artworks_displaced(&s.graph);
    let elapsed = elapsed_ms(t);
    let rows = report
        .rows
        .iter()
        .map(|r| {
            Ok(DisplacedRow {
                artwork: node_ref(&s.graph, r.artwork)?,
                completed_country: node_ref(&s.graph, r.completed_country)?,
                stored_country: node_ref(&s.graph, r.stored_country)?,
            })
        })
        .collect::<Result<_, ApiError>>()?;
    Ok(Json(DisplacedResponse {
        rows,
        skipped: report.skipped,
        elapsed_ms: elapsed,
    }))
}

#[derive(Debug, Deserialize)]
pub struct LocationParams {
    place: u64,
}

pub async fn at_location(
    State(s): State<AppState>,
    q: Result<Query<LocationParams>, QueryRejection>,
) -> ApiResult<LocationResponse> {
    let place = NodeId(query(q)?.place);
    let t = Instant::now();
    let works = artworks_at_location(&s.graph, place)?;
    let elapsed = elapsed_ms(t);
    Ok(Json(LocationResponse {
        place: node_ref(&s.graph, place)?,
        artworks: works.into_iter().map(|w| node_ref(&s.graph, w)).collect::<Result<_, _>>()?,
        elapsed_ms: elapsed,
    }))
}

#[derive(Debug, Deserialize)]
pub struct PredictParams {
    k: Option<usize>,
}

pub async fn predict(
    State(s): State<AppState>,
    q: Result<Query<PredictParams>, QueryRejection>,
    body: Result<Json<Vec<f64>>, JsonRejection>,
) -> ApiResult<PredictResponse> {
    let k = query(q)?.k.unwrap_or(DEFAULT_TOP_K);
    let model = s.model.as_ref().ok_or_else(|| ApiError::unavailable("no model loaded"))?;
    let Json(raw) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    if raw.len() != model.config.visual_dim {
        return Err(ApiError::bad_request(format!(
            "expected {} visual features, got {}",
            model.config.visual_dim,
            raw.len()
        )));
    }
    let visual: Vec<f32> = raw.iter().map(|&v| v as f32).collect();
    if visual.iter().any(|v| !v.is_finite()) {
        return Err(ApiError::bad_request("visual features must be finite f32 values"));
    }
    let probs = predict_proba(&visual, &model.params, &model.config)?;
    let top = |task: Task| -> Vec<ClassScore> {
        let p = &probs[task as usize];
        let names = model.vocab.names(task);
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
        order
            .into_iter()
            .take(k)
            .map(|class| ClassScore {
                class,
                name: names.get(class).cloned().unwrap_or_default(),
                probability: p[class],
            })
            .collect()
    };
    Ok(Json(PredictResponse {
        artist: top(Task::Artist),
        style: top(Task::Style),
        genre: top(Task::Genre),
    }))
}

pub async fn api_not_found(uri: Uri) -> ApiError {
    ApiError::not_found(format!("no route for {}", uri.path()))
}
