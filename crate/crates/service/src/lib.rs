//! JSON API over an immutable graph snapshot and an optional classifier
//! checkpoint. Every route lives under `/api`; anything else is served from
//! the static-asset directory when one is configured.

mod error;
mod handlers;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use artgraph::graph::PropertyGraph;
use artgraph::model::{Checkpoint, ClassifierParams, LabelVocab, ModelConfig};
use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::{ServeDir, ServeFile};

pub use error::ApiError;
pub use handlers::{
    ClassScore, DisplacedResponse, EntitySummary, HomeResponse, InfluenceResponse, LocationResponse, PathView,
    PredictResponse,
};

/// Classifier ready for inference. Parameters are widened to f64 once at
/// load time.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub config: ModelConfig,
    pub vocab: LabelVocab,
    pub params: ClassifierParams<f64>,
}

impl From<Checkpoint> for LoadedModel {
    fn from(ck: Checkpoint) -> Self {
        LoadedModel {
            params: ck.params.cast(),
            config: ck.config,
            vocab: ck.vocab,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub graph: Arc<PropertyGraph>,
    pub model: Option<Arc<LoadedModel>>,
}

impl AppState {
    pub fn new(graph: PropertyGraph, model: Option<LoadedModel>) -> Self {
        AppState {
            graph: Arc::new(graph),
            model: model.map(Arc::new),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Directory holding the browser bundle; `index.html` answers unknown
    /// non-API paths so client-side routes survive a reload.
    pub static_dir: Option<PathBuf>,
    /// Origins allowed by CORS. `*` allows any; empty disables the layer.
    pub cors_origins: Vec<String>,
}

pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/home", get(handlers::home))
        .route("/entity/{id}", get(handlers::entity))
        .route("/queries/influence", get(handlers::influence))
        .route("/queries/displaced", get(handlers::displaced))
        .route("/queries/at_location", get(handlers::at_location))
        .route("/predict", post(handlers::predict))
        .fallback(handlers::api_not_found)
        .with_state(state);

    let mut app = Router::new().nest("/api", api);
    app = match &config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(dir.join("index.html")))),
        None => app.fallback(handlers::api_not_found),
    };
    if let Some(cors) = cors_layer(&config.cors_origins) {
        app = app.layer(cors);
    }
    app
}

fn cors_layer(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::from(Any)
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    Some(
        CorsLayer::new()
            .allow_origin(allow)
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([header::CONTENT_TYPE]),
    )
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState, config: &ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state, config)).await
}
