use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use artgraph::embed::{load_embeddings, save_embeddings, Node2VecConfig};
use artgraph::experiment::{
    assemble_dataset, embed_training_graph, evaluation_instances, fingerprint, generate_synthetic, load_features,
    run_comparison, run_comparison_on, save_features, split, ComparisonConfig, SyntheticSpec,
};
use artgraph::graph::{load_graph, load_snapshot, save_snapshot, EdgeType, NodeId, NodeLabel, PropertyGraph};
use artgraph::model::{
    evaluate as score, load_checkpoint, resume, save_checkpoint, save_dataset, train as fit, Checkpoint, DatasetManifest,
    Mode, ModelConfig, Task, TaskAccuracy,
};
use artgraph::query::{
    artworks_at_location, artworks_displaced, entity_profile, influence_paths_with, influence_reachable_with,
    InfluenceOptions,
};
use artgraph_service::{AppState, LoadedModel, ServiceConfig};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::*;
use crate::error::{CliError, CliResult};

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::at(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::at(path, e))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn snapshot(path: &Path) -> CliResult<PropertyGraph> {
    load_snapshot(path).map_err(|e| CliError::at(path, e))
}

fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::at(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn ingest(a: &IngestArgs) -> CliResult<String> {
    let (graph, report) = load_graph(&a.nodes, &a.edges)?;
    if let Some(path) = &a.report {
        fs::write(path, to_json(&report)?).map_err(|e| CliError::at(path, e))?;
    }
    for r in report.rejected.iter().take(20) {
        eprintln!("rejected {}:{}: {}", r.file, r.line, r.reason);
    }
    if a.strict && !report.rejected.is_empty() {
        return Err(CliError::data(format!("{} rows rejected", report.rejected.len())));
    }
    save_snapshot(&graph, &a.out).map_err(|e| CliError::at(&a.out, e))?;
    Ok(format!(
        "{} nodes, {} edges ({} rejected rows, {} duplicate nodes, {} property conflicts) -> {}\n",
        graph.node_count(),
        graph.edge_count(),
        report.rejected.len(),
        report.duplicate_nodes,
        report.conflicts.len(),
        a.out.display()
    ))
}

pub fn synth(a: &SynthArgs) -> CliResult<String> {
    let mut spec: SyntheticSpec = match &a.spec {
        Some(p) => read_json(p)?,
        None => SyntheticSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let (graph, features) = generate_synthetic(&spec)?;
    save_snapshot(&graph, &a.out).map_err(|e| CliError::at(&a.out, e))?;
    save_features(&features, &a.features_out).map_err(|e| CliError::at(&a.features_out, e))?;
    Ok(format!(
        "{} nodes, {} edges -> {}; {} feature rows of dim {} -> {}\n",
        graph.node_count(),
        graph.edge_count(),
        a.out.display(),
        features.len(),
        features.dim(),
        a.features_out.display()
    ))
}

pub fn embed(a: &EmbedArgs) -> CliResult<String> {
    let graph = snapshot(&a.snapshot)?;
    let mut cfg: Node2VecConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => Node2VecConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(dim) = a.dim {
        cfg.dim = dim;
    }
    if let Some(epochs) = a.epochs {
        cfg.epochs = epochs;
    }
    let assignment = split(&graph, a.split_seed)?;
    let table = embed_training_graph(&graph, &assignment, &cfg)?;
    save_embeddings(&table, &a.out).map_err(|e| CliError::at(&a.out, e))?;
    Ok(format!(
        "split {}: {} train / {} validation / {} test artworks; {} vectors of dim {} -> {}\n",
        a.split_seed,
        assignment.train.len(),
        assignment.validation.len(),
        assignment.test.len(),
        table.len(),
        table.dim(),
        a.out.display()
    ))
}

pub fn assemble(a: &AssembleArgs) -> CliResult<String> {
    let graph = snapshot(&a.snapshot)?;
    let features = load_features(&a.features).map_err(|e| CliError::at(&a.features, e))?;
    let embeddings = load_embeddings(&a.embeddings).map_err(|e| CliError::at(&a.embeddings, e))?;
    let assignment = split(&graph, a.split_seed)?;
    let data = assemble_dataset(&graph, &assignment, &embeddings, &features)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::at(&a.out_dir, e))?;
    let mut out = String::new();
    for (name, set) in [("train", &data.train), ("validation", &data.validation), ("test", &data.test)] {
        let path = a.out_dir.join(format!("{name}.ds"));
        let manifest = DatasetManifest::describe(set, features.dim(), embeddings.dim(), &data.vocab);
        save_dataset(&manifest, set, &path).map_err(|e| CliError::at(&path, e))?;
        let _ = writeln!(out, "{name}: {} artworks -> {}", set.len(), path.display());
    }
    let x = &data.excluded;
    let _ = writeln!(
        out,
        "excluded: {} without artist, {} without style, {} without genre, {} without features, {} without context",
        x.missing_artist, x.missing_style, x.missing_genre, x.missing_features, x.missing_context
    );
    Ok(out)
}

pub fn train(a: &TrainArgs) -> CliResult<String> {
    let graph = snapshot(&a.snapshot)?;
    let features = load_features(&a.features).map_err(|e| CliError::at(&a.features, e))?;
    let embeddings = load_embeddings(&a.embeddings).map_err(|e| CliError::at(&a.embeddings, e))?;
    let assignment = split(&graph, a.split_seed)?;
    let data = assemble_dataset(&graph, &assignment, &embeddings, &features)?;

    let prior = match &a.resume {
        Some(p) => Some(load_checkpoint(p).map_err(|e| CliError::at(p, e))?),
        None => None,
    };
    let mut template: ModelConfig = match (&prior, &a.config) {
        (Some(ck), _) => {
            if ck.split_seed.is_some_and(|s| s != a.split_seed) {
                return Err(CliError::data("checkpoint was trained on a different split seed"));
            }
            ck.config.clone()
        }
        (None, Some(p)) => read_json(p)?,
        (None, None) => ModelConfig::default(),
    };
    if let Some(seed) = a.seed {
        template.seed = seed;
    }
    if let Some(epochs) = a.epochs {
        template.epochs = epochs;
    }
    if let Some(lr) = a.learning_rate {
        template.learning_rate = lr;
    }
    let config = ModelConfig {
        mode: match &prior {
            Some(ck) => ck.config.mode,
            None => Mode::from(a.mode),
        },
        ..data.model_config(&template, features.dim(), embeddings.dim())
    };
    let outcome = match prior {
        Some(ck) => {
            if ck.vocab != data.vocab {
                return Err(CliError::data("checkpoint labels differ from this dataset's"));
            }
            resume(ck, &data.train, &data.validation, &config)?
        }
        None => fit(&data.train, &data.validation, &config)?,
    };
    for e in &outcome.log {
        let val = e
            .validation
            .map(|v| format!(" validation {:.4}/{:.4}/{:.4}", v.artist, v.style, v.genre))
            .unwrap_or_default();
        eprintln!("epoch {:>3} loss {:.6}{val}", e.epoch, e.loss);
    }
    let ck = Checkpoint {
        config,
        vocab: data.vocab,
        epochs_done: outcome.epochs_done,
        split_seed: Some(a.split_seed),
        params: outcome.params,
        adam: outcome.adam,
    };
    save_checkpoint(&ck, &a.out).map_err(|e| CliError::at(&a.out, e))?;
    Ok(format!(
        "{} on {} artworks ({} excluded), {} epochs -> {}\n",
        ck.config.mode,
        data.train.len(),
        data.excluded.total(),
        ck.epochs_done,
        a.out.display()
    ))
}

#[derive(Serialize)]
struct EvaluationReport {
    checkpoint: String,
    mode: Mode,
    split_seed: u64,
    set: &'static str,
    artworks: usize,
    skipped: usize,
    accuracy: TaskAccuracy,
}

pub fn evaluate(a: &EvaluateArgs) -> CliResult<String> {
    let ck = load_checkpoint(&a.checkpoint).map_err(|e| CliError::at(&a.checkpoint, e))?;
    let graph = snapshot(&a.snapshot)?;
    let features = load_features(&a.features).map_err(|e| CliError::at(&a.features, e))?;
    let split_seed = match (a.split_seed, ck.split_seed) {
        (Some(s), Some(t)) if s != t => {
            return Err(CliError::data(format!(
                "checkpoint was trained on split seed {t}; evaluating on split {s} would score training artworks"
            )))
        }
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => 0,
    };
    let assignment = split(&graph, split_seed)?;
    let (ids, set) = match a.set {
        Subset::Train => (&assignment.train, "train"),
        Subset::Validation => (&assignment.validation, "validation"),
        Subset::Test => (&assignment.test, "test"),
    };
    let (instances, skipped) = evaluation_instances(&graph, ids, &features, &ck.vocab)?;
    if instances.is_empty() {
        return Err(CliError::data(format!("no labeled artworks in the {set} set")));
    }
    let report = EvaluationReport {
        checkpoint: file_digest(&a.checkpoint)?,
        mode: ck.config.mode,
        split_seed,
        set,
        artworks: instances.len(),
        skipped,
        accuracy: score(&ck.params, &ck.config, &instances)?,
    };
    match a.format {
        Format::Json => to_json(&report),
        Format::Text => {
            let mut out = format!(
                "checkpoint {}\nmode {}\nsplit {} {set}: {} artworks ({} skipped)\n\n",
                report.checkpoint, report.mode, report.split_seed, report.artworks, report.skipped
            );
            for task in Task::ALL {
                let _ = writeln!(out, "{:<8}{:>8.2}", task.as_str(), 100.0 * report.accuracy.get(task));
            }
            Ok(out)
        }
    }
}

pub fn compare(a: &CompareArgs) -> CliResult<String> {
    let seed = a.seed.unwrap_or(0);
    let mut config = match &a.config {
        Some(p) => read_json(p)?,
        None => ComparisonConfig::planted(seed),
    };
    if let Some(seed) = a.seed {
        config.split_seed = seed;
        config.node2vec.seed = seed;
        config.model.seed = seed;
    }
    let report = match (&a.snapshot, &a.features) {
        (Some(snap), Some(feat)) => {
            let graph = snapshot(snap)?;
            let features = load_features(feat).map_err(|e| CliError::at(feat, e))?;
            let fp = fingerprint(&(file_digest(snap)?, file_digest(feat)?, &config));
            run_comparison_on(&graph, &features, &config, fp)?
        }
        _ => {
            let mut spec: SyntheticSpec = match &a.spec {
                Some(p) => read_json(p)?,
                None => SyntheticSpec::default(),
            };
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            run_comparison(&spec, &config)?
        }
    };
    let out = match a.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    if let Some(path) = &a.out {
        fs::write(path, &out).map_err(|e| CliError::at(path, e))?;
    }
    Ok(out)
}

/// Numeric id, or the first node named `key` among `labels`.
fn resolve(graph: &PropertyGraph, key: &str, labels: &[NodeLabel]) -> CliResult<NodeId> {
    if let Ok(n) = key.parse::<u64>() {
        let id = NodeId(n);
        graph.node(id)?;
        return Ok(id);
    }
    labels
        .iter()
        .find_map(|&l| graph.find(l, key))
        .ok_or_else(|| CliError::data(format!("no {} named {key:?}", labels.iter().map(|l| l.as_str()).collect::<Vec<_>>().join("/"))))
}

fn influence_options(types: &[String], direction: DirectionArg) -> CliResult<InfluenceOptions> {
    Ok(InfluenceOptions {
        edge_types: types
            .iter()
            .map(|t| t.parse::<EdgeType>().map_err(CliError::Usage))
            .collect::<CliResult<_>>()?,
        direction: direction.into(),
    })
}

fn name(graph: &PropertyGraph, id: NodeId) -> &str {
    graph.get(id).map_or("?", |n| n.name.as_str())
}

pub fn query(a: &QueryArgs) -> CliResult<String> {
    let g = snapshot(&a.snapshot)?;
    let json = a.format == Format::Json;
    let mut out = String::new();
    match &a.query {
        Query::Influence { from, to, max_depth, edge_types, direction } => {
            let opts = influence_options(edge_types, *direction)?;
            let from = resolve(&g, from, &[NodeLabel::Artist])?;
            let to = resolve(&g, to, &[NodeLabel::Artist])?;
            let paths = influence_paths_with(&g, from, to, *max_depth, &opts)?;
            if json {
                return to_json(&paths);
            }
            if paths.is_empty() {
                let _ = writeln!(out, "no path within {max_depth} hops");
            }
            for p in &paths {
                out.push_str(name(&g, p.nodes[0]));
                for (ty, n) in p.edge_types.iter().zip(&p.nodes[1..]) {
                    let _ = write!(out, " -[{ty}]-> {}", name(&g, *n));
                }
                out.push('\n');
            }
        }
        Query::Reachable { artist, degrees, edge_types, direction } => {
            let opts = influence_options(edge_types, *direction)?;
            let artist = resolve(&g, artist, &[NodeLabel::Artist])?;
            let levels = influence_reachable_with(&g, artist, *degrees, &opts)?;
            if json {
                return to_json(&levels);
            }
            for (d, ids) in &levels {
                let names: Vec<&str> = ids.iter().map(|&i| name(&g, i)).collect();
                let _ = writeln!(out, "{d}\t{}", names.join("; "));
            }
        }
        Query::Displaced => {
            let report = artworks_displaced(&g);
            if json {
                return to_json(&report);
            }
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}",
                    name(&g, r.artwork),
                    name(&g, r.completed_country),
                    name(&g, r.stored_country)
                );
            }
            eprintln!("{} artworks without a resolvable country", report.skipped);
        }
        Query::AtLocation { place } => {
            let place = resolve(&g, place, &[NodeLabel::Country, NodeLabel::City, NodeLabel::Gallery])?;
            let works = artworks_at_location(&g, place)?;
            if json {
                return to_json(&works);
            }
            for w in works {
                let _ = writeln!(out, "{}", name(&g, w));
            }
        }
        Query::Entity { id } => {
            let id = resolve(&g, id, &NodeLabel::ALL)?;
            let doc = entity_profile(&g, id)?;
            if json {
                return to_json(&doc);
            }
            let _ = writeln!(out, "{} {} ({})", doc.label, doc.name, doc.id);
            for (k, v) in &doc.props {
                let _ = writeln!(out, "  {k}: {v}");
            }
            for group in &doc.groups {
                let names: Vec<&str> = group.neighbors.iter().map(|n| n.name.as_str()).collect();
                let arrow = match group.direction {
                    artgraph::graph::Direction::In => "<-",
                    _ => "->",
                };
                let _ = writeln!(out, "  {arrow} {}: {}", group.edge_type, names.join("; "));
            }
        }
    }
    Ok(out)
}

pub fn serve(a: &ServeArgs) -> CliResult<String> {
    let graph = snapshot(&a.snapshot)?;
    let model = match &a.checkpoint {
        Some(p) => Some(LoadedModel::from(load_checkpoint(p).map_err(|e| CliError::at(p, e))?)),
        None => None,
    };
    let config = ServiceConfig {
        static_dir: a.static_dir.clone(),
        cors_origins: a.cors_origin.clone(),
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    eprintln!("listening on http://{}", a.listen);
    runtime
        .block_on(artgraph_service::serve(a.listen, AppState::new(graph, model), &config))
        .map_err(|e| CliError::data(format!("{}: {e}", a.listen)))?;
    Ok(String::new())
}
