use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{assemble_dataset, embed_training_graph, generate_synthetic, split, Exclusions, FeatureTable, SyntheticSpec};
use crate::embed::Node2VecConfig;
use crate::error::Result;
use crate::graph::PropertyGraph;
use crate::model::{evaluate, train, Mode, ModelConfig, TaskAccuracy};

/// Everything that determines a comparison run besides the data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub split_seed: u64,
    pub node2vec: Node2VecConfig,
    /// Template; dims, class counts and mode are filled in per run.
    pub model: ModelConfig,
}

impl ComparisonConfig {
    /// Settings for the planted benchmark: a tenfold larger step than the
    /// model default, over 20 epochs.
    pub fn planted(seed: u64) -> Self {
        ComparisonConfig {
            split_seed: seed,
            node2vec: Node2VecConfig { seed, ..Default::default() },
            model: ModelConfig {
                learning_rate: 1e-3,
                epochs: 20,
                seed,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: Mode,
    pub test: TaskAccuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub fingerprint: String,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub excluded: Exclusions,
    pub rows: Vec<ModeResult>,
}

impl ComparisonReport {
    pub fn row(&self, mode: Mode) -> Option<&TaskAccuracy> {
        self.rows.iter().find(|r| r.mode == mode).map(|r| &r.test)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Modes as rows, tasks as columns, accuracies in percent.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "config {}", self.fingerprint).unwrap();
        writeln!(
            s,
            "artworks train {} / validation {} / test {} (excluded {})",
            self.train,
            self.validation,
            self.test,
            self.excluded.total()
        )
        .unwrap();
        writeln!(s).unwrap();
        writeln!(s, "{:<20}{:>9}{:>9}{:>9}", "mode", "artist", "style", "genre").unwrap();
        for r in &self.rows {
            writeln!(
                s,
                "{:<20}{:>9.2}{:>9.2}{:>9.2}",
                r.mode.as_str(),
                100.0 * r.test.artist,
                100.0 * r.test.style,
                100.0 * r.test.genre
            )
            .unwrap();
        }
        s
    }
}

/// Hex SHA-256 of the value's JSON serialization. Struct fields serialize
/// in declaration order, so equal configs give equal fingerprints.
pub fn fingerprint<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    Sha256::digest(&json).iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

/// Trains the three modes on the same split, embeddings and seeds and
/// reports per-task test accuracy.
pub fn run_comparison_on(
    graph: &PropertyGraph,
    features: &FeatureTable,
    config: &ComparisonConfig,
    fingerprint: String,
) -> Result<ComparisonReport> {
    let assignment = split(graph, config.split_seed)?;
    let embeddings = embed_training_graph(graph, &assignment, &config.node2vec)?;
    let data = assemble_dataset(graph, &assignment, &embeddings, features)?;
    let base = data.model_config(&config.model, features.dim(), embeddings.dim());
    let rows = Mode::ALL
        .par_iter()
        .map(|&mode| {
            let cfg = ModelConfig { mode, ..base.clone() };
            let out = train(&data.train, &data.validation, &cfg)?;
            Ok(ModeResult {
                mode,
                test: evaluate(&out.params, &cfg, &data.test)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        fingerprint,
        train: data.train.len(),
        validation: data.validation.len(),
        test: data.test.len(),
        excluded: data.excluded,
        rows,
    })
}

/// [`run_comparison_on`] over freshly generated planted data.
pub fn run_comparison(spec: &SyntheticSpec, config: &ComparisonConfig) -> Result<ComparisonReport> {
    let (graph, features) = generate_synthetic(spec)?;
    run_comparison_on(&graph, &features, config, fingerprint(&(spec, config)))
}
