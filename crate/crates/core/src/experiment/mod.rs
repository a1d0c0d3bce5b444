//! Split protocol, leakage-safe dataset assembly, synthetic data and the
//! three-mode comparison.

mod compare;
mod features;
mod synthetic;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embed::{node2vec, EmbeddingTable, Node2VecConfig};
use crate::error::{Error, Result};
use crate::graph::{EdgeType, NodeId, NodeLabel, PropertyGraph};
use crate::model::{LabelVocab, LabeledInstance, ModelConfig, Task};

pub use compare::{fingerprint, run_comparison, run_comparison_on, ComparisonConfig, ComparisonReport, ModeResult};
pub use features::{decode_features, encode_features, load_features, save_features, FeatureTable};
pub use synthetic::{generate_scale_graph, generate_synthetic, ScaleSpec, SyntheticSpec};

/// Artwork-level partition. Only artworks are assigned; every other node is
/// shared by all views of the graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub train: BTreeSet<NodeId>,
    pub validation: BTreeSet<NodeId>,
    pub test: BTreeSet<NodeId>,
}

impl SplitAssignment {
    /// Validation and test artworks together.
    pub fn held_out(&self) -> HashSet<NodeId> {
        self.validation.union(&self.test).copied().collect()
    }
}

/// Seeded uniform 80/10/10 split of the artworks. Validation and test each
/// take `floor(N / 10)`, train keeps the remainder.
pub fn split(graph: &PropertyGraph, seed: u64) -> Result<SplitAssignment> {
    let mut artworks = graph.nodes_with_label(NodeLabel::Artwork).to_vec();
    if artworks.is_empty() {
        return Err(Error::validation("graph has no artworks to split"));
    }
    artworks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let tenth = artworks.len() / 10;
    Ok(SplitAssignment {
        seed,
        validation: artworks[..tenth].iter().copied().collect(),
        test: artworks[tenth..2 * tenth].iter().copied().collect(),
        train: artworks[2 * tenth..].iter().copied().collect(),
    })
}

/// The graph embeddings may be learned from: everything except validation
/// and test artworks and their incident edges.
pub fn training_graph(graph: &PropertyGraph, split: &SplitAssignment) -> PropertyGraph {
    graph.subgraph_excluding(&split.held_out())
}

/// Fails with [`Error::Leakage`] if `embeddings` holds any held-out artwork.
pub fn check_leakage(embeddings: &EmbeddingTable, split: &SplitAssignment) -> Result<()> {
    let leaked: Vec<NodeId> = embeddings
        .ids()
        .iter()
        .filter(|id| split.validation.contains(id) || split.test.contains(id))
        .copied()
        .collect();
    if leaked.is_empty() {
        Ok(())
    } else {
        Err(Error::Leakage(format!(
            "embedding table holds {} validation/test artworks (first {})",
            leaked.len(),
            leaked[0]
        )))
    }
}

/// node2vec on [`training_graph`], with the leakage check applied to the
/// result.
pub fn embed_training_graph(
    graph: &PropertyGraph,
    split: &SplitAssignment,
    config: &Node2VecConfig,
) -> Result<EmbeddingTable> {
    if split.train.is_empty() {
        return Err(Error::validation("split leaves no training artworks"));
    }
    let table = node2vec(&training_graph(graph, split), config)?;
    check_leakage(&table, split)?;
    Ok(table)
}

/// Why artworks were left out of the supervised sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusions {
    pub missing_artist: usize,
    pub missing_style: usize,
    pub missing_genre: usize,
    pub missing_features: usize,
    /// Training artworks absent from the embedding table.
    pub missing_context: usize,
}

impl Exclusions {
    pub fn total(&self) -> usize {
        self.missing_artist + self.missing_style + self.missing_genre + self.missing_features + self.missing_context
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledDataset {
    pub train: Vec<LabeledInstance>,
    pub validation: Vec<LabeledInstance>,
    pub test: Vec<LabeledInstance>,
    pub vocab: LabelVocab,
    pub excluded: Exclusions,
}

impl AssembledDataset {
    /// `template` with dims and class counts filled in from this dataset.
    pub fn model_config(&self, template: &ModelConfig, visual_dim: usize, context_dim: usize) -> ModelConfig {
        ModelConfig {
            visual_dim,
            context_dim,
            num_artists: self.vocab.artists.len().max(1),
            num_styles: self.vocab.styles.len().max(1),
            num_genres: self.vocab.genres.len().max(1),
            ..template.clone()
        }
    }
}

const LABEL_EDGES: [EdgeType; 3] = [EdgeType::CreatedBy, EdgeType::HasStyle, EdgeType::HasGenre];

/// Builds labeled instances for every split. Training instances carry their
/// context embedding; validation and test instances never do.
///
/// Class indices follow the sorted names of the artists, styles and genres
/// that label at least one complete artwork. An artwork whose artist, style
/// or genre edge is missing is excluded and counted; if it has several, the
/// first inserted edge is used.
pub fn assemble_dataset(
    graph: &PropertyGraph,
    split: &SplitAssignment,
    embeddings: &EmbeddingTable,
    features: &FeatureTable,
) -> Result<AssembledDataset> {
    check_leakage(embeddings, split)?;
    let mut excluded = Exclusions::default();
    let mut labeled: BTreeMap<NodeId, [NodeId; 3]> = BTreeMap::new();
    let all = split.train.iter().chain(&split.validation).chain(&split.test);
    for &art in all {
        let targets = LABEL_EDGES.map(|ty| graph.first_out(art, ty));
        match targets {
            [None, ..] => excluded.missing_artist += 1,
            [_, None, _] => excluded.missing_style += 1,
            [_, _, None] => excluded.missing_genre += 1,
            [Some(a), Some(s), Some(g)] => {
                if features.get(art).is_none() {
                    excluded.missing_features += 1;
                } else if split.train.contains(&art) && !embeddings.contains(art) {
                    excluded.missing_context += 1;
                } else {
                    labeled.insert(art, [a, s, g]);
                }
            }
        }
    }

    let mut names: [BTreeSet<&str>; 3] = Default::default();
    for targets in labeled.values() {
        for (t, id) in targets.iter().enumerate() {
            names[t].insert(graph.node(*id)?.name.as_str());
        }
    }
    let index: Vec<BTreeMap<&str, usize>> = names
        .iter()
        .map(|set| set.iter().enumerate().map(|(i, &n)| (n, i)).collect())
        .collect();
    let vocab = LabelVocab {
        artists: names[0].iter().map(|s| s.to_string()).collect(),
        styles: names[1].iter().map(|s| s.to_string()).collect(),
        genres: names[2].iter().map(|s| s.to_string()).collect(),
    };

    let build = |ids: &BTreeSet<NodeId>, with_context: bool| -> Result<Vec<LabeledInstance>> {
        let mut out = Vec::new();
        for id in ids {
            let Some(targets) = labeled.get(id) else { continue };
            let mut labels = [0; 3];
            for t in Task::ALL {
                let i = t as usize;
                labels[i] = index[i][graph.node(targets[i])?.name.as_str()];
            }
            out.push(LabeledInstance {
                artwork: *id,
                name: graph.node(*id)?.name.clone(),
                visual: features.get(*id).expect("checked above").to_vec(),
                labels,
                context: if with_context {
                    embeddings.get(*id).map(<[f32]>::to_vec)
                } else {
                    None
                },
            });
        }
        Ok(out)
    };

    Ok(AssembledDataset {
        train: build(&split.train, true)?,
        validation: build(&split.validation, false)?,
        test: build(&split.test, false)?,
        vocab,
        excluded,
    })
}

/// Context-free instances for `ids`, labeled through an existing
/// vocabulary. Artworks with a missing label, a label outside `vocab` or no
/// features are skipped; the second value counts them.
pub fn evaluation_instances(
    graph: &PropertyGraph,
    ids: &BTreeSet<NodeId>,
    features: &FeatureTable,
    vocab: &LabelVocab,
) -> Result<(Vec<LabeledInstance>, usize)> {
    let index: Vec<BTreeMap<&str, usize>> = Task::ALL
        .iter()
        .map(|&t| vocab.names(t).iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect())
        .collect();
    let mut out = Vec::new();
    let mut skipped = 0;
    'next: for &art in ids {
        let Some(visual) = features.get(art) else {
            skipped += 1;
            continue;
        };
        let mut labels = [0; 3];
        for (i, ty) in LABEL_EDGES.iter().enumerate() {
            let name = match graph.first_out(art, *ty) {
                Some(target) => graph.node(target)?.name.as_str(),
                None => "",
            };
            match index[i].get(name) {
                Some(&c) => labels[i] = c,
                None => {
                    skipped += 1;
                    continue 'next;
                }
            }
        }
        out.push(LabeledInstance {
            artwork: art,
            name: graph.node(art)?.name.clone(),
            visual: visual.to_vec(),
            labels,
            context: None,
        });
    }
    Ok((out, skipped))
}
