//! Skip-gram with negative sampling over node sequences.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AliasTable, EmbeddingTable, Node2VecConfig};
use crate::error::{Error, Result};
use crate::graph::NodeId;

const INIT_SEED_SALT: u64 = 0x5eed_0e4b_ed00_0001;
const TRAIN_SEED_SALT: u64 = 0x5eed_0e4b_ed00_0002;

fn sigmoid(x: f32) -> f32 {
    if x > 20.0 {
        1.0
    } else if x < -20.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

// Eight independent accumulators so the loop vectorizes while the
// summation order stays fixed.
fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f32 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f32>() + tail
}

fn axpy(alpha: f32, x: &[f32], y: &mut [f32]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Trains one input vector per node seen in `walks`.
///
/// Every `(center, context)` pair within `window` positions is a positive
/// example; `negatives` nodes drawn from the unigram distribution raised to
/// 3/4 are negatives. Input vectors start uniform in `±0.5/dim`, output
/// vectors at zero, and the step decays linearly over all epochs.
pub fn train_skipgram(walks: &[Vec<NodeId>], config: &Node2VecConfig) -> Result<EmbeddingTable> {
    config.validate()?;
    let mut counts: BTreeMap<NodeId, u64> = BTreeMap::new();
    for w in walks {
        for &id in w {
            *counts.entry(id).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::validation("skip-gram needs at least one non-empty walk"));
    }
    let ids: Vec<NodeId> = counts.keys().copied().collect();
    let slot: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let sequences: Vec<Vec<usize>> = walks
        .iter()
        .map(|w| w.iter().map(|id| slot[id]).collect())
        .collect();

    let dim = config.dim;
    let n = ids.len();
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed ^ INIT_SEED_SALT);
    let half = 0.5 / dim as f32;
    let mut input: Vec<f32> = (0..n * dim)
        .map(|_| init_rng.random_range(-half..half))
        .collect();
    let mut output = vec![0.0f32; n * dim];

    let noise_weights: Vec<f64> = counts.values().map(|&c| (c as f64).powf(0.75)).collect();
    let noise = AliasTable::new(&noise_weights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ TRAIN_SEED_SALT);

    let positions: usize = sequences.iter().map(Vec::len).sum();
    let total = (positions * config.epochs).max(1) as f64;
    let lr0 = config.learning_rate;
    let mut done = 0usize;
    let mut grad = vec![0.0f32; dim];

    for _ in 0..config.epochs {
        for seq in &sequences {
            for (i, &center) in seq.iter().enumerate() {
                let lr = (lr0 * (1.0 - done as f64 / total)).max(lr0 * 1e-4) as f32;
                done += 1;
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(seq.len() - 1);
                for (j, &context) in seq.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad.fill(0.0);
                    let v = &input[context * dim..(context + 1) * dim];
                    for k in 0..=config.negatives {
                        let (target, label) = if k == 0 {
                            (center, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let u = &mut output[target * dim..(target + 1) * dim];
                        let g = (label - sigmoid(dot(v, u))) * lr;
                        axpy(g, u, &mut grad);
                        axpy(g, v, u);
                    }
                    axpy(1.0, &grad, &mut input[context * dim..(context + 1) * dim]);
                }
            }
        }
    }

    EmbeddingTable::new(dim, ids, input)
}
