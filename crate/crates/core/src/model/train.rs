use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::argmax;
use super::network::batch_matrix;
use super::{
    backward, forward_batch, total_loss, AdamState, Checkpoint, ClassifierParams, LabeledInstance,
    ModelConfig, Task,
};
use crate::error::{Error, Result};

const SHUFFLE_SALT: u64 = 0x7a11_5eed_0000_0003;
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskAccuracy {
    pub artist: f64,
    pub style: f64,
    pub genre: f64,
}

impl TaskAccuracy {
    pub fn get(&self, task: Task) -> f64 {
        match task {
            Task::Artist => self.artist,
            Task::Style => self.style,
            Task::Genre => self.genre,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    /// Instance-weighted mean of the batch losses seen during the epoch.
    pub loss: f64,
    pub validation: Option<TaskAccuracy>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ClassifierParams<f32>,
    pub adam: AdamState<f32>,
    pub epochs_done: usize,
    pub log: Vec<EpochLog>,
}

fn check_instances(set: &[LabeledInstance], config: &ModelConfig, needs_context: bool) -> Result<()> {
    for inst in set {
        if inst.visual.len() != config.visual_dim {
            return Err(Error::Shape(format!(
                "{} has {} visual entries, expected {}",
                inst.name,
                inst.visual.len(),
                config.visual_dim
            )));
        }
        if !inst.visual.iter().all(|v| v.is_finite()) {
            return Err(Error::validation(format!("{} has non-finite visual features", inst.name)));
        }
        for task in Task::ALL {
            let len = config.classes(task);
            if inst.label(task) >= len {
                return Err(Error::Index {
                    index: inst.label(task),
                    len,
                });
            }
        }
        if needs_context {
            match &inst.context {
                None => {
                    return Err(Error::validation(format!(
                        "{} has no context embedding but mode {} needs one",
                        inst.name, config.mode
                    )))
                }
                Some(c) if c.len() != config.context_dim => {
                    return Err(Error::Shape(format!(
                        "{} context has {} entries, expected {}",
                        inst.name,
                        c.len(),
                        config.context_dim
                    )))
                }
                Some(_) => {}
            }
        }
    }
    Ok(())
}

/// Per-task accuracy of [`super::predict`] over `set`.
pub fn evaluate(params: &ClassifierParams<f32>, config: &ModelConfig, set: &[LabeledInstance]) -> Result<TaskAccuracy> {
    if set.is_empty() {
        return Err(Error::validation("cannot evaluate on an empty set"));
    }
    check_instances(set, config, false)?;
    let mut correct = [0usize; 3];
    for chunk in set.chunks(EVAL_CHUNK) {
        let x = batch_matrix::<f32>(chunk, config.visual_dim)?;
        let trace = forward_batch(x, params, config)?;
        for (t, logits) in trace.logits.iter().enumerate() {
            for (row, inst) in logits.rows().into_iter().zip(chunk) {
                if argmax(row.as_slice().unwrap()) == inst.labels[t] {
                    correct[t] += 1;
                }
            }
        }
    }
    let n = set.len() as f64;
    Ok(TaskAccuracy {
        artist: correct[0] as f64 / n,
        style: correct[1] as f64 / n,
        genre: correct[2] as f64 / n,
    })
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SHUFFLE_SALT);
    rng.set_stream(epoch as u64);
    rng
}

fn run_epochs(
    mut params: ClassifierParams<f32>,
    mut adam: AdamState<f32>,
    start: usize,
    train_set: &[LabeledInstance],
    validation: &[LabeledInstance],
    config: &ModelConfig,
) -> Result<TrainOutcome> {
    let mut log = Vec::new();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in start..config.epochs {
        order.sort_unstable();
        order.shuffle(&mut epoch_rng(config.seed, epoch));
        let mut loss_sum = 0.0;
        for idx in order.chunks(config.batch_size) {
            let batch: Vec<LabeledInstance> = idx.iter().map(|&i| train_set[i].clone()).collect();
            let x = batch_matrix::<f32>(&batch, config.visual_dim)?;
            let trace = forward_batch(x, &params, config)?;
            let loss = total_loss(&batch, &trace, config)?;
            loss_sum += loss.total * batch.len() as f64;
            let grads = backward(&batch, &trace, &params, config)?;
            adam.step(&mut params, &grads, config)?;
        }
        let loss = loss_sum / train_set.len() as f64;
        if !loss.is_finite() || !params.all_finite() {
            return Err(Error::validation(format!("training diverged in epoch {}", epoch + 1)));
        }
        let validation = if validation.is_empty() {
            None
        } else {
            Some(evaluate(&params, config, validation)?)
        };
        log.push(EpochLog {
            epoch: epoch + 1,
            loss,
            validation,
        });
    }
    Ok(TrainOutcome {
        params,
        adam,
        epochs_done: config.epochs.max(start),
        log,
    })
}

/// Mini-batch Adam training from a seeded initialization. Each epoch visits
/// the training set in a fresh seeded order.
pub fn train(
    train_set: &[LabeledInstance],
    validation: &[LabeledInstance],
    config: &ModelConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::validation("training set is empty"));
    }
    check_instances(train_set, config, config.mode.has_encoder())?;
    check_instances(validation, config, false)?;
    let params = ClassifierParams::init(config)?;
    let adam = AdamState::new(&params);
    run_epochs(params, adam, 0, train_set, validation, config)
}

/// Continues a checkpointed run up to `config.epochs`. Every field except
/// `epochs` must match the checkpoint's config.
pub fn resume(
    checkpoint: Checkpoint,
    train_set: &[LabeledInstance],
    validation: &[LabeledInstance],
    config: &ModelConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let saved = ModelConfig {
        epochs: config.epochs,
        ..checkpoint.config.clone()
    };
    if &saved != config {
        return Err(Error::validation("config does not match the checkpoint"));
    }
    if config.epochs < checkpoint.epochs_done {
        return Err(Error::validation(format!(
            "checkpoint already has {} epochs, asked for {}",
            checkpoint.epochs_done, config.epochs
        )));
    }
    if train_set.is_empty() {
        return Err(Error::validation("training set is empty"));
    }
    check_instances(train_set, config, config.mode.has_encoder())?;
    check_instances(validation, config, false)?;
    run_epochs(
        checkpoint.params,
        checkpoint.adam,
        checkpoint.epochs_done,
        train_set,
        validation,
        config,
    )
}
