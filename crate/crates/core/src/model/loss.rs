use serde::{Deserialize, Serialize};

use super::{BatchTrace, LabeledInstance, Mode, ModelConfig, Real, Task};
use crate::error::{Error, Result};

/// Squared Euclidean distance `||p - u||^2`, not divided by the length.
pub fn mse_loss<T: Real>(p: &[T], u: &[T]) -> Result<T> {
    if p.len() != u.len() {
        return Err(Error::Shape(format!(
            "prediction has {} entries, target {}",
            p.len(),
            u.len()
        )));
    }
    Ok(p.iter()
        .zip(u)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b)))
}

// (max, ln sum exp(z - max))
fn shifted_lse<T: Real>(z: &[T]) -> (T, T) {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let sum = z.iter().fold(T::zero(), |acc, &v| acc + (v - max).exp());
    (max, sum.ln())
}

/// `-log softmax(z)[class]`, evaluated with the max subtracted first so
/// large logits do not overflow.
pub fn cross_entropy<T: Real>(z: &[T], class: usize) -> Result<T> {
    if class >= z.len() {
        return Err(Error::Index {
            index: class,
            len: z.len(),
        });
    }
    let (max, log_sum) = shifted_lse(z);
    Ok(((max - z[class]) + log_sum).max(T::zero()))
}

pub fn softmax<T: Real>(z: &[T]) -> Vec<T> {
    let (max, log_sum) = shifted_lse(z);
    z.iter().map(|&v| ((v - max) - log_sum).exp()).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: Real>(z: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Batch-mean cross-entropy per task.
    pub task_means: [f64; 3],
    /// `sum_i lambda_i * task_means[i]`.
    pub classification: f64,
    /// Batch-mean squared distance between predicted and true context.
    pub mse: Option<f64>,
    pub total: f64,
}

/// Combined objective for one batch:
/// `(1 - gamma) * sum_i lambda_i * mean_j CE_ij + gamma * mean_j ||p_j - u_j||^2`.
///
/// In visual-only mode there is no projection to regress, so the objective
/// is the weighted classification term alone.
pub fn total_loss<T: Real>(
    batch: &[LabeledInstance],
    trace: &BatchTrace<T>,
    config: &ModelConfig,
) -> Result<LossBreakdown> {
    if batch.is_empty() || batch.len() != trace.rows() {
        return Err(Error::Shape(format!(
            "batch of {} instances, trace of {} rows",
            batch.len(),
            trace.rows()
        )));
    }
    let n = batch.len() as f64;
    let mut task_means = [0.0; 3];
    for task in Task::ALL {
        let logits = &trace.logits[task as usize];
        let mut sum = 0.0;
        for (row, inst) in logits.rows().into_iter().zip(batch) {
            sum += cross_entropy(row.as_slice().unwrap(), inst.label(task))?.as_f64();
        }
        task_means[task as usize] = sum / n;
    }
    let classification: f64 = Task::ALL
        .iter()
        .map(|&t| config.lambda(t) * task_means[t as usize])
        .sum();

    if config.mode == Mode::VisualOnly {
        return Ok(LossBreakdown {
            task_means,
            classification,
            mse: None,
            total: classification,
        });
    }

    let predicted = trace
        .predicted
        .as_ref()
        .ok_or_else(|| Error::validation("trace has no predicted context"))?;
    let mut sum = 0.0;
    for (row, inst) in predicted.rows().into_iter().zip(batch) {
        let u = inst.context.as_ref().ok_or_else(|| {
            Error::validation(format!(
                "{} has no context embedding but mode {} needs one",
                inst.name, config.mode
            ))
        })?;
        let u: Vec<T> = u.iter().map(|&x| T::of_f32(x)).collect();
        sum += mse_loss(row.as_slice().unwrap(), &u)?.as_f64();
    }
    let mse = sum / n;
    Ok(LossBreakdown {
        task_means,
        classification,
        mse: Some(mse),
        total: (1.0 - config.gamma) * classification + config.gamma * mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[0.3f64, -0.2], &[0.3, -0.2]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert!(mse_loss(&[1.0f64], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn cross_entropy_examples() {
        for c in 0..4 {
            let v = cross_entropy(&[0.0f64; 4], c).unwrap();
            assert!((v - 4f64.ln()).abs() < 1e-12);
        }
        // -log(e^10 / (e^10 + 2)) = log(1 + 2e^-10)
        let v = cross_entropy(&[10.0f64, 0.0, 0.0], 0).unwrap();
        assert!((v - 9.079573746724444e-5).abs() < 1e-15, "{v}");
        let v = cross_entropy(&[1000.0f64, 0.0], 0).unwrap();
        assert!(v.is_finite() && v.abs() < 1e-300);
        let v = cross_entropy(&[1000.0f32, 0.0], 1).unwrap();
        assert!((v - 1000.0).abs() < 1e-3);
        assert!(matches!(
            cross_entropy(&[0.0f64; 3], 3),
            Err(Error::Index { index: 3, len: 3 })
        ));
    }

    #[test]
    fn argmax_rules() {
        assert_eq!(argmax(&[3.0f32, 1.0, 2.0]), 0);
        assert_eq!(argmax(&[5.0f32, 5.0]), 0);
        assert_eq!(argmax(&[1.0f32, 5.0, 5.0]), 1);
        let s = softmax(&[1.0f64, 2.0, 3.0]);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
