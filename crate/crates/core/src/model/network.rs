use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::loss::{argmax, softmax};
use super::{ClassifierParams, EncoderParams, Gradients, LabeledInstance, Mode, ModelConfig, Real, Task};
use crate::error::{Error, Result};

/// Activations of one forward pass over a batch (one row per instance),
/// kept for the backward pass.
#[derive(Debug, Clone)]
pub struct BatchTrace<T> {
    pub visual: Array2<T>,
    /// Hidden encoder activations, `tanh(W1 x + b1)`.
    pub hidden: Option<Array2<T>>,
    /// Predicted context `p = tanh(W2 h + b2)`.
    pub predicted: Option<Array2<T>>,
    pub logits: [Array2<T>; 3],
}

impl<T> BatchTrace<T> {
    pub fn rows(&self) -> usize {
        self.visual.nrows()
    }
}

/// Single-instance view of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace<T> {
    pub predicted_context: Option<Vec<T>>,
    pub logits: [Vec<T>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub artist: usize,
    pub style: usize,
    pub genre: usize,
}

impl Prediction {
    pub fn get(&self, task: Task) -> usize {
        match task {
            Task::Artist => self.artist,
            Task::Style => self.style,
            Task::Genre => self.genre,
        }
    }
}

fn check_shapes<T: Real>(params: &ClassifierParams<T>, config: &ModelConfig) -> Result<()> {
    if params.encoder.is_some() != config.mode.has_encoder() {
        return Err(Error::Shape(format!(
            "parameters do not match mode {}",
            config.mode
        )));
    }
    for (task, head) in Task::ALL.iter().zip(&params.heads) {
        let want = [config.classes(*task), config.head_input_dim()];
        if head.w.shape() != want {
            return Err(Error::Shape(format!(
                "{} head is {:?}, config implies {:?}",
                task.as_str(),
                head.w.shape(),
                want
            )));
        }
    }
    Ok(())
}

fn encode<T: Real>(x: &ArrayView2<T>, enc: &EncoderParams<T>) -> (Array2<T>, Array2<T>) {
    let hidden = (x.dot(&enc.w1.t()) + &enc.b1).mapv(T::tanh);
    let predicted = (hidden.dot(&enc.w2.t()) + &enc.b2).mapv(T::tanh);
    (hidden, predicted)
}

/// `tanh(W2 tanh(W1 x + b1) + b2)`.
pub fn encoder_forward<T: Real>(visual: &[T], params: &ClassifierParams<T>) -> Result<Array1<T>> {
    let enc = params
        .encoder
        .as_ref()
        .ok_or_else(|| Error::Shape("model has no encoder".into()))?;
    if visual.len() != enc.w1.ncols() {
        return Err(Error::Shape(format!(
            "visual vector has {} entries, encoder expects {}",
            visual.len(),
            enc.w1.ncols()
        )));
    }
    let x = ArrayView2::from_shape((1, visual.len()), visual).unwrap();
    let (_, p) = encode(&x, enc);
    Ok(p.row(0).to_owned())
}

/// Forward pass over a `batch x visual_dim` matrix.
pub fn forward_batch<T: Real>(
    visual: Array2<T>,
    params: &ClassifierParams<T>,
    config: &ModelConfig,
) -> Result<BatchTrace<T>> {
    check_shapes(params, config)?;
    if visual.ncols() != config.visual_dim {
        return Err(Error::Shape(format!(
            "visual vectors have {} entries, config expects {}",
            visual.ncols(),
            config.visual_dim
        )));
    }
    let (hidden, predicted) = match &params.encoder {
        Some(enc) => {
            let (h, p) = encode(&visual.view(), enc);
            (Some(h), Some(p))
        }
        None => (None, None),
    };
    let v = config.visual_dim;
    let logits = params.heads.each_ref().map(|head| {
        let mut z = visual.dot(&head.w.slice(s![.., ..v]).t());
        if config.mode == Mode::Multimodal {
            let p = predicted.as_ref().expect("multimodal has an encoder");
            z = z + p.dot(&head.w.slice(s![.., v..]).t());
        }
        z + &head.b
    });
    Ok(BatchTrace {
        visual,
        hidden,
        predicted,
        logits,
    })
}

pub(crate) fn batch_matrix<T: Real>(batch: &[LabeledInstance], dim: usize) -> Result<Array2<T>> {
    let mut m = Array2::zeros((batch.len(), dim));
    for (mut row, inst) in m.rows_mut().into_iter().zip(batch) {
        if inst.visual.len() != dim {
            return Err(Error::Shape(format!(
                "{} has {} visual entries, expected {dim}",
                inst.name,
                inst.visual.len()
            )));
        }
        for (dst, &src) in row.iter_mut().zip(&inst.visual) {
            *dst = T::of_f32(src);
        }
    }
    Ok(m)
}

fn single<T: Real>(visual: &[f32], config: &ModelConfig) -> Result<Array2<T>> {
    if visual.len() != config.visual_dim {
        return Err(Error::Shape(format!(
            "visual vector has {} entries, expected {}",
            visual.len(),
            config.visual_dim
        )));
    }
    Ok(Array2::from_shape_fn((1, visual.len()), |(_, j)| T::of_f32(visual[j])))
}

/// Forward pass for one instance. Only the visual vector is read: in
/// multimodal mode the heads always see the *predicted* context.
pub fn forward<T: Real>(
    instance: &LabeledInstance,
    params: &ClassifierParams<T>,
    config: &ModelConfig,
) -> Result<ForwardTrace<T>> {
    let trace = forward_batch(single(&instance.visual, config)?, params, config)?;
    Ok(ForwardTrace {
        predicted_context: trace.predicted.map(|p| p.row(0).to_vec()),
        logits: trace.logits.each_ref().map(|z| z.row(0).to_vec()),
    })
}

/// Per-task argmax, ties to the lowest class index.
pub fn predict<T: Real>(visual: &[f32], params: &ClassifierParams<T>, config: &ModelConfig) -> Result<Prediction> {
    let trace = forward_batch(single(visual, config)?, params, config)?;
    let best = |i: usize| argmax(trace.logits[i].row(0).as_slice().unwrap());
    Ok(Prediction {
        artist: best(0),
        style: best(1),
        genre: best(2),
    })
}

/// Softmax probabilities per task.
pub fn predict_proba<T: Real>(
    visual: &[f32],
    params: &ClassifierParams<T>,
    config: &ModelConfig,
) -> Result<[Vec<T>; 3]> {
    let trace = forward_batch(single(visual, config)?, params, config)?;
    Ok(trace
        .logits
        .each_ref()
        .map(|z| softmax(z.row(0).as_slice().unwrap())))
}

fn outer_sum<T: Real>(d: &Array2<T>, x: &ArrayView2<T>) -> Array2<T> {
    d.t().dot(x)
}

fn column_sum<T: Real>(d: &Array2<T>) -> Array1<T> {
    d.sum_axis(Axis(0))
}

/// Exact gradients of [`super::total_loss`] with respect to every
/// parameter. In multimodal mode the classification gradient reaches the
/// encoder through the predicted context as well as through the
/// regression term.
pub fn backward<T: Real>(
    batch: &[LabeledInstance],
    trace: &BatchTrace<T>,
    params: &ClassifierParams<T>,
    config: &ModelConfig,
) -> Result<Gradients<T>> {
    check_shapes(params, config)?;
    let n = batch.len();
    if n == 0 || n != trace.rows() {
        return Err(Error::Shape(format!("batch of {n}, trace of {}", trace.rows())));
    }
    let inv_n = T::of(1.0 / n as f64);
    let class_weight = if config.mode == Mode::VisualOnly {
        1.0
    } else {
        1.0 - config.gamma
    };
    let v = config.visual_dim;
    let mut grads = params.zeros_like();

    // dL/dz for each head: w_i / n * (softmax(z) - onehot)
    let mut d_predicted: Option<Array2<T>> = None;
    for (t, task) in Task::ALL.into_iter().enumerate() {
        let z = &trace.logits[t];
        let coef = T::of(class_weight * config.lambda(task)) * inv_n;
        let mut dz = Array2::zeros(z.raw_dim());
        for ((mut drow, zrow), inst) in dz.rows_mut().into_iter().zip(z.rows()).zip(batch) {
            let probs = softmax(zrow.as_slice().unwrap());
            let label = inst.label(task);
            if label >= probs.len() {
                return Err(Error::Index {
                    index: label,
                    len: probs.len(),
                });
            }
            for (k, (d, p)) in drow.iter_mut().zip(probs).enumerate() {
                let target = if k == label { T::one() } else { T::zero() };
                *d = coef * (p - target);
            }
        }
        let head = &params.heads[t];
        let g = &mut grads.heads[t];
        g.w.slice_mut(s![.., ..v])
            .assign(&outer_sum(&dz, &trace.visual.view()));
        if config.mode == Mode::Multimodal {
            let p = trace.predicted.as_ref().expect("multimodal trace has p");
            g.w.slice_mut(s![.., v..]).assign(&outer_sum(&dz, &p.view()));
            let contrib = dz.dot(&head.w.slice(s![.., v..]));
            d_predicted = Some(match d_predicted {
                Some(acc) => acc + contrib,
                None => contrib,
            });
        }
        g.b = column_sum(&dz);
    }

    if let (Some(enc), Some(genc)) = (&params.encoder, &mut grads.encoder) {
        let p = trace
            .predicted
            .as_ref()
            .ok_or_else(|| Error::validation("trace has no predicted context"))?;
        let h = trace.hidden.as_ref().expect("encoder trace has hidden layer");
        let mut dp = d_predicted.unwrap_or_else(|| Array2::zeros(p.raw_dim()));
        if config.gamma > 0.0 {
            let coef = T::of(2.0 * config.gamma) * inv_n;
            for ((mut drow, prow), inst) in dp.rows_mut().into_iter().zip(p.rows()).zip(batch) {
                let u = inst.context.as_ref().ok_or_else(|| {
                    Error::validation(format!("{} has no context embedding", inst.name))
                })?;
                if u.len() != prow.len() {
                    return Err(Error::Shape(format!(
                        "{} context has {} entries, expected {}",
                        inst.name,
                        u.len(),
                        prow.len()
                    )));
                }
                for ((d, &pv), &uv) in drow.iter_mut().zip(prow.iter()).zip(u) {
                    *d = *d + coef * (pv - T::of_f32(uv));
                }
            }
        }
        // through the output tanh
        let da2 = dp * &p.mapv(|x| T::one() - x * x);
        genc.w2 = outer_sum(&da2, &h.view());
        genc.b2 = column_sum(&da2);
        let dh = da2.dot(&enc.w2);
        let da1 = dh * &h.mapv(|x| T::one() - x * x);
        genc.w1 = outer_sum(&da1, &trace.visual.view());
        genc.b1 = column_sum(&da1);
    }
    Ok(grads)
}
