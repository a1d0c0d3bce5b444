//! Multi-task multi-modal classifier.
//!
//! A two-layer tanh encoder projects a visual feature vector into the
//! context-embedding space. Depending on [`Mode`], that projection is
//! concatenated with the visual features before three linear task heads
//! (artist, style, genre), used only as an auxiliary regression target, or
//! absent altogether.
//!
//! All maths is generic over [`Real`] so the same code runs in `f32` for
//! training and in `f64` for gradient checks.

mod adam;
mod checkpoint;
mod dataset;
mod loss;
mod network;
mod train;

use std::fmt;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adam::AdamState;
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, Checkpoint};
pub use dataset::{decode_dataset, encode_dataset, load_dataset, save_dataset, DatasetManifest};
pub use loss::{argmax, cross_entropy, mse_loss, softmax, total_loss, LossBreakdown};
pub use network::{backward, encoder_forward, forward, forward_batch, predict, predict_proba, BatchTrace, ForwardTrace, Prediction};
pub use train::{evaluate, resume, train, EpochLog, TaskAccuracy, TrainOutcome};

/// Floating-point type the model can be instantiated with.
pub trait Real:
    ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + num_traits::Float
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    fn of(x: f64) -> Self;
    fn of_f32(x: f32) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }
    fn of_f32(x: f32) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }
    fn of_f32(x: f32) -> Self {
        x as f64
    }
    fn as_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Heads see `concat(visual, predicted context)`.
    Multimodal,
    /// Heads see visual features only; the encoder is still trained on the
    /// context-regression loss.
    RegularizationOnly,
    /// No encoder; heads on visual features.
    VisualOnly,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::VisualOnly, Mode::RegularizationOnly, Mode::Multimodal];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Multimodal => "multimodal",
            Mode::RegularizationOnly => "regularization_only",
            Mode::VisualOnly => "visual_only",
        }
    }

    pub fn has_encoder(self) -> bool {
        self != Mode::VisualOnly
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.replace('-', "_"))
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Artist,
    Style,
    Genre,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Artist, Task::Style, Task::Genre];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Artist => "artist",
            Task::Style => "style",
            Task::Genre => "genre",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub visual_dim: usize,
    pub context_dim: usize,
    pub encoder_hidden: usize,
    pub num_artists: usize,
    pub num_styles: usize,
    pub num_genres: usize,
    /// Weight of the context-regression term against classification.
    pub gamma: f64,
    pub lambda_artist: f64,
    pub lambda_style: f64,
    pub lambda_genre: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            visual_dim: 2048,
            context_dim: 128,
            encoder_hidden: 512,
            num_artists: 1,
            num_styles: 1,
            num_genres: 1,
            gamma: 0.4,
            lambda_artist: 0.5,
            lambda_style: 0.2,
            lambda_genre: 0.2,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            epochs: 10,
            seed: 0,
            mode: Mode::Multimodal,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("visual_dim", self.visual_dim),
            ("context_dim", self.context_dim),
            ("encoder_hidden", self.encoder_hidden),
            ("num_artists", self.num_artists),
            ("num_styles", self.num_styles),
            ("num_genres", self.num_genres),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return Err(Error::validation(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::validation(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        for (name, v) in [
            ("lambda_artist", self.lambda_artist),
            ("lambda_style", self.lambda_style),
            ("lambda_genre", self.lambda_genre),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("{name} must be non-negative")));
            }
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.learning_rate)
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !positive(self.epsilon)
        {
            return Err(Error::validation("invalid optimizer settings"));
        }
        Ok(())
    }

    pub fn classes(&self, task: Task) -> usize {
        match task {
            Task::Artist => self.num_artists,
            Task::Style => self.num_styles,
            Task::Genre => self.num_genres,
        }
    }

    pub fn lambda(&self, task: Task) -> f64 {
        match task {
            Task::Artist => self.lambda_artist,
            Task::Style => self.lambda_style,
            Task::Genre => self.lambda_genre,
        }
    }

    /// Width of the vector the task heads read.
    pub fn head_input_dim(&self) -> usize {
        match self.mode {
            Mode::Multimodal => self.visual_dim + self.context_dim,
            Mode::RegularizationOnly | Mode::VisualOnly => self.visual_dim,
        }
    }

    /// Fields that fix tensor shapes; two configs agreeing on these can
    /// share parameters.
    pub fn same_architecture(&self, other: &ModelConfig) -> bool {
        self.visual_dim == other.visual_dim
            && self.context_dim == other.context_dim
            && self.encoder_hidden == other.encoder_hidden
            && self.num_artists == other.num_artists
            && self.num_styles == other.num_styles
            && self.num_genres == other.num_genres
            && self.mode == other.mode
    }
}

/// One artwork as seen by the classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub artwork: crate::graph::NodeId,
    pub name: String,
    pub visual: Vec<f32>,
    /// Class indices for artist, style and genre.
    pub labels: [usize; 3],
    /// The artwork's context embedding; present only for training artworks.
    pub context: Option<Vec<f32>>,
}

impl LabeledInstance {
    pub fn label(&self, task: Task) -> usize {
        self.labels[task as usize]
    }
}

/// Class names for each task; index `i` names class `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVocab {
    pub artists: Vec<String>,
    pub styles: Vec<String>,
    pub genres: Vec<String>,
}

impl LabelVocab {
    pub fn names(&self, task: Task) -> &[String] {
        match task {
            Task::Artist => &self.artists,
            Task::Style => &self.styles,
            Task::Genre => &self.genres,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams<T> {
    /// `hidden x visual_dim`
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    /// `context_dim x hidden`
    pub w2: Array2<T>,
    pub b2: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams<T> {
    /// `classes x head_input_dim`
    pub w: Array2<T>,
    pub b: Array1<T>,
}

/// Trainable state. Gradients share this type.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams<T> {
    pub encoder: Option<EncoderParams<T>>,
    pub heads: [HeadParams<T>; 3],
}

pub type Gradients<T> = ClassifierParams<T>;

fn glorot<T: Real>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<T> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || T::of(rng.random_range(-limit..=limit)))
}

impl<T: Real> ClassifierParams<T> {
    /// Glorot-uniform weights and zero biases, drawn from `config.seed`.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let encoder = config.mode.has_encoder().then(|| EncoderParams {
            w1: glorot(config.encoder_hidden, config.visual_dim, &mut rng),
            b1: Array1::zeros(config.encoder_hidden),
            w2: glorot(config.context_dim, config.encoder_hidden, &mut rng),
            b2: Array1::zeros(config.context_dim),
        });
        let input = config.head_input_dim();
        let heads = Task::ALL.map(|task| HeadParams {
            w: glorot(config.classes(task), input, &mut rng),
            b: Array1::zeros(config.classes(task)),
        });
        Ok(ClassifierParams { encoder, heads })
    }

    /// All-zero parameters shaped for `config`.
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let input = config.head_input_dim();
        Ok(ClassifierParams {
            encoder: config.mode.has_encoder().then(|| EncoderParams {
                w1: Array2::zeros((config.encoder_hidden, config.visual_dim)),
                b1: Array1::zeros(config.encoder_hidden),
                w2: Array2::zeros((config.context_dim, config.encoder_hidden)),
                b2: Array1::zeros(config.context_dim),
            }),
            heads: Task::ALL.map(|task| HeadParams {
                w: Array2::zeros((config.classes(task), input)),
                b: Array1::zeros(config.classes(task)),
            }),
        })
    }

    pub fn zeros_like(&self) -> Self {
        let z2 = |a: &Array2<T>| Array2::zeros(a.raw_dim());
        let z1 = |a: &Array1<T>| Array1::zeros(a.raw_dim());
        ClassifierParams {
            encoder: self.encoder.as_ref().map(|e| EncoderParams {
                w1: z2(&e.w1),
                b1: z1(&e.b1),
                w2: z2(&e.w2),
                b2: z1(&e.b2),
            }),
            heads: self.heads.each_ref().map(|h| HeadParams {
                w: z2(&h.w),
                b: z1(&h.b),
            }),
        }
    }

    /// `(name, shape)` for every tensor, in a fixed order.
    pub fn layout(&self) -> Vec<(String, Vec<usize>)> {
        self.tensors().into_iter().map(|(n, s, _)| (n, s)).collect()
    }

    pub fn tensors(&self) -> Vec<(String, Vec<usize>, &[T])> {
        let mut out = Vec::new();
        if let Some(e) = &self.encoder {
            out.push(("encoder.w1".into(), e.w1.shape().to_vec(), e.w1.as_slice().unwrap()));
            out.push(("encoder.b1".into(), e.b1.shape().to_vec(), e.b1.as_slice().unwrap()));
            out.push(("encoder.w2".into(), e.w2.shape().to_vec(), e.w2.as_slice().unwrap()));
            out.push(("encoder.b2".into(), e.b2.shape().to_vec(), e.b2.as_slice().unwrap()));
        }
        for (task, h) in Task::ALL.iter().zip(&self.heads) {
            out.push((format!("head.{}.w", task.as_str()), h.w.shape().to_vec(), h.w.as_slice().unwrap()));
            out.push((format!("head.{}.b", task.as_str()), h.b.shape().to_vec(), h.b.as_slice().unwrap()));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        if let Some(e) = &mut self.encoder {
            out.push(e.w1.as_slice_mut().unwrap());
            out.push(e.b1.as_slice_mut().unwrap());
            out.push(e.w2.as_slice_mut().unwrap());
            out.push(e.b2.as_slice_mut().unwrap());
        }
        for h in &mut self.heads {
            out.push(h.w.as_slice_mut().unwrap());
            out.push(h.b.as_slice_mut().unwrap());
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, _, v)| v.iter().all(|x| x.is_finite()))
    }

    /// Bitwise equality, so `-0.0 != 0.0` and identical NaNs compare equal.
    pub fn bit_eq(&self, other: &Self) -> bool {
        let a = self.tensors();
        let b = other.tensors();
        a.len() == b.len()
            && a.iter().zip(&b).all(|((na, sa, va), (nb, sb, vb))| {
                na == nb
                    && sa == sb
                    && va
                        .iter()
                        .zip(vb.iter())
                        .all(|(x, y)| x.as_f64().to_bits() == y.as_f64().to_bits())
            })
    }

    pub fn cast<U: Real>(&self) -> ClassifierParams<U> {
        let c2 = |a: &Array2<T>| a.mapv(|x| U::of(x.as_f64()));
        let c1 = |a: &Array1<T>| a.mapv(|x| U::of(x.as_f64()));
        ClassifierParams {
            encoder: self.encoder.as_ref().map(|e| EncoderParams {
                w1: c2(&e.w1),
                b1: c1(&e.b1),
                w2: c2(&e.w2),
                b2: c1(&e.b2),
            }),
            heads: self.heads.each_ref().map(|h| HeadParams {
                w: c2(&h.w),
                b: c1(&h.b),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(mode: Mode) -> ModelConfig {
        ModelConfig {
            visual_dim: 8,
            context_dim: 4,
            encoder_hidden: 6,
            num_artists: 3,
            num_styles: 3,
            num_genres: 3,
            mode,
            ..Default::default()
        }
    }

    #[test]
    fn shapes_follow_mode() {
        let p = ClassifierParams::<f64>::init(&toy(Mode::Multimodal)).unwrap();
        assert_eq!(p.heads[0].w.shape(), &[3, 12]);
        assert_eq!(p.encoder.as_ref().unwrap().w1.shape(), &[6, 8]);
        let p = ClassifierParams::<f64>::init(&toy(Mode::RegularizationOnly)).unwrap();
        assert_eq!(p.heads[0].w.shape(), &[3, 8]);
        assert!(p.encoder.is_some());
        let p = ClassifierParams::<f64>::init(&toy(Mode::VisualOnly)).unwrap();
        assert!(p.encoder.is_none());
        assert_eq!(p.layout().len(), 6);
    }

    #[test]
    fn default_head_input_is_2176() {
        assert_eq!(ModelConfig::default().head_input_dim(), 2048 + 128);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let cfg = toy(Mode::Multimodal);
        let a = ClassifierParams::<f32>::init(&cfg).unwrap();
        let b = ClassifierParams::<f32>::init(&cfg).unwrap();
        assert!(a.bit_eq(&b));
        let c = ClassifierParams::<f32>::init(&ModelConfig { seed: 1, ..cfg.clone() }).unwrap();
        assert!(!a.bit_eq(&c));
        let limit = (6.0f32 / (6 + 8) as f32).sqrt();
        let w1 = &a.encoder.as_ref().unwrap().w1;
        assert!(w1.iter().all(|x| x.abs() <= limit));
        assert!(a.heads.iter().all(|h| h.b.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig { gamma: 1.5, ..Default::default() }.validate().is_err());
        assert!(ModelConfig { lambda_style: -0.1, ..Default::default() }.validate().is_err());
        assert!(ModelConfig { num_genres: 0, ..Default::default() }.validate().is_err());
        assert!(ModelConfig::default().validate().is_ok());
    }

    #[test]
    fn mode_parses() {
        assert_eq!("regularization-only".parse::<Mode>().unwrap(), Mode::RegularizationOnly);
        assert_eq!(serde_json::to_string(&Mode::VisualOnly).unwrap(), "\"visual_only\"");
    }
}
