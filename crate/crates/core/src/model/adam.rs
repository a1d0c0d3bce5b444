use super::{ClassifierParams, Gradients, ModelConfig, Real};
use crate::error::{Error, Result};

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: ClassifierParams<T>,
    pub v: ClassifierParams<T>,
    pub t: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &ClassifierParams<T>) -> Self {
        AdamState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(
        &mut self,
        params: &mut ClassifierParams<T>,
        grads: &Gradients<T>,
        config: &ModelConfig,
    ) -> Result<()> {
        if params.layout() != grads.layout() || params.layout() != self.m.layout() {
            return Err(Error::Shape("gradient layout does not match parameters".into()));
        }
        self.t += 1;
        let b1 = config.beta1;
        let b2 = config.beta2;
        let c1 = T::of(1.0 - b1.powf(self.t as f64));
        let c2 = T::of(1.0 - b2.powf(self.t as f64));
        let (b1, b2) = (T::of(b1), T::of(b2));
        let lr = T::of(config.learning_rate);
        let eps = T::of(config.epsilon);
        let one = T::one();
        let g_all = grads.tensors();
        for (((p, m), v), (_, _, g)) in params
            .tensors_mut()
            .into_iter()
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
            .zip(g_all)
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (one - b1) * gi;
                v[i] = b2 * v[i] + (one - b2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
