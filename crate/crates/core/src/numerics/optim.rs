//! Gradient-descent optimizers over named parameter maps.

use std::collections::BTreeMap;

use crate::error::NumericsError;
use crate::numerics::{Array, Gradients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// SGD or Adam with optional global-norm gradient clipping.
///
/// Moment buffers are keyed by parameter name, so a single optimizer can be
/// reused across tapes as long as parameter names and shapes stay fixed.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    clip_norm: Option<f64>,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: BTreeMap<String, Vec<f64>>,
    v: BTreeMap<String, Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, clip_norm: Option<f64>) -> Self {
        Optimizer {
            kind,
            lr,
            clip_norm,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    pub fn sgd(lr: f64) -> Self {
        Self::new(OptimizerKind::Sgd, lr, None)
    }

    pub fn adam(lr: f64) -> Self {
        Self::new(OptimizerKind::Adam, lr, None)
    }

    pub fn with_clip(mut self, clip_norm: f64) -> Self {
        self.clip_norm = Some(clip_norm);
        self
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.lr = lr;
    }

    /// Apply one update. Gradients must be finite and match parameter
    /// shapes; gradient names absent from `params` are an error, while
    /// parameters without gradients are left untouched.
    pub fn step(
        &mut self,
        params: &mut BTreeMap<String, Array>,
        grads: &Gradients,
    ) -> Result<(), NumericsError> {
        for (name, grad) in grads.iter() {
            let Some(param) = params.get(name) else {
                return Err(NumericsError::UnknownParam(name.clone()));
            };
            if param.shape() != grad.shape() {
                return Err(NumericsError::GradShapeMismatch {
                    param: name.clone(),
                    param_shape: param.shape().to_vec(),
                    grad: grad.shape().to_vec(),
                });
            }
            if !grad.is_finite() {
                return Err(NumericsError::NonFiniteGradient { param: name.clone() });
            }
        }

        let scale = match self.clip_norm {
            Some(max) => {
                let norm = grads.global_norm();
                if norm > max {
                    max / norm
                } else {
                    1.0
                }
            }
            None => 1.0,
        };

        match self.kind {
            OptimizerKind::Sgd => {
                for (name, grad) in grads.iter() {
                    let param = params.get_mut(name).expect("validated above");
                    for (p, g) in param.data_mut().iter_mut().zip(grad.data()) {
                        *p -= self.lr * scale * g;
                    }
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let bc1 = 1.0 - self.beta1.powi(self.t as i32);
                let bc2 = 1.0 - self.beta2.powi(self.t as i32);
                for (name, grad) in grads.iter() {
                    let param = params.get_mut(name).expect("validated above");
                    let m = self
                        .m
                        .entry(name.clone())
                        .or_insert_with(|| vec![0.0; grad.len()]);
                    let v = self
                        .v
                        .entry(name.clone())
                        .or_insert_with(|| vec![0.0; grad.len()]);
                    for (((p, &graw), m), v) in param
                        .data_mut()
                        .iter_mut()
                        .zip(grad.data())
                        .zip(m.iter_mut())
                        .zip(v.iter_mut())
                    {
                        let g = scale * graw;
                        *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                        *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                        let mhat = *m / bc1;
                        let vhat = *v / bc2;
                        *p -= self.lr * mhat / (vhat.sqrt() + self.eps);
                    }
                }
            }
        }
        Ok(())
    }
}
