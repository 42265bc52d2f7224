//! Plain SGD and Adam, plus the single training-step entry point.

use ndarray::ArrayD;

use crate::elem::Elem;
use crate::network::{AzBatch, DescentBatch, Network};
use crate::NetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub optimizer: OptimizerKind,
    pub lr: f64,
}

impl TrainSettings {
    /// Policy/value training defaults: SGD at 1e-4.
    pub fn az_default() -> TrainSettings {
        TrainSettings {
            optimizer: OptimizerKind::Sgd,
            lr: 1e-4,
        }
    }

    /// Score-regression training defaults: Adam at 1e-4.
    pub fn descent_default() -> TrainSettings {
        TrainSettings {
            optimizer: OptimizerKind::Adam,
            lr: 1e-4,
        }
    }
}

/// Optimizer slots. SGD keeps no state; Adam keeps first/second moments per
/// tensor and the step counter.
#[derive(Debug, Clone)]
pub struct OptState<T: Elem> {
    pub kind: OptimizerKind,
    pub step: u64,
    pub m: Vec<ArrayD<T>>,
    pub v: Vec<ArrayD<T>>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl<T: Elem> OptState<T> {
    pub fn new(network: &Network<T>, kind: OptimizerKind) -> OptState<T> {
        let (m, v) = match kind {
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
            OptimizerKind::Adam => (network.params.grad_zeros(), network.params.grad_zeros()),
        };
        OptState { kind, step: 0, m, v }
    }

    fn apply(&mut self, network: &mut Network<T>, grads: &[ArrayD<T>], lr: f64) {
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                let lr = T::from_f64(lr);
                for (i, g) in grads.iter().enumerate() {
                    network
                        .params
                        .tensor_mut(i)
                        .zip_mut_with(g, |w, &d| *w = *w - lr * d);
                }
            }
            OptimizerKind::Adam => {
                let b1 = T::from_f64(ADAM_BETA1);
                let b2 = T::from_f64(ADAM_BETA2);
                let one = T::one();
                let bias1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
                let bias2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
                let step_size = T::from_f64(lr / bias1);
                let bias2_sqrt = T::from_f64(bias2.sqrt());
                let eps = T::from_f64(ADAM_EPS);
                for (i, g) in grads.iter().enumerate() {
                    let m = &mut self.m[i];
                    m.zip_mut_with(g, |m, &d| *m = b1 * *m + (one - b1) * d);
                    let v = &mut self.v[i];
                    v.zip_mut_with(g, |v, &d| *v = b2 * *v + (one - b2) * d * d);
                    let tensor = network.params.tensor_mut(i);
                    ndarray::Zip::from(tensor)
                        .and(&*m)
                        .and(&*v)
                        .for_each(|w, &m, &v| {
                            *w = *w - step_size * m / (v.sqrt() / bias2_sqrt + eps);
                        });
                }
            }
        }
    }
}

/// Training batch for either head set.
pub enum Batch<'a, T: Elem> {
    Az(&'a AzBatch<T>),
    Descent(&'a DescentBatch<T>),
}

/// One gradient step. Deterministic given identical inputs and state;
/// aborts with a diagnostic when the loss is not finite.
pub fn train_step<T: Elem>(
    network: &mut Network<T>,
    opt_state: &mut OptState<T>,
    batch: Batch<'_, T>,
    settings: TrainSettings,
) -> Result<f64, NetError> {
    let (loss, grads) = match batch {
        Batch::Az(b) => network.grad_az(b)?,
        Batch::Descent(b) => network.grad_descent(b)?,
    };
    if !loss.is_finite() {
        return Err(NetError::NonFiniteLoss(format!(
            "loss {loss} at optimizer step {}",
            opt_state.step + 1
        )));
    }
    opt_state.apply(network, &grads, settings.lr);
    Ok(loss)
}
