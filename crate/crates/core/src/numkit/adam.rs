//! Adam with bias correction.

use super::Tensor;
use crate::error::{Error, Result};

/// Optimizer state: first/second moment accumulators mirroring the parameter
/// shapes, plus the step counter and hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Fresh state for the given parameter list with conventional defaults
    /// (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
    pub fn new(params: &[Tensor], lr: f64) -> Self {
        AdamState {
            m: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update over a parameter list. Gradients must be finite and shaped
/// like the parameters; a NaN gradient aborts with a training error.
pub fn adam_step(state: &mut AdamState, params: &mut [Tensor], grads: &[Tensor]) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Usage(format!(
            "adam_step: {} params, {} grads, {} moment slots",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for (i, g) in grads.iter().enumerate() {
        if g.shape() != params[i].shape() {
            return Err(Error::Usage(format!(
                "adam_step: grad {i} shape {:?} vs param {:?}",
                g.shape(),
                params[i].shape()
            )));
        }
        if !g.all_finite() {
            return Err(Error::Training(format!(
                "non-finite gradient in parameter {i}"
            )));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for i in 0..params.len() {
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        let p = params[i].data_mut();
        let g = grads[i].data();
        for j in 0..p.len() {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            p[j] -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}
