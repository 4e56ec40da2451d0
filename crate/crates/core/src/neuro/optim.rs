// SPDX-License-Identifier: Apache-2.0

//! Adam with bias correction and decoupled weight decay.

use serde::{Deserialize, Serialize};

use super::NeuroError;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Number of steps taken.
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }
}

/// One update: `p ← p − η (m̂ / (√v̂ + ε) + λ p)`.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64, weight_decay: f64) -> Result<(), NeuroError> {
    let n = params.len();
    for found in [grads.len(), state.m.len(), state.v.len()] {
        if found != n {
            return Err(NeuroError::ShapeMismatch { expected: n, found });
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for i in 0..n {
        let g = grads[i];
        state.m[i] = BETA1 * state.m[i] + (1.0 - BETA1) * g;
        state.v[i] = BETA2 * state.v[i] + (1.0 - BETA2) * g * g;
        let mhat = state.m[i] / c1;
        let vhat = state.v[i] / c2;
        params[i] -= lr * (mhat / (vhat.sqrt() + EPS) + weight_decay * params[i]);
    }
    Ok(())
}
