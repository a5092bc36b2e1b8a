//! Adaptive-moment optimizer with bias correction.

use serde::{Deserialize, Serialize};

use super::backprop::{visit_tensors_mut, Gradients};
use super::model::RnnModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig<S> {
    pub learning_rate: S,
    pub beta1: S,
    pub beta2: S,
    pub epsilon: S,
}

impl<S: Scalar> Default for AdamConfig<S> {
    fn default() -> Self {
        AdamConfig {
            learning_rate: S::from_f64(0.01),
            beta1: S::from_f64(0.9),
            beta2: S::from_f64(0.999),
            epsilon: S::from_f64(1e-8),
        }
    }
}

/// First/second moment estimates, one flat buffer per parameter tensor in
/// visitation order.
#[derive(Debug, Clone)]
pub struct AdamState<S> {
    m: Vec<Vec<S>>,
    v: Vec<Vec<S>>,
    step: u64,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(model: &RnnModel<S>) -> Self {
        let mut sizes = Vec::new();
        let mut probe = model.clone();
        visit_tensors_mut(&mut probe.params, &mut probe.output, &mut |slice| {
            sizes.push(slice.len());
        });
        AdamState {
            m: sizes.iter().map(|&n| vec![S::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![S::zero(); n]).collect(),
            step: 0,
        }
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    /// Apply one optimizer step to the model in place, walking parameters
    /// and gradients in lockstep through the fixed visitation order.
    pub fn step(&mut self, model: &mut RnnModel<S>, grads: &Gradients<S>, config: &AdamConfig<S>) {
        self.step += 1;
        let t = self.step;
        let mut flat_grads: Vec<Vec<S>> = Vec::with_capacity(self.m.len());
        let mut grads_copy = grads.clone();
        visit_tensors_mut(&mut grads_copy.cell, &mut grads_copy.output, &mut |slice| {
            flat_grads.push(slice.to_vec());
        });

        let mut idx = 0;
        visit_tensors_mut(&mut model.params, &mut model.output, &mut |params| {
            adam_update(
                params,
                &flat_grads[idx],
                &mut self.m[idx],
                &mut self.v[idx],
                t,
                config,
            );
            idx += 1;
        });
    }
}

/// The per-tensor update rule:
/// m ← β₁m + (1−β₁)g, v ← β₂v + (1−β₂)g²,
/// θ ← θ − lr · m̂ / (√v̂ + ε) with bias-corrected m̂, v̂.
pub fn adam_update<S: Scalar>(
    params: &mut [S],
    grads: &[S],
    m: &mut [S],
    v: &mut [S],
    t: u64,
    config: &AdamConfig<S>,
) {
    debug_assert!(t >= 1, "step index starts at 1");
    debug_assert_eq!(params.len(), grads.len());
    let one = S::one();
    let bias1 = one - config.beta1.powi(t as i32);
    let bias2 = one - config.beta2.powi(t as i32);
    for k in 0..params.len() {
        let g = grads[k];
        m[k] = config.beta1 * m[k] + (one - config.beta1) * g;
        v[k] = config.beta2 * v[k] + (one - config.beta2) * g * g;
        let m_hat = m[k] / bias1;
        let v_hat = v[k] / bias2;
        params[k] = params[k] - config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> AdamConfig<f64> {
        AdamConfig::default()
    }

    #[test]
    fn first_step_with_unit_gradient_moves_by_learning_rate() {
        let mut params = vec![0.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        adam_update(&mut params, &[1.0], &mut m, &mut v, 1, &defaults());
        // Bias correction makes m̂ = v̂ = 1, so the step is lr / (1 + ε).
        let expected = -0.01 / (1.0 + 1e-8);
        assert!((params[0] - expected).abs() < 1e-15, "{}", params[0]);
        assert!((params[0] + 0.01).abs() < 1e-9);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = vec![0.7, -0.3];
        let mut m = vec![0.0; 2];
        let mut v = vec![0.0; 2];
        adam_update(&mut params, &[0.0, 0.0], &mut m, &mut v, 1, &defaults());
        assert_eq!(params, vec![0.7, -0.3]);
    }

    #[test]
    fn two_steps_match_hand_computed_moment_recurrences() {
        // Constant gradient 1.0, defaults. Hand recurrences:
        //   step 1: m = 0.1,  v = 0.001,    m̂ = v̂ = 1
        //   step 2: m = 0.19, v = 0.001999, m̂ = 0.19/0.19 = 1, v̂ = 1
        let mut params = vec![0.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        adam_update(&mut params, &[1.0], &mut m, &mut v, 1, &defaults());
        assert!((m[0] - 0.1).abs() < 1e-15);
        assert!((v[0] - 0.001).abs() < 1e-15);
        adam_update(&mut params, &[1.0], &mut m, &mut v, 2, &defaults());
        assert!((m[0] - 0.19).abs() < 1e-15);
        assert!((v[0] - 0.001999).abs() < 1e-15);
        let expected = -2.0 * (0.01 / (1.0 + 1e-8));
        assert!((params[0] - expected).abs() < 1e-12, "{}", params[0]);
    }
}
