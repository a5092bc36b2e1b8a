//! LSTM and GRU cells: parameters and forward steps.

use serde::{Deserialize, Serialize};

use super::math::Mat;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Lstm,
    Gru,
}

impl CellKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::Lstm => "lstm",
            CellKind::Gru => "gru",
        }
    }
}

impl std::fmt::Display for CellKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One gate's parameters: input weights, recurrent weights, bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate<S> {
    pub w: Mat<S>,
    pub u: Mat<S>,
    pub b: Vec<S>,
}

impl<S: Scalar> Gate<S> {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        Gate {
            w: Mat::zeros(hidden, input),
            u: Mat::zeros(hidden, hidden),
            b: vec![S::zero(); hidden],
        }
    }

    /// pre-activation a = W x + U h + b
    fn preactivation(&self, x: &[S], h: &[S]) -> Vec<S> {
        let mut a = self.b.clone();
        self.w.matvec_add(x, &mut a);
        self.u.matvec_add(h, &mut a);
        a
    }
}

/// LSTM gates: input i, forget f, candidate g, output o.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams<S> {
    pub input: Gate<S>,
    pub forget: Gate<S>,
    pub candidate: Gate<S>,
    pub output: Gate<S>,
}

/// GRU gates: update z, reset r, candidate h̃.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruParams<S> {
    pub update: Gate<S>,
    pub reset: Gate<S>,
    pub candidate: Gate<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellParams<S> {
    Lstm(LstmParams<S>),
    Gru(GruParams<S>),
}

impl<S: Scalar> CellParams<S> {
    pub fn zeros(kind: CellKind, hidden: usize, input: usize) -> Self {
        match kind {
            CellKind::Lstm => CellParams::Lstm(LstmParams {
                input: Gate::zeros(hidden, input),
                forget: Gate::zeros(hidden, input),
                candidate: Gate::zeros(hidden, input),
                output: Gate::zeros(hidden, input),
            }),
            CellKind::Gru => CellParams::Gru(GruParams {
                update: Gate::zeros(hidden, input),
                reset: Gate::zeros(hidden, input),
                candidate: Gate::zeros(hidden, input),
            }),
        }
    }

    pub fn kind(&self) -> CellKind {
        match self {
            CellParams::Lstm(_) => CellKind::Lstm,
            CellParams::Gru(_) => CellKind::Gru,
        }
    }

    pub fn hidden_width(&self) -> usize {
        match self {
            CellParams::Lstm(p) => p.input.u.rows,
            CellParams::Gru(p) => p.update.u.rows,
        }
    }

    pub fn input_width(&self) -> usize {
        match self {
            CellParams::Lstm(p) => p.input.w.cols,
            CellParams::Gru(p) => p.update.w.cols,
        }
    }

    fn check_input(&self, x: &[S]) -> Result<()> {
        if x.len() != self.input_width() {
            return Err(Error::Shape(format!(
                "input width {} does not match cell input width {}",
                x.len(),
                self.input_width()
            )));
        }
        Ok(())
    }
}

fn sigmoid_vec<S: Scalar>(mut a: Vec<S>) -> Vec<S> {
    for v in &mut a {
        *v = v.sigmoid();
    }
    a
}

fn tanh_vec<S: Scalar>(mut a: Vec<S>) -> Vec<S> {
    for v in &mut a {
        *v = v.tanh();
    }
    a
}

/// Per-step values cached for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmStep<S> {
    pub i: Vec<S>,
    pub f: Vec<S>,
    pub g: Vec<S>,
    pub o: Vec<S>,
    pub c: Vec<S>,
    pub tanh_c: Vec<S>,
    pub h: Vec<S>,
}

/// gates σ(Wx + Uh + b), candidate tanh(Wx + Uh + b),
/// c = f⊙c_prev + i⊙g, h = o⊙tanh(c)
pub fn lstm_step<S: Scalar>(
    params: &LstmParams<S>,
    x: &[S],
    h_prev: &[S],
    c_prev: &[S],
) -> LstmStep<S> {
    let i = sigmoid_vec(params.input.preactivation(x, h_prev));
    let f = sigmoid_vec(params.forget.preactivation(x, h_prev));
    let g = tanh_vec(params.candidate.preactivation(x, h_prev));
    let o = sigmoid_vec(params.output.preactivation(x, h_prev));
    let hidden = i.len();
    let mut c = vec![S::zero(); hidden];
    for k in 0..hidden {
        c[k] = f[k] * c_prev[k] + i[k] * g[k];
    }
    let tanh_c = tanh_vec(c.clone());
    let mut h = vec![S::zero(); hidden];
    for k in 0..hidden {
        h[k] = o[k] * tanh_c[k];
    }
    LstmStep {
        i,
        f,
        g,
        o,
        c,
        tanh_c,
        h,
    }
}

/// Per-step values cached for backpropagation through time.
#[derive(Debug, Clone)]
pub struct GruStep<S> {
    pub z: Vec<S>,
    pub r: Vec<S>,
    pub rh: Vec<S>,
    pub candidate: Vec<S>,
    pub h: Vec<S>,
}

/// z = σ(W_z x + U_z h + b_z), r = σ(W_r x + U_r h + b_r),
/// h̃ = tanh(W_h x + U_h (r⊙h) + b_h), h' = (1−z)⊙h + z⊙h̃
pub fn gru_step<S: Scalar>(params: &GruParams<S>, x: &[S], h_prev: &[S]) -> GruStep<S> {
    let z = sigmoid_vec(params.update.preactivation(x, h_prev));
    let r = sigmoid_vec(params.reset.preactivation(x, h_prev));
    let hidden = z.len();
    let mut rh = vec![S::zero(); hidden];
    for k in 0..hidden {
        rh[k] = r[k] * h_prev[k];
    }
    let candidate = tanh_vec(params.candidate.preactivation(x, &rh));
    let mut h = vec![S::zero(); hidden];
    for k in 0..hidden {
        h[k] = (S::one() - z[k]) * h_prev[k] + z[k] * candidate[k];
    }
    GruStep {
        z,
        r,
        rh,
        candidate,
        h,
    }
}

/// One GRU step with shape checking; returns the new hidden state.
pub fn gru_forward<S: Scalar>(params: &GruParams<S>, x: &[S], h_prev: &[S]) -> Result<Vec<S>> {
    let cell = CellParams::Gru(params.clone());
    cell.check_input(x)?;
    if h_prev.len() != cell.hidden_width() {
        return Err(Error::Shape(format!(
            "hidden width {} does not match cell hidden width {}",
            h_prev.len(),
            cell.hidden_width()
        )));
    }
    Ok(gru_step(params, x, h_prev).h)
}

/// One LSTM step with shape checking; returns (hidden, cell) states.
pub fn lstm_forward<S: Scalar>(
    params: &LstmParams<S>,
    x: &[S],
    h_prev: &[S],
    c_prev: &[S],
) -> Result<(Vec<S>, Vec<S>)> {
    let cell = CellParams::Lstm(params.clone());
    cell.check_input(x)?;
    if h_prev.len() != cell.hidden_width() || c_prev.len() != cell.hidden_width() {
        return Err(Error::Shape(format!(
            "state widths ({}, {}) do not match cell hidden width {}",
            h_prev.len(),
            c_prev.len(),
            cell.hidden_width()
        )));
    }
    let step = lstm_step(params, x, h_prev, c_prev);
    Ok((step.h, step.c))
}

/// Forward pass over a sequence from zero initial state, caching per-step
/// values. `mask[t] == false` marks padding: the step copies state through
/// unchanged, so padded steps cannot influence the final hidden state.
#[derive(Debug)]
pub enum ForwardTrace<S> {
    Lstm(Vec<Option<LstmStep<S>>>),
    Gru(Vec<Option<GruStep<S>>>),
}

impl<S: Scalar> ForwardTrace<S> {
    pub fn len(&self) -> usize {
        match self {
            ForwardTrace::Lstm(steps) => steps.len(),
            ForwardTrace::Gru(steps) => steps.len(),
        }
    }
}

pub struct SequenceForward<S> {
    pub trace: ForwardTrace<S>,
    pub final_hidden: Vec<S>,
}

pub fn run_sequence<S: Scalar>(
    params: &CellParams<S>,
    inputs: &[Vec<S>],
    mask: Option<&[bool]>,
) -> Result<SequenceForward<S>> {
    if let Some(mask) = mask {
        if mask.len() != inputs.len() {
            return Err(Error::Shape(format!(
                "mask length {} does not match sequence length {}",
                mask.len(),
                inputs.len()
            )));
        }
    }
    let hidden = params.hidden_width();
    let mut h = vec![S::zero(); hidden];
    match params {
        CellParams::Lstm(p) => {
            let mut c = vec![S::zero(); hidden];
            let mut steps = Vec::with_capacity(inputs.len());
            for (t, x) in inputs.iter().enumerate() {
                if mask.is_some_and(|m| !m[t]) {
                    steps.push(None);
                    continue;
                }
                params.check_input(x)?;
                let step = lstm_step(p, x, &h, &c);
                h.clone_from(&step.h);
                c.clone_from(&step.c);
                check_finite(&h, t)?;
                steps.push(Some(step));
            }
            Ok(SequenceForward {
                trace: ForwardTrace::Lstm(steps),
                final_hidden: h,
            })
        }
        CellParams::Gru(p) => {
            let mut steps = Vec::with_capacity(inputs.len());
            for (t, x) in inputs.iter().enumerate() {
                if mask.is_some_and(|m| !m[t]) {
                    steps.push(None);
                    continue;
                }
                params.check_input(x)?;
                let step = gru_step(p, x, &h);
                h.clone_from(&step.h);
                check_finite(&h, t)?;
                steps.push(Some(step));
            }
            Ok(SequenceForward {
                trace: ForwardTrace::Gru(steps),
                final_hidden: h,
            })
        }
    }
}

fn check_finite<S: Scalar>(h: &[S], step: usize) -> Result<()> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite hidden state at step {step}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gru_zero_params_halve_the_hidden_state() {
        // z = r = 0.5, candidate = 0, so h' = 0.5 h.
        let params = match CellParams::<f64>::zeros(CellKind::Gru, 3, 2) {
            CellParams::Gru(p) => p,
            _ => unreachable!(),
        };
        let h = vec![0.4, -1.0, 2.0];
        let out = gru_forward(&params, &[0.0, 0.0], &h).unwrap();
        assert_eq!(out, vec![0.2, -0.5, 1.0]);

        let fixed = gru_forward(&params, &[0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(fixed, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn lstm_zero_params_closed_form() {
        // f = i = o = 0.5, g = 0: c' = 0.5 c, h' = 0.5 tanh(0.5 c).
        let params = match CellParams::<f64>::zeros(CellKind::Lstm, 2, 2) {
            CellParams::Lstm(p) => p,
            _ => unreachable!(),
        };
        let c = vec![0.8, -0.2];
        let (h, c_new) = lstm_forward(&params, &[0.0, 0.0], &[0.0, 0.0], &c).unwrap();
        assert_eq!(c_new, vec![0.4, -0.1]);
        assert_eq!(h, vec![0.5 * 0.4f64.tanh(), 0.5 * (-0.1f64).tanh()]);

        let (h0, c0) = lstm_forward(&params, &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(h0, vec![0.0, 0.0]);
        assert_eq!(c0, vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_a_shape_error() {
        let params = match CellParams::<f64>::zeros(CellKind::Gru, 3, 2) {
            CellParams::Gru(p) => p,
            _ => unreachable!(),
        };
        assert!(matches!(
            gru_forward(&params, &[0.0, 0.0, 0.0], &[0.0; 3]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            gru_forward(&params, &[0.0, 0.0], &[0.0; 2]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn masked_steps_copy_state_through() {
        let gate = Gate {
            w: Mat::from_rows(vec![vec![0.3], vec![-0.7]]),
            u: Mat::from_rows(vec![vec![0.1, 0.2], vec![-0.4, 0.5]]),
            b: vec![0.05, -0.05],
        };
        let params = CellParams::Gru(GruParams {
            update: gate.clone(),
            reset: gate.clone(),
            candidate: gate,
        });
        let inputs = vec![vec![1.0], vec![9.0], vec![-2.0]];
        let mask = vec![true, false, true];
        let masked = run_sequence(&params, &inputs, Some(&mask)).unwrap();
        let dense = run_sequence(&params, &[vec![1.0], vec![-2.0]], None).unwrap();
        assert_eq!(masked.final_hidden, dense.final_hidden);
    }
}
