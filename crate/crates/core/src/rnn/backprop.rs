//! Backpropagation through time for both cells.
//!
//! Gradients are taken of the mean binary cross-entropy over a batch,
//! with respect to every cell parameter and the output layer. Masked
//! (padding) steps copied state through on the forward pass, so they
//! contribute nothing here either.

use super::cell::{run_sequence, CellParams, ForwardTrace, Gate};
use super::math::{axpy, dot};
use super::model::{bce_loss, OutputLayer, RnnModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gradient tensors, shaped exactly like the parameters they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<S> {
    pub cell: CellParams<S>,
    pub output: OutputLayer<S>,
}

impl<S: Scalar> Gradients<S> {
    pub fn zeros_like(model: &RnnModel<S>) -> Self {
        Gradients {
            cell: CellParams::zeros(model.cell_kind(), model.hidden_width, model.input_width),
            output: OutputLayer::zeros(model.hidden_width),
        }
    }

    fn scale(&mut self, factor: S) {
        visit_tensors_mut(&mut self.cell, &mut self.output, &mut |slice| {
            for v in slice {
                *v = *v * factor;
            }
        });
    }
}

/// One training sample: input vectors, optional padding mask, label.
pub struct BatchSample<'a, S> {
    pub vectors: &'a [Vec<S>],
    pub mask: Option<&'a [bool]>,
    pub malicious: bool,
}

/// Visit every parameter tensor in a fixed order. The order defines the
/// optimizer-state layout and the serialized tensor layout, so it must
/// never change: per gate w, u, b; gates in declaration order; output
/// layer last.
pub fn visit_tensors_mut<S: Scalar>(
    cell: &mut CellParams<S>,
    output: &mut OutputLayer<S>,
    visit: &mut dyn FnMut(&mut [S]),
) {
    let mut gate = |g: &mut Gate<S>| {
        visit(&mut g.w.data);
        visit(&mut g.u.data);
        visit(&mut g.b);
    };
    match cell {
        CellParams::Lstm(p) => {
            gate(&mut p.input);
            gate(&mut p.forget);
            gate(&mut p.candidate);
            gate(&mut p.output);
        }
        CellParams::Gru(p) => {
            gate(&mut p.update);
            gate(&mut p.reset);
            gate(&mut p.candidate);
        }
    }
    visit(&mut output.w);
    visit(std::slice::from_mut(&mut output.b));
}

/// Named views of every tensor in visitation order, for serialization.
pub fn tensor_names(cell: &CellParams<f64>) -> Vec<String> {
    let gates: &[&str] = match cell {
        CellParams::Lstm(_) => &["input", "forget", "candidate", "output"],
        CellParams::Gru(_) => &["update", "reset", "candidate"],
    };
    let kind = cell.kind().as_str();
    let mut names = Vec::new();
    for gate in gates {
        for part in ["w", "u", "b"] {
            names.push(format!("{kind}.{gate}.{part}"));
        }
    }
    names.push("out.w".to_string());
    names.push("out.b".to_string());
    names
}

/// Mean-gradient over a batch plus the mean loss it corresponds to.
pub fn backward<S: Scalar>(
    model: &RnnModel<S>,
    batch: &[BatchSample<'_, S>],
) -> Result<(Gradients<S>, S)> {
    if batch.is_empty() {
        return Err(Error::Shape("backward over an empty batch".into()));
    }
    let mut grads = Gradients::zeros_like(model);
    let mut loss_sum = S::zero();
    for sample in batch {
        loss_sum = loss_sum + backward_one(model, sample, &mut grads)?;
    }
    let inv = S::one() / S::from_f64(batch.len() as f64);
    grads.scale(inv);
    let mean_loss = loss_sum * inv;
    if !mean_loss.is_finite() {
        return Err(Error::Numeric("non-finite batch loss".into()));
    }
    Ok((grads, mean_loss))
}

fn backward_one<S: Scalar>(
    model: &RnnModel<S>,
    sample: &BatchSample<'_, S>,
    grads: &mut Gradients<S>,
) -> Result<S> {
    let forward = run_sequence(&model.params, sample.vectors, sample.mask)?;
    let h_final = &forward.final_hidden;
    let logit = dot(&model.output.w, h_final) + model.output.b;
    let p = logit.sigmoid();
    let y = if sample.malicious { S::one() } else { S::zero() };
    let loss = bce_loss(p, sample.malicious);

    // Sigmoid + BCE: dL/dlogit = p - y.
    let dlogit = p - y;
    axpy(dlogit, h_final, &mut grads.output.w);
    grads.output.b = grads.output.b + dlogit;

    let hidden = model.hidden_width;
    let mut dh: Vec<S> = model.output.w.iter().map(|w| *w * dlogit).collect();

    match (&model.params, &forward.trace, &mut grads.cell) {
        (CellParams::Lstm(params), ForwardTrace::Lstm(steps), CellParams::Lstm(g)) => {
            let (h_prevs, c_prevs) = lstm_prev_states(steps, hidden);
            let mut dc = vec![S::zero(); hidden];
            for t in (0..steps.len()).rev() {
                let Some(step) = &steps[t] else { continue };
                let x = &sample.vectors[t];
                let h_prev = &h_prevs[t];
                let c_prev = &c_prevs[t];

                let mut da_i = vec![S::zero(); hidden];
                let mut da_f = vec![S::zero(); hidden];
                let mut da_g = vec![S::zero(); hidden];
                let mut da_o = vec![S::zero(); hidden];
                for k in 0..hidden {
                    let one = S::one();
                    dc[k] = dc[k] + dh[k] * step.o[k] * (one - step.tanh_c[k] * step.tanh_c[k]);
                    let d_o = dh[k] * step.tanh_c[k];
                    da_o[k] = d_o * step.o[k] * (one - step.o[k]);
                    let d_f = dc[k] * c_prev[k];
                    da_f[k] = d_f * step.f[k] * (one - step.f[k]);
                    let d_i = dc[k] * step.g[k];
                    da_i[k] = d_i * step.i[k] * (one - step.i[k]);
                    let d_g = dc[k] * step.i[k];
                    da_g[k] = d_g * (one - step.g[k] * step.g[k]);
                }

                accumulate_gate(&mut g.input, &da_i, x, h_prev);
                accumulate_gate(&mut g.forget, &da_f, x, h_prev);
                accumulate_gate(&mut g.candidate, &da_g, x, h_prev);
                accumulate_gate(&mut g.output, &da_o, x, h_prev);

                let mut dh_prev = vec![S::zero(); hidden];
                params.input.u.matvec_transpose_add(&da_i, &mut dh_prev);
                params.forget.u.matvec_transpose_add(&da_f, &mut dh_prev);
                params.candidate.u.matvec_transpose_add(&da_g, &mut dh_prev);
                params.output.u.matvec_transpose_add(&da_o, &mut dh_prev);
                dh = dh_prev;
                for k in 0..hidden {
                    dc[k] = dc[k] * step.f[k];
                }
            }
        }
        (CellParams::Gru(params), ForwardTrace::Gru(steps), CellParams::Gru(g)) => {
            let h_prevs = gru_prev_states(steps, hidden);
            for t in (0..steps.len()).rev() {
                let Some(step) = &steps[t] else { continue };
                let x = &sample.vectors[t];
                let h_prev = &h_prevs[t];

                let one = S::one();
                let mut da_z = vec![S::zero(); hidden];
                let mut da_h = vec![S::zero(); hidden];
                for k in 0..hidden {
                    let dz = dh[k] * (step.candidate[k] - h_prev[k]);
                    da_z[k] = dz * step.z[k] * (one - step.z[k]);
                    let d_cand = dh[k] * step.z[k];
                    da_h[k] = d_cand * (one - step.candidate[k] * step.candidate[k]);
                }
                let mut dhr = vec![S::zero(); hidden];
                params.candidate.u.matvec_transpose_add(&da_h, &mut dhr);
                let mut da_r = vec![S::zero(); hidden];
                for k in 0..hidden {
                    let dr = dhr[k] * h_prev[k];
                    da_r[k] = dr * step.r[k] * (one - step.r[k]);
                }

                accumulate_gate(&mut g.update, &da_z, x, h_prev);
                accumulate_gate(&mut g.reset, &da_r, x, h_prev);
                // The candidate gate's recurrent input is r ⊙ h_prev.
                g.candidate.w.outer_add(&da_h, x);
                g.candidate.u.outer_add(&da_h, &step.rh);
                axpy(one, &da_h, &mut g.candidate.b);

                let mut dh_prev = vec![S::zero(); hidden];
                for k in 0..hidden {
                    dh_prev[k] = dh[k] * (one - step.z[k]) + dhr[k] * step.r[k];
                }
                params.update.u.matvec_transpose_add(&da_z, &mut dh_prev);
                params.reset.u.matvec_transpose_add(&da_r, &mut dh_prev);
                dh = dh_prev;
            }
        }
        _ => unreachable!("trace kind always matches params kind"),
    }

    Ok(loss)
}

fn accumulate_gate<S: Scalar>(gate: &mut Gate<S>, da: &[S], x: &[S], h_prev: &[S]) {
    gate.w.outer_add(da, x);
    gate.u.outer_add(da, h_prev);
    axpy(S::one(), da, &mut gate.b);
}

/// Previous (hidden, cell) state seen by each unmasked step.
fn lstm_prev_states<S: Scalar>(
    steps: &[Option<super::cell::LstmStep<S>>],
    hidden: usize,
) -> (Vec<Vec<S>>, Vec<Vec<S>>) {
    let mut h = vec![S::zero(); hidden];
    let mut c = vec![S::zero(); hidden];
    let mut h_prevs = Vec::with_capacity(steps.len());
    let mut c_prevs = Vec::with_capacity(steps.len());
    for step in steps {
        h_prevs.push(h.clone());
        c_prevs.push(c.clone());
        if let Some(step) = step {
            h.clone_from(&step.h);
            c.clone_from(&step.c);
        }
    }
    (h_prevs, c_prevs)
}

fn gru_prev_states<S: Scalar>(
    steps: &[Option<super::cell::GruStep<S>>],
    hidden: usize,
) -> Vec<Vec<S>> {
    let mut h = vec![S::zero(); hidden];
    let mut h_prevs = Vec::with_capacity(steps.len());
    for step in steps {
        h_prevs.push(h.clone());
        if let Some(step) = step {
            h.clone_from(&step.h);
        }
    }
    h_prevs
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::cell::CellKind;
    use crate::featurize::SchemaId;

    #[test]
    fn output_bias_gradient_is_p_minus_y() {
        let model = RnnModel::<f64>::zeros(CellKind::Gru, SchemaId::EventOnly5, 4);
        let vectors = vec![vec![1.0, 0.0, 0.0, 0.0, 0.0]];
        let sample = BatchSample {
            vectors: &vectors,
            mask: None,
            malicious: true,
        };
        // Zero model: p = 0.5, y = 1, so db must be -0.5.
        let (grads, loss) = backward(&model, &[sample]).unwrap();
        assert_eq!(grads.output.b, -0.5);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn empty_batch_is_a_precondition_violation() {
        let model = RnnModel::<f64>::zeros(CellKind::Lstm, SchemaId::EventOnly5, 4);
        assert!(backward(&model, &[]).is_err());
    }

    #[test]
    fn tensor_names_cover_both_cells() {
        let lstm = CellParams::<f64>::zeros(CellKind::Lstm, 2, 3);
        assert_eq!(tensor_names(&lstm).len(), 14);
        let gru = CellParams::<f64>::zeros(CellKind::Gru, 2, 3);
        assert_eq!(tensor_names(&gru).len(), 11);
    }
}
