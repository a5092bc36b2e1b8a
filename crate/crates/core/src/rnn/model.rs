//! The recurrent classifier: cell + linear output layer + sigmoid.

use serde::{Deserialize, Serialize};

use super::cell::{run_sequence, CellKind, CellParams};
use super::math::dot;
use crate::error::{Error, Result};
use crate::featurize::{FeatureSequence, SchemaId, Standardizer};
use crate::ingest::Label;
use crate::scalar::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Linear layer mapping the final hidden state to one logit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputLayer<S> {
    pub w: Vec<S>,
    pub b: S,
}

impl<S: Scalar> OutputLayer<S> {
    pub fn zeros(hidden: usize) -> Self {
        OutputLayer {
            w: vec![S::zero(); hidden],
            b: S::zero(),
        }
    }
}

/// One-layer recurrent classifier plus everything needed to apply it:
/// schema binding and (machine schema only) normalization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnModel<S> {
    pub format_version: u32,
    pub schema_id: SchemaId,
    pub input_width: usize,
    pub hidden_width: usize,
    pub params: CellParams<S>,
    pub output: OutputLayer<S>,
    pub normalization: Option<Standardizer<S>>,
}

impl<S: Scalar> RnnModel<S> {
    pub fn zeros(kind: CellKind, schema_id: SchemaId, hidden_width: usize) -> Self {
        let input_width = schema_id.width();
        RnnModel {
            format_version: MODEL_FORMAT_VERSION,
            schema_id,
            input_width,
            hidden_width,
            params: CellParams::zeros(kind, hidden_width, input_width),
            output: OutputLayer::zeros(hidden_width),
            normalization: None,
        }
    }

    pub fn cell_kind(&self) -> CellKind {
        self.params.kind()
    }

    /// Forward pass over raw (already standardized) input vectors.
    pub fn predict_vectors(&self, vectors: &[Vec<S>], mask: Option<&[bool]>) -> Result<S> {
        if vectors.is_empty() || mask.is_some_and(|m| !m.iter().any(|&keep| keep)) {
            return Err(Error::Schema(
                "cannot score an empty sequence; the evaluation layer owns the no-data convention"
                    .into(),
            ));
        }
        let forward = run_sequence(&self.params, vectors, mask)?;
        let logit = dot(&self.output.w, &forward.final_hidden) + self.output.b;
        let p = logit.sigmoid();
        if !p.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite probability at output step {}",
                vectors.len()
            )));
        }
        Ok(p)
    }
}

impl RnnModel<f64> {
    /// Score one feature sequence: probability the sample is malicious.
    ///
    /// Machine-schema models standardize inputs with their stored
    /// training statistics first.
    pub fn predict(&self, seq: &FeatureSequence) -> Result<f64> {
        if seq.schema_id != self.schema_id {
            return Err(Error::Schema(format!(
                "sequence schema {} does not match model schema {}",
                seq.schema_id, self.schema_id
            )));
        }
        match &self.normalization {
            Some(stats) => {
                let mut vectors = seq.vectors.clone();
                for row in &mut vectors {
                    stats.apply(row);
                }
                self.predict_vectors(&vectors, None)
            }
            None => self.predict_vectors(&seq.vectors, None),
        }
    }

    /// Malicious iff the probability strictly exceeds 0.5.
    pub fn classify(&self, seq: &FeatureSequence) -> Result<Label> {
        let p = self.predict(seq)?;
        Ok(if p > 0.5 { Label::Malicious } else { Label::Benign })
    }
}

/// Binary cross-entropy, with the probability clamped to
/// [1e-12, 1 - 1e-12] so the logs stay finite.
pub fn bce_loss<S: Scalar>(p: S, y: bool) -> S {
    let eps = S::from_f64(1e-12);
    let p = p.max(eps).min(S::one() - eps);
    if y {
        -p.ln()
    } else {
        -(S::one() - p).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(schema_id: SchemaId, vectors: Vec<Vec<f64>>) -> FeatureSequence {
        FeatureSequence {
            schema_id,
            source_id: "s".to_string(),
            label: Label::Benign,
            times_ms: (0..vectors.len() as i64).map(|i| i * 1000).collect(),
            vectors,
        }
    }

    #[test]
    fn zero_output_layer_gives_one_half() {
        for kind in [CellKind::Lstm, CellKind::Gru] {
            let model = RnnModel::<f64>::zeros(kind, SchemaId::EventOnly5, 4);
            let s = seq(
                SchemaId::EventOnly5,
                vec![vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0, 0.0]],
            );
            assert_eq!(model.predict(&s).unwrap(), 0.5);
        }
    }

    #[test]
    fn single_step_zero_cell_returns_sigmoid_of_bias() {
        let mut model = RnnModel::<f64>::zeros(CellKind::Gru, SchemaId::EventOnly5, 4);
        model.output.b = 0.3;
        let s = seq(SchemaId::EventOnly5, vec![vec![0.0, 0.0, 1.0, 0.0, 0.0]]);
        assert_eq!(model.predict(&s).unwrap(), 0.3f64.sigmoid());
    }

    #[test]
    fn classify_uses_a_strict_threshold() {
        let mut model = RnnModel::<f64>::zeros(CellKind::Lstm, SchemaId::EventOnly5, 4);
        let s = seq(SchemaId::EventOnly5, vec![vec![1.0, 0.0, 0.0, 0.0, 0.0]]);
        // Zero parameters: p is exactly 0.5, which is benign.
        assert_eq!(model.classify(&s).unwrap(), Label::Benign);
        model.output.b = 1e-6; // p barely above 0.5
        assert!(model.predict(&s).unwrap() > 0.5);
        assert_eq!(model.classify(&s).unwrap(), Label::Malicious);
        model.output.b = -5.0; // p well below 0.5
        assert_eq!(model.classify(&s).unwrap(), Label::Benign);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let model = RnnModel::<f64>::zeros(CellKind::Gru, SchemaId::Complete31, 4);
        let s = seq(SchemaId::EventOnly5, vec![vec![1.0, 0.0, 0.0, 0.0, 0.0]]);
        assert!(matches!(model.predict(&s), Err(Error::Schema(_))));
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let model = RnnModel::<f64>::zeros(CellKind::Gru, SchemaId::EventOnly5, 4);
        let s = seq(SchemaId::EventOnly5, Vec::new());
        assert!(model.predict(&s).is_err());
    }

    #[test]
    fn bce_closed_forms() {
        assert!((bce_loss(0.5, true) - std::f64::consts::LN_2).abs() < 1e-15);
        let near_perfect = bce_loss(1.0 - 1e-12, true);
        assert!(near_perfect > 0.0 && near_perfect < 1.2e-12, "{near_perfect}");
        assert!((bce_loss(0.9, false) - 2.302585092994046).abs() < 1e-12);
    }

    #[test]
    fn bce_clamps_degenerate_probabilities() {
        assert!(bce_loss(0.0, true).is_finite());
        assert!(bce_loss(1.0, false).is_finite());
    }
}
