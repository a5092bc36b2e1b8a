//! Feature extraction: process activities and machine utilization series
//! become fixed-width vector sequences under frozen schemas.

mod encode;
mod machine;
pub mod matrix;
pub mod schema;

use serde::{Deserialize, Serialize};

pub use encode::{encode_complete, encode_event_only, relative_timestamp, EncodeOptions};
pub use machine::{encode_machine, MachineSeries, MachineSnapshot, Standardizer};
pub use schema::{FeatureSchema, SchemaId, SchemaRegistry};

use crate::ingest::Label;

/// An ordered sequence of fixed-width feature vectors for one sample.
///
/// `times_ms` carries each vector's position on the sample's own clock:
/// milliseconds after the first event for process schemas, whole seconds
/// times 1000 for the machine schema. Horizon truncation keys off it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSequence {
    pub schema_id: SchemaId,
    pub source_id: String,
    pub label: Label,
    pub times_ms: Vec<i64>,
    pub vectors: Vec<Vec<f64>>,
}

impl FeatureSequence {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Keep only the observations available `horizon_secs` seconds in:
    /// vectors stamped at most `horizon_secs * 1000` ms for process
    /// schemas, the first `horizon_secs` snapshots for the machine
    /// schema. The result may be empty; scoring conventions for that
    /// case live in the evaluation layer.
    pub fn truncate_to_horizon(&self, horizon_secs: u32) -> FeatureSequence {
        assert!(horizon_secs >= 1, "horizon must be at least one second");
        let keep = if self.schema_id.is_process() {
            let limit = i64::from(horizon_secs) * 1000;
            self.times_ms.iter().take_while(|t| **t <= limit).count()
        } else {
            (horizon_secs as usize).min(self.vectors.len())
        };
        FeatureSequence {
            schema_id: self.schema_id,
            source_id: self.source_id.clone(),
            label: self.label,
            times_ms: self.times_ms[..keep].to_vec(),
            vectors: self.vectors[..keep].to_vec(),
        }
    }
}
