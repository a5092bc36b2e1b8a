//! Versioned feature schemas with frozen column orders.
//!
//! Column order is part of every trained model's contract; train and test
//! matrices must agree bit-for-bit, so the orders below never change
//! without a format version bump.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_REGISTRY_VERSION: u32 = 1;

/// Identifier of a feature layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemaId {
    #[serde(rename = "event_only_5")]
    EventOnly5,
    #[serde(rename = "complete_31")]
    Complete31,
    #[serde(rename = "machine_10")]
    Machine10,
}

impl SchemaId {
    pub fn width(self) -> usize {
        match self {
            SchemaId::EventOnly5 => 5,
            SchemaId::Complete31 => 31,
            SchemaId::Machine10 => 10,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaId::EventOnly5 => "event_only_5",
            SchemaId::Complete31 => "complete_31",
            SchemaId::Machine10 => "machine_10",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "event_only_5" | "event_only" => Ok(SchemaId::EventOnly5),
            "complete_31" | "complete" => Ok(SchemaId::Complete31),
            "machine_10" | "machine" => Ok(SchemaId::Machine10),
            other => Err(Error::Config(format!("unknown schema id {other:?}"))),
        }
    }

    /// True for the per-process event schemas (as opposed to the
    /// per-second machine schema).
    pub fn is_process(self) -> bool {
        !matches!(self, SchemaId::Machine10)
    }
}

impl std::fmt::Display for SchemaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    BinaryFlag,
    OneHotMember,
    Count,
    Milliseconds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: &'static str,
    pub kind: ColumnKind,
}

const fn col(name: &'static str, kind: ColumnKind) -> Column {
    Column { name, kind }
}

/// EventID one-hot order shared by both process schemas.
pub const EVENT_ID_ORDER: [u32; 5] = [1, 3, 5, 12, 13];

use ColumnKind::{BinaryFlag, Count, Milliseconds, OneHotMember};

pub const EVENT_ONLY_COLUMNS: [Column; 5] = [
    col("EventID_1", OneHotMember),
    col("EventID_3", OneHotMember),
    col("EventID_5", OneHotMember),
    col("EventID_12", OneHotMember),
    col("EventID_13", OneHotMember),
];

/// The complete process-level layout: ten scanner counts, four signature
/// flags, the protocol / destination-port-name / integrity-level /
/// event-id / registry-operation one-hot groups, then the relative
/// timestamp in milliseconds.
pub const COMPLETE_COLUMNS: [Column; 31] = [
    col("is_managed", Count),
    col("replaced", Count),
    col("hdr_modified", Count),
    col("total_modified", Count),
    col("patched", Count),
    col("iat_hooked", Count),
    col("implanted_shc", Count),
    col("unreachable_file", Count),
    col("other", Count),
    col("implanted_pe", Count),
    col("SameImageLoaded", BinaryFlag),
    col("SignatureStatus", BinaryFlag),
    col("Signed", BinaryFlag),
    col("Signed_Failed", BinaryFlag),
    col("Protocol_udp", OneHotMember),
    col("Protocol_tcp", OneHotMember),
    col("DPortName_http", OneHotMember),
    col("DPortName_https", OneHotMember),
    col("DPortName_other", OneHotMember),
    col("IntegrityLevel_High", OneHotMember),
    col("IntegrityLevel_Low", OneHotMember),
    col("IntegrityLevel_Medium", OneHotMember),
    col("IntegrityLevel_System", OneHotMember),
    col("EventID_1", OneHotMember),
    col("EventID_3", OneHotMember),
    col("EventID_5", OneHotMember),
    col("EventID_12", OneHotMember),
    col("EventID_13", OneHotMember),
    col("EventType_DeleteValue", OneHotMember),
    col("EventType_SetValue", OneHotMember),
    col("rel_time_ms", Milliseconds),
];

/// Column indices within [`COMPLETE_COLUMNS`], fixed by the layout above.
pub mod complete_idx {
    pub const HOLLOWS: std::ops::Range<usize> = 0..10;
    pub const SAME_IMAGE_LOADED: usize = 10;
    pub const SIGNATURE_STATUS: usize = 11;
    pub const SIGNED: usize = 12;
    pub const SIGNED_FAILED: usize = 13;
    pub const PROTOCOL_UDP: usize = 14;
    pub const PROTOCOL_TCP: usize = 15;
    pub const DPORT_HTTP: usize = 16;
    pub const DPORT_HTTPS: usize = 17;
    pub const DPORT_OTHER: usize = 18;
    pub const INTEGRITY_HIGH: usize = 19;
    pub const INTEGRITY_LOW: usize = 20;
    pub const INTEGRITY_MEDIUM: usize = 21;
    pub const INTEGRITY_SYSTEM: usize = 22;
    pub const EVENT_ID_BASE: usize = 23;
    pub const EVENT_TYPE_DELETE: usize = 28;
    pub const EVENT_TYPE_SET: usize = 29;
    pub const REL_TIME: usize = 30;
}

pub const MACHINE_COLUMNS: [Column; 10] = [
    col("cpu_system", Count),
    col("cpu_user", Count),
    col("mem", Count),
    col("swap", Count),
    col("total_procs", Count),
    col("max_pid", Count),
    col("bytes_sent", Count),
    col("bytes_recv", Count),
    col("pkts_sent", Count),
    col("pkts_recv", Count),
];

/// One schema's frozen layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub id: SchemaId,
    pub columns: Vec<Column>,
}

impl FeatureSchema {
    pub fn of(id: SchemaId) -> Self {
        let columns = match id {
            SchemaId::EventOnly5 => EVENT_ONLY_COLUMNS.to_vec(),
            SchemaId::Complete31 => COMPLETE_COLUMNS.to_vec(),
            SchemaId::Machine10 => MACHINE_COLUMNS.to_vec(),
        };
        FeatureSchema { id, columns }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }
}

/// The versioned registry document serialized alongside models.
#[derive(Debug, Serialize, Deserialize)]
pub struct SchemaRegistry {
    pub format_version: u32,
    pub schemas: Vec<FeatureSchema>,
}

impl SchemaRegistry {
    pub fn current() -> Self {
        SchemaRegistry {
            format_version: SCHEMA_REGISTRY_VERSION,
            schemas: vec![
                FeatureSchema::of(SchemaId::EventOnly5),
                FeatureSchema::of(SchemaId::Complete31),
                FeatureSchema::of(SchemaId::Machine10),
            ],
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::file(path, e))
    }
}
