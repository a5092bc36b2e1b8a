//! Event-log ingestion: parse newline-JSON Sysmon dumps, reconstruct
//! per-process activities, and join process-hollowing scan reports.

mod correlate;
mod guid;
mod hollows;
mod parse;
pub mod store;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use correlate::{correlate, filter_events};
pub use guid::{is_degenerate_guid, resolve_guid_collisions, GuidRepair};
pub use hollows::{attach_hollows, read_hollows_file};
pub use parse::{parse_event_line, parse_events_file};

/// Event IDs present in the collected logs.
pub const COLLECTED_EVENT_IDS: [u32; 11] = [1, 2, 3, 5, 7, 8, 11, 12, 13, 14, 22];

/// Event IDs retained for analysis: process creation, network connection,
/// process termination, and the two registry events.
pub const ANALYZED_EVENT_IDS: [u32; 5] = [1, 3, 5, 12, 13];

pub const EVENT_ID_PROCESS_CREATE: u32 = 1;
pub const EVENT_ID_NETWORK: u32 = 3;
pub const EVENT_ID_PROCESS_TERMINATE: u32 = 5;

/// Class label attached to an activity or series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign,
    Malicious,
    Unknown,
}

impl Label {
    pub fn is_malicious(self) -> bool {
        matches!(self, Label::Malicious)
    }
}

/// One parsed log record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SysmonEvent {
    pub event_id: u32,
    pub process_guid: String,
    pub machine: String,
    #[serde(with = "crate::time::serde_sysmon_time")]
    pub utc_time: DateTime<Utc>,
    /// Registry operation kind (`SetValue` / `DeleteValue`), registry events only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_type: Option<String>,
    /// Remaining scalar EventData fields, verbatim.
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

impl SysmonEvent {
    pub fn attribute(&self, key: &str) -> Option<&str> {
        self.attributes.get(key).map(String::as_str)
    }

    /// ProcessId attribute, when present and numeric.
    pub fn pid(&self) -> Option<u32> {
        self.attribute("ProcessId").and_then(|v| v.parse().ok())
    }
}

/// One Hollows Hunter scan report, keyed by (pid, machine, scan_time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HollowsReport {
    pub pid: u32,
    pub machine: String,
    #[serde(with = "crate::time::serde_sysmon_time")]
    pub scan_time: DateTime<Utc>,
    pub is_managed: u32,
    pub replaced: u32,
    pub hdr_modified: u32,
    pub total_modified: u32,
    pub patched: u32,
    pub iat_hooked: u32,
    pub implanted_shc: u32,
    pub unreachable_file: u32,
    pub other: u32,
    pub implanted_pe: u32,
}

impl HollowsReport {
    /// Scanner counts in the canonical feature order.
    pub fn counts(&self) -> [u32; 10] {
        [
            self.is_managed,
            self.replaced,
            self.hdr_modified,
            self.total_modified,
            self.patched,
            self.iat_hooked,
            self.implanted_shc,
            self.unreachable_file,
            self.other,
            self.implanted_pe,
        ]
    }
}

/// Time-ordered event sequence for one process instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessActivity {
    pub process_guid: String,
    pub machine: String,
    #[serde(with = "crate::time::serde_sysmon_time")]
    pub origin_time: DateTime<Utc>,
    pub events: Vec<SysmonEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hollows: Option<HollowsReport>,
    pub label: Label,
    /// True when the first observed event is not a process-creation record.
    #[serde(default)]
    pub orphan: bool,
}

impl ProcessActivity {
    /// ProcessId attribute of the creation event, used for the hollows join.
    pub fn creation_pid(&self) -> Option<u32> {
        self.events
            .iter()
            .find(|e| e.event_id == EVENT_ID_PROCESS_CREATE)
            .and_then(SysmonEvent::pid)
    }
}
