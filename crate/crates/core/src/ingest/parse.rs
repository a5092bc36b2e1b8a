//! Parsing of evtx-dump newline JSON into [`SysmonEvent`].

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde_json::Value;

use super::{SysmonEvent, COLLECTED_EVENT_IDS};
use crate::error::{Error, Result};
use crate::time::parse_timestamp;

/// Parse one newline-JSON record as produced by an evtx dump tool.
///
/// The record nests a `System` envelope (EventID, Computer, TimeCreated)
/// and an `EventData` payload. `UtcTime`, `ProcessGuid`, and `EventType`
/// are promoted to fields; every other scalar EventData entry lands in
/// `attributes` verbatim.
pub fn parse_event_line(line: &str) -> Result<SysmonEvent> {
    let value: Value = serde_json::from_str(line).map_err(|e| Error::Parse {
        offset: e.column().saturating_sub(1),
        message: e.to_string(),
    })?;

    let event = value.get("Event").unwrap_or(&value);
    let system = event
        .get("System")
        .ok_or_else(|| Error::Schema("missing System section".into()))?;

    let event_id = extract_event_id(system)?;
    if !COLLECTED_EVENT_IDS.contains(&event_id) {
        return Err(Error::Schema(format!(
            "event_id {event_id} is outside the collected set"
        )));
    }

    let machine = system
        .get("Computer")
        .and_then(Value::as_str)
        .unwrap_or("")
        .to_string();

    let event_data = event.get("EventData").cloned().unwrap_or(Value::Null);
    let mut attributes = BTreeMap::new();
    let mut utc_time_raw = None;
    let mut process_guid = None;
    let mut event_type = None;

    if let Value::Object(map) = event_data {
        for (key, val) in map {
            let Some(text) = scalar_to_string(&val) else {
                continue;
            };
            match key.as_str() {
                "UtcTime" => utc_time_raw = Some(text),
                "ProcessGuid" => process_guid = Some(text),
                "EventType" => event_type = Some(text),
                _ => {
                    attributes.insert(key, text);
                }
            }
        }
    }

    // Fall back to the envelope timestamp when EventData lacks UtcTime.
    let utc_time_raw = utc_time_raw.or_else(|| {
        system
            .get("TimeCreated")
            .and_then(|tc| tc.get("#attributes"))
            .and_then(|attrs| attrs.get("SystemTime"))
            .and_then(Value::as_str)
            .map(str::to_string)
    });
    let utc_time = match utc_time_raw {
        Some(raw) => parse_timestamp(&raw)?,
        None => {
            return Err(Error::Schema(format!(
                "event_id {event_id} record has no UtcTime or TimeCreated timestamp"
            )))
        }
    };

    // CreateRemoteThread records identify the acting process via
    // SourceProcessGuid instead of ProcessGuid.
    let process_guid = process_guid.or_else(|| {
        if event_id == 8 {
            attributes.get("SourceProcessGuid").cloned()
        } else {
            None
        }
    });
    let process_guid = match process_guid {
        Some(guid) if !guid.is_empty() => guid,
        _ => {
            return Err(Error::Schema(format!(
                "event_id {event_id} record is missing required field ProcessGuid"
            )))
        }
    };

    Ok(SysmonEvent {
        event_id,
        process_guid,
        machine,
        utc_time,
        event_type,
        attributes,
    })
}

/// Parse a whole newline-JSON file; blank lines are skipped. Errors carry
/// the byte offset of the failing position within the file.
pub fn parse_events_file(path: &Path) -> Result<Vec<SysmonEvent>> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    parse_events_reader(BufReader::new(file)).map_err(|e| match e {
        Error::Parse { offset, message } => Error::Parse {
            offset,
            message: format!("{}: {message}", path.display()),
        },
        Error::Schema(msg) => Error::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn parse_events_reader<R: Read>(reader: BufReader<R>) -> Result<Vec<SysmonEvent>> {
    let mut events = Vec::new();
    let mut offset = 0usize;
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() {
            let event = parse_event_line(trimmed).map_err(|e| match e {
                Error::Parse {
                    offset: inner,
                    message,
                } => Error::Parse {
                    offset: offset + inner,
                    message,
                },
                other => other,
            })?;
            events.push(event);
        }
        offset += line.len() + 1;
    }
    Ok(events)
}

fn extract_event_id(system: &Value) -> Result<u32> {
    let node = system
        .get("EventID")
        .ok_or_else(|| Error::Schema("missing required field EventID".into()))?;
    // evtx dumps wrap qualified IDs as {"#text": N, "#attributes": ...}.
    let id = match node {
        Value::Number(n) => n.as_u64(),
        Value::Object(map) => map.get("#text").and_then(Value::as_u64),
        Value::String(s) => s.parse().ok(),
        _ => None,
    };
    id.map(|v| v as u32)
        .ok_or_else(|| Error::Schema(format!("unreadable EventID: {node}")))
}

fn scalar_to_string(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}
