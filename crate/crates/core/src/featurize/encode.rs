//! Encoders for the process-level schemas.

use chrono::{DateTime, Utc};

use super::schema::{complete_idx, SchemaId, EVENT_ID_ORDER};
use super::FeatureSequence;
use crate::error::{Error, Result};
use crate::ingest::{Label, ProcessActivity, SysmonEvent};

/// Milliseconds elapsed between the activity origin and an event.
pub fn relative_timestamp(event: &SysmonEvent, origin: DateTime<Utc>) -> Result<i64> {
    let delta = (event.utc_time - origin).num_milliseconds();
    if delta < 0 {
        return Err(Error::Ordering(format!(
            "event at {} precedes origin {}",
            event.utc_time, origin
        )));
    }
    Ok(delta)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EncodeOptions {
    /// Divide the relative timestamp by the 120 000 ms execution window
    /// instead of keeping raw milliseconds. Off by default.
    pub scale_timestamp: bool,
}

const WINDOW_MS: f64 = 120_000.0;

fn event_id_slot(event_id: u32) -> Result<usize> {
    EVENT_ID_ORDER
        .iter()
        .position(|id| *id == event_id)
        .ok_or_else(|| Error::Schema(format!("event_id {event_id} has no one-hot slot")))
}

fn activity_label(activity: &ProcessActivity) -> Result<Label> {
    match activity.label {
        Label::Unknown => Err(Error::Schema(format!(
            "activity {} is unlabeled; join ground-truth labels before encoding",
            activity.process_guid
        ))),
        label => Ok(label),
    }
}

/// One 5-wide one-hot vector per event, columns in the fixed
/// EventID_{1,3,5,12,13} order.
pub fn encode_event_only(activity: &ProcessActivity) -> Result<FeatureSequence> {
    let label = activity_label(activity)?;
    let mut vectors = Vec::with_capacity(activity.events.len());
    let mut times_ms = Vec::with_capacity(activity.events.len());
    for event in &activity.events {
        let mut row = vec![0.0; 5];
        row[event_id_slot(event.event_id)?] = 1.0;
        times_ms.push(relative_timestamp(event, activity.origin_time)?);
        vectors.push(row);
    }
    Ok(FeatureSequence {
        schema_id: SchemaId::EventOnly5,
        source_id: activity.process_guid.clone(),
        label,
        times_ms,
        vectors,
    })
}

/// Tallies of values the complete encoder could not place.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EncodeDiagnostics {
    pub unknown_integrity_levels: usize,
}

/// One 31-wide vector per event under the complete layout.
///
/// Scanner counts repeat identically on every vector of the activity
/// (all zeros when no report is attached). Attributes an event lacks
/// encode as 0, the N/A fill. Unknown destination port names map to
/// `DPortName_other`; unknown integrity levels leave the group all zero
/// and are tallied in the diagnostics.
pub fn encode_complete(
    activity: &ProcessActivity,
    options: EncodeOptions,
) -> Result<(FeatureSequence, EncodeDiagnostics)> {
    let label = activity_label(activity)?;
    let hollows: Vec<f64> = match &activity.hollows {
        Some(report) => report.counts().iter().map(|c| f64::from(*c)).collect(),
        None => vec![0.0; 10],
    };

    let mut diagnostics = EncodeDiagnostics::default();
    let mut vectors = Vec::with_capacity(activity.events.len());
    let mut times_ms = Vec::with_capacity(activity.events.len());

    for event in &activity.events {
        let mut row = vec![0.0; 31];
        row[complete_idx::HOLLOWS].copy_from_slice(&hollows);

        if event.attribute("SameImageLoaded") == Some("true") {
            row[complete_idx::SAME_IMAGE_LOADED] = 1.0;
        }
        if event.attribute("SignatureStatus") == Some("Valid") {
            row[complete_idx::SIGNATURE_STATUS] = 1.0;
        }
        match event.attribute("Signed") {
            Some("true") => row[complete_idx::SIGNED] = 1.0,
            Some("false") => row[complete_idx::SIGNED_FAILED] = 1.0,
            _ => {}
        }

        // Network columns activate only on network-connection events; a
        // connection with no recognizable port name still counts as
        // DPortName_other so the group sums to one exactly on event id 3.
        if event.event_id == crate::ingest::EVENT_ID_NETWORK {
            match event.attribute("Protocol") {
                Some("udp") => row[complete_idx::PROTOCOL_UDP] = 1.0,
                Some("tcp") => row[complete_idx::PROTOCOL_TCP] = 1.0,
                _ => {}
            }
            match event.attribute("DestinationPortName") {
                Some("http") => row[complete_idx::DPORT_HTTP] = 1.0,
                Some("https") => row[complete_idx::DPORT_HTTPS] = 1.0,
                _ => row[complete_idx::DPORT_OTHER] = 1.0,
            }
        }

        match event.attribute("IntegrityLevel") {
            Some("High") => row[complete_idx::INTEGRITY_HIGH] = 1.0,
            Some("Low") => row[complete_idx::INTEGRITY_LOW] = 1.0,
            Some("Medium") => row[complete_idx::INTEGRITY_MEDIUM] = 1.0,
            Some("System") => row[complete_idx::INTEGRITY_SYSTEM] = 1.0,
            Some(_) => diagnostics.unknown_integrity_levels += 1,
            None => {}
        }

        row[complete_idx::EVENT_ID_BASE + event_id_slot(event.event_id)?] = 1.0;

        match event.event_type.as_deref() {
            Some("DeleteValue") => row[complete_idx::EVENT_TYPE_DELETE] = 1.0,
            Some("SetValue") => row[complete_idx::EVENT_TYPE_SET] = 1.0,
            _ => {}
        }

        let rel = relative_timestamp(event, activity.origin_time)?;
        row[complete_idx::REL_TIME] = if options.scale_timestamp {
            rel as f64 / WINDOW_MS
        } else {
            rel as f64
        };
        times_ms.push(rel);
        vectors.push(row);
    }

    Ok((
        FeatureSequence {
            schema_id: SchemaId::Complete31,
            source_id: activity.process_guid.clone(),
            label,
            times_ms,
            vectors,
        },
        diagnostics,
    ))
}
