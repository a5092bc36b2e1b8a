//! Repair of duplicate ProcessGuids.
//!
//! Sysmon builds the guid from machine guid, process id, and creation time;
//! hosts missing the KB3033929/KB4457144 updates emit zeros in the middle
//! segments, so unrelated processes collide on one guid. Degenerate guids
//! are rewritten to synthetic identities keyed by machine, pid, and the
//! creation event owning the surrounding 120-second window.

use std::collections::HashMap;

use chrono::{DateTime, Utc};

use super::{SysmonEvent, EVENT_ID_PROCESS_CREATE};

/// Width of the ownership window a creation event claims for follow-up
/// events that share its degenerate guid.
const CREATION_WINDOW_MS: i64 = 120_000;

/// Result of a collision-repair pass.
#[derive(Debug, Clone)]
pub struct GuidRepair {
    pub events: Vec<SysmonEvent>,
    /// Number of events whose guid was rewritten.
    pub rewrites: usize,
}

/// True for guids of the form `XXXXXXXX-0000-0000-XXXX-XXXXXXXXXXXX`
/// (optionally braced): both middle segments zeroed by the Sysmon bug.
pub fn is_degenerate_guid(guid: &str) -> bool {
    let trimmed = guid.trim_start_matches('{').trim_end_matches('}');
    let groups: Vec<&str> = trimmed.split('-').collect();
    groups.len() == 5
        && groups.iter().all(|g| g.chars().all(|c| c.is_ascii_hexdigit()))
        && [groups[0].len(), groups[1].len(), groups[2].len(), groups[3].len(), groups[4].len()]
            == [8, 4, 4, 4, 12]
        && groups[1].bytes().all(|b| b == b'0')
        && groups[2].bytes().all(|b| b == b'0')
}

/// Rewrite degenerate guids so distinct processes never share one.
///
/// Each creation event starts a synthetic identity; later events with the
/// same (machine, pid) degenerate guid join the most recent creation within
/// 120 s of them. Events with no owning creation get a synthetic identity
/// from their own 120 s time bucket and surface later as orphan activities.
/// Well-formed guids pass through untouched. The rewrite depends only on
/// event content, so it is deterministic.
pub fn resolve_guid_collisions(events: Vec<SysmonEvent>) -> GuidRepair {
    // (machine, pid) -> creation times, for window lookup.
    let mut creations: HashMap<(String, String), Vec<DateTime<Utc>>> = HashMap::new();
    for event in &events {
        if event.event_id == EVENT_ID_PROCESS_CREATE && is_degenerate_guid(&event.process_guid) {
            creations
                .entry(repair_key(event))
                .or_default()
                .push(event.utc_time);
        }
    }
    for times in creations.values_mut() {
        times.sort_unstable();
    }

    let mut rewrites = 0;
    let events = events
        .into_iter()
        .map(|mut event| {
            if !is_degenerate_guid(&event.process_guid) {
                return event;
            }
            let key = repair_key(&event);
            let owner = creations.get(&key).and_then(|times| {
                times
                    .iter()
                    .rev()
                    .find(|t| {
                        **t <= event.utc_time
                            && (event.utc_time - **t).num_milliseconds() <= CREATION_WINDOW_MS
                    })
                    .copied()
            });
            event.process_guid = match owner {
                Some(created) => {
                    format!("SYN:{}:{}:{}", key.0, key.1, created.timestamp_millis())
                }
                None => {
                    let bucket = event.utc_time.timestamp_millis().div_euclid(CREATION_WINDOW_MS);
                    format!("SYN:{}:{}:bucket{}", key.0, key.1, bucket)
                }
            };
            rewrites += 1;
            event
        })
        .collect();

    GuidRepair { events, rewrites }
}

fn repair_key(event: &SysmonEvent) -> (String, String) {
    let pid = event.attribute("ProcessId").unwrap_or("nopid").to_string();
    (event.machine.clone(), pid)
}
