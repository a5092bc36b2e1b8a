//! Event filtering and ProcessGuid correlation.

use std::collections::HashMap;

use super::{Label, ProcessActivity, SysmonEvent, ANALYZED_EVENT_IDS, EVENT_ID_PROCESS_CREATE};

/// Keep only the analyzed event IDs {1, 3, 5, 12, 13}, preserving order.
pub fn filter_events(events: Vec<SysmonEvent>) -> Vec<SysmonEvent> {
    events
        .into_iter()
        .filter(|e| ANALYZED_EVENT_IDS.contains(&e.event_id))
        .collect()
}

/// Group events by ProcessGuid into one activity per process.
///
/// Events are sorted ascending by timestamp within each activity, ties
/// broken by input order. Activities whose first event is not a creation
/// record are kept and flagged as orphans. Activity order follows the
/// first appearance of each guid in the input, so correlation is
/// deterministic and every input event lands in exactly one activity.
pub fn correlate(events: Vec<SysmonEvent>) -> Vec<ProcessActivity> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<SysmonEvent>> = HashMap::new();
    for event in events {
        let bucket = groups.entry(event.process_guid.clone()).or_insert_with(|| {
            order.push(event.process_guid.clone());
            Vec::new()
        });
        bucket.push(event);
    }

    order
        .into_iter()
        .map(|guid| {
            let mut events = groups.remove(&guid).expect("group exists");
            events.sort_by_key(|e| e.utc_time); // stable: ties keep input order
            let first = &events[0];
            ProcessActivity {
                machine: first.machine.clone(),
                origin_time: first.utc_time,
                orphan: first.event_id != EVENT_ID_PROCESS_CREATE,
                process_guid: guid,
                hollows: None,
                label: Label::Unknown,
                events,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::parse_timestamp;
    use std::collections::BTreeMap;

    fn event(id: u32, guid: &str, time: &str) -> SysmonEvent {
        SysmonEvent {
            event_id: id,
            process_guid: guid.to_string(),
            machine: "W7-1".to_string(),
            utc_time: parse_timestamp(time).unwrap(),
            event_type: None,
            attributes: BTreeMap::new(),
        }
    }

    #[test]
    fn filter_keeps_only_analyzed_ids() {
        let events = vec![
            event(1, "G", "2023-01-01 00:00:00.000"),
            event(22, "G", "2023-01-01 00:00:01.000"),
            event(3, "G", "2023-01-01 00:00:02.000"),
        ];
        let kept = filter_events(events);
        assert_eq!(kept.iter().map(|e| e.event_id).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn filter_handles_empty_and_all_dropped() {
        assert!(filter_events(Vec::new()).is_empty());
        let dropped = vec![
            event(7, "G", "2023-01-01 00:00:00.000"),
            event(11, "G", "2023-01-01 00:00:01.000"),
        ];
        assert!(filter_events(dropped).is_empty());
    }

    #[test]
    fn filter_is_idempotent() {
        let events = vec![
            event(1, "G", "2023-01-01 00:00:00.000"),
            event(22, "G", "2023-01-01 00:00:01.000"),
            event(13, "G", "2023-01-01 00:00:02.000"),
        ];
        let once = filter_events(events);
        let twice = filter_events(once.clone());
        assert_eq!(once, twice);
    }

    #[test]
    fn shuffled_events_come_out_time_ordered() {
        let events = vec![
            event(13, "G1", "2023-01-01 00:00:02.000"),
            event(1, "G1", "2023-01-01 00:00:00.000"),
            event(3, "G1", "2023-01-01 00:00:01.000"),
        ];
        let activities = correlate(events);
        assert_eq!(activities.len(), 1);
        let activity = &activities[0];
        assert_eq!(activity.origin_time, parse_timestamp("2023-01-01 00:00:00.000").unwrap());
        assert!(!activity.orphan);
        let ids: Vec<u32> = activity.events.iter().map(|e| e.event_id).collect();
        assert_eq!(ids, vec![1, 3, 13]);
    }

    #[test]
    fn interleaved_guids_split_exactly() {
        let events = vec![
            event(1, "G1", "2023-01-01 00:00:00.000"),
            event(1, "G2", "2023-01-01 00:00:00.500"),
            event(3, "G1", "2023-01-01 00:00:01.000"),
            event(13, "G2", "2023-01-01 00:00:01.500"),
        ];
        let activities = correlate(events);
        assert_eq!(activities.len(), 2);
        assert_eq!(activities[0].process_guid, "G1");
        assert_eq!(activities[0].events.len(), 2);
        assert_eq!(activities[1].process_guid, "G2");
        assert_eq!(activities[1].events.len(), 2);
    }

    #[test]
    fn missing_creation_event_flags_orphan() {
        let activities = correlate(vec![event(13, "G1", "2023-01-01 00:00:02.000")]);
        assert!(activities[0].orphan);
    }

    #[test]
    fn no_event_is_dropped_or_duplicated() {
        let mut events = Vec::new();
        for i in 0..40 {
            let guid = format!("G{}", i % 7);
            events.push(event(13, &guid, &format!("2023-01-01 00:00:{:02}.000", i % 50)));
        }
        let total: usize = correlate(events.clone()).iter().map(|a| a.events.len()).sum();
        assert_eq!(total, events.len());
    }
}
