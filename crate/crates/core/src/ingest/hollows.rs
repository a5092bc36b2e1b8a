//! Joining Hollows Hunter scan reports onto process activities.

use std::io::BufRead;
use std::path::Path;

use chrono::Duration;

use super::{HollowsReport, ProcessActivity};
use crate::error::{Error, Result};

/// Attach scan reports to activities by (machine, pid, scan window).
///
/// A report is eligible for an activity when the machine matches, the pid
/// equals the creation event's ProcessId, and the scan time falls inside
/// `[origin_time, origin_time + window]`. Eligible pairs are resolved
/// closest-first, each report attaching to at most one activity and each
/// activity taking at most one report. Unmatched reports are returned in
/// the remainder list, so attached + remainder always equals the input.
pub fn attach_hollows(
    mut activities: Vec<ProcessActivity>,
    reports: Vec<HollowsReport>,
    window: Duration,
) -> (Vec<ProcessActivity>, Vec<HollowsReport>) {
    assert!(window > Duration::zero(), "window must be positive");

    // (distance from origin, report index, activity index)
    let mut candidates: Vec<(i64, usize, usize)> = Vec::new();
    for (ri, report) in reports.iter().enumerate() {
        for (ai, activity) in activities.iter().enumerate() {
            if activity.machine != report.machine {
                continue;
            }
            if activity.creation_pid() != Some(report.pid) {
                continue;
            }
            let delta = report.scan_time - activity.origin_time;
            if delta < Duration::zero() || delta > window {
                continue;
            }
            candidates.push((delta.num_milliseconds().abs(), ri, ai));
        }
    }
    candidates.sort_unstable();

    let mut report_used = vec![false; reports.len()];
    let mut activity_filled = vec![false; activities.len()];
    for (_, ri, ai) in candidates {
        if report_used[ri] || activity_filled[ai] {
            continue;
        }
        activities[ai].hollows = Some(reports[ri].clone());
        report_used[ri] = true;
        activity_filled[ai] = true;
    }

    let remainder = reports
        .into_iter()
        .zip(report_used)
        .filter_map(|(report, used)| (!used).then_some(report))
        .collect();
    (activities, remainder)
}

/// Read a newline-JSON file of scan reports.
pub fn read_hollows_file(path: &Path) -> Result<Vec<HollowsReport>> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut reports = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let report: HollowsReport = serde_json::from_str(trimmed).map_err(|e| {
            Error::Schema(format!("{} line {}: {e}", path.display(), idx + 1))
        })?;
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Label, SysmonEvent};
    use crate::time::parse_timestamp;
    use std::collections::BTreeMap;

    fn activity(machine: &str, pid: u32, origin: &str) -> ProcessActivity {
        let mut attributes = BTreeMap::new();
        attributes.insert("ProcessId".to_string(), pid.to_string());
        let creation = SysmonEvent {
            event_id: 1,
            process_guid: format!("G-{machine}-{pid}"),
            machine: machine.to_string(),
            utc_time: parse_timestamp(origin).unwrap(),
            event_type: None,
            attributes,
        };
        ProcessActivity {
            process_guid: creation.process_guid.clone(),
            machine: machine.to_string(),
            origin_time: creation.utc_time,
            events: vec![creation],
            hollows: None,
            label: Label::Unknown,
            orphan: false,
        }
    }

    fn report(machine: &str, pid: u32, scan: &str) -> HollowsReport {
        HollowsReport {
            pid,
            machine: machine.to_string(),
            scan_time: parse_timestamp(scan).unwrap(),
            is_managed: 0,
            replaced: 1,
            hdr_modified: 0,
            total_modified: 1,
            patched: 0,
            iat_hooked: 0,
            implanted_shc: 0,
            unreachable_file: 0,
            other: 0,
            implanted_pe: 1,
        }
    }

    fn window() -> Duration {
        Duration::seconds(120)
    }

    #[test]
    fn exact_match_inside_window_attaches() {
        let (activities, rest) = attach_hollows(
            vec![activity("W7-1", 404, "2023-01-01 00:00:00.000")],
            vec![report("W7-1", 404, "2023-01-01 00:00:05.000")],
            window(),
        );
        assert!(activities[0].hollows.is_some());
        assert!(rest.is_empty());
    }

    #[test]
    fn machine_mismatch_does_not_attach() {
        let (activities, rest) = attach_hollows(
            vec![activity("W7-1", 404, "2023-01-01 00:00:00.000")],
            vec![report("W7-2", 404, "2023-01-01 00:00:05.000")],
            window(),
        );
        assert!(activities[0].hollows.is_none());
        assert_eq!(rest.len(), 1);
    }

    #[test]
    fn closest_scan_wins() {
        let (activities, rest) = attach_hollows(
            vec![activity("W7-1", 404, "2023-01-01 00:00:00.000")],
            vec![
                report("W7-1", 404, "2023-01-01 00:01:20.000"),
                report("W7-1", 404, "2023-01-01 00:00:05.000"),
            ],
            window(),
        );
        let attached = activities[0].hollows.as_ref().unwrap();
        assert_eq!(
            attached.scan_time,
            parse_timestamp("2023-01-01 00:00:05.000").unwrap()
        );
        assert_eq!(rest.len(), 1);
    }

    #[test]
    fn scan_outside_window_stays_unmatched() {
        let (activities, rest) = attach_hollows(
            vec![activity("W7-1", 404, "2023-01-01 00:00:00.000")],
            vec![report("W7-1", 404, "2023-01-01 00:02:30.000")],
            window(),
        );
        assert!(activities[0].hollows.is_none());
        assert_eq!(rest.len(), 1);
    }

    #[test]
    fn report_count_reconciles_and_events_untouched() {
        let acts = vec![
            activity("W7-1", 404, "2023-01-01 00:00:00.000"),
            activity("W7-2", 404, "2023-01-01 00:00:00.000"),
        ];
        let before: Vec<_> = acts.iter().map(|a| a.events.clone()).collect();
        let reports = vec![
            report("W7-1", 404, "2023-01-01 00:00:05.000"),
            report("W7-1", 404, "2023-01-01 00:00:50.000"),
            report("W7-3", 1, "2023-01-01 00:00:05.000"),
        ];
        let total = reports.len();
        let (after, rest) = attach_hollows(acts, reports, window());
        let attached = after.iter().filter(|a| a.hollows.is_some()).count();
        assert_eq!(attached + rest.len(), total);
        for (activity, events) in after.iter().zip(before) {
            assert_eq!(activity.events, events);
        }
    }
}
