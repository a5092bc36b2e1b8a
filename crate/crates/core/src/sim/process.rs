//! Generative stand-in for sample detonations: one process activity per
//! executed sample, shaped by its profile.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use rand::Rng;

use super::config::ProcessProfile;
use crate::ingest::{HollowsReport, Label, ProcessActivity, SysmonEvent};

/// A well-formed ProcessGuid. The middle segments are forced nonzero so
/// generated guids never match the degenerate duplicate pattern.
pub fn random_guid(rng: &mut impl Rng) -> String {
    let a: u32 = rng.random();
    let b: u16 = rng.random::<u16>() | 0x1000;
    let c: u16 = rng.random::<u16>() | 0x0001;
    let d: u16 = rng.random();
    let e_hi: u32 = rng.random();
    let e_lo: u16 = rng.random();
    format!("{a:08X}-{b:04X}-{c:04X}-{d:04X}-{e_hi:08X}{e_lo:04X}")
}

fn uniform(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    if range.0 >= range.1 {
        range.0
    } else {
        rng.random_range(range.0..range.1)
    }
}

fn uniform_u32(rng: &mut impl Rng, range: (u32, u32)) -> u32 {
    rng.random_range(range.0..=range.1.max(range.0))
}

fn base_attrs(pid: u32, image: &str) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("ProcessId".to_string(), pid.to_string()),
        ("Image".to_string(), image.to_string()),
    ])
}

fn integrity_level(profile: &ProcessProfile, rng: &mut impl Rng) -> &'static str {
    let weights = [
        ("High", profile.integrity_high),
        ("Low", profile.integrity_low),
        ("Medium", profile.integrity_medium),
        ("System", profile.integrity_system),
    ];
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let mut pick = rng.random_range(0.0..total.max(f64::MIN_POSITIVE));
    for (name, weight) in weights {
        if pick < weight {
            return name;
        }
        pick -= weight;
    }
    "Medium"
}

fn network_event(
    profile: &ProcessProfile,
    rng: &mut impl Rng,
    pid: u32,
    image: &str,
) -> (Option<String>, BTreeMap<String, String>) {
    let mut attrs = base_attrs(pid, image);
    let roll: f64 = rng.random();
    let (port, port_name, protocol) = if roll < profile.port_http {
        (80, Some("http"), "tcp")
    } else if roll < profile.port_http + profile.port_https {
        (443, Some("https"), "tcp")
    } else {
        // Exotic or unnamed destinations.
        const ODD: [(u16, Option<&str>, &str); 5] = [
            (53, Some("domain"), "udp"),
            (6667, Some("irc"), "tcp"),
            (4444, None, "tcp"),
            (8333, None, "tcp"),
            (1900, Some("ssdp"), "udp"),
        ];
        ODD[rng.random_range(0..ODD.len())]
    };
    attrs.insert("Protocol".to_string(), protocol.to_string());
    attrs.insert(
        "DestinationIp".to_string(),
        format!("203.0.113.{}", rng.random_range(1..=254)),
    );
    attrs.insert("DestinationPort".to_string(), port.to_string());
    if let Some(name) = port_name {
        attrs.insert("DestinationPortName".to_string(), name.to_string());
    }
    (None, attrs)
}

fn registry_event(
    profile: &ProcessProfile,
    rng: &mut impl Rng,
    pid: u32,
    image: &str,
) -> (u32, Option<String>, BTreeMap<String, String>) {
    const KEYS: [&str; 4] = [
        r"HKLM\Software\Microsoft\Windows\CurrentVersion\Run\updater",
        r"HKU\S-1-5-21\Software\Classes\exefile\shell\open\command",
        r"HKLM\System\CurrentControlSet\Services\svc\Start",
        r"HKU\S-1-5-21\Software\Microsoft\Office\Common\off",
    ];
    let mut attrs = base_attrs(pid, image);
    attrs.insert(
        "TargetObject".to_string(),
        KEYS[rng.random_range(0..KEYS.len())].to_string(),
    );
    if rng.random_bool(profile.reg_value_share) {
        let event_type = if rng.random_bool(profile.delete_ratio) {
            "DeleteValue"
        } else {
            "SetValue"
        };
        (13, Some(event_type.to_string()), attrs)
    } else {
        let event_type = if rng.random_bool(0.3) { "DeleteKey" } else { "CreateKey" };
        (12, Some(event_type.to_string()), attrs)
    }
}

fn hollows_report(
    rng: &mut impl Rng,
    pid: u32,
    machine: &str,
    origin: DateTime<Utc>,
    window_secs: u32,
) -> HollowsReport {
    let scan_offset = rng.random_range(1..=i64::from(window_secs));
    let replaced = rng.random_range(0..=2);
    let hdr_modified = rng.random_range(0..=1);
    let patched = rng.random_range(0..=2);
    let iat_hooked = rng.random_range(0..=2);
    let implanted_shc = u32::from(rng.random_bool(0.3));
    let mut implanted_pe = rng.random_range(0..=2);
    if replaced + hdr_modified + patched + iat_hooked + implanted_shc + implanted_pe == 0 {
        implanted_pe = 1; // a scan report exists because something was found
    }
    HollowsReport {
        pid,
        machine: machine.to_string(),
        scan_time: origin + Duration::seconds(scan_offset),
        is_managed: u32::from(rng.random_bool(0.2)),
        replaced,
        hdr_modified,
        total_modified: replaced + hdr_modified + patched + iat_hooked + implanted_shc + implanted_pe,
        patched,
        iat_hooked,
        implanted_shc,
        unreachable_file: u32::from(rng.random_bool(0.1)),
        other: rng.random_range(0..=1),
        implanted_pe,
    }
}

/// Generate one sample execution: the creation event at the window start,
/// a profile-driven mixture of network and registry events, an optional
/// termination, and (for malicious samples, with the configured
/// probability) a hollowing scan report.
pub fn generate_process_events(
    profile: &ProcessProfile,
    label: Label,
    rng: &mut impl Rng,
    machine: &str,
    sample_id: &str,
    start_time: DateTime<Utc>,
    window_secs: u32,
) -> (ProcessActivity, Option<HollowsReport>) {
    let guid = random_guid(rng);
    let pid = rng.random_range(1_000..30_000);
    let image = format!(r"C:\samples\{sample_id}.exe");
    let window_ms = i64::from(window_secs) * 1000;

    // Termination bounds the window in which body events can occur.
    let termination_ms = rng
        .random_bool(profile.termination_prob)
        .then(|| rng.random_range(window_ms / 2..window_ms - 50));
    let body_end = termination_ms.unwrap_or(window_ms);

    let mut creation_attrs = base_attrs(pid, &image);
    creation_attrs.insert(
        "IntegrityLevel".to_string(),
        integrity_level(profile, rng).to_string(),
    );
    if rng.random_bool(profile.signed_prob) {
        creation_attrs.insert("Signed".to_string(), "true".to_string());
        creation_attrs.insert("SignatureStatus".to_string(), "Valid".to_string());
    } else {
        creation_attrs.insert("Signed".to_string(), "false".to_string());
        creation_attrs.insert("SignatureStatus".to_string(), "Invalid".to_string());
    }
    if rng.random_bool(profile.same_image_prob) {
        creation_attrs.insert("SameImageLoaded".to_string(), "true".to_string());
    }
    creation_attrs.insert("User".to_string(), format!("{machine}\\user"));

    let mut timed: Vec<(i64, u32, Option<String>, BTreeMap<String, String>)> = Vec::new();

    let rate = uniform(rng, profile.events_per_sec);
    let mut body_count = (rate * f64::from(window_secs)).round() as usize;
    if rng.random_bool(profile.first_burst_prob) {
        let burst = uniform_u32(rng, profile.first_burst_size) as usize;
        for _ in 0..burst {
            let offset = rng.random_range(60..=980).min(body_end - 1);
            timed.push(body_event(profile, rng, pid, &image, offset));
        }
    }
    if body_count == 0 && rate > 0.0 && rng.random_bool(rate.min(1.0)) {
        body_count = 1;
    }
    for _ in 0..body_count {
        let offset = rng.random_range(20..body_end.max(21));
        timed.push(body_event(profile, rng, pid, &image, offset));
    }

    if let Some(term_ms) = termination_ms {
        timed.push((term_ms, 5, None, base_attrs(pid, &image)));
    }
    timed.sort_by_key(|(offset, ..)| *offset);

    let mut events = Vec::with_capacity(timed.len() + 1);
    events.push(SysmonEvent {
        event_id: 1,
        process_guid: guid.clone(),
        machine: machine.to_string(),
        utc_time: start_time,
        event_type: None,
        attributes: creation_attrs,
    });
    for (offset, event_id, event_type, attributes) in timed {
        events.push(SysmonEvent {
            event_id,
            process_guid: guid.clone(),
            machine: machine.to_string(),
            utc_time: start_time + Duration::milliseconds(offset),
            event_type,
            attributes,
        });
    }

    let hollows = (label.is_malicious() && rng.random_bool(profile.hollows_prob))
        .then(|| hollows_report(rng, pid, machine, start_time, window_secs));

    let activity = ProcessActivity {
        process_guid: guid,
        machine: machine.to_string(),
        origin_time: start_time,
        events,
        hollows: hollows.clone(),
        label,
        orphan: false,
    };
    (activity, hollows)
}

fn body_event(
    profile: &ProcessProfile,
    rng: &mut impl Rng,
    pid: u32,
    image: &str,
    offset: i64,
) -> (i64, u32, Option<String>, BTreeMap<String, String>) {
    let total = profile.net_weight + profile.registry_weight;
    let is_network = total > 0.0 && rng.random_range(0.0..total) < profile.net_weight;
    if is_network {
        let (event_type, attrs) = network_event(profile, rng, pid, image);
        (offset, 3, event_type, attrs)
    } else {
        let (event_id, event_type, attrs) = registry_event(profile, rng, pid, image);
        (offset, event_id, event_type, attrs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::is_degenerate_guid;
    use crate::time::parse_timestamp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn start() -> DateTime<Utc> {
        parse_timestamp("2023-06-01 00:00:00.000").unwrap()
    }

    #[test]
    fn zero_network_weight_means_no_network_events() {
        let profile = ProcessProfile {
            net_weight: 0.0,
            registry_weight: 1.0,
            events_per_sec: (1.0, 1.2),
            ..ProcessProfile::benign()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (activity, _) = generate_process_events(
                &profile,
                Label::Benign,
                &mut rng,
                "W7-1",
                "ben-0001",
                start(),
                120,
            );
            assert!(activity.events.iter().all(|e| e.event_id != 3));
        }
    }

    #[test]
    fn hollows_probability_one_attaches_a_nonzero_report() {
        let profile = ProcessProfile {
            hollows_prob: 1.0,
            ..ProcessProfile::malicious()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let (activity, hollows) = generate_process_events(
                &profile,
                Label::Malicious,
                &mut rng,
                "W7-2",
                "mal-0001",
                start(),
                120,
            );
            let report = hollows.expect("report generated");
            assert_eq!(activity.hollows.as_ref(), Some(&report));
            assert!(report.counts().iter().sum::<u32>() > 0);
            assert_eq!(report.pid, activity.creation_pid().unwrap());
        }
    }

    #[test]
    fn benign_label_never_gets_a_report() {
        let profile = ProcessProfile {
            hollows_prob: 1.0,
            ..ProcessProfile::benign()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (_, hollows) = generate_process_events(
            &profile,
            Label::Benign,
            &mut rng,
            "W7-1",
            "ben-0002",
            start(),
            120,
        );
        assert!(hollows.is_none());
    }

    #[test]
    fn all_events_stay_inside_the_window_and_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..50 {
            let profile = if i % 2 == 0 {
                ProcessProfile::benign()
            } else {
                ProcessProfile::malicious()
            };
            let (activity, _) = generate_process_events(
                &profile,
                if i % 2 == 0 { Label::Benign } else { Label::Malicious },
                &mut rng,
                "W7-3",
                &format!("s-{i}"),
                start(),
                120,
            );
            assert_eq!(activity.events[0].event_id, 1);
            assert_eq!(activity.events[0].utc_time, start());
            let window_end = start() + Duration::seconds(120);
            for pair in activity.events.windows(2) {
                assert!(pair[0].utc_time <= pair[1].utc_time);
            }
            assert!(activity.events.iter().all(|e| e.utc_time <= window_end));
            assert!(!is_degenerate_guid(&activity.process_guid));
        }
    }
}
