//! Machine-level utilization generation: baseline noise plus additive
//! contributions from each activity the VM hosts.

use rand::Rng;

use super::config::{BaselineProfile, LoadProfile};
use crate::featurize::{MachineSeries, MachineSnapshot};
use crate::ingest::{Label, ProcessActivity, EVENT_ID_NETWORK, EVENT_ID_PROCESS_TERMINATE};

/// Rough payload size used to derive packet counts from byte counts.
const BYTES_PER_PACKET: u64 = 700;

fn uniform(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    if range.0 >= range.1 {
        range.0
    } else {
        rng.random_range(range.0..range.1)
    }
}

fn uniform_u64(rng: &mut impl Rng, range: (u64, u64)) -> u64 {
    rng.random_range(range.0..=range.1.max(range.0))
}

fn uniform_u32(rng: &mut impl Rng, range: (u32, u32)) -> u32 {
    rng.random_range(range.0..=range.1.max(range.0))
}

/// One VM's per-second series for one execution window.
///
/// Each hosted activity adds a sustained CPU/memory/process footprint
/// while it is alive and a network burst at each of its connection
/// events. The series label is the OR over hosted activity labels: one
/// malicious process makes the machine malicious, whatever else runs.
pub fn generate_machine_series(
    activities: &[(&ProcessActivity, &LoadProfile)],
    baseline: &BaselineProfile,
    rng: &mut impl Rng,
    machine: &str,
    iteration: u32,
    vm_id: u32,
    window_secs: u32,
) -> MachineSeries {
    let label = if activities.iter().any(|(a, _)| a.label.is_malicious()) {
        Label::Malicious
    } else {
        Label::Benign
    };

    let base_pid = uniform_u32(rng, baseline.base_pid);
    let window = window_secs as usize;

    // Per-activity sustained draws.
    struct Footprint {
        cpu: f64,
        jitter: f64,
        mem: u64,
        procs: u32,
        alive_until: i64,
        start_sec: i64,
        net_sent: Vec<u64>,
    }
    let mut footprints = Vec::with_capacity(activities.len());
    for (activity, load) in activities {
        let cpu = uniform(rng, load.cpu_user);
        let mem = (uniform(rng, load.mem_mb) * 1e6) as u64;
        let procs = uniform_u32(rng, load.procs);
        let origin = activity.origin_time;
        let alive_until = activity
            .events
            .iter()
            .find(|e| e.event_id == EVENT_ID_PROCESS_TERMINATE)
            .map(|e| (e.utc_time - origin).num_seconds())
            .unwrap_or(i64::from(window_secs));
        let mut net_sent = vec![0u64; window];
        for event in &activity.events {
            if event.event_id == EVENT_ID_NETWORK {
                let sec = (event.utc_time - origin).num_seconds().clamp(0, window as i64 - 1);
                net_sent[sec as usize] += uniform_u64(rng, load.net_event_bytes);
            }
        }
        footprints.push(Footprint {
            cpu,
            jitter: load.cpu_jitter,
            mem,
            procs,
            alive_until,
            start_sec: 0,
            net_sent,
        });
    }

    let mut snapshots = Vec::with_capacity(window);
    for t in 0..window_secs {
        let ts = i64::from(t);
        let mut cpu_system = uniform(rng, baseline.cpu_system);
        let mut cpu_user = uniform(rng, baseline.cpu_user);
        let mut mem_used = uniform_u64(rng, baseline.mem);
        let swap_used = uniform_u64(rng, baseline.swap);
        let mut total_procs = uniform_u32(rng, baseline.procs);
        let mut bytes_sent = uniform_u64(rng, baseline.bytes);
        let mut bytes_recv = uniform_u64(rng, baseline.bytes);
        let mut pkts_sent = uniform_u64(rng, baseline.pkts);
        let mut pkts_recv = uniform_u64(rng, baseline.pkts);
        let mut spawned = 0u32;

        for fp in &footprints {
            if ts >= fp.start_sec && ts < fp.alive_until {
                cpu_user += (fp.cpu + rng.random_range(-fp.jitter..=fp.jitter)).max(0.0);
                cpu_system += fp.cpu * 0.15;
                mem_used += fp.mem;
                total_procs += fp.procs;
                spawned += fp.procs;
            }
            let sent = fp.net_sent[t as usize];
            if sent > 0 {
                bytes_sent += sent;
                bytes_recv += sent / 3; // response traffic
                pkts_sent += sent / BYTES_PER_PACKET + 1;
                pkts_recv += sent / (3 * BYTES_PER_PACKET) + 1;
            }
        }

        snapshots.push(MachineSnapshot {
            t,
            cpu_system_pct: (cpu_system).min(100.0),
            cpu_user_pct: (cpu_user).min(100.0),
            mem_used,
            swap_used,
            total_procs,
            max_pid: base_pid + spawned * 4,
            bytes_sent,
            bytes_recv,
            pkts_sent,
            pkts_recv,
        });
    }

    MachineSeries {
        machine: machine.to_string(),
        iteration,
        vm_id,
        label,
        snapshots,
    }
}

/// Cross-traffic between co-running machines: a share of every activity's
/// sent bytes lands on the other occupied VMs of the same iteration as
/// received traffic, and a share of that is echoed back as responses.
/// This is what lets background benignware blur the machine-level view:
/// a quiet benign host starts receiving malware scan and beacon traffic.
pub fn apply_cross_traffic(
    series: &mut [MachineSeries],
    per_vm_sent: &[Vec<u64>],
    cross_ratio: f64,
    response_ratio: f64,
    rng: &mut impl Rng,
) {
    if series.len() < 2 || cross_ratio <= 0.0 {
        return;
    }
    let window = per_vm_sent.first().map_or(0, Vec::len);
    for source in 0..series.len() {
        for t in 0..window {
            let sent = per_vm_sent[source][t];
            if sent == 0 {
                continue;
            }
            for target in 0..series.len() {
                if target == source {
                    continue;
                }
                let share = (sent as f64 * cross_ratio * rng.random_range(0.5..1.5))
                    / (series.len() - 1) as f64;
                let share = share as u64;
                if share == 0 {
                    continue;
                }
                let snapshot = &mut series[target].snapshots[t];
                snapshot.bytes_recv += share;
                snapshot.pkts_recv += share / BYTES_PER_PACKET + 1;
                let response = (share as f64 * response_ratio) as u64;
                snapshot.bytes_sent += response;
                snapshot.pkts_sent += response / BYTES_PER_PACKET + 1;
            }
        }
    }
}
