//! Iteration scheduling: the malware-count draw, VM assignment, and
//! aligned start times.

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::CampaignConfig;
use crate::error::Result;
use crate::ingest::Label;
use crate::seed::derive_seed;
use crate::time::parse_timestamp;

/// Gap between execution windows, covering collection and VM reset.
const ITERATION_GAP_SECS: i64 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub vm_id: u32,
    pub sample_id: String,
    pub label: Label,
}

/// One synchronized round: every assigned sample starts at `start_time`
/// and runs for the campaign window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationPlan {
    pub index: u32,
    pub malware_count: u32,
    #[serde(with = "crate::time::serde_sysmon_time")]
    pub start_time: DateTime<Utc>,
    pub assignments: Vec<Assignment>,
}

fn campaign_epoch() -> DateTime<Utc> {
    parse_timestamp("2023-06-01 00:00:00.000").expect("fixed epoch parses")
}

fn iteration_start(config: &CampaignConfig, index: u32) -> DateTime<Utc> {
    campaign_epoch()
        + Duration::seconds(i64::from(index) * (i64::from(config.window_secs) + ITERATION_GAP_SECS))
}

/// Draw how many malware samples the next iteration runs: uniform over
/// {0, 1, 2}, except that three zero draws in a row force the next draw
/// to be nonzero (uniform over {1, 2}).
pub fn draw_malware_count(rng: &mut impl Rng, history: &[u32]) -> u32 {
    let forced = history.len() >= 3 && history[history.len() - 3..].iter().all(|&c| c == 0);
    if forced {
        rng.random_range(1..=2)
    } else {
        rng.random_range(0..=2)
    }
}

pub fn malicious_sample_id(index: u32) -> String {
    format!("mal-{index:04}")
}

pub fn benign_sample_id(index: u32) -> String {
    format!("ben-{index:04}")
}

/// Plan all iterations for a background-noise campaign.
///
/// Malicious samples are consumed in a seeded shuffle order, each exactly
/// once; every remaining VM in an iteration gets a benign sample, drawn
/// with replacement across iterations but without replacement within one.
pub fn schedule_campaign(config: &CampaignConfig) -> Result<Vec<IterationPlan>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1));

    let mut malicious: Vec<u32> = (0..config.n_malicious).collect();
    malicious.shuffle(&mut rng);

    let mut plans = Vec::new();
    let mut history: Vec<u32> = Vec::new();
    let mut next_malicious = 0usize;

    loop {
        let remaining = malicious.len() - next_malicious;
        let index = plans.len() as u32;
        if remaining == 0 {
            match config.iterations {
                Some(total) if index < total => {}
                _ => break,
            }
        }

        let draw = if remaining == 0 {
            0
        } else {
            draw_malware_count(&mut rng, &history)
        };
        history.push(draw);
        let count = draw.min(remaining as u32).min(config.n_vms);

        let mut vm_ids: Vec<u32> = (0..config.n_vms).collect();
        vm_ids.shuffle(&mut rng);

        let mut assignments = Vec::with_capacity(config.n_vms as usize);
        for slot in 0..count {
            assignments.push(Assignment {
                vm_id: vm_ids[slot as usize],
                sample_id: malicious_sample_id(malicious[next_malicious]),
                label: Label::Malicious,
            });
            next_malicious += 1;
        }

        // Fill the rest with distinct benign samples for this iteration.
        let mut benign_pool: Vec<u32> = (0..config.n_benign).collect();
        benign_pool.shuffle(&mut rng);
        for (slot, vm_id) in vm_ids.iter().enumerate().skip(count as usize) {
            assignments.push(Assignment {
                vm_id: *vm_id,
                sample_id: benign_sample_id(benign_pool[slot - count as usize]),
                label: Label::Benign,
            });
        }
        assignments.sort_by_key(|a| a.vm_id);

        plans.push(IterationPlan {
            index,
            malware_count: count,
            start_time: iteration_start(config, index),
            assignments,
        });
    }
    Ok(plans)
}

/// Plan a no-background-noise campaign: every sample, malicious and
/// benign, runs alone in its own iteration.
pub fn schedule_solo(config: &CampaignConfig) -> Result<Vec<IterationPlan>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 2));

    let mut samples: Vec<(String, Label)> = (0..config.n_malicious)
        .map(|i| (malicious_sample_id(i), Label::Malicious))
        .chain((0..config.n_benign).map(|i| (benign_sample_id(i), Label::Benign)))
        .collect();
    samples.shuffle(&mut rng);

    Ok(samples
        .into_iter()
        .enumerate()
        .map(|(index, (sample_id, label))| {
            let index = index as u32;
            let vm_id = rng.random_range(0..config.n_vms);
            IterationPlan {
                index,
                malware_count: u32::from(label.is_malicious()),
                start_time: iteration_start(config, index),
                assignments: vec![Assignment {
                    vm_id,
                    sample_id,
                    label,
                }],
            }
        })
        .collect())
}
