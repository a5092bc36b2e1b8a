//! Campaign configuration and generative profiles.
//!
//! The profiles are tunable stand-ins for real sample behavior: class
//! separability is an explicit fixture property controlled here, not a
//! hidden assumption. All fields have defaults, so a config file only
//! needs to override what it cares about.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Range helpers keep the profile declarations readable.
pub type RangeF = (f64, f64);
pub type RangeU = (u32, u32);

/// Machine-level footprint of one running sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadProfile {
    /// Sustained extra user-CPU percent while the process runs.
    pub cpu_user: RangeF,
    /// Per-second jitter around the sustained level.
    pub cpu_jitter: f64,
    /// Resident memory added, in megabytes.
    pub mem_mb: RangeF,
    /// Child processes spawned.
    pub procs: RangeU,
    /// Bytes sent per network-connection event.
    pub net_event_bytes: (u64, u64),
}

impl Default for LoadProfile {
    fn default() -> Self {
        LoadProfile {
            cpu_user: (3.0, 20.0),
            cpu_jitter: 2.0,
            mem_mb: (50.0, 300.0),
            procs: (1, 3),
            net_event_bytes: (2_000, 80_000),
        }
    }
}

/// Event-level behavior of one sample class or variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProcessProfile {
    /// Mean events per second over the window, drawn uniformly per sample.
    pub events_per_sec: RangeF,
    /// Mixture weight of network-connection events.
    pub net_weight: f64,
    /// Mixture weight of registry events.
    pub registry_weight: f64,
    /// Share of registry events that are value operations (id 13); the
    /// rest are key operations (id 12).
    pub reg_value_share: f64,
    /// DeleteValue share within id-13 events; the rest are SetValue.
    pub delete_ratio: f64,
    /// Probability of an extra burst of events within the first second.
    pub first_burst_prob: f64,
    pub first_burst_size: RangeU,
    /// Probability the process terminates (id 5) before the window ends.
    pub termination_prob: f64,
    /// Destination-port-name mix for network events; the remainder goes
    /// to unnamed or exotic ports.
    pub port_http: f64,
    pub port_https: f64,
    /// Integrity-level weights on the creation event.
    pub integrity_high: f64,
    pub integrity_low: f64,
    pub integrity_medium: f64,
    pub integrity_system: f64,
    /// Probability the image is signed with a valid signature.
    pub signed_prob: f64,
    pub same_image_prob: f64,
    /// Probability a hollowing scan report exists (malicious samples only).
    pub hollows_prob: f64,
    pub load: LoadProfile,
}

impl Default for ProcessProfile {
    fn default() -> Self {
        ProcessProfile::benign()
    }
}

impl ProcessProfile {
    pub fn benign() -> Self {
        ProcessProfile {
            events_per_sec: (0.05, 0.6),
            net_weight: 0.45,
            registry_weight: 0.55,
            reg_value_share: 0.9,
            delete_ratio: 0.08,
            first_burst_prob: 0.25,
            first_burst_size: (1, 3),
            termination_prob: 0.5,
            port_http: 0.35,
            port_https: 0.55,
            integrity_high: 0.15,
            integrity_low: 0.05,
            integrity_medium: 0.72,
            integrity_system: 0.08,
            signed_prob: 0.75,
            same_image_prob: 0.8,
            hollows_prob: 0.0,
            load: LoadProfile::default(),
        }
    }

    /// Trojan-like baseline for malicious samples.
    pub fn malicious() -> Self {
        ProcessProfile {
            events_per_sec: (0.3, 1.5),
            net_weight: 0.35,
            registry_weight: 0.65,
            reg_value_share: 0.6,
            delete_ratio: 0.25,
            first_burst_prob: 0.85,
            first_burst_size: (2, 6),
            termination_prob: 0.25,
            port_http: 0.1,
            port_https: 0.15,
            integrity_high: 0.45,
            integrity_low: 0.05,
            integrity_medium: 0.3,
            integrity_system: 0.2,
            signed_prob: 0.15,
            same_image_prob: 0.4,
            hollows_prob: 0.25,
            load: LoadProfile {
                cpu_user: (10.0, 45.0),
                cpu_jitter: 4.0,
                mem_mb: (100.0, 600.0),
                procs: (2, 6),
                net_event_bytes: (20_000, 400_000),
            },
        }
    }

    fn ransomware_like() -> Self {
        ProcessProfile {
            events_per_sec: (1.0, 2.5),
            net_weight: 0.15,
            registry_weight: 0.85,
            reg_value_share: 0.55,
            delete_ratio: 0.5,
            load: LoadProfile {
                cpu_user: (20.0, 60.0),
                ..ProcessProfile::malicious().load
            },
            ..ProcessProfile::malicious()
        }
    }

    fn botnet_like() -> Self {
        ProcessProfile {
            events_per_sec: (0.5, 1.5),
            net_weight: 0.7,
            registry_weight: 0.3,
            port_http: 0.05,
            port_https: 0.05,
            load: LoadProfile {
                cpu_user: (5.0, 25.0),
                net_event_bytes: (50_000, 600_000),
                ..ProcessProfile::malicious().load
            },
            ..ProcessProfile::malicious()
        }
    }

    fn miner_like() -> Self {
        ProcessProfile {
            events_per_sec: (0.1, 0.5),
            net_weight: 0.3,
            registry_weight: 0.7,
            first_burst_prob: 0.6,
            load: LoadProfile {
                cpu_user: (45.0, 85.0),
                cpu_jitter: 3.0,
                net_event_bytes: (5_000, 60_000),
                ..ProcessProfile::malicious().load
            },
            ..ProcessProfile::malicious()
        }
    }
}

/// A malware variant: a profile plus its draw weight. Variants only
/// diversify the fixtures; they never become labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalwareVariant {
    pub name: String,
    pub weight: f64,
    pub profile: ProcessProfile,
}

pub fn default_variants() -> Vec<MalwareVariant> {
    vec![
        MalwareVariant {
            name: "trojan".to_string(),
            weight: 0.5,
            profile: ProcessProfile::malicious(),
        },
        MalwareVariant {
            name: "botnet".to_string(),
            weight: 0.2,
            profile: ProcessProfile::botnet_like(),
        },
        MalwareVariant {
            name: "miner".to_string(),
            weight: 0.15,
            profile: ProcessProfile::miner_like(),
        },
        MalwareVariant {
            name: "ransomware".to_string(),
            weight: 0.15,
            profile: ProcessProfile::ransomware_like(),
        },
    ]
}

/// Idle-host noise floor, drawn per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineProfile {
    pub cpu_system: RangeF,
    pub cpu_user: RangeF,
    pub mem: (u64, u64),
    pub swap: (u64, u64),
    pub procs: RangeU,
    pub base_pid: RangeU,
    pub bytes: (u64, u64),
    pub pkts: (u64, u64),
}

impl Default for BaselineProfile {
    fn default() -> Self {
        BaselineProfile {
            cpu_system: (1.0, 4.0),
            cpu_user: (2.0, 8.0),
            mem: (1_900_000_000, 2_200_000_000),
            swap: (0, 50_000_000),
            procs: (42, 48),
            base_pid: (3000, 5000),
            bytes: (500, 8_000),
            pkts: (2, 30),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub n_vms: u32,
    pub n_malicious: u32,
    pub n_benign: u32,
    pub window_secs: u32,
    pub seed: u64,
    /// Run benign samples concurrently with malware (the realistic mode).
    /// When false every sample runs alone in its own iteration.
    pub background_noise: bool,
    /// Iteration count override, required when `n_malicious` is 0.
    pub iterations: Option<u32>,
    /// Fraction of an activity's sent bytes that shows up as received
    /// traffic on co-running machines.
    pub cross_traffic_ratio: f64,
    /// Fraction of received cross-traffic echoed back as responses.
    pub response_ratio: f64,
    pub benign_profile: ProcessProfile,
    pub malicious_variants: Vec<MalwareVariant>,
    pub baseline: BaselineProfile,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            n_vms: 5,
            n_malicious: 100,
            n_benign: 100,
            window_secs: 120,
            seed: 42,
            background_noise: true,
            iterations: None,
            cross_traffic_ratio: 0.5,
            response_ratio: 0.3,
            benign_profile: ProcessProfile::benign(),
            malicious_variants: default_variants(),
            baseline: BaselineProfile::default(),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_vms == 0 {
            return Err(Error::Config("n_vms must be at least 1".into()));
        }
        if self.window_secs == 0 {
            return Err(Error::Config("window_secs must be positive".into()));
        }
        if self.n_malicious == 0 && self.iterations.is_none() {
            return Err(Error::Config(
                "a campaign without malicious samples needs an explicit iteration count".into(),
            ));
        }
        if self.background_noise && self.n_benign < self.n_vms {
            return Err(Error::Config(format!(
                "benign pool ({}) smaller than the VM count ({}); cannot fill iterations",
                self.n_benign, self.n_vms
            )));
        }
        if self.n_malicious > 0 && self.malicious_variants.is_empty() {
            return Err(Error::Config("no malicious variants configured".into()));
        }
        for variant in &self.malicious_variants {
            if variant.weight < 0.0 {
                return Err(Error::Config(format!(
                    "variant {} has a negative weight",
                    variant.name
                )));
            }
        }
        let propensities = [
            self.cross_traffic_ratio,
            self.response_ratio,
            self.benign_profile.first_burst_prob,
            self.benign_profile.termination_prob,
            self.benign_profile.signed_prob,
            self.benign_profile.hollows_prob,
        ];
        if propensities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("propensities must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        CampaignConfig::default().validate().unwrap();
    }

    #[test]
    fn zero_malware_needs_iteration_count() {
        let config = CampaignConfig {
            n_malicious: 0,
            ..CampaignConfig::default()
        };
        assert!(config.validate().is_err());
        let fixed = CampaignConfig {
            iterations: Some(10),
            ..config
        };
        fixed.validate().unwrap();
    }

    #[test]
    fn benign_pool_must_cover_the_vms() {
        let config = CampaignConfig {
            n_benign: 3,
            ..CampaignConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = CampaignConfig::default();
        let json = serde_json::to_string(&config).unwrap();
        let back: CampaignConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn sparse_json_uses_defaults() {
        let config: CampaignConfig =
            serde_json::from_str(r#"{"n_malicious": 7, "n_benign": 9}"#).unwrap();
        assert_eq!(config.n_malicious, 7);
        assert_eq!(config.n_vms, 5);
        assert_eq!(config.window_secs, 120);
    }
}
