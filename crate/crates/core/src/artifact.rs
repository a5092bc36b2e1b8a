//! Artifact stamping shared by every file the toolkit emits.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Provenance stamp embedded in artifact headers: hash of the effective
/// configuration plus the seed that produced the artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Stamp {
    pub fn new(config_hash: impl Into<String>, seed: Option<u64>) -> Self {
        Stamp {
            config_hash: config_hash.into(),
            seed,
        }
    }

    /// Stamp derived from any serializable configuration value.
    pub fn of_config<T: Serialize>(config: &T, seed: Option<u64>) -> Self {
        Stamp::new(hash_config(config), seed)
    }
}

/// SHA-256 hex digest of a value's canonical JSON form.
pub fn hash_config<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    sha256_hex(&json)
}

/// SHA-256 hex digest of raw bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 hex digest of a file's contents.
pub fn sha256_file(path: &std::path::Path) -> crate::error::Result<String> {
    let bytes = std::fs::read(path).map_err(|e| crate::error::Error::file(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_matches_known_vector() {
        // sha256("abc")
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn config_hash_is_stable() {
        #[derive(Serialize)]
        struct Cfg {
            a: u32,
            b: String,
        }
        let cfg = Cfg { a: 1, b: "x".into() };
        assert_eq!(hash_config(&cfg), hash_config(&cfg));
    }
}
