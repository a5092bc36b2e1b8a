//! Timestamp handling for Sysmon-style records.
//!
//! Sysmon's `UtcTime` field uses `YYYY-MM-DD HH:MM:SS.mmm`; the event
//! envelope's `TimeCreated` uses RFC 3339. Everything is normalized to UTC
//! with millisecond precision.

use chrono::{DateTime, NaiveDateTime, SubsecRound, Utc};

use crate::error::{Error, Result};

pub const SYSMON_TIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S%.3f";

/// Parse either the Sysmon `UtcTime` format or RFC 3339, truncated to
/// millisecond precision.
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>> {
    if let Ok(naive) = NaiveDateTime::parse_from_str(raw, SYSMON_TIME_FORMAT) {
        return Ok(naive.and_utc().trunc_subsecs(3));
    }
    DateTime::parse_from_rfc3339(raw)
        .map(|dt| dt.with_timezone(&Utc).trunc_subsecs(3))
        .map_err(|e| Error::Schema(format!("invalid timestamp {raw:?}: {e}")))
}

/// Render in the Sysmon `UtcTime` format.
pub fn format_timestamp(ts: DateTime<Utc>) -> String {
    ts.format(SYSMON_TIME_FORMAT).to_string()
}

pub mod serde_sysmon_time {
    //! serde adapter storing timestamps in the Sysmon string format.

    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&format_timestamp(*ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(de)?;
        parse_timestamp(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_sysmon_format() {
        let ts = parse_timestamp("2023-01-01 00:00:01.500").unwrap();
        assert_eq!(format_timestamp(ts), "2023-01-01 00:00:01.500");
    }

    #[test]
    fn accepts_rfc3339_and_truncates_to_millis() {
        let ts = parse_timestamp("2019-07-16T08:31:24.429646Z").unwrap();
        assert_eq!(format_timestamp(ts), "2019-07-16 08:31:24.429");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_timestamp("not a time").is_err());
    }
}
