//! Activity store: newline-JSON with a schema-version header line.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ProcessActivity;
use crate::artifact::Stamp;
use crate::error::{Error, Result};

pub const ACTIVITY_STORE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct ActivityStoreHeader {
    pub format_version: u32,
    pub kind: String,
    pub window_secs: u32,
    pub count: usize,
    pub stamp: Stamp,
}

/// Write the header line followed by one activity per line.
pub fn write_activities(
    path: &Path,
    activities: &[ProcessActivity],
    window_secs: u32,
    stamp: &Stamp,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    let mut writer = BufWriter::new(file);
    let header = ActivityStoreHeader {
        format_version: ACTIVITY_STORE_VERSION,
        kind: "activities".to_string(),
        window_secs,
        count: activities.len(),
        stamp: stamp.clone(),
    };
    writeln!(writer, "{}", serde_json::to_string(&header)?)?;
    for activity in activities {
        writeln!(writer, "{}", serde_json::to_string(activity)?)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read an activity store, validating the header line.
pub fn read_activities(path: &Path) -> Result<(ActivityStoreHeader, Vec<ProcessActivity>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Schema(format!("{}: empty activity store", path.display())))??;
    let header: ActivityStoreHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::Schema(format!("{}: bad header: {e}", path.display())))?;
    if header.format_version != ACTIVITY_STORE_VERSION {
        return Err(Error::Version {
            found: header.format_version,
            supported: ACTIVITY_STORE_VERSION,
        });
    }
    let mut activities = Vec::with_capacity(header.count);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let activity: ProcessActivity = serde_json::from_str(&line)
            .map_err(|e| Error::Schema(format!("{} line {}: {e}", path.display(), idx + 2)))?;
        activities.push(activity);
    }
    if activities.len() != header.count {
        return Err(Error::Corruption(format!(
            "{}: header count {} but {} records",
            path.display(),
            header.count,
            activities.len()
        )));
    }
    Ok((header, activities))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Label, SysmonEvent};
    use crate::time::parse_timestamp;
    use std::collections::BTreeMap;

    fn sample_activity() -> ProcessActivity {
        let event = SysmonEvent {
            event_id: 1,
            process_guid: "G1".to_string(),
            machine: "W7-1".to_string(),
            utc_time: parse_timestamp("2023-01-01 00:00:00.000").unwrap(),
            event_type: None,
            attributes: BTreeMap::from([("ProcessId".to_string(), "404".to_string())]),
        };
        ProcessActivity {
            process_guid: "G1".to_string(),
            machine: "W7-1".to_string(),
            origin_time: event.utc_time,
            events: vec![event],
            hollows: None,
            label: Label::Malicious,
            orphan: false,
        }
    }

    #[test]
    fn store_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("activities.ndjson");
        let activities = vec![sample_activity()];
        let stamp = Stamp::new("deadbeef", Some(42));
        write_activities(&path, &activities, 120, &stamp).unwrap();
        let (header, back) = read_activities(&path).unwrap();
        assert_eq!(header.window_secs, 120);
        assert_eq!(header.stamp, stamp);
        assert_eq!(back, activities);
    }

    #[test]
    fn truncated_store_is_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("activities.ndjson");
        write_activities(&path, &[sample_activity()], 120, &Stamp::new("x", None)).unwrap();
        let contents = std::fs::read_to_string(&path).unwrap();
        let header_only = contents.lines().next().unwrap();
        std::fs::write(&path, format!("{header_only}\n")).unwrap();
        assert!(matches!(read_activities(&path), Err(Error::Corruption(_))));
    }
}
