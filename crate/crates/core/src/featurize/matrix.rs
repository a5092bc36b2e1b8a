//! Matrix file format: a JSON header line, then one sequence per line.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureSequence, SchemaId};
use crate::artifact::Stamp;
use crate::error::{Error, Result};

pub const MATRIX_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub format_version: u32,
    pub schema_id: SchemaId,
    pub width: usize,
    pub count: usize,
    pub stamp: Stamp,
}

pub fn write_matrix(path: &Path, sequences: &[FeatureSequence], stamp: &Stamp) -> Result<()> {
    let schema_id = match sequences.first() {
        Some(seq) => seq.schema_id,
        None => return Err(Error::Schema("refusing to write an empty matrix".into())),
    };
    for seq in sequences {
        if seq.schema_id != schema_id {
            return Err(Error::Schema(format!(
                "mixed schemas in one matrix: {} and {}",
                schema_id, seq.schema_id
            )));
        }
    }
    let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    let mut writer = BufWriter::new(file);
    let header = MatrixHeader {
        format_version: MATRIX_FORMAT_VERSION,
        schema_id,
        width: schema_id.width(),
        count: sequences.len(),
        stamp: stamp.clone(),
    };
    writeln!(writer, "{}", serde_json::to_string(&header)?)?;
    for seq in sequences {
        writeln!(writer, "{}", serde_json::to_string(seq)?)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<(MatrixHeader, Vec<FeatureSequence>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Schema(format!("{}: empty matrix file", path.display())))??;
    let header: MatrixHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::Schema(format!("{}: bad header: {e}", path.display())))?;
    if header.format_version != MATRIX_FORMAT_VERSION {
        return Err(Error::Version {
            found: header.format_version,
            supported: MATRIX_FORMAT_VERSION,
        });
    }
    let mut sequences = Vec::with_capacity(header.count);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let seq: FeatureSequence = serde_json::from_str(&line)
            .map_err(|e| Error::Schema(format!("{} line {}: {e}", path.display(), idx + 2)))?;
        if seq.schema_id != header.schema_id {
            return Err(Error::Schema(format!(
                "{} line {}: schema {} does not match header {}",
                path.display(),
                idx + 2,
                seq.schema_id,
                header.schema_id
            )));
        }
        for row in &seq.vectors {
            if row.len() != header.width {
                return Err(Error::Shape(format!(
                    "{} line {}: row width {} != {}",
                    path.display(),
                    idx + 2,
                    row.len(),
                    header.width
                )));
            }
        }
        if seq.times_ms.len() != seq.vectors.len() {
            return Err(Error::Shape(format!(
                "{} line {}: {} timestamps for {} vectors",
                path.display(),
                idx + 2,
                seq.times_ms.len(),
                seq.vectors.len()
            )));
        }
        sequences.push(seq);
    }
    if sequences.len() != header.count {
        return Err(Error::Corruption(format!(
            "{}: header count {} but {} records",
            path.display(),
            header.count,
            sequences.len()
        )));
    }
    Ok((header, sequences))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Label;

    fn seq(id: &str) -> FeatureSequence {
        FeatureSequence {
            schema_id: SchemaId::EventOnly5,
            source_id: id.to_string(),
            label: Label::Benign,
            times_ms: vec![0, 800],
            vectors: vec![vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0, 0.0]],
        }
    }

    #[test]
    fn matrix_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrix.ndjson");
        let sequences = vec![seq("a"), seq("b")];
        write_matrix(&path, &sequences, &Stamp::new("h", Some(1))).unwrap();
        let (header, back) = read_matrix(&path).unwrap();
        assert_eq!(header.count, 2);
        assert_eq!(header.width, 5);
        assert_eq!(back, sequences);
    }

    #[test]
    fn mixed_schema_write_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("matrix.ndjson");
        let mut other = seq("b");
        other.schema_id = SchemaId::Machine10;
        let err = write_matrix(&path, &[seq("a"), other], &Stamp::new("h", None));
        assert!(err.is_err());
    }
}
