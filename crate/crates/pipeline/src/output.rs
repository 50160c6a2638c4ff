//! CSV tables. Floats use `Display`, the shortest decimal that parses back to
//! the same `f64`, so a file written twice from equal data is byte-identical.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{PipelineError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &'static str, header: &'static [&'static str]) -> Self {
        Self {
            file,
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Appends the rows of a table with the same schema.
    pub fn extend(&mut self, other: Table) -> Result<()> {
        if other.header != self.header {
            return Err(PipelineError::Config(format!(
                "cannot merge {} tables with different columns",
                self.file
            )));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s += &row.join(",");
            s.push('\n');
        }
        s
    }

    /// Writes the table into `dir` and returns its manifest entry.
    pub fn write(&self, dir: &Path) -> Result<FileRecord> {
        let path = dir.join(self.file);
        let bytes = self.to_csv().into_bytes();
        write_bytes(&path, &bytes)?;
        Ok(FileRecord {
            path: self.file.to_string(),
            sha256: sha256_hex(&bytes),
            rows: Some(self.rows.len()),
        })
    }
}

/// Formats one CSV cell.
pub fn cell(v: impl Display) -> String {
    v.to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| PipelineError::io(path, e))?;
    f.write_all(bytes).map_err(|e| PipelineError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    /// Data rows, for CSV files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            7.224086419306164e1,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(cell(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(cell(1.0), "1");
    }

    #[test]
    fn csv_layout_and_merge() {
        let mut t = Table::new("t.csv", &["a", "b"]);
        t.push(vec![cell(1), cell(0.5)]);
        let mut u = Table::new("t.csv", &["a", "b"]);
        u.push(vec![cell(2), cell(true)]);
        t.extend(u).unwrap();
        assert_eq!(t.to_csv(), "a,b\n1,0.5\n2,true\n");
        assert!(t.extend(Table::new("t.csv", &["a"])).is_err());
    }

    #[test]
    fn checksum_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
