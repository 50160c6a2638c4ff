use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{PipelineError, Result};
use crate::output::{write_bytes, FileRecord};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one run or sweep. Every emitted file is listed with its checksum;
/// the manifest itself is not.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// The resolved config of each item, in merge order.
    pub config: Vec<Value>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub workers: usize,
    pub files: Vec<FileRecord>,
    pub items: Vec<ItemRecord>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItemRecord {
    pub label: String,
    pub ok: bool,
    pub summary: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Failure {
    /// Position in the sweep file.
    pub item: usize,
    pub label: String,
    pub category: String,
    pub exit_code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(item: usize, label: String, err: &PipelineError) -> Self {
        Self {
            item,
            label,
            category: err.category().to_string(),
            exit_code: err.exit_code(),
            message: err.to_string(),
        }
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

impl Manifest {
    pub fn new(workers: usize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: Vec::new(),
            started_unix: unix_now(),
            finished_unix: 0.0,
            wall_seconds: 0.0,
            workers,
            files: Vec::new(),
            items: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn finish(&mut self, wall_seconds: f64) {
        self.finished_unix = unix_now();
        self.wall_seconds = wall_seconds;
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_bytes(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }
}
