//! JSON reports and CSV tables.
//!
//! A report keeps everything that depends only on inputs and seeds under
//! `report`; wall-clock data lives under `timing`, so two runs with the same
//! inputs agree byte for byte on `report`.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub report: T,
    pub timing: Timing,
}

impl<T: Serialize> ReportFile<T> {
    pub fn new(command: &str, report: T, wall_seconds: f64) -> Self {
        Self {
            tool: "nerf".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            report,
            timing: Timing { wall_seconds },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}

/// Shortest decimal that parses back to the same `f64`; `inf`, `-inf` and
/// `NaN` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// A table with a header row, written as CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        self.write_to(file)
    }
}
