//! Metrics CSV and summary JSON files.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::optim::{StepRecord, METRICS_HEADER};

use super::runner::RunSummary;
use super::SCHEMA_VERSION;

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Streams [`StepRecord`]s as CSV rows under the fixed header.
pub struct MetricsWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        inner.write_record(METRICS_HEADER)?;
        Ok(Self { path: path.to_owned(), inner })
    }

    pub fn write(&mut self, record: &StepRecord) -> Result<()> {
        self.inner.serialize(record)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn read_metrics(path: &Path) -> Result<Vec<StepRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != METRICS_HEADER {
        return Err(Error::Format {
            path: path.to_owned(),
            message: format!(
                "metrics schema mismatch: expected version {SCHEMA_VERSION} header {}, found {}",
                METRICS_HEADER.join(","),
                header.join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for row in reader.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Format { path: path.to_owned(), message: e.to_string() })?;
    let version = value.get("schema_version").and_then(|v| v.as_u64());
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(Error::Format {
            path: path.to_owned(),
            message: format!("unsupported summary schema version {version:?} (expected {SCHEMA_VERSION})"),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::Format { path: path.to_owned(), message: e.to_string() })
}
