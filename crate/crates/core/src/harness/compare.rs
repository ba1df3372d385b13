use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::metrics::{read_metrics, read_summary, METRICS_FILE, SUMMARY_FILE};
use super::runner::RunStatus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub path: PathBuf,
    pub name: String,
    pub status: RunStatus,
    pub final_loss: Option<f64>,
    /// `final_loss - baseline.final_loss`, when both are finite.
    pub final_loss_delta: Option<f64>,
    /// First recorded step whose batch loss is below the run's threshold.
    pub steps_to_threshold: Option<u64>,
    pub steps_to_threshold_delta: Option<i64>,
    pub steps_executed: u64,
    pub violation_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: CompareRow,
    pub runs: Vec<CompareRow>,
}

/// A run directory, or the summary/metrics file inside one.
fn run_dir(path: &Path) -> Result<PathBuf> {
    if !path.exists() {
        return Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "run not found")));
    }
    if path.is_dir() {
        Ok(path.to_owned())
    } else {
        Ok(path.parent().map(Path::to_owned).unwrap_or_default())
    }
}

fn load_row(path: &Path) -> Result<CompareRow> {
    let dir = run_dir(path)?;
    let summary = read_summary(&dir.join(SUMMARY_FILE))?;
    let records = read_metrics(&dir.join(METRICS_FILE))?;
    let steps_to_threshold = records.iter().find(|r| r.batch_loss < summary.converge_threshold).map(|r| r.step);
    Ok(CompareRow {
        path: path.to_owned(),
        name: summary.name,
        status: summary.status,
        final_loss: summary.final_loss,
        final_loss_delta: None,
        steps_to_threshold,
        steps_to_threshold_delta: None,
        steps_executed: summary.steps_executed,
        violation_fraction: summary.violation_fraction,
    })
}

pub fn compare_runs(paths: &[PathBuf], baseline: &Path) -> Result<Comparison> {
    let baseline = load_row(baseline)?;
    let mut runs = Vec::with_capacity(paths.len());
    for p in paths {
        let mut row = load_row(p)?;
        row.final_loss_delta = match (row.final_loss, baseline.final_loss) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        row.steps_to_threshold_delta = match (row.steps_to_threshold, baseline.steps_to_threshold) {
            (Some(a), Some(b)) => Some(a as i64 - b as i64),
            _ => None,
        };
        runs.push(row);
    }
    Ok(Comparison { baseline, runs })
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| v.to_string())
}

fn opt_e(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.4e}"))
}

impl Comparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }

    /// Fixed-width table, baseline first.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<34} {:<10} {:>12} {:>12} {:>10} {:>8} {:>10}",
            "run", "status", "final_loss", "delta", "to_thresh", "delta", "lb_viol"
        );
        for (row, is_base) in std::iter::once((&self.baseline, true)).chain(self.runs.iter().map(|r| (r, false))) {
            let name = if is_base { format!("{} (baseline)", row.name) } else { row.name.clone() };
            let status = format!("{:?}", row.status).to_lowercase();
            let _ = writeln!(
                out,
                "{:<34} {:<10} {:>12} {:>12} {:>10} {:>8} {:>10}",
                name,
                status,
                opt_e(row.final_loss),
                opt_e(row.final_loss_delta),
                opt(row.steps_to_threshold),
                opt(row.steps_to_threshold_delta),
                row.violation_fraction.map_or_else(|| "-".to_owned(), |v| format!("{:.2}%", 100.0 * v)),
            );
        }
        out
    }
}
