use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{AuditSummary, Auditor, INEQUALITY_TOL};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::optim::{init_state, StepRecord, Variant};
use crate::rng::{sample_batch, RngStream};

use super::config::ExperimentConfig;
use super::metrics::{write_summary, MetricsWriter, METRICS_FILE, SUMMARY_FILE};
use super::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    Diverged,
    Completed,
}

/// Final iterates are only reported for problems up to this size.
const SMALL_PROBLEM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub name: String,
    pub problem: String,
    pub optimizer: Variant,
    pub eta: f64,
    pub seed: u64,
    pub status: RunStatus,
    pub initial_loss: f64,
    /// Full-objective loss at the last finite iterate; `None` if not finite.
    pub final_loss: Option<f64>,
    pub final_x: Option<Vec<f64>>,
    pub steps_executed: u64,
    /// Index of the last step that completed with finite values.
    pub last_finite_step: Option<u64>,
    pub divergence: Option<String>,
    pub converge_threshold: f64,
    pub wall_time_secs: f64,
    pub violation_fraction: Option<f64>,
    pub audit: AuditSummary,
}

/// Runs `cfg`, handing every `record_every`-th record to `sink`.
pub fn run_with_sink(
    cfg: &ExperimentConfig,
    mut sink: impl FnMut(&StepRecord) -> Result<()>,
) -> Result<RunSummary> {
    let started = Instant::now();
    let (problem, x0) = cfg.build()?;
    let hyper = cfg.optimizer.hyper();

    let mut rng = RngStream::new(cfg.seed);
    let dataset = problem.dataset_size();
    let draw = |rng: &mut RngStream| -> Result<_> {
        match cfg.batch_size {
            Some(bs) if dataset > 0 => sample_batch(rng, dataset, bs).map(Some),
            _ => Ok(None),
        }
    };

    let mut batch = draw(&mut rng)?;
    let initial_loss = problem.value(&x0, None);
    let mut state = init_state(&problem, x0, hyper, cfg.optimizer.kind, batch.as_ref())?;
    let mut auditor = Auditor::new(&cfg.checkers, hyper.c, INEQUALITY_TOL);
    let mut divergence = None;

    for t in 0..cfg.iterations {
        let next = draw(&mut rng)?;
        match state.step(&problem, batch.as_ref(), next.as_ref()) {
            Ok(out) => {
                auditor.observe(&out);
                if t % cfg.record_every == 0 {
                    sink(&out.record)?;
                }
            }
            Err(Error::Diverged(d)) => {
                divergence = Some(d);
                break;
            }
            Err(e) => return Err(e),
        }
        batch = next;
    }

    let steps = state.steps_taken();
    let final_value = problem.value(state.x(), None);
    let final_loss = final_value.is_finite().then_some(final_value);
    let status = match (&divergence, final_loss) {
        (Some(_), _) | (None, None) => RunStatus::Diverged,
        (None, Some(f)) if f < cfg.converge_threshold => RunStatus::Converged,
        _ => RunStatus::Completed,
    };
    let audit = auditor.finish();
    Ok(RunSummary {
        schema_version: SCHEMA_VERSION,
        name: cfg.display_name(),
        problem: problem.name().to_owned(),
        optimizer: cfg.optimizer.kind,
        eta: cfg.optimizer.eta,
        seed: cfg.seed,
        status,
        initial_loss,
        final_loss,
        final_x: (state.x().dim() <= SMALL_PROBLEM).then(|| state.x().to_vec()),
        steps_executed: steps,
        last_finite_step: steps.checked_sub(1),
        divergence: divergence.map(|d| d.to_string()),
        converge_threshold: cfg.converge_threshold,
        wall_time_secs: started.elapsed().as_secs_f64(),
        violation_fraction: audit.lower_bound_violation_fraction,
        audit,
    })
}

/// Runs `cfg` and keeps the recorded rows in memory.
pub fn run_in_memory(cfg: &ExperimentConfig) -> Result<(RunSummary, Vec<StepRecord>)> {
    let mut records = Vec::new();
    let summary = run_with_sink(cfg, |r| {
        records.push(r.clone());
        Ok(())
    })?;
    Ok((summary, records))
}

/// Runs `cfg`, writing `metrics.csv` and `summary.json` into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut writer = MetricsWriter::create(&out_dir.join(METRICS_FILE))?;
    let summary = run_with_sink(cfg, |r| writer.write(r))?;
    writer.finish()?;
    write_summary(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}
