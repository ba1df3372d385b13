use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::runner::{run_experiment, run_in_memory, RunSummary};

/// Numeric config fields a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eta,
    Psi,
    C,
    Iterations,
    BatchSize,
    Seed,
    RecordEvery,
    ConvergeThreshold,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "eta" => Self::Eta,
            "psi" => Self::Psi,
            "c" => Self::C,
            "iterations" => Self::Iterations,
            "batch_size" => Self::BatchSize,
            "seed" => Self::Seed,
            "record_every" => Self::RecordEvery,
            "converge_threshold" => Self::ConvergeThreshold,
            other => {
                return Err(Error::config(format!(
                    "unknown sweep parameter `{other}` (expected eta, psi, c, iterations, batch_size, seed, record_every or converge_threshold)"
                )))
            }
        })
    }
}

/// Comma-separated numbers; an empty or blank string is an empty list.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::config(format!("sweep value `{s}` is not a number"))))
        .collect()
}

fn as_count(param: SweepParam, v: f64) -> Result<u64> {
    if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(Error::config(format!("{param:?} needs a nonnegative integer, got {v}")))
    }
}

/// Copy of `template` with `param` set to `value`.
pub fn apply_param(template: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = template.clone();
    match param {
        SweepParam::Eta => cfg.optimizer.eta = value,
        SweepParam::Psi => cfg.optimizer.psi = value,
        SweepParam::C => cfg.optimizer.c = value,
        SweepParam::Iterations => cfg.iterations = as_count(param, value)?,
        SweepParam::BatchSize => cfg.batch_size = Some(as_count(param, value)? as usize),
        SweepParam::Seed => cfg.seed = as_count(param, value)?,
        SweepParam::RecordEvery => cfg.record_every = as_count(param, value)?,
        SweepParam::ConvergeThreshold => cfg.converge_threshold = value,
    }
    cfg.validate()?;
    Ok(cfg)
}

/// One config per value. Run `i` uses seed `template.seed + i` unless the
/// seed itself is swept.
fn expand(template: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Result<Vec<ExperimentConfig>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut cfg = apply_param(template, param, v)?;
            if param != SweepParam::Seed {
                cfg.seed = template.seed.wrapping_add(i as u64);
            }
            let base = template.display_name();
            cfg.name = Some(format!("{base}-{i}"));
            Ok(cfg)
        })
        .collect()
}

fn parallel<T: Send>(cfgs: &[ExperimentConfig], run: impl Fn(usize, &ExperimentConfig) -> Result<T> + Sync) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfgs.iter().enumerate().map(|(i, cfg)| {
            let run = &run;
            scope.spawn(move || run(i, cfg))
        }).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    results.into_iter().collect()
}

/// Runs every value in parallel; all configs are validated before any run starts.
pub fn sweep_in_memory(template: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Result<Vec<RunSummary>> {
    let cfgs = expand(template, param, values)?;
    parallel(&cfgs, |_, cfg| run_in_memory(cfg).map(|(s, _)| s))
}

/// Like [`sweep_in_memory`], writing run `i` to `out_dir/run_<i>`.
pub fn sweep(template: &ExperimentConfig, param: SweepParam, values: &[f64], out_dir: &Path) -> Result<Vec<(PathBuf, RunSummary)>> {
    let cfgs = expand(template, param, values)?;
    parallel(&cfgs, |i, cfg| {
        let dir = out_dir.join(format!("run_{i}"));
        run_experiment(cfg, &dir).map(|s| (dir, s))
    })
}
