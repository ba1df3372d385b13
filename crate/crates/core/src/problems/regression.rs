use std::f64::consts::PI;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Batch, Objective};
use crate::problems::MlpModel;
use crate::rng::RngStream;

/// Mean-squared-error regression of an [`MlpModel`] on a fixed dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    model: MlpModel,
}

pub fn sine_target(x: f64) -> f64 {
    (PI * x).sin()
}

/// `num_points` inputs uniform on `[-1, 1]` with targets `sin(pi x) + N(0, noise_sd^2)`,
/// fit by a `1 -> 16 -> 16 -> 1` tanh network.
pub fn make_sine_regression(num_points: usize, noise_sd: f64, seed: u64) -> Result<RegressionProblem> {
    if num_points < 2 {
        return Err(Error::config("sine regression needs at least 2 points"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::config(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    let mut rng = RngStream::with_stream(seed, DATA_STREAM);
    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::config(e.to_string()))?;
    let mut inputs = Vec::with_capacity(num_points);
    let mut targets = Vec::with_capacity(num_points);
    for _ in 0..num_points {
        let x = rng.uniform(-1.0, 1.0);
        let eps = if noise_sd > 0.0 { noise.sample(rng.inner()) } else { 0.0 };
        inputs.push(vec![x]);
        targets.push(sine_target(x) + eps);
    }
    RegressionProblem::new(inputs, targets, MlpModel::new(DEFAULT_WIDTHS.to_vec())?)
}

pub(crate) const DEFAULT_WIDTHS: [usize; 4] = [1, 16, 16, 1];
const DATA_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;

#[derive(Serialize, Deserialize)]
struct Row {
    x: f64,
    y: f64,
}

impl RegressionProblem {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>, model: MlpModel) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::config("regression needs equally many (non-zero) inputs and targets"));
        }
        if model.output_dim() != 1 {
            return Err(Error::config("regression model must have a single output"));
        }
        if inputs.iter().any(|row| row.len() != model.input_dim()) {
            return Err(Error::config("input rows do not match the model input width"));
        }
        if inputs.iter().flatten().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::config("dataset contains non-finite values"));
        }
        Ok(Self { inputs, targets, model })
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Seeded initial parameters.
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        self.model.init_params(&mut RngStream::with_stream(seed, INIT_STREAM))
    }

    /// Loss and gradient over the selected rows (all rows when `batch` is `None`).
    pub fn mlp_forward_backward(&self, params: &[f64], batch: Option<&Batch>) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.model.num_params()];
        let rows: Box<dyn Iterator<Item = usize>> = match batch {
            Some(b) => Box::new(b.indices().iter().copied()),
            None => Box::new(0..self.inputs.len()),
        };
        let n = batch.map_or(self.inputs.len(), Batch::size);
        let weight = 1.0 / n as f64;
        let mut loss = 0.0;
        for i in rows {
            loss += self.model.accumulate(params, &self.inputs[i], &self.targets[i..=i], weight, &mut grad);
        }
        (loss, grad)
    }

    /// Export as `x,y` CSV. Only single-input datasets are supported.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if self.model.input_dim() != 1 {
            return Err(Error::config("CSV export supports one input column"));
        }
        let mut w = csv::Writer::from_path(path)?;
        for (x, &y) in self.inputs.iter().zip(&self.targets) {
            w.serialize(Row { x: x[0], y })?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path, model: MlpModel) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y"] {
            return Err(Error::Format {
                path: path.to_owned(),
                message: format!("expected header x,y, found {}", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for row in r.deserialize() {
            let row: Row = row?;
            inputs.push(vec![row.x]);
            targets.push(row.y);
        }
        Self::new(inputs, targets, model)
    }
}

impl Objective for RegressionProblem {
    fn name(&self) -> &str {
        "sine_regression"
    }

    fn dim(&self) -> usize {
        self.model.num_params()
    }

    fn dataset_size(&self) -> usize {
        self.inputs.len()
    }

    fn value(&self, x: &[f64], batch: Option<&Batch>) -> f64 {
        let sq = |i: usize| {
            let e = self.model.forward(x, &self.inputs[i])[0] - self.targets[i];
            e * e
        };
        match batch {
            Some(b) => b.indices().iter().map(|&i| sq(i)).sum::<f64>() / b.size() as f64,
            None => (0..self.inputs.len()).map(sq).sum::<f64>() / self.inputs.len() as f64,
        }
    }

    fn value_grad(&self, x: &[f64], batch: Option<&Batch>) -> (f64, Vec<f64>) {
        self.mlp_forward_backward(x, batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_targets_follow_sine() {
        assert_eq!(sine_target(0.0), 0.0);
        assert!((sine_target(0.5) - 1.0).abs() < 1e-15);
        let p = make_sine_regression(64, 0.0, 9).unwrap();
        for (x, y) in p.inputs().iter().zip(p.targets()) {
            assert!((-1.0..=1.0).contains(&x[0]));
            assert_eq!(*y, sine_target(x[0]));
        }
    }

    #[test]
    fn dataset_is_seeded() {
        let a = make_sine_regression(32, 0.1, 4).unwrap();
        let b = make_sine_regression(32, 0.1, 4).unwrap();
        let c = make_sine_regression(32, 0.1, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(make_sine_regression(1, 0.1, 4).is_err());
    }

    #[test]
    fn zero_network_outputs_nothing_but_the_last_bias() {
        let p = make_sine_regression(8, 0.0, 1).unwrap();
        let zero_targets = RegressionProblem::new(p.inputs().to_vec(), vec![0.0; 8], p.model().clone()).unwrap();
        let mut params = vec![0.0; zero_targets.dim()];
        *params.last_mut().unwrap() = 0.3;
        let loss = zero_targets.value(&params, None);
        assert!((loss - 0.09).abs() < 1e-15);
        params.fill(0.0);
        assert_eq!(zero_targets.value(&params, None), 0.0);
    }

    #[test]
    fn batch_loss_is_mean_of_row_losses() {
        let p = make_sine_regression(20, 0.05, 2).unwrap();
        let params = p.init_params(3);
        let rows = [1usize, 4, 9];
        let per_row: Vec<f64> = rows
            .iter()
            .map(|&i| p.value(&params, Some(&Batch::new(vec![i], 20).unwrap())))
            .collect();
        let batch = Batch::new(rows.to_vec(), 20).unwrap();
        let mean = per_row.iter().sum::<f64>() / 3.0;
        assert!((p.value(&params, Some(&batch)) - mean).abs() < 1e-14);
        // fused and value-only paths agree
        assert!((p.value_grad(&params, Some(&batch)).0 - mean).abs() < 1e-14);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let p = make_sine_regression(16, 0.1, 8).unwrap();
        p.write_csv(&path).unwrap();
        let q = RegressionProblem::read_csv(&path, p.model().clone()).unwrap();
        assert_eq!(p, q);

        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(RegressionProblem::read_csv(&path, p.model().clone()), Err(Error::Format { .. })));
    }
}
