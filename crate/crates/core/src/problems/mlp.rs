//! Fully connected tanh network with hand-written reverse pass.
//!
//! Parameters are flattened layer by layer; within a layer the weight matrix
//! (row-major, `out x in`) comes first, then the bias vector. Hidden layers
//! use tanh, the output layer is linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpModel {
    widths: Vec<usize>,
}

impl MlpModel {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::config(format!("invalid layer widths {widths:?}")));
        }
        Ok(Self { widths })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn layers(&self) -> impl Iterator<Item = Layer> + '_ {
        let mut offset = 0;
        self.widths.windows(2).map(move |w| {
            let layer = Layer { fan_in: w[0], fan_out: w[1], offset };
            offset += w[0] * w[1] + w[1];
            layer
        })
    }

    /// Uniform in `±1/sqrt(fan_in)` for weights and biases of each layer.
    pub fn init_params(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut params = Vec::with_capacity(self.num_params());
        for layer in self.layers() {
            let bound = 1.0 / (layer.fan_in as f64).sqrt();
            for _ in 0..layer.fan_in * layer.fan_out + layer.fan_out {
                params.push(rng.uniform(-bound, bound));
            }
        }
        params
    }

    /// Activations of every layer; the first entry is the input.
    fn forward_trace(&self, params: &[f64], input: &[f64]) -> Vec<Vec<f64>> {
        let n_layers = self.widths.len() - 1;
        let mut acts = Vec::with_capacity(n_layers + 1);
        acts.push(input.to_vec());
        for (l, layer) in self.layers().enumerate() {
            let prev = &acts[l];
            let (w, b) = layer.split(params);
            let mut out: Vec<f64> = (0..layer.fan_out)
                .map(|o| b[o] + w[o * layer.fan_in..(o + 1) * layer.fan_in].iter().zip(prev).map(|(a, c)| a * c).sum::<f64>())
                .collect();
            if l + 1 < n_layers {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> Vec<f64> {
        self.forward_trace(params, input).pop().unwrap()
    }

    /// Adds `d(weight * ||out - target||^2)/d params` into `grad` and
    /// returns the weighted squared error.
    pub(crate) fn accumulate(
        &self,
        params: &[f64],
        input: &[f64],
        target: &[f64],
        weight: f64,
        grad: &mut [f64],
    ) -> f64 {
        let acts = self.forward_trace(params, input);
        let out = acts.last().unwrap();
        let mut loss = 0.0;
        let mut delta: Vec<f64> = out
            .iter()
            .zip(target)
            .map(|(y, t)| {
                let e = y - t;
                loss += e * e;
                2.0 * weight * e
            })
            .collect();
        let layers: Vec<Layer> = self.layers().collect();
        for (l, layer) in layers.iter().enumerate().rev() {
            let prev = &acts[l];
            let w_start = layer.offset;
            let b_start = w_start + layer.fan_in * layer.fan_out;
            for o in 0..layer.fan_out {
                let d = delta[o];
                grad[b_start + o] += d;
                let row = w_start + o * layer.fan_in;
                for i in 0..layer.fan_in {
                    grad[row + i] += d * prev[i];
                }
            }
            if l == 0 {
                break;
            }
            // back through W and the tanh of the previous layer
            let mut next = vec![0.0; layer.fan_in];
            for o in 0..layer.fan_out {
                let row = w_start + o * layer.fan_in;
                for i in 0..layer.fan_in {
                    next[i] += params[row + i] * delta[o];
                }
            }
            for (n, a) in next.iter_mut().zip(prev) {
                *n *= 1.0 - a * a;
            }
            delta = next;
        }
        weight * loss
    }
}

struct Layer {
    fan_in: usize,
    fan_out: usize,
    offset: usize,
}

impl Layer {
    fn split<'a>(&self, params: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        let w_end = self.offset + self.fan_in * self.fan_out;
        (&params[self.offset..w_end], &params[w_end..w_end + self.fan_out])
    }
}
