use serde::{Deserialize, Serialize};

use crate::objective::{Batch, Objective};

/// `scale * ((a - x)^2 + b (y - x^2)^2)`, minimum 0 at `(a, a^2)`.
///
/// `scale` is an overall multiplier on the objective (default 1). With
/// `c = 0` the SGD and VAV iterations on a scaled objective are identical
/// to running the unscaled one with `scale * eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Rosenbrock {
    pub a: f64,
    pub b: f64,
    pub scale: f64,
}

impl Default for Rosenbrock {
    fn default() -> Self {
        Self { a: 1.0, b: 100.0, scale: 1.0 }
    }
}

impl Rosenbrock {
    pub fn scaled(scale: f64) -> Self {
        Self { scale, ..Self::default() }
    }
}

/// Value and gradient of the standard (`a = 1`, `b = 100`) valley.
pub fn rosenbrock_value_grad(x: [f64; 2]) -> (f64, [f64; 2]) {
    let (f, g) = Rosenbrock::default().eval(x[0], x[1]);
    (f, g)
}

impl Rosenbrock {
    fn eval(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let dx = self.a - x;
        let valley = y - x * x;
        let f = dx * dx + self.b * valley * valley;
        let gx = -2.0 * dx - 4.0 * self.b * x * valley;
        let gy = 2.0 * self.b * valley;
        (self.scale * f, [self.scale * gx, self.scale * gy])
    }
}

impl Objective for Rosenbrock {
    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64], _batch: Option<&Batch>) -> f64 {
        self.eval(x[0], x[1]).0
    }

    fn value_grad(&self, x: &[f64], _batch: Option<&Batch>) -> (f64, Vec<f64>) {
        let (f, g) = self.eval(x[0], x[1]);
        (f, g.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(rosenbrock_value_grad([1.0, 1.0]), (0.0, [0.0, 0.0]));
        let (f, g) = rosenbrock_value_grad([-2.0, -2.0]);
        assert_eq!(f, 3609.0);
        assert_eq!(g, [-4806.0, -1200.0]);
    }

    #[test]
    fn scale_multiplies_everything() {
        let r = Rosenbrock::scaled(0.5);
        let (f, g) = r.value_grad(&[-2.0, -2.0], None);
        assert_eq!(f, 1804.5);
        assert_eq!(g, vec![-2403.0, -600.0]);
    }
}
