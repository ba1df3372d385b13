use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Divergence, Error, Result};

/// Flat parameter state `x`. Every entry is finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("parameter vector must be non-empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(format!("parameter {} is not finite ({})", i, values[i])));
        }
        Ok(Self(values))
    }

    /// Wraps an iterate produced by an update rule; non-finite entries are divergence.
    pub(crate) fn from_update(values: Vec<f64>) -> Result<Self, Divergence> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self(values))
        } else {
            Err(Divergence::new("iterate"))
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for ParamVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        ParamVector::new(values).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(ParamVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ParamVector::new(vec![f64::INFINITY]).is_err());
        assert!(ParamVector::new(vec![]).is_err());
        assert_eq!(ParamVector::new(vec![3.0, 4.0]).unwrap().norm_sq(), 25.0);
    }

    #[test]
    fn deserialize_validates() {
        let ok: ParamVector = serde_json::from_str("[1.0, -2.5]").unwrap();
        assert_eq!(ok.dim(), 2);
        assert!(serde_json::from_str::<ParamVector>("[]").is_err());
    }
}
