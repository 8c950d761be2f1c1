use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};

/// Statistic values `c_0, c_1, ..., c_M` over a shared grid; `c_0` is the original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateEnsemble {
    curves: Vec<Vec<f64>>,
}

impl SurrogateEnsemble {
    pub fn new(curves: Vec<Vec<f64>>) -> Result<Self> {
        if curves.len() < 2 {
            return Err(JitterError::EnsembleTooSmall { need: 1, got: curves.len().saturating_sub(1) });
        }
        let width = curves[0].len();
        if width == 0 || curves.iter().any(|c| c.len() != width) {
            return Err(JitterError::RaggedEnsemble);
        }
        Ok(SurrogateEnsemble { curves })
    }

    /// Ensemble of a scalar statistic.
    pub fn from_scalars(values: Vec<f64>) -> Result<Self> {
        Self::new(values.into_iter().map(|v| vec![v]).collect())
    }

    /// Number of surrogates `M`.
    pub fn m(&self) -> usize {
        self.curves.len() - 1
    }

    pub fn width(&self) -> usize {
        self.curves[0].len()
    }

    pub fn original(&self) -> &[f64] {
        &self.curves[0]
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    /// Values `c_0(τ), ..., c_M(τ)` at one grid point.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.curves.iter().map(|c| c[j]).collect()
    }

    /// Surrogate mean `μ(τ)` (original excluded).
    pub fn mean(&self) -> Vec<f64> {
        let m = self.m() as f64;
        (0..self.width())
            .map(|j| self.curves[1..].iter().map(|c| c[j]).sum::<f64>() / m)
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SurrogateEnsemble {
        SurrogateEnsemble { curves: self.curves.iter().map(|c| c.iter().map(|&v| f(v)).collect()).collect() }
    }
}
