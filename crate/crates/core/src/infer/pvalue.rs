use crate::error::{JitterError, Result};

use super::SurrogateEnsemble;

/// `(1 + #{i >= 1 : T_i >= T_0}) / (M + 1)` for `values = [T_0, T_1, ..., T_M]`.
pub fn mc_pvalue(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(JitterError::EnsembleTooSmall { need: 1, got: values.len().saturating_sub(1) });
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(JitterError::param("values", "statistic is NaN"));
    }
    let t0 = values[0];
    let hits = values[1..].iter().filter(|&&t| t >= t0).count();
    Ok((1 + hits) as f64 / values.len() as f64)
}

/// Right-tail p-value at one grid point of an ensemble.
pub fn mc_pvalue_ensemble(ens: &SurrogateEnsemble, j: usize) -> Result<f64> {
    if j >= ens.width() {
        return Err(JitterError::param("index", "grid point out of range"));
    }
    mc_pvalue(&ens.column(j))
}
