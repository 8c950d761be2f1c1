use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};

use super::SurrogateEnsemble;

/// Smallest `M` for which the 2.5% / 97.5% order statistics are distinct from
/// the sample extremes' neighbours in a meaningful way.
pub const MIN_BAND_SURROGATES: usize = 39;

/// Slack, in standardized units, below which a value counts as on the band edge
/// (inside). The band route uses the same slack scaled by `s(τ)`.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// 0-based order-statistic indices `(⌊0.025 M⌋, ⌈0.975 M⌉)` among `M + 1` sorted values.
pub fn band_indices(m: usize) -> (usize, usize) {
    (25 * m / 1000, (975 * m).div_ceil(1000))
}

fn check_size(ens: &SurrogateEnsemble) -> Result<()> {
    if ens.m() < MIN_BAND_SURROGATES {
        return Err(JitterError::EnsembleTooSmall { need: MIN_BAND_SURROGATES, got: ens.m() });
    }
    Ok(())
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Pointwise acceptance band and surrogate mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBands {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub mu: Vec<f64>,
}

impl PointwiseBands {
    /// Grid points where the original leaves `[a, b]`.
    pub fn exits(&self, original: &[f64]) -> Vec<bool> {
        original.iter().zip(self.a.iter().zip(&self.b)).map(|(&c, (&a, &b))| c < a || c > b).collect()
    }
}

/// `a(τ) = c_(⌊0.025M⌋)(τ)` and `b(τ) = c_(⌈0.975M⌉)(τ)` over the sorted values
/// including the original; `μ(τ)` is the surrogate mean.
pub fn pointwise_bands(ens: &SurrogateEnsemble) -> Result<PointwiseBands> {
    check_size(ens)?;
    let (ia, ib) = band_indices(ens.m());
    let mut a = Vec::with_capacity(ens.width());
    let mut b = Vec::with_capacity(ens.width());
    for j in 0..ens.width() {
        let col = sorted(ens.column(j));
        a.push(col[ia]);
        b.push(col[ib]);
    }
    Ok(PointwiseBands { a, b, mu: ens.mean() })
}

/// Simultaneous bands from robustly standardized extremes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimultaneousBands {
    /// Mean of the sorted values without the two extremes.
    pub nu: Vec<f64>,
    /// Standard deviation of the same values (divisor `M - 2`).
    pub s: Vec<f64>,
    pub a_star: Vec<f64>,
    pub b_star: Vec<f64>,
    /// Grid points with `s(τ) = 0` or non-finite values; left out of the
    /// extremes, with the band collapsed onto `ν(τ)`.
    pub degenerate: Vec<bool>,
    /// `c⁻_(⌊0.025M⌋)` and `c⁺_(⌈0.975M⌉)`.
    pub lower_threshold: f64,
    pub upper_threshold: f64,
    /// `min_τ c*_0(τ)` and `max_τ c*_0(τ)`.
    pub original_min: f64,
    pub original_max: f64,
    /// Decision from the standardized extremes: `(lower, upper)`.
    pub threshold_reject: (bool, bool),
    /// Decision from the original leaving `[a*, b*]`: `(lower, upper)`.
    pub band_reject: (bool, bool),
}

impl SimultaneousBands {
    pub fn reject_lower(&self) -> bool {
        self.band_reject.0
    }

    pub fn reject_upper(&self) -> bool {
        self.band_reject.1
    }

    pub fn reject(&self) -> bool {
        self.band_reject.0 || self.band_reject.1
    }

    /// True when both decision routes agree.
    pub fn routes_agree(&self) -> bool {
        self.threshold_reject == self.band_reject
    }

    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

pub fn simultaneous_bands(ens: &SurrogateEnsemble) -> Result<SimultaneousBands> {
    check_size(ens)?;
    let m = ens.m();
    let width = ens.width();
    let mut nu = Vec::with_capacity(width);
    let mut s = Vec::with_capacity(width);
    let mut degenerate = Vec::with_capacity(width);
    for j in 0..width {
        let col = sorted(ens.column(j));
        let inner = &col[1..m];
        let mean = inner.iter().sum::<f64>() / (m - 1) as f64;
        let var = inner.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 2) as f64;
        let sd = var.sqrt();
        degenerate.push(!(sd > 0.0 && sd.is_finite() && col.iter().all(|v| v.is_finite())));
        nu.push(mean);
        s.push(sd);
    }
    // standardized extremes of every curve over the non-degenerate grid points
    let extremes: Vec<(f64, f64)> = ens
        .curves()
        .iter()
        .map(|c| {
            (0..width).filter(|&j| !degenerate[j]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), j| {
                let z = (c[j] - nu[j]) / s[j];
                (lo.min(z), hi.max(z))
            })
        })
        .collect();
    let (ia, ib) = band_indices(m);
    let mins = sorted(extremes.iter().map(|e| e.0).collect());
    let maxs = sorted(extremes.iter().map(|e| e.1).collect());
    let (lower_threshold, upper_threshold) = (mins[ia], maxs[ib]);
    let (original_min, original_max) = extremes[0];
    let any_valid = degenerate.iter().any(|&d| !d);
    let threshold_reject = if any_valid {
        (original_min < lower_threshold - TIE_TOLERANCE, original_max > upper_threshold + TIE_TOLERANCE)
    } else {
        (false, false)
    };
    let mut a_star = Vec::with_capacity(width);
    let mut b_star = Vec::with_capacity(width);
    for j in 0..width {
        if degenerate[j] {
            a_star.push(nu[j]);
            b_star.push(nu[j]);
        } else {
            a_star.push(lower_threshold * s[j] + nu[j]);
            b_star.push(upper_threshold * s[j] + nu[j]);
        }
    }
    let c0 = ens.original();
    let band_reject = (0..width).filter(|&j| !degenerate[j]).fold((false, false), |(lo, hi), j| {
        let slack = TIE_TOLERANCE * s[j];
        (lo || c0[j] < a_star[j] - slack, hi || c0[j] > b_star[j] + slack)
    });
    Ok(SimultaneousBands {
        nu,
        s,
        a_star,
        b_star,
        degenerate,
        lower_threshold,
        upper_threshold,
        original_min,
        original_max,
        threshold_reject,
        band_reject,
    })
}

/// Simultaneous bands computed on `ln c` and mapped back with `exp`; for
/// positive ratio-valued statistics. Non-positive values make their grid point
/// degenerate.
pub fn simultaneous_bands_log(ens: &SurrogateEnsemble) -> Result<SimultaneousBands> {
    let mut out = simultaneous_bands(&ens.map(|v| if v > 0.0 { v.ln() } else { f64::NAN }))?;
    for v in out.a_star.iter_mut().chain(out.b_star.iter_mut()).chain(out.nu.iter_mut()) {
        *v = v.exp();
    }
    Ok(out)
}

/// Pointwise and simultaneous bands together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    pub pointwise: PointwiseBands,
    pub simultaneous: SimultaneousBands,
}

impl BandSet {
    pub fn new(ens: &SurrogateEnsemble) -> Result<Self> {
        Ok(BandSet { pointwise: pointwise_bands(ens)?, simultaneous: simultaneous_bands(ens)? })
    }
}

/// Original and band edges with the surrogate mean subtracted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corrected {
    pub curve: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub a_star: Vec<f64>,
    pub b_star: Vec<f64>,
}

pub fn corrected_curve(ens: &SurrogateEnsemble, bands: &BandSet) -> Corrected {
    let mu = &bands.pointwise.mu;
    let sub = |v: &[f64]| v.iter().zip(mu).map(|(x, m)| x - m).collect::<Vec<f64>>();
    Corrected {
        curve: sub(ens.original()),
        a: sub(&bands.pointwise.a),
        b: sub(&bands.pointwise.b),
        a_star: sub(&bands.simultaneous.a_star),
        b_star: sub(&bands.simultaneous.b_star),
    }
}
