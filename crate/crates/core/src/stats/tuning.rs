use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::train::TrialSet;

/// Kernel support, in bandwidths. Beyond this the Gaussian is below 1e-14.
pub const KDE_CUTOFF: f64 = 8.0;
/// Grid points where the direction density falls below this are masked.
pub const TUNING_DENSITY_FLOOR: f64 = 1e-8;

fn wrap_angle(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

/// Gaussian kernel density estimate of angles wrapped onto `[-π, π)`,
/// evaluated on `grid_size` equally spaced points starting at `-π`.
pub fn wrapped_kde(values: &[f64], sigma: f64, grid_size: usize) -> Vec<f64> {
    let h = TAU / grid_size as f64;
    let reach = (KDE_CUTOFF * sigma / h).ceil() as i64;
    let norm = 1.0 / (values.len() as f64 * sigma * (TAU).sqrt());
    let g = grid_size as i64;
    let mut out = vec![0.0; grid_size];
    for &u in values {
        let u = wrap_angle(u);
        let c = ((u + PI) / h).floor() as i64;
        for j in c - reach..=c + reach + 1 {
            let jj = j.rem_euclid(g) as usize;
            let d = wrap_angle(-PI + jj as f64 * h - u);
            let z = d / sigma;
            if z.abs() <= KDE_CUTOFF {
                out[jj] += (-0.5 * z * z).exp();
            }
        }
    }
    out.iter_mut().for_each(|v| *v *= norm);
    out
}

/// Likelihood-ratio tuning curve `θ(d) = P(D = d | S = 1) / P(D = d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningCurve {
    pub directions: Vec<f64>,
    pub sigma: f64,
    /// Density of all directions.
    pub p_all: Vec<f64>,
    /// Density of the directions at event bins.
    pub p_event: Vec<f64>,
    /// Ratio; NaN where masked.
    pub theta: Vec<f64>,
    /// True where `p_all` is below [`TUNING_DENSITY_FLOOR`].
    pub masked: Vec<bool>,
    pub n_samples: usize,
    pub n_events: usize,
}

/// Estimates the tuning curve from a direction series and a matching 0/1 event
/// series, with wrapped Gaussian kernels of bandwidth `sigma` (radians).
pub fn lr_tuning_curve(directions: &[f64], events: &[bool], sigma: f64, grid_size: usize) -> Result<TuningCurve> {
    if directions.is_empty() {
        return Err(JitterError::param("directions", "series is empty"));
    }
    if directions.len() != events.len() {
        return Err(JitterError::param("events", "length differs from the direction series"));
    }
    if !(sigma > 0.0) || grid_size == 0 {
        return Err(JitterError::param("sigma", "bandwidth and grid size must be positive"));
    }
    let selected: Vec<f64> = directions.iter().zip(events).filter(|(_, &s)| s).map(|(&d, _)| d).collect();
    if selected.is_empty() {
        return Err(JitterError::param("events", "no events"));
    }
    let p_all = wrapped_kde(directions, sigma, grid_size);
    let p_event = wrapped_kde(&selected, sigma, grid_size);
    let masked: Vec<bool> = p_all.iter().map(|&p| p < TUNING_DENSITY_FLOOR).collect();
    let theta = p_event
        .iter()
        .zip(&p_all)
        .zip(&masked)
        .map(|((&e, &a), &m)| if m { f64::NAN } else { e / a })
        .collect();
    let h = TAU / grid_size as f64;
    Ok(TuningCurve {
        directions: (0..grid_size).map(|j| -PI + j as f64 * h).collect(),
        sigma,
        p_all,
        p_event,
        theta,
        masked,
        n_samples: directions.len(),
        n_events: selected.len(),
    })
}

/// `S(t)` on bins of width `bin` over the concatenated trials: 1 when neuron
/// `i` spikes in bin `t` within `tol` of some spike of neuron `j`.
pub fn event_process(ts: &TrialSet, i: usize, j: usize, bin: f64, tol: f64) -> Result<Vec<bool>> {
    if i >= ts.neurons() || j >= ts.neurons() {
        return Err(JitterError::param("neuron", "index out of range"));
    }
    if !(bin > 0.0) {
        return Err(JitterError::param("bin", "must be positive"));
    }
    let a = ts.concatenated(i);
    let b = ts.concatenated(j);
    let n = crate::train::snapped_floor(a.duration() / bin).max(0) as usize;
    let mut s = vec![false; n];
    let ys = b.times();
    let mut lo = 0;
    for &x in a.times() {
        while lo < ys.len() && x - ys[lo] > tol {
            lo += 1;
        }
        if lo < ys.len() && ys[lo] - x <= tol {
            let k = crate::train::snapped_floor(x / bin);
            if k >= 0 && (k as usize) < n {
                s[k as usize] = true;
            }
        }
    }
    Ok(s)
}

/// Preprocessing of hand positions into movement directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    /// Bin width of the position series (s).
    pub bin: f64,
    /// Standard deviation of the Gaussian smoother (s).
    pub smooth_sd: f64,
    /// Positions are read this far ahead of the neural bin (s).
    pub shift: f64,
}

impl Default for Kinematics {
    fn default() -> Self {
        Kinematics { bin: 0.001, smooth_sd: 0.025, shift: 0.1 }
    }
}

fn gaussian_smooth(x: &[f64], sd_bins: f64) -> Vec<f64> {
    if sd_bins <= 0.0 {
        return x.to_vec();
    }
    let reach = (4.0 * sd_bins).ceil() as i64;
    let w: Vec<f64> = (-reach..=reach).map(|k| (-0.5 * (k as f64 / sd_bins).powi(2)).exp()).collect();
    let n = x.len() as i64;
    (0..n)
        .map(|t| {
            let (mut acc, mut tot) = (0.0, 0.0);
            for (k, wk) in (-reach..=reach).zip(&w) {
                let s = t + k;
                if (0..n).contains(&s) {
                    acc += wk * x[s as usize];
                    tot += wk;
                }
            }
            acc / tot
        })
        .collect()
}

/// Smooths the positions, shifts them back by `shift` and returns the angle
/// of the central-difference velocity for each remaining bin (one-sided at the
/// ends). Output bin `t` pairs with neural bin `t`.
pub fn movement_directions(x: &[f64], y: &[f64], kin: &Kinematics) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(JitterError::param("positions", "x and y lengths differ"));
    }
    let shift = crate::train::snapped_floor(kin.shift / kin.bin).max(0) as usize;
    if x.len() < shift + 2 {
        return Err(JitterError::param("positions", "series shorter than the shift"));
    }
    let sd = kin.smooth_sd / kin.bin;
    let xs = gaussian_smooth(x, sd);
    let ys = gaussian_smooth(y, sd);
    let (xs, ys) = (&xs[shift..], &ys[shift..]);
    let n = xs.len();
    Ok((0..n)
        .map(|t| {
            let (a, b) = (t.saturating_sub(1), (t + 1).min(n - 1));
            wrap_angle((ys[b] - ys[a]).atan2(xs[b] - xs[a]))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!(wrap_angle(-PI) == -PI);
    }
}
