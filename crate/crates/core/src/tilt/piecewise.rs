use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::train::snapped_floor;

/// Per-window constant and bounded-variation linear fits of a sampled rate curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseApprox {
    pub delta: f64,
    pub epsilon: f64,
    /// Window mean per window.
    pub constant: Vec<f64>,
    /// `(value at window start, slope)` per window.
    pub linear: Vec<(f64, f64)>,
}

impl PiecewiseApprox {
    fn window(&self, t: f64) -> usize {
        (snapped_floor(t / self.delta).max(0) as usize).min(self.constant.len().saturating_sub(1))
    }

    pub fn constant_at(&self, t: f64) -> f64 {
        self.constant[self.window(t)]
    }

    pub fn linear_at(&self, t: f64) -> f64 {
        let k = self.window(t);
        let (v0, m) = self.linear[k];
        v0 + m * (t - k as f64 * self.delta)
    }

    /// `max / min` of the linear piece over window `k`.
    pub fn linear_ratio(&self, k: usize) -> f64 {
        let (v0, m) = self.linear[k];
        let v1 = v0 + m * self.delta;
        v0.max(v1) / v0.min(v1)
    }
}

/// Fits each window `[kΔ, (k+1)Δ)` of the samples `(times[i], rate[i])` with
/// its mean and with the least-squares line whose max/min ratio over the
/// window is at most `1 + ε`. When the free fit exceeds the ratio, the
/// constrained optimum lies on the ratio boundary and is solved there exactly.
pub fn piecewise_approx(times: &[f64], rate: &[f64], delta: f64, epsilon: f64) -> Result<PiecewiseApprox> {
    if times.len() != rate.len() || times.is_empty() {
        return Err(JitterError::param("rate", "need matching, non-empty time and rate samples"));
    }
    if !(delta > 0.0) {
        return Err(JitterError::param("delta", "must be positive"));
    }
    if !(epsilon >= 0.0) {
        return Err(JitterError::param("epsilon", "must be >= 0"));
    }
    if rate.iter().any(|&y| !(y > 0.0)) {
        return Err(JitterError::param("rate", "must be positive"));
    }
    if times.iter().any(|&t| !(t >= 0.0)) {
        return Err(JitterError::param("times", "must be >= 0"));
    }
    let n_win = times.iter().map(|&t| snapped_floor(t / delta) as usize).max().unwrap_or(0) + 1;
    let mut groups: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_win];
    for (&t, &y) in times.iter().zip(rate) {
        groups[snapped_floor(t / delta) as usize].push((t, y));
    }
    let mut constant = Vec::with_capacity(n_win);
    let mut linear = Vec::with_capacity(n_win);
    let mut last = rate[0];
    for (k, g) in groups.iter().enumerate() {
        if g.is_empty() {
            // no samples: carry the previous level forward
            constant.push(last);
            linear.push((last, 0.0));
            continue;
        }
        if g.iter().all(|p| p.1 == g[0].1) {
            constant.push(g[0].1);
            linear.push((g[0].1, 0.0));
            last = g[0].1;
            continue;
        }
        let n = g.len() as f64;
        let xbar = g.iter().map(|p| p.0).sum::<f64>() / n;
        let ybar = g.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = g.iter().map(|p| (p.0 - xbar).powi(2)).sum();
        let sxy: f64 = g.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let w0 = k as f64 * delta;
        let k0 = xbar - w0;
        let k1 = w0 + delta - xbar;
        let (mut c, mut m) = (ybar, slope);
        let end_lo = c + m * (w0 - xbar);
        let end_hi = c + m * (w0 + delta - xbar);
        if end_lo.max(end_hi) > (1.0 + epsilon) * end_lo.min(end_hi) {
            // boundary: m = s ε c / kk with kk chosen by the slope sign
            let (s, kk) = if slope > 0.0 { (1.0, k1 + (1.0 + epsilon) * k0) } else { (-1.0, k0 + (1.0 + epsilon) * k1) };
            let beta = s * epsilon / kk;
            c = (n * ybar + beta * sxx * slope) / (n + beta * beta * sxx);
            m = beta * c;
        }
        constant.push(ybar);
        linear.push((c + m * (w0 - xbar), m));
        last = ybar;
    }
    Ok(PiecewiseApprox { delta, epsilon, constant, linear })
}
