use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::train::{SpikeTrain, TrialSet};

/// Lag grid spacing (s).
pub const CCH_STEP: f64 = 0.0004;
/// Half-width of the lag box (s).
pub const CCH_HALF_WIDTH: f64 = 0.001;
/// Lags are `i * CCH_STEP` for `|i| <= CCH_MAX_INDEX`, covering (-0.25, 0.25).
pub const CCH_MAX_INDEX: i64 = 624;

/// Cross-correlation histogram: at lag `τ`, the number of spike pairs with
/// `τ - 1 ms <= y_b - y_a < τ + 1 ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CchCurve {
    pub lags: Vec<f64>,
    pub values: Vec<u64>,
}

impl CchCurve {
    /// The lag-0 value: the number of ±1 ms synchronous pairs.
    pub fn lag0(&self) -> u64 {
        self.values[CCH_MAX_INDEX as usize]
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

fn lag(i: i64) -> f64 {
    i as f64 * CCH_STEP
}

/// CCH between two trains on a common time axis.
pub fn cch_trains(a: &SpikeTrain, b: &SpikeTrain) -> CchCurve {
    let n = (2 * CCH_MAX_INDEX + 1) as usize;
    let mut values = vec![0u64; n];
    let reach = lag(CCH_MAX_INDEX) + CCH_HALF_WIDTH + CCH_STEP;
    let ys = b.times();
    let mut lo = 0;
    for &x in a.times() {
        while lo < ys.len() && ys[lo] < x - reach {
            lo += 1;
        }
        for &y in ys[lo..].iter().take_while(|&&y| y <= x + reach) {
            let d = y - x;
            let i_min = ((d - CCH_HALF_WIDTH) / CCH_STEP).floor() as i64;
            let i_max = ((d + CCH_HALF_WIDTH) / CCH_STEP).floor() as i64 + 1;
            for i in i_min.max(-CCH_MAX_INDEX)..=i_max.min(CCH_MAX_INDEX) {
                let t = lag(i);
                if t - CCH_HALF_WIDTH <= d && d < t + CCH_HALF_WIDTH {
                    values[(i + CCH_MAX_INDEX) as usize] += 1;
                }
            }
        }
    }
    let lags = (-CCH_MAX_INDEX..=CCH_MAX_INDEX).map(lag).collect();
    CchCurve { lags, values }
}

/// CCH of neuron `b` relative to neuron `a`, on the concatenated trials.
pub fn cch(ts: &TrialSet, a: usize, b: usize) -> Result<CchCurve> {
    if a >= ts.neurons() || b >= ts.neurons() {
        return Err(JitterError::param("neuron", "index out of range"));
    }
    Ok(cch_trains(&ts.concatenated(a), &ts.concatenated(b)))
}
