use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::train::TrialSet;

/// Box width (s).
pub const PSTH_WIDTH: f64 = 0.05;
/// Evaluation grid spacing (s).
pub const PSTH_GRID: f64 = 0.002;

/// Trial-averaged firing rate (Hz) from a 50 ms box, on a 2 ms grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psth {
    pub times: Vec<f64>,
    pub rate: Vec<f64>,
}

/// `rate(t) = (1/K) Σ_k #{spikes s of trial k : t - 25 ms <= s < t + 25 ms} / 0.05`
/// at `t = 2, 4, ...` ms strictly inside the trial.
pub fn psth(ts: &TrialSet, neuron: usize) -> Result<Psth> {
    if neuron >= ts.neurons() {
        return Err(JitterError::param("neuron", "index out of range"));
    }
    let n = crate::train::snapped_floor(ts.trial_length() / PSTH_GRID);
    let times: Vec<f64> = (1..n.max(1)).map(|i| i as f64 * PSTH_GRID).collect();
    let half = PSTH_WIDTH / 2.0;
    let mut counts = vec![0u64; times.len()];
    for train in ts.neuron_trains(neuron) {
        let s = train.times();
        for (c, &t) in counts.iter_mut().zip(&times) {
            let lo = s.partition_point(|&x| x < t - half);
            let hi = s.partition_point(|&x| x < t + half);
            *c += (hi - lo) as u64;
        }
    }
    let scale = 1.0 / (ts.trials() as f64 * PSTH_WIDTH);
    let rate = counts.iter().map(|&c| c as f64 * scale).collect();
    Ok(Psth { times, rate })
}
