use crate::error::{JitterError, Result};
use crate::train::{SpikeTrain, TrialSet};

/// Number of pairs with `-tol <= y_b - y_a < tol` (the lag-0 box of the CCH
/// when `tol` is 1 ms).
pub fn sync_pairs_trains(a: &SpikeTrain, b: &SpikeTrain, tol: f64) -> u64 {
    let ys = b.times();
    let mut lo = 0;
    let mut count = 0u64;
    for &x in a.times() {
        while lo < ys.len() && ys[lo] - x < -tol {
            lo += 1;
        }
        count += ys[lo..].iter().take_while(|&&y| y - x < tol).count() as u64;
    }
    count
}

/// Synchronous pair count between two neurons on the concatenated trials.
pub fn sync_pairs(ts: &TrialSet, a: usize, b: usize, tol: f64) -> Result<u64> {
    if a >= ts.neurons() || b >= ts.neurons() {
        return Err(JitterError::param("neuron", "index out of range"));
    }
    Ok(sync_pairs_trains(&ts.concatenated(a), &ts.concatenated(b), tol))
}

/// Number of spikes of `jittered` within `tol` (inclusive) of some spike of `reference`.
pub fn sync_participation(jittered: &SpikeTrain, reference: &SpikeTrain, tol: f64) -> u64 {
    let ys = reference.times();
    let mut j = 0;
    let mut count = 0u64;
    for &x in jittered.times() {
        while j < ys.len() && x - ys[j] > tol {
            j += 1;
        }
        if j < ys.len() && ys[j] - x <= tol {
            count += 1;
        }
    }
    count
}

/// [`sync_participation`] summed over trials.
pub fn sync_participation_trials(ts: &TrialSet, jittered: usize, reference: usize, tol: f64) -> Result<u64> {
    if jittered >= ts.neurons() || reference >= ts.neurons() {
        return Err(JitterError::param("neuron", "index out of range"));
    }
    Ok((0..ts.trials())
        .map(|k| sync_participation(ts.train(jittered, k), ts.train(reference, k), tol))
        .sum())
}
