use rand::Rng;

use crate::error::{JitterError, Result};
use crate::train::SpikeTrain;

/// Moves each spike uniformly within `[t - Δ/2, t + Δ/2]`, reflecting at the
/// recording edges.
///
/// The windows follow the data, so original and surrogates are not
/// exchangeable and ranks against these surrogates are not valid p-values.
pub fn basic_jitter<R: Rng + ?Sized>(train: &SpikeTrain, delta: f64, rng: &mut R) -> Result<SpikeTrain> {
    if train.is_discrete() {
        return Err(JitterError::RequiresContinuous);
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(JitterError::param("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(train.clone());
    }
    let len = train.duration();
    let below_end = len - len * f64::EPSILON;
    let times = train
        .times()
        .iter()
        .map(|&t| {
            let x = t + delta * (rng.random::<f64>() - 0.5);
            let x = if x < 0.0 {
                -x
            } else if x >= len {
                2.0 * len - x
            } else {
                x
            };
            x.clamp(0.0, below_end)
        })
        .collect();
    SpikeTrain::from_unsorted(times, 0.0, len)
}
