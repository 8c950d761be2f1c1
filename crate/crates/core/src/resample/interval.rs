use rand::seq::index;
use rand::Rng;

use crate::error::{JitterError, Result};
use crate::train::SpikeTrain;
use crate::window::{Slot, WindowPartition};

/// Uniform relocation of `u ∈ [0, 1)` into window `k`, redrawn in the
/// (measure-zero) event that rounding lands it outside the window.
pub(crate) fn place_in_window<R: Rng + ?Sized>(
    part: &WindowPartition,
    k: usize,
    rng: &mut R,
    quantile: impl Fn(f64) -> f64,
) -> f64 {
    loop {
        let t = part.window_start(k) + part.delta() * quantile(rng.random::<f64>());
        if part.slot(t) == Slot::Window(k) {
            return t;
        }
    }
}

/// Moves every spike to a uniform position inside its own window of `part`.
/// Spikes outside the full windows stay where they are.
pub fn interval_jitter_in<R: Rng + ?Sized>(train: &SpikeTrain, part: &WindowPartition, rng: &mut R) -> Result<SpikeTrain> {
    if train.is_discrete() {
        return Err(JitterError::RequiresContinuous);
    }
    let times = train
        .times()
        .iter()
        .map(|&t| match part.slot(t) {
            Slot::Window(k) => place_in_window(part, k, rng, |u| u),
            Slot::Frozen => t,
        })
        .collect();
    SpikeTrain::from_unsorted(times, 0.0, train.duration())
}

/// Continuous interval jitter with windows `[kΔ, (k+1)Δ)` over the train.
pub fn interval_jitter<R: Rng + ?Sized>(train: &SpikeTrain, delta: f64, rng: &mut R) -> Result<SpikeTrain> {
    let part = WindowPartition::for_train(train, delta)?;
    interval_jitter_in(train, &part, rng)
}

/// Discrete interval jitter: within each window the occupied bins are redrawn
/// uniformly without replacement among the window's bins.
pub fn interval_jitter_discrete_in<R: Rng + ?Sized>(
    train: &SpikeTrain,
    part: &WindowPartition,
    rng: &mut R,
) -> Result<SpikeTrain> {
    if !train.is_discrete() {
        return Err(JitterError::RequiresDiscrete);
    }
    let (origin, per) = part.lattice(train.resolution())?;
    let n_full = part.full_windows() as u64;
    let mut counts = vec![0usize; n_full as usize];
    let mut out = Vec::with_capacity(train.len());
    for b in train.bins()? {
        if b >= origin && (b - origin) / per < n_full {
            counts[((b - origin) / per) as usize] += 1;
        } else {
            out.push(b);
        }
    }
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if c as u64 > per {
            return Err(JitterError::WindowOverfull { window: k, count: c, bins: per as usize });
        }
        let base = origin + k as u64 * per;
        out.extend(index::sample(rng, per as usize, c).into_iter().map(|j| base + j as u64));
    }
    out.sort_unstable();
    SpikeTrain::from_bins(&out, train.resolution(), train.duration())
}

pub fn interval_jitter_discrete<R: Rng + ?Sized>(train: &SpikeTrain, delta: f64, rng: &mut R) -> Result<SpikeTrain> {
    let part = WindowPartition::for_train(train, delta)?;
    interval_jitter_discrete_in(train, &part, rng)
}
