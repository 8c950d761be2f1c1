use rand::Rng;

use crate::error::{JitterError, Result};
use crate::intervals::IntervalSet;
use crate::tilt::{tilted_quantile, TiltedWindowPlan};
use crate::train::SpikeTrain;
use crate::window::{Slot, WindowPartition};

use super::interval::place_in_window;

/// Jitters each spike within its window from the window's planned linear density.
pub fn tilted_jitter_with_plan<R: Rng + ?Sized>(
    train: &SpikeTrain,
    part: &WindowPartition,
    plan: &TiltedWindowPlan,
    rng: &mut R,
) -> Result<SpikeTrain> {
    if train.is_discrete() {
        return Err(JitterError::RequiresContinuous);
    }
    if plan.windows.len() != part.full_windows() {
        return Err(JitterError::param("plan", "window count does not match the partition"));
    }
    let times = train
        .times()
        .iter()
        .map(|&t| match part.slot(t) {
            Slot::Window(k) => {
                let theta = plan.windows[k].theta;
                place_in_window(part, k, rng, |v| tilted_quantile(theta, v))
            }
            Slot::Frozen => t,
        })
        .collect();
    SpikeTrain::from_unsorted(times, 0.0, train.duration())
}

/// Tilted jitter toward the target set `C`: in every window the spike density is
/// the linear density with variation at most `ε` that puts the most mass on `C`.
pub fn tilted_jitter<R: Rng + ?Sized>(
    train: &SpikeTrain,
    delta: f64,
    epsilon: f64,
    target: &IntervalSet,
    rng: &mut R,
) -> Result<SpikeTrain> {
    let part = WindowPartition::for_train(train, delta)?;
    let plan = TiltedWindowPlan::new(target, &part, epsilon)?;
    tilted_jitter_with_plan(train, &part, &plan, rng)
}
