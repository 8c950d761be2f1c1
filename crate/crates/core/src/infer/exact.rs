use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::intervals::IntervalSet;
use crate::stats::sync_participation;
use crate::tilt::TiltedWindowPlan;
use crate::train::{SpikeTrain, TrialSet};
use crate::window::{Slot, WindowPartition};

/// Distribution of a sum of independent Bernoulli(`p_k`) variables.
pub fn poisson_binomial_pmf(p: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; p.len() + 1];
    pmf[0] = 1.0;
    for (k, &pk) in p.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            pmf[j] = pmf[j] * (1.0 - pk) + pmf[j - 1] * pk;
        }
        pmf[0] *= 1.0 - pk;
    }
    pmf
}

/// Upper tail `G(c) = P(S >= c)` for `c = 0..=K`; `G(0) = 1`.
pub fn poisson_binomial_tail(p: &[f64]) -> Vec<f64> {
    let pmf = poisson_binomial_pmf(p);
    let mut tail = vec![0.0; pmf.len()];
    let mut acc = 0.0;
    for c in (0..pmf.len()).rev() {
        acc += pmf[c];
        tail[c] = acc.min(1.0);
    }
    tail[0] = 1.0;
    tail
}

/// Exact conditional p-value for the synchrony-participation statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactTest {
    /// Probability that each jittered spike lands in the target set.
    pub probs: Vec<f64>,
    /// Participation contributed by spikes that are never moved.
    pub frozen: u64,
    pub observed: u64,
    pub p_value: f64,
    /// `G(c)` of the moving spikes.
    pub tail: Vec<f64>,
}

impl ExactTest {
    fn from_parts(probs: Vec<f64>, frozen: u64, observed: u64) -> Self {
        let tail = poisson_binomial_tail(&probs);
        let need = observed.saturating_sub(frozen) as usize;
        let p_value = tail.get(need).copied().unwrap_or(0.0);
        ExactTest { probs, frozen, observed, p_value, tail }
    }
}

/// Target probabilities of the window-held spikes and the frozen participation.
fn window_probs(
    jittered: &SpikeTrain,
    reference: &SpikeTrain,
    part: &WindowPartition,
    tol: f64,
    prob: impl Fn(usize, &IntervalSet) -> f64,
) -> Result<(Vec<f64>, u64)> {
    let target = IntervalSet::around_points(reference.times(), tol)?;
    let mut probs = Vec::new();
    let mut frozen = Vec::new();
    for &t in jittered.times() {
        match part.slot(t) {
            Slot::Window(k) => probs.push(prob(k, &target.normalized(part.window_start(k), part.delta()))),
            Slot::Frozen => frozen.push(t),
        }
    }
    let frozen = SpikeTrain::continuous(frozen, jittered.duration())?;
    Ok((probs, sync_participation(&frozen, reference, tol)))
}

/// Exact p-value of the participation of `jittered` in synchrony with the fixed
/// `reference`, under uniform interval jitter with windows of length `delta`.
pub fn exact_sync_test(jittered: &SpikeTrain, reference: &SpikeTrain, delta: f64, tol: f64) -> Result<ExactTest> {
    if jittered.is_discrete() {
        return Err(JitterError::RequiresContinuous);
    }
    let part = WindowPartition::for_train(jittered, delta)?;
    let (probs, frozen) = window_probs(jittered, reference, &part, tol, |_, r| r.measure())?;
    Ok(ExactTest::from_parts(probs, frozen, sync_participation(jittered, reference, tol)))
}

/// [`exact_sync_test`] pooled over all trials of a trial set.
pub fn exact_sync_test_trials(ts: &TrialSet, jittered: usize, reference: usize, delta: f64, tol: f64) -> Result<ExactTest> {
    exact_trials(ts, jittered, reference, delta, tol, None)
}

/// Exact p-value under the worst-case tilted jitter null with bound `epsilon`.
pub fn exact_sync_test_tilted(
    ts: &TrialSet,
    jittered: usize,
    reference: usize,
    delta: f64,
    tol: f64,
    epsilon: f64,
) -> Result<ExactTest> {
    exact_trials(ts, jittered, reference, delta, tol, Some(epsilon))
}

fn exact_trials(
    ts: &TrialSet,
    jittered: usize,
    reference: usize,
    delta: f64,
    tol: f64,
    epsilon: Option<f64>,
) -> Result<ExactTest> {
    if jittered >= ts.neurons() || reference >= ts.neurons() || jittered == reference {
        return Err(JitterError::param("neuron", "need two distinct, existing neurons"));
    }
    if ts.resolution() > 0.0 {
        return Err(JitterError::RequiresContinuous);
    }
    let part = WindowPartition::new(delta, 0.0, ts.trial_length())?;
    let mut probs = Vec::new();
    let (mut frozen, mut observed) = (0, 0);
    for k in 0..ts.trials() {
        let (x, y) = (ts.train(jittered, k), ts.train(reference, k));
        let (p, f) = match epsilon {
            None => window_probs(x, y, &part, tol, |_, r| r.measure())?,
            Some(eps) => {
                let plan = TiltedWindowPlan::new(&IntervalSet::around_points(y.times(), tol)?, &part, eps)?;
                window_probs(x, y, &part, tol, |w, _| plan.windows[w].p_star)?
            }
        };
        probs.extend(p);
        frozen += f;
        observed += sync_participation(x, y, tol);
    }
    Ok(ExactTest::from_parts(probs, frozen, observed))
}
