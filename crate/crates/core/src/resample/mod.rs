//! Surrogate engines.
//!
//! Each engine resamples data from a conditional null distribution: trial
//! shuffle conditions on the multiset of trials, interval jitter on the spike
//! counts per window, pattern jitter on the pattern encoding, and tilted jitter
//! samples the worst case of a family of non-uniform window densities. Basic
//! jitter is a heuristic and is not exchangeable with the data.

mod basic;
mod interval;
mod pattern;
mod shuffle;
mod tilted;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use basic::basic_jitter;
pub use interval::{interval_jitter, interval_jitter_discrete, interval_jitter_discrete_in, interval_jitter_in};
pub use pattern::{pattern_jitter, PatternPlan};
pub use shuffle::trial_shuffle;
pub use tilted::{tilted_jitter, tilted_jitter_with_plan};

use crate::error::{JitterError, Result};
use crate::intervals::IntervalSet;
use crate::rng::{purpose, RngStream};
use crate::tilt::TiltedWindowPlan;
use crate::train::{SpikeTrain, TrialSet};
use crate::window::WindowPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TrialShuffle,
    IntervalJitter,
    IntervalJitterDiscrete,
    BasicJitter,
    PatternJitter,
    TiltedJitter,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::TrialShuffle,
        Method::IntervalJitter,
        Method::IntervalJitterDiscrete,
        Method::BasicJitter,
        Method::PatternJitter,
        Method::TiltedJitter,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::TrialShuffle => "trial_shuffle",
            Method::IntervalJitter => "interval_jitter",
            Method::IntervalJitterDiscrete => "interval_jitter_discrete",
            Method::BasicJitter => "basic_jitter",
            Method::PatternJitter => "pattern_jitter",
            Method::TiltedJitter => "tilted_jitter",
        }
    }

    /// True for basic jitter, whose surrogates do not yield valid p-values.
    pub fn is_heuristic(&self) -> bool {
        matches!(self, Method::BasicJitter)
    }

    fn uses_delta(&self) -> bool {
        !matches!(self, Method::TrialShuffle)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = JitterError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| JitterError::Unknown { kind: "method", name: s.to_string() })
    }
}

/// Everything needed to regenerate a surrogate ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateSpec {
    pub method: Method,
    /// Jitter window length Δ (s).
    pub delta: f64,
    /// Pattern history length R (s).
    pub history: f64,
    /// Tilt bound ε.
    pub epsilon: f64,
    pub n_surrogates: usize,
    /// Neurons that are resampled; the rest are held fixed.
    pub jitter_targets: Vec<usize>,
    /// Tilted jitter: neuron whose spikes define the target set.
    pub reference: Option<usize>,
    /// Tilted jitter: half-width (s) of the target set around reference spikes.
    pub sync_tolerance: f64,
    pub seed: u64,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec {
            method: Method::IntervalJitter,
            delta: 0.02,
            history: 0.0,
            epsilon: 0.0,
            n_surrogates: 1000,
            jitter_targets: vec![0],
            reference: None,
            sync_tolerance: 0.001,
            seed: 0,
        }
    }
}

impl SurrogateSpec {
    pub fn new(method: Method, delta: f64, n_surrogates: usize, seed: u64) -> Self {
        SurrogateSpec { method, delta, n_surrogates, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_surrogates < 1 {
            return Err(JitterError::param("n_surrogates", "must be >= 1"));
        }
        if self.method.uses_delta() && !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(JitterError::param("delta", format!("must be positive, got {}", self.delta)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(JitterError::param("epsilon", format!("must be >= 0, got {}", self.epsilon)));
        }
        if !(self.history >= 0.0 && self.history.is_finite()) {
            return Err(JitterError::param("R", format!("must be >= 0, got {}", self.history)));
        }
        if !(self.sync_tolerance >= 0.0) {
            return Err(JitterError::param("sync_tolerance", "must be >= 0"));
        }
        if self.jitter_targets.is_empty() {
            return Err(JitterError::param("jitter_targets", "need at least one target neuron"));
        }
        if self.method == Method::TiltedJitter && self.jitter_targets.len() != 1 {
            return Err(JitterError::param("jitter_targets", "tilted jitter moves exactly one neuron"));
        }
        Ok(())
    }

    /// Stream of surrogate `i`.
    pub fn stream(&self, i: usize) -> RngStream {
        RngStream::new(self.seed).derive_path(&[purpose::SURROGATE, i as u64])
    }
}

#[derive(Debug, Clone)]
enum Prepared {
    Shuffle,
    Interval(WindowPartition),
    Discrete(WindowPartition),
    Basic,
    Pattern(Vec<PatternPlan>),
    Tilted(WindowPartition, Vec<TiltedWindowPlan>),
}

/// A surrogate generator bound to one dataset. Construction does all the
/// per-train precomputation; surrogate `i` then depends only on `(seed, i)`.
#[derive(Debug, Clone)]
pub struct Resampler {
    spec: SurrogateSpec,
    data: TrialSet,
    prepared: Vec<Prepared>,
}

impl Resampler {
    pub fn new(spec: SurrogateSpec, data: TrialSet) -> Result<Self> {
        spec.validate()?;
        for &n in &spec.jitter_targets {
            if n >= data.neurons() {
                return Err(JitterError::param("jitter_targets", format!("no neuron {n}")));
            }
        }
        let discrete = data.resolution() > 0.0;
        match spec.method {
            Method::IntervalJitter | Method::BasicJitter | Method::TiltedJitter if discrete => {
                return Err(JitterError::RequiresContinuous)
            }
            Method::IntervalJitterDiscrete | Method::PatternJitter if !discrete => return Err(JitterError::RequiresDiscrete),
            _ => {}
        }
        let len = data.trial_length();
        let mut prepared = Vec::with_capacity(spec.jitter_targets.len());
        for &n in &spec.jitter_targets {
            let p = match spec.method {
                Method::TrialShuffle => Prepared::Shuffle,
                Method::BasicJitter => Prepared::Basic,
                Method::IntervalJitter => Prepared::Interval(WindowPartition::new(spec.delta, 0.0, len)?),
                Method::IntervalJitterDiscrete => {
                    let part = WindowPartition::new(spec.delta, 0.0, len)?;
                    part.lattice(data.resolution())?;
                    Prepared::Discrete(part)
                }
                Method::PatternJitter => {
                    let part = WindowPartition::new(spec.delta, 0.0, len)?;
                    let plans = data
                        .neuron_trains(n)
                        .iter()
                        .map(|t| PatternPlan::new(t, spec.history, &part))
                        .collect::<Result<Vec<_>>>()?;
                    Prepared::Pattern(plans)
                }
                Method::TiltedJitter => {
                    let reference = match spec.reference {
                        Some(r) => r,
                        None if data.neurons() == 2 => 1 - n,
                        None => return Err(JitterError::param("reference", "tilted jitter needs a reference neuron")),
                    };
                    if reference >= data.neurons() || reference == n {
                        return Err(JitterError::param("reference", "must be a different, existing neuron"));
                    }
                    let part = WindowPartition::new(spec.delta, 0.0, len)?;
                    let plans = data
                        .neuron_trains(reference)
                        .iter()
                        .map(|r| {
                            let c = IntervalSet::around_points(r.times(), spec.sync_tolerance)?;
                            TiltedWindowPlan::new(&c, &part, spec.epsilon)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Prepared::Tilted(part, plans)
                }
            };
            prepared.push(p);
        }
        Ok(Resampler { spec, data, prepared })
    }

    pub fn spec(&self) -> &SurrogateSpec {
        &self.spec
    }

    pub fn data(&self) -> &TrialSet {
        &self.data
    }

    /// Per-trial tilt plans (tilted jitter only).
    pub fn tilt_plans(&self) -> Option<&[TiltedWindowPlan]> {
        self.prepared.iter().find_map(|p| match p {
            Prepared::Tilted(_, plans) => Some(plans.as_slice()),
            _ => None,
        })
    }

    /// Surrogate dataset `i`.
    pub fn surrogate(&self, i: usize) -> Result<TrialSet> {
        let stream = self.spec.stream(i);
        let mut out = self.data.clone();
        for (&n, prep) in self.spec.jitter_targets.iter().zip(&self.prepared) {
            let per_neuron = stream.derive(n as u64);
            if let Prepared::Shuffle = prep {
                out = trial_shuffle(&out, n, &mut per_neuron.rng())?;
                continue;
            }
            let trains = self
                .data
                .neuron_trains(n)
                .iter()
                .enumerate()
                .map(|(k, train)| self.jitter_train(prep, k, train, &per_neuron.derive(k as u64)))
                .collect::<Result<Vec<_>>>()?;
            out = out.with_neuron(n, trains)?;
        }
        Ok(out)
    }

    fn jitter_train(&self, prep: &Prepared, trial: usize, train: &SpikeTrain, stream: &RngStream) -> Result<SpikeTrain> {
        let mut rng = stream.rng();
        match prep {
            Prepared::Shuffle => unreachable!("handled per neuron"),
            Prepared::Interval(part) => interval_jitter_in(train, part, &mut rng),
            Prepared::Discrete(part) => interval_jitter_discrete_in(train, part, &mut rng),
            Prepared::Basic => basic_jitter(train, self.spec.delta, &mut rng),
            Prepared::Pattern(plans) => plans[trial].sample(&mut rng),
            Prepared::Tilted(part, plans) => tilted_jitter_with_plan(train, part, &plans[trial], &mut rng),
        }
    }

    /// Evaluates `stat` on the original (index 0) and on surrogates `1..=M`, in
    /// parallel; results are in surrogate order whatever the worker count.
    pub fn evaluate<T, F>(&self, stat: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&TrialSet) -> Result<T> + Sync,
    {
        let first = stat(&self.data)?;
        let rest: Vec<T> = (1..=self.spec.n_surrogates)
            .into_par_iter()
            .map(|i| stat(&self.surrogate(i)?))
            .collect::<Result<Vec<T>>>()?;
        let mut all = Vec::with_capacity(rest.len() + 1);
        all.push(first);
        all.extend(rest);
        Ok(all)
    }
}

/// Runs `f` on a pool of `workers` threads (`0` = rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| JitterError::param("workers", e.to_string()))?;
    Ok(pool.install(f))
}
