//! Spike-train and trial data model.
//!
//! A [`SpikeTrain`] is either continuous (`resolution == 0`) or discrete, in which
//! case every spike sits on a multiple of `resolution` and no bin holds two spikes.
//! A [`TrialSet`] stores one train per (neuron, trial) and can be flattened into a
//! single concatenated train per neuron, trial `k` occupying `[k L, (k+1) L)`.

use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};

/// Relative tolerance used when snapping real-valued positions onto a lattice
/// (window boundaries, time bins, trial boundaries).
pub const SNAP_TOL: f64 = 1e-10;

/// `floor(x)`, except that values within [`SNAP_TOL`] of an integer snap to it.
///
/// Half-open windows assign a point lying on a boundary to the right-hand window,
/// and floating-point division must not push such a point back to the left.
pub fn snapped_floor(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOL * x.abs().max(1.0) {
        r as i64
    } else {
        x.floor() as i64
    }
}

/// Round `x` to the nearest integer if it lies within 1e-3 of one (tolerates
/// decimal round-off in time stamps read from text files).
pub(crate) fn snap_to_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= 1e-3).then_some(r as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    times: Vec<f64>,
    resolution: f64,
    duration: f64,
}

impl SpikeTrain {
    /// Builds a train from sorted spike times.
    ///
    /// In discrete mode the times are snapped onto the `resolution` lattice; a time
    /// that is not (numerically) a lattice point is rejected.
    pub fn new(times: Vec<f64>, resolution: f64, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(JitterError::InvalidTrain(format!("duration must be positive, got {duration}")));
        }
        if !(resolution.is_finite() && resolution >= 0.0) {
            return Err(JitterError::InvalidTrain(format!("resolution must be >= 0, got {resolution}")));
        }
        if resolution > 0.0 {
            let n_bins = bins_in(duration, resolution)?;
            let mut bins = Vec::with_capacity(times.len());
            for &t in &times {
                let b = snap_to_integer(t / resolution).ok_or_else(|| {
                    JitterError::InvalidTrain(format!("time {t} is not a multiple of resolution {resolution}"))
                })?;
                if b < 0 || b as u64 >= n_bins {
                    return Err(JitterError::InvalidTrain(format!("time {t} outside [0, {duration})")));
                }
                bins.push(b as u64);
            }
            return Self::from_bins(&bins, resolution, duration);
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 || t >= duration {
                return Err(JitterError::InvalidTrain(format!("time {t} outside [0, {duration})")));
            }
            if i > 0 && times[i - 1] > t {
                return Err(JitterError::InvalidTrain("spike times are not sorted".into()));
            }
        }
        Ok(SpikeTrain { times, resolution, duration })
    }

    pub fn continuous(times: Vec<f64>, duration: f64) -> Result<Self> {
        Self::new(times, 0.0, duration)
    }

    /// Sorts `times` before validating them.
    pub fn from_unsorted(mut times: Vec<f64>, resolution: f64, duration: f64) -> Result<Self> {
        times.sort_by(f64::total_cmp);
        Self::new(times, resolution, duration)
    }

    /// Builds a discrete train from strictly increasing bin indices.
    pub fn from_bins(bins: &[u64], resolution: f64, duration: f64) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(JitterError::RequiresDiscrete);
        }
        let n_bins = bins_in(duration, resolution)?;
        for (i, &b) in bins.iter().enumerate() {
            if b >= n_bins {
                return Err(JitterError::InvalidTrain(format!("bin {b} outside [0, {n_bins})")));
            }
            if i > 0 && bins[i - 1] >= b {
                return Err(JitterError::InvalidTrain(
                    "bins must be strictly increasing (at most one spike per bin)".into(),
                ));
            }
        }
        let times = bins.iter().map(|&b| b as f64 * resolution).collect();
        Ok(SpikeTrain { times, resolution, duration })
    }

    pub fn empty(resolution: f64, duration: f64) -> Result<Self> {
        Self::new(Vec::new(), resolution, duration)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn into_times(self) -> Vec<f64> {
        self.times
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_discrete(&self) -> bool {
        self.resolution > 0.0
    }

    /// Number of time bins covering the train (discrete mode only).
    pub fn n_bins(&self) -> Result<u64> {
        if !self.is_discrete() {
            return Err(JitterError::RequiresDiscrete);
        }
        bins_in(self.duration, self.resolution)
    }

    /// Bin index of every spike (discrete mode only).
    pub fn bins(&self) -> Result<Vec<u64>> {
        if !self.is_discrete() {
            return Err(JitterError::RequiresDiscrete);
        }
        Ok(self.times.iter().map(|&t| (t / self.resolution).round() as u64).collect())
    }

    /// Maps a continuous train onto a lattice of width `resolution`.
    ///
    /// Each spike goes to the bin containing it. When a bin is already taken the
    /// spike moves to the nearest free bin (right first), so the spike count is
    /// preserved.
    pub fn discretize(&self, resolution: f64) -> Result<SpikeTrain> {
        if !(resolution > 0.0) {
            return Err(JitterError::param("resolution", "must be positive"));
        }
        let n_bins = bins_in(self.duration, resolution)?;
        if self.times.len() as u64 > n_bins {
            return Err(JitterError::InvalidTrain("more spikes than bins".into()));
        }
        let mut bins: Vec<u64> = self
            .times
            .iter()
            .map(|&t| (snapped_floor(t / resolution).max(0) as u64).min(n_bins - 1))
            .collect();
        // forward pass pushes collisions right, backward pass pulls overflow left
        for i in 1..bins.len() {
            if bins[i] <= bins[i - 1] {
                bins[i] = bins[i - 1] + 1;
            }
        }
        let mut limit = n_bins;
        for b in bins.iter_mut().rev() {
            if *b >= limit {
                *b = limit - 1;
            }
            limit = *b;
        }
        Self::from_bins(&bins, resolution, self.duration)
    }
}

/// Number of lattice bins in `[0, duration)`; `duration` must be a multiple of `resolution`.
pub(crate) fn bins_in(duration: f64, resolution: f64) -> Result<u64> {
    snap_to_integer(duration / resolution)
        .filter(|&n| n > 0)
        .map(|n| n as u64)
        .ok_or_else(|| {
            JitterError::InvalidTrain(format!(
                "duration {duration} is not a whole number of {resolution} s bins"
            ))
        })
}

/// Simultaneously recorded spike trains over repeated trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    trial_length: f64,
    resolution: f64,
    /// Indexed `[neuron][trial]`.
    trains: Vec<Vec<SpikeTrain>>,
}

impl TrialSet {
    pub fn new(trains: Vec<Vec<SpikeTrain>>, trial_length: f64) -> Result<Self> {
        let n_trials = trains.first().map(Vec::len).unwrap_or(0);
        if trains.is_empty() || n_trials == 0 {
            return Err(JitterError::InvalidTrain("trial set needs at least one neuron and one trial".into()));
        }
        let resolution = trains[0][0].resolution();
        for per_neuron in &trains {
            if per_neuron.len() != n_trials {
                return Err(JitterError::InvalidTrain("neurons have different trial counts".into()));
            }
            for train in per_neuron {
                if (train.duration() - trial_length).abs() > SNAP_TOL * trial_length {
                    return Err(JitterError::InvalidTrain(format!(
                        "train duration {} differs from trial length {trial_length}",
                        train.duration()
                    )));
                }
                if train.resolution() != resolution {
                    return Err(JitterError::InvalidTrain("trains have different resolutions".into()));
                }
            }
        }
        Ok(TrialSet { trial_length, resolution, trains })
    }

    pub fn neurons(&self) -> usize {
        self.trains.len()
    }

    pub fn trials(&self) -> usize {
        self.trains[0].len()
    }

    pub fn trial_length(&self) -> f64 {
        self.trial_length
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn train(&self, neuron: usize, trial: usize) -> &SpikeTrain {
        &self.trains[neuron][trial]
    }

    pub fn neuron_trains(&self, neuron: usize) -> &[SpikeTrain] {
        &self.trains[neuron]
    }

    pub fn into_trains(self) -> Vec<Vec<SpikeTrain>> {
        self.trains
    }

    /// Replaces every trial of one neuron.
    pub fn with_neuron(mut self, neuron: usize, trains: Vec<SpikeTrain>) -> Result<Self> {
        if neuron >= self.neurons() || trains.len() != self.trials() {
            return Err(JitterError::param("neuron", "index or trial count mismatch"));
        }
        self.trains[neuron] = trains;
        Self::new(self.trains, self.trial_length)
    }

    /// Total spike count of one neuron.
    pub fn spike_count(&self, neuron: usize) -> usize {
        self.trains[neuron].iter().map(SpikeTrain::len).sum()
    }

    /// Flattens one neuron into a single train on `[0, trials * trial_length)`.
    pub fn concatenated(&self, neuron: usize) -> SpikeTrain {
        let per = &self.trains[neuron];
        let duration = self.trial_length * per.len() as f64;
        if self.resolution > 0.0 {
            let bins_per_trial = bins_in(self.trial_length, self.resolution).expect("validated");
            let bins: Vec<u64> = per
                .iter()
                .enumerate()
                .flat_map(|(k, t)| {
                    let offset = k as u64 * bins_per_trial;
                    t.bins().expect("discrete").into_iter().map(move |b| b + offset)
                })
                .collect();
            return SpikeTrain::from_bins(&bins, self.resolution, duration).expect("valid by construction");
        }
        let times = per
            .iter()
            .enumerate()
            .flat_map(|(k, t)| {
                let offset = k as f64 * self.trial_length;
                t.times().iter().map(move |&x| x + offset)
            })
            .collect();
        SpikeTrain { times, resolution: 0.0, duration }
    }

    /// Inverse of [`TrialSet::concatenated`]: splits one long train per neuron
    /// into `n_trials` trials using half-open trial intervals.
    pub fn from_concatenated(neurons: &[SpikeTrain], n_trials: usize, trial_length: f64) -> Result<Self> {
        if n_trials == 0 {
            return Err(JitterError::param("n_trials", "must be >= 1"));
        }
        let mut out = Vec::with_capacity(neurons.len());
        for train in neurons {
            let res = train.resolution();
            let mut per_trial: Vec<Vec<f64>> = vec![Vec::new(); n_trials];
            if res > 0.0 {
                let bins_per_trial = bins_in(trial_length, res)?;
                for b in train.bins()? {
                    let k = (b / bins_per_trial) as usize;
                    if k >= n_trials {
                        return Err(JitterError::InvalidTrain("spike beyond last trial".into()));
                    }
                    per_trial[k].push((b % bins_per_trial) as f64 * res);
                }
            } else {
                for &t in train.times() {
                    let k = snapped_floor(t / trial_length);
                    if k < 0 || k as usize >= n_trials {
                        return Err(JitterError::InvalidTrain("spike beyond last trial".into()));
                    }
                    let rel = (t - k as f64 * trial_length).max(0.0);
                    per_trial[k as usize].push(rel);
                }
            }
            let trains = per_trial
                .into_iter()
                .map(|times| SpikeTrain::new(times, res, trial_length))
                .collect::<Result<Vec<_>>>()?;
            out.push(trains);
        }
        TrialSet::new(out, trial_length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_and_out_of_range() {
        assert!(SpikeTrain::continuous(vec![0.2, 0.1], 1.0).is_err());
        assert!(SpikeTrain::continuous(vec![1.0], 1.0).is_err());
        assert!(SpikeTrain::continuous(vec![-0.1], 1.0).is_err());
        assert!(SpikeTrain::continuous(vec![0.1, 0.1], 1.0).is_ok());
    }

    #[test]
    fn discrete_rejects_shared_bins_and_off_lattice_times() {
        assert!(SpikeTrain::new(vec![0.001, 0.001], 0.001, 1.0).is_err());
        assert!(SpikeTrain::new(vec![0.0015], 0.001, 1.0).is_err());
        let t = SpikeTrain::new(vec![0.001, 0.003], 0.001, 1.0).unwrap();
        assert_eq!(t.bins().unwrap(), vec![1, 3]);
    }

    #[test]
    fn discretize_moves_collisions_to_free_bins() {
        let t = SpikeTrain::continuous(vec![0.0101, 0.0102, 0.0103, 0.9999], 1.0).unwrap();
        let d = t.discretize(0.01).unwrap();
        assert_eq!(d.bins().unwrap(), vec![1, 2, 3, 99]);
        let crowded = SpikeTrain::continuous(vec![0.991, 0.992, 0.993], 1.0).unwrap();
        assert_eq!(crowded.discretize(0.01).unwrap().bins().unwrap(), vec![97, 98, 99]);
    }

    #[test]
    fn concatenation_round_trips_discrete() {
        let res = 1.0 / 30000.0;
        let a = SpikeTrain::from_bins(&[0, 15, 29999], res, 1.0).unwrap();
        let b = SpikeTrain::from_bins(&[7], res, 1.0).unwrap();
        let ts = TrialSet::new(vec![vec![a, b]], 1.0).unwrap();
        let cat = ts.concatenated(0);
        assert_eq!(cat.bins().unwrap(), vec![0, 15, 29999, 30007]);
        let back = TrialSet::from_concatenated(&[cat], 2, 1.0).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn trial_boundary_spike_belongs_to_later_trial() {
        let cat = SpikeTrain::continuous(vec![0.5, 1.0, 1.5], 2.0).unwrap();
        let ts = TrialSet::from_concatenated(&[cat], 2, 1.0).unwrap();
        assert_eq!(ts.train(0, 0).times(), &[0.5]);
        assert_eq!(ts.train(0, 1).times(), &[0.0, 0.5]);
    }
}
