//! Synthetic point-process generators.
//!
//! Inhomogeneous Poisson trains are drawn by thinning: candidates from a
//! homogeneous process at the intensity's upper bound are kept with probability
//! `rate(t) / bound`. The Cox designs use a baseline plus wrapped
//! double-exponential bumps, which integrates to `baseline + bumps` per trial.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::rng::RngStream;
use crate::train::{SpikeTrain, TrialSet};

/// Sorted bump centers shared by every trial of the bandwidth-family design.
pub const FIXED_CENTERS: [f64; 40] = [
    0.032, 0.034, 0.036, 0.046, 0.097, 0.098, 0.127, 0.142, 0.158, 0.171, 0.277, 0.278, 0.317, 0.392,
    0.422, 0.485, 0.547, 0.632, 0.655, 0.656, 0.679, 0.695, 0.706, 0.743, 0.758, 0.792, 0.800, 0.815,
    0.823, 0.849, 0.906, 0.913, 0.916, 0.934, 0.950, 0.957, 0.958, 0.959, 0.965, 0.971,
];

/// Bandwidths of the bandwidth-family design, widest first.
pub const FAMILY_SIGMAS: [f64; 4] = [0.036, 0.020, 0.012, 0.008];

/// Mean rate of the Cox designs; injection thins each train by `h / INJECTION_BASE_RATE`.
pub const INJECTION_BASE_RATE: f64 = 50.0;

/// A bounded, non-negative intensity on `[0, duration)`.
pub trait Intensity: Sync {
    fn rate(&self, t: f64) -> f64;
    /// Any value `>= sup rate`; thinning efficiency is `mean rate / bound`.
    fn upper_bound(&self) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantRate(pub f64);

impl Intensity for ConstantRate {
    fn rate(&self, _t: f64) -> f64 {
        self.0
    }
    fn upper_bound(&self) -> f64 {
        self.0
    }
}

/// Rate constant on consecutive windows of length `delta` starting at 0.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant {
    pub delta: f64,
    pub rates: Vec<f64>,
}

impl Intensity for PiecewiseConstant {
    fn rate(&self, t: f64) -> f64 {
        let k = crate::train::snapped_floor(t / self.delta).max(0) as usize;
        self.rates.get(k).copied().unwrap_or(0.0)
    }
    fn upper_bound(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }
}

/// An intensity multiplied by a constant factor.
#[derive(Debug, Clone)]
pub struct Scaled<I>(pub I, pub f64);

impl<I: Intensity> Intensity for Scaled<I> {
    fn rate(&self, t: f64) -> f64 {
        self.0.rate(t) * self.1
    }
    fn upper_bound(&self) -> f64 {
        self.0.upper_bound() * self.1
    }
}

/// Density of a double-exponential with scale `b` wrapped onto `[0, 1)`,
/// evaluated at offset `x = (t - center) mod 1`.
///
/// The sum over all wraps has the closed form
/// `cosh((x - 1/2) / b) / (2 b sinh(1 / (2b)))`, evaluated here without overflow.
pub fn wrapped_laplace_density(x: f64, b: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    let v = 0.5 / b;
    let u = (x - 0.5).abs() / b;
    // cosh(u) / sinh(v) = (e^{u-v} + e^{-u-v}) / (1 - e^{-2v}), with 0 <= u <= v
    let num = (u - v).exp() + (-u - v).exp();
    num / (-(-2.0 * v).exp_m1()) / (2.0 * b)
}

/// Truncated wrap sum `sum_{|l| <= terms} e^{-|x + l| / b} / (2b)`.
pub fn wrapped_laplace_truncated(x: f64, b: f64, terms: i32) -> f64 {
    (-terms..=terms)
        .map(|l| (-(x + l as f64).abs() / b).exp() / (2.0 * b))
        .sum()
}

/// Baseline plus wrapped double-exponential bumps on a unit-length trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpIntensity {
    pub baseline: f64,
    pub centers: Vec<f64>,
    /// Bandwidth; the double-exponential scale is `sigma / sqrt(2)`.
    pub sigma: f64,
}

impl BumpIntensity {
    pub fn new(baseline: f64, centers: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(JitterError::param("sigma", "bandwidth must be positive"));
        }
        if !(baseline >= 0.0) {
            return Err(JitterError::param("baseline", "rate must be non-negative"));
        }
        Ok(BumpIntensity { baseline, centers, sigma })
    }

    pub fn scale(&self) -> f64 {
        self.sigma / std::f64::consts::SQRT_2
    }

    /// Integral over one trial: `baseline + centers.len()`.
    pub fn integral(&self) -> f64 {
        self.baseline + self.centers.len() as f64
    }
}

impl Intensity for BumpIntensity {
    fn rate(&self, t: f64) -> f64 {
        if !(0.0..1.0).contains(&t) {
            return 0.0;
        }
        let b = self.scale();
        self.baseline + self.centers.iter().map(|&mu| wrapped_laplace_density(t - mu, b)).sum::<f64>()
    }

    fn upper_bound(&self) -> f64 {
        // each wrapped bump peaks at its center
        let peak = wrapped_laplace_density(0.0, self.scale());
        self.baseline + peak * self.centers.len() as f64
    }
}

/// Draws an inhomogeneous Poisson train on `[0, duration)` by thinning.
pub fn sample_poisson<I: Intensity + ?Sized, R: Rng + ?Sized>(
    intensity: &I,
    duration: f64,
    rng: &mut R,
) -> Result<SpikeTrain> {
    let bound = intensity.upper_bound();
    if !(bound >= 0.0 && bound.is_finite()) {
        return Err(JitterError::param("rate", format!("upper bound must be finite and >= 0, got {bound}")));
    }
    if bound == 0.0 {
        return SpikeTrain::continuous(Vec::new(), duration);
    }
    let n = Poisson::new(bound * duration)
        .map_err(|e| JitterError::param("rate", e.to_string()))?
        .sample(rng) as usize;
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        let t = rng.random::<f64>() * duration;
        let r = intensity.rate(t);
        if r < 0.0 {
            return Err(JitterError::param("rate", format!("negative intensity {r} at t = {t}")));
        }
        if r > bound * (1.0 + 1e-12) {
            return Err(JitterError::param("rate", format!("intensity {r} exceeds its bound {bound}")));
        }
        if rng.random::<f64>() * bound < r {
            times.push(t);
        }
    }
    SpikeTrain::from_unsorted(times, 0.0, duration)
}

/// Parameters of the random-intensity (Cox) design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoxDesign {
    pub baseline: f64,
    pub bumps: usize,
    pub sigma: f64,
}

impl Default for CoxDesign {
    fn default() -> Self {
        CoxDesign { baseline: 10.0, bumps: 40, sigma: 0.05 }
    }
}

/// The per-trial intensities of the Cox design (fresh uniform centers per trial).
pub fn cox_intensities(design: &CoxDesign, n_trials: usize, stream: &RngStream) -> Result<Vec<BumpIntensity>> {
    (0..n_trials)
        .map(|k| {
            let mut rng = stream.derive_path(&[0, k as u64]).rng();
            let centers = (0..design.bumps).map(|_| rng.random::<f64>()).collect();
            BumpIntensity::new(design.baseline, centers, design.sigma)
        })
        .collect()
}

/// Cox trial set: each trial draws a fresh intensity shared by all neurons, and
/// every neuron is an independent Poisson draw given it. Neuron `i`'s trains
/// depend only on `(stream, i)`, so adding neurons never changes existing ones.
pub fn sample_cox_trialset(
    design: &CoxDesign,
    n_trials: usize,
    n_neurons: usize,
    stream: &RngStream,
) -> Result<TrialSet> {
    if n_trials == 0 || n_neurons == 0 {
        return Err(JitterError::param("n_trials", "need at least one trial and one neuron"));
    }
    let intensities = cox_intensities(design, n_trials, stream)?;
    let trains = (0..n_neurons)
        .map(|i| {
            intensities
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    let mut rng = stream.derive_path(&[1, i as u64, k as u64]).rng();
                    sample_poisson(f, 1.0, &mut rng)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    TrialSet::new(trains, 1.0)
}

/// Double-exponential sample around `center` with scale `b`, wrapped onto `[0, 1)`,
/// from a uniform `u` in `[0, 1)`.
pub fn wrapped_laplace_sample(center: f64, b: f64, u: f64) -> f64 {
    let c = u - 0.5;
    let x = center - b * c.signum() * (-2.0 * c.abs()).ln_1p();
    let w = x.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Fixed-intensity trial set built by superposition, so that datasets for
/// different `sigma` share the baseline spikes and the per-bump counts and
/// differ only in where the bump spikes land.
pub fn fixed_intensity_trialset(
    sigma: f64,
    baseline: f64,
    centers: &[f64],
    n_trials: usize,
    n_neurons: usize,
    stream: &RngStream,
) -> Result<TrialSet> {
    if !(sigma > 0.0) {
        return Err(JitterError::param("sigma", "bandwidth must be positive"));
    }
    let b = sigma / std::f64::consts::SQRT_2;
    let trains = (0..n_neurons)
        .map(|i| {
            (0..n_trials)
                .map(|k| {
                    let (base, counts) = family_shared_draws(baseline, centers.len(), i, k, stream)?;
                    let mut times = base;
                    let mut pos = stream.derive_path(&[12, i as u64, k as u64]).rng();
                    for (j, &m) in counts.iter().enumerate() {
                        for _ in 0..m {
                            times.push(wrapped_laplace_sample(centers[j], b, pos.random()));
                        }
                    }
                    SpikeTrain::from_unsorted(times, 0.0, 1.0)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    TrialSet::new(trains, 1.0)
}

/// Baseline spike times and per-bump Poisson(1) counts for (neuron, trial);
/// independent of the bandwidth.
pub fn family_shared_draws(
    baseline: f64,
    bumps: usize,
    neuron: usize,
    trial: usize,
    stream: &RngStream,
) -> Result<(Vec<f64>, Vec<u64>)> {
    let mut rng = stream.derive_path(&[10, neuron as u64, trial as u64]).rng();
    let base = sample_poisson(&ConstantRate(baseline), 1.0, &mut rng)?.into_times();
    let mut rng = stream.derive_path(&[11, neuron as u64, trial as u64]).rng();
    let unit = Poisson::new(1.0).expect("valid mean");
    let counts = (0..bumps).map(|_| unit.sample(&mut rng) as u64).collect();
    Ok((base, counts))
}

/// Options for [`inject_synchrony`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    /// Injected synchrony rate `h` in Hz, `0 <= h <= base_rate`.
    pub rate: f64,
    /// Mean rate of the base trains; each base spike survives with probability `1 - h / base_rate`.
    pub base_rate: f64,
    /// Half-width (s) of a uniform offset applied to the second neuron's copy of
    /// each injected spike. Zero injects exactly coincident spikes.
    pub offset: f64,
}

impl Injection {
    pub fn new(rate: f64) -> Self {
        Injection { rate, base_rate: INJECTION_BASE_RATE, offset: 0.0 }
    }
}

/// Superimposes shared donor spikes onto two thinned base trains.
///
/// The thinning/selection uniforms depend only on `(stream, neuron, trial, spike)`,
/// so datasets built for different `h` from the same inputs are coupled.
pub fn inject_synchrony(base: &TrialSet, donor: &TrialSet, inj: &Injection, stream: &RngStream) -> Result<TrialSet> {
    if base.neurons() != 2 || donor.neurons() != 1 {
        return Err(JitterError::param("base", "need a 2-neuron base and a 1-neuron donor"));
    }
    if base.trials() != donor.trials() || base.trial_length() != donor.trial_length() {
        return Err(JitterError::param("donor", "trial structure differs from the base"));
    }
    if !(0.0..=inj.base_rate).contains(&inj.rate) {
        return Err(JitterError::param("h", format!("must lie in [0, {}], got {}", inj.base_rate, inj.rate)));
    }
    if !(inj.offset >= 0.0) {
        return Err(JitterError::param("offset", "must be >= 0"));
    }
    let q = inj.rate / inj.base_rate;
    let len = base.trial_length();
    let mut out = vec![Vec::with_capacity(base.trials()); 2];
    for k in 0..base.trials() {
        let mut u3 = stream.derive_path(&[2, k as u64]).rng();
        let shared: Vec<f64> = donor.train(0, k).times().iter().copied().filter(|_| u3.random::<f64>() < q).collect();
        for (i, trains) in out.iter_mut().enumerate() {
            let mut u = stream.derive_path(&[i as u64, k as u64]).rng();
            let mut times: Vec<f64> =
                base.train(i, k).times().iter().copied().filter(|_| u.random::<f64>() <= 1.0 - q).collect();
            if i == 1 && inj.offset > 0.0 {
                let mut off = stream.derive_path(&[3, k as u64]).rng();
                times.extend(shared.iter().map(|&t| {
                    let x = t + inj.offset * (2.0 * off.random::<f64>() - 1.0);
                    x.clamp(0.0, len * (1.0 - f64::EPSILON))
                }));
            } else {
                times.extend_from_slice(&shared);
            }
            trains.push(SpikeTrain::from_unsorted(times, 0.0, len)?);
        }
    }
    TrialSet::new(out, len)
}

/// Upper limit on whole-trial redraws in [`burstify`].
pub const BURST_MAX_ATTEMPTS: usize = 100_000;

/// Turns each (neuron, trial) into bursts of three: with `d = N / 3`, removes
/// `2d` spikes at random, then gives `d` of the survivors two followers at
/// uniform delays in (8, 9) ms and (16, 17) ms. Spike counts are unchanged. A
/// trial whose new spike falls past the trial end is redrawn from scratch.
pub fn burstify(ts: &TrialSet, stream: &RngStream) -> Result<TrialSet> {
    let len = ts.trial_length();
    if len <= 0.017 {
        return Err(JitterError::param("trial_length", "must exceed 17 ms"));
    }
    if ts.resolution() > 0.0 {
        return Err(JitterError::RequiresContinuous);
    }
    let mut trains = Vec::with_capacity(ts.neurons());
    for i in 0..ts.neurons() {
        let mut per = Vec::with_capacity(ts.trials());
        for k in 0..ts.trials() {
            let src = ts.train(i, k).times();
            let n = src.len();
            let d = n / 3;
            if d == 0 {
                per.push(ts.train(i, k).clone());
                continue;
            }
            let mut rng = stream.derive_path(&[i as u64, k as u64]).rng();
            let mut result = None;
            for _ in 0..BURST_MAX_ATTEMPTS {
                let mut removed = vec![false; n];
                for j in index::sample(&mut rng, n, 2 * d) {
                    removed[j] = true;
                }
                let kept: Vec<f64> = (0..n).filter(|&j| !removed[j]).map(|j| src[j]).collect();
                let mut times = kept.clone();
                let mut ok = true;
                for j in index::sample(&mut rng, kept.len(), d) {
                    let second = kept[j] + 0.008 + 0.001 * rng.random::<f64>();
                    let third = kept[j] + 0.016 + 0.001 * rng.random::<f64>();
                    if third >= len || second >= len {
                        ok = false;
                        break;
                    }
                    times.push(second);
                    times.push(third);
                }
                if ok {
                    result = Some(times);
                    break;
                }
            }
            let times = result.ok_or_else(|| {
                JitterError::Infeasible(format!("could not burstify neuron {i} trial {k} within the trial"))
            })?;
            per.push(SpikeTrain::from_unsorted(times, 0.0, len)?);
        }
        trains.push(per);
    }
    TrialSet::new(trains, len)
}

/// Smooth random 2-D trajectory sampled in unit steps: the velocity is an
/// Ornstein-Uhlenbeck process with correlation time `tau` steps.
pub fn random_trajectory(n: usize, tau: f64, stream: &RngStream) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream.rng();
    let normal = rand_distr::StandardNormal;
    let a = (-1.0 / tau).exp();
    let s = (1.0 - a * a).sqrt();
    let (mut vx, mut vy, mut x, mut y) = (0.0f64, 0.0f64, 0.0, 0.0);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let zx: f64 = normal.sample(&mut rng);
        let zy: f64 = normal.sample(&mut rng);
        vx = a * vx + s * zx;
        vy = a * vy + s * zy;
        x += vx;
        y += vy;
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_wrap_matches_truncated_sum() {
        for &sigma in &[0.008, 0.02, 0.05, 0.1] {
            let b = sigma / std::f64::consts::SQRT_2;
            for i in 0..200 {
                let x = i as f64 / 200.0;
                let exact = wrapped_laplace_density(x, b);
                let trunc = wrapped_laplace_truncated(x, b, 2);
                assert!((exact - trunc).abs() < 1e-8, "sigma {sigma} x {x}: {exact} vs {trunc}");
            }
        }
    }

    #[test]
    fn tiny_bandwidth_does_not_overflow() {
        let v = wrapped_laplace_density(0.0, 1e-4);
        assert!((v - 1.0 / (2e-4)).abs() / v < 1e-12);
        assert!(wrapped_laplace_density(0.5, 1e-4).is_finite());
    }

    #[test]
    fn wrapped_density_integrates_to_one() {
        let b = 0.3;
        let n = 10_000;
        let s: f64 = (0..n).map(|i| wrapped_laplace_density((i as f64 + 0.5) / n as f64, b)).sum::<f64>() / n as f64;
        assert!((s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn large_bandwidth_is_nearly_flat() {
        let centers: Vec<f64> = (0..40).map(|j| j as f64 / 40.0 + 0.013).collect();
        let f = BumpIntensity::new(10.0, centers, 10.0).unwrap();
        for i in 0..1000 {
            let r = f.rate(i as f64 / 1000.0);
            assert!((r - 50.0).abs() < 0.05 * 50.0, "{r}");
        }
    }

    #[test]
    fn zero_rate_gives_empty_train() {
        let mut rng = RngStream::new(1).rng();
        let t = sample_poisson(&ConstantRate(0.0), 1.0, &mut rng).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn negative_rate_is_an_error() {
        struct Neg;
        impl Intensity for Neg {
            fn rate(&self, _t: f64) -> f64 {
                -1.0
            }
            fn upper_bound(&self) -> f64 {
                1.0
            }
        }
        let mut rng = RngStream::new(1).rng();
        assert!(sample_poisson(&Neg, 100.0, &mut rng).is_err());
    }

    #[test]
    fn wrapped_samples_stay_in_unit_interval() {
        let mut rng = RngStream::new(3).rng();
        for _ in 0..10_000 {
            let x = wrapped_laplace_sample(0.99, 0.5, rng.random());
            assert!((0.0..1.0).contains(&x));
        }
        assert!(wrapped_laplace_sample(0.0, 0.01, 0.5 + 1e-18) < 1.0);
    }

    #[test]
    fn injection_at_zero_is_identity() {
        let s = RngStream::new(5);
        let ts = sample_cox_trialset(&CoxDesign::default(), 4, 3, &s).unwrap();
        let trains = ts.clone().into_trains();
        let base = TrialSet::new(trains[..2].to_vec(), 1.0).unwrap();
        let donor = TrialSet::new(trains[2..].to_vec(), 1.0).unwrap();
        let out = inject_synchrony(&base, &donor, &Injection::new(0.0), &s.derive(9)).unwrap();
        assert_eq!(out, base);
        let full = inject_synchrony(&base, &donor, &Injection::new(50.0), &s.derive(9)).unwrap();
        for k in 0..4 {
            assert_eq!(full.train(0, k).times(), donor.train(0, k).times());
            assert_eq!(full.train(1, k).times(), donor.train(0, k).times());
        }
        assert!(inject_synchrony(&base, &donor, &Injection::new(51.0), &s).is_err());
    }

    #[test]
    fn burstify_edge_counts() {
        let empty = SpikeTrain::continuous(vec![], 1.0).unwrap();
        let two = SpikeTrain::continuous(vec![0.2, 0.4], 1.0).unwrap();
        let three = SpikeTrain::continuous(vec![0.1, 0.5, 0.7], 1.0).unwrap();
        let ts = TrialSet::new(vec![vec![empty.clone(), two.clone(), three]], 1.0).unwrap();
        let out = burstify(&ts, &RngStream::new(2)).unwrap();
        assert_eq!(out.train(0, 0), &empty);
        assert_eq!(out.train(0, 1), &two);
        let b = out.train(0, 2).times();
        assert_eq!(b.len(), 3);
        let gaps = (b[1] - b[0], b[2] - b[0]);
        assert!(gaps.0 > 0.008 && gaps.0 < 0.009, "{b:?}");
        assert!(gaps.1 > 0.016 && gaps.1 < 0.017, "{b:?}");
    }
}
