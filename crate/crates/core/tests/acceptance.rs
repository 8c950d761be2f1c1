//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.
//! Set `ACCEPTANCE_ONLY=3,5` to run a subset.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use jitter_core::experiment::{burst_data, injected_data, poisson_pair};
use jitter_core::infer::{exact_sync_test, mc_pvalue, simultaneous_bands, SurrogateEnsemble};
use jitter_core::resample::{interval_jitter, interval_jitter_discrete, pattern_jitter};
use jitter_core::stats::{cch, lr_tuning_curve, repeating_triplets, sync_pairs, sync_participation};
use jitter_core::synth::{sample_poisson, PiecewiseConstant};
use jitter_core::tilt::{fstar_linear, fstar_unconstrained, theta_bound};
use jitter_core::{IntervalSet, Method, Resampler, RngStream, SpikeTrain, SurrogateSpec, TrialSet};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mc_p_count(values: &[u64]) -> f64 {
    mc_pvalue(&values.iter().map(|&v| v as f64).collect::<Vec<_>>()).unwrap()
}

fn c1_super_uniformity() -> Outcome {
    let datasets = 2000;
    let m = 199;
    let trials = 20;
    let rejections: usize = (0..datasets)
        .into_par_iter()
        .map(|d| {
            let s = RngStream::new(11).derive(d as u64);
            let mut trains = vec![Vec::new(), Vec::new()];
            for k in 0..trials {
                // both neurons share a rate that is constant on each 20 ms window
                let mut rng = s.derive_path(&[0, k]).rng();
                let rates: Vec<f64> = (0..50).map(|_| rng.random_range(5.0..80.0)).collect();
                let intensity = PiecewiseConstant { delta: 0.02, rates };
                for (n, t) in trains.iter_mut().enumerate() {
                    t.push(sample_poisson(&intensity, 1.0, &mut s.derive_path(&[1, n as u64, k]).rng()).unwrap());
                }
            }
            let ts = TrialSet::new(trains, 1.0).unwrap();
            let spec = SurrogateSpec {
                jitter_targets: vec![0, 1],
                ..SurrogateSpec::new(Method::IntervalJitter, 0.02, m, 1000 + d as u64)
            };
            let r = Resampler::new(spec, ts).unwrap();
            let vals = r.evaluate(|ts| sync_pairs(ts, 0, 1, 0.001)).unwrap();
            usize::from(mc_p_count(&vals) <= 0.05)
        })
        .sum();
    let rate = rejections as f64 / datasets as f64;
    let bound = 0.05 + 3.0 * (0.05f64 * 0.95 / datasets as f64).sqrt();
    outcome(rate <= bound, format!("rejection rate {rate:.4} (bound {bound:.4}, {datasets} datasets, M={m})"))
}

fn c2_unconditional_mean() -> Outcome {
    let datasets = 200;
    let base = RngStream::new(12);
    let counts: Vec<u64> = (0..datasets)
        .into_par_iter()
        .map(|d| sync_pairs(&poisson_pair(&base.derive(d), 100, [50.0, 25.0]).unwrap(), 0, 1, 0.001).unwrap())
        .collect();
    let mean = counts.iter().sum::<u64>() as f64 / datasets as f64;
    outcome((mean - 250.0).abs() <= 15.0, format!("mean synchrony count {mean:.2} over {datasets} datasets (target 250 +/- 15)"))
}

/// All bin sets with the given per-window counts, windows of `w` bins.
fn enumerate_configs(counts: &[usize], w: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for (k, &c) in counts.iter().enumerate() {
        let mut next = Vec::new();
        for prefix in &out {
            for mask in 0u32..(1 << w) {
                if mask.count_ones() as usize != c {
                    continue;
                }
                let mut v = prefix.clone();
                v.extend((0..w).filter(|b| mask >> b & 1 == 1).map(|b| k as u64 * w + b));
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn chi2_uniform(observed: &HashMap<Vec<u64>, usize>, support: &[Vec<u64>], draws: usize) -> (f64, bool) {
    let expected = draws as f64 / support.len() as f64;
    let outside = observed.keys().any(|k| !support.contains(k));
    let stat: f64 = support
        .iter()
        .map(|c| {
            let o = *observed.get(c).unwrap_or(&0) as f64;
            (o - expected).powi(2) / expected
        })
        .sum();
    let df = (support.len() - 1).max(1) as f64;
    let p = if support.len() == 1 { 1.0 } else { 1.0 - ChiSquared::new(df).unwrap().cdf(stat) };
    (p, outside)
}

fn c3_enumeration() -> Outcome {
    let draws = 60_000;
    let w = 4u64;
    let res = 0.25;
    let instances: Vec<Vec<u64>> = vec![vec![1], vec![0, 3], vec![2, 5], vec![0, 1, 2], vec![1, 4, 6], vec![3, 4, 7], vec![0, 7]];
    let mut min_p = 1.0f64;
    let mut bad = Vec::new();
    for (idx, bins) in instances.iter().enumerate() {
        let train = SpikeTrain::from_bins(bins, res, 2.0).unwrap();
        let mut counts = vec![0usize; 2];
        for &b in bins {
            counts[(b / w) as usize] += 1;
        }
        let support = enumerate_configs(&counts, w);
        for (e, engine) in ["interval_jitter_discrete", "pattern_jitter"].iter().enumerate() {
            let mut rng = RngStream::new(13).derive_path(&[idx as u64, e as u64]).rng();
            let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
            for _ in 0..draws {
                let s = if e == 0 {
                    interval_jitter_discrete(&train, 1.0, &mut rng).unwrap()
                } else {
                    pattern_jitter(&train, 0.0, 1.0, &mut rng).unwrap()
                };
                *seen.entry(s.bins().unwrap()).or_default() += 1;
            }
            let (p, outside) = chi2_uniform(&seen, &support, draws);
            min_p = min_p.min(p);
            if p <= 0.01 || outside {
                bad.push(format!("{engine} on {bins:?}: p={p:.4} outside={outside}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} instances x 2 engines, min chi-square p {min_p:.4}{}", instances.len(), if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }),
    )
}

fn c4_exact_vs_mc() -> Outcome {
    let j = 100_000;
    let delta = 0.02;
    let tol = 0.004;
    let results: Vec<(f64, f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(14).derive(i).rng();
            let nr = rng.random_range(10..40);
            let reference: Vec<f64> = (0..nr).map(|_| rng.random::<f64>()).collect();
            let reference = SpikeTrain::from_unsorted(reference, 0.0, 1.0).unwrap();
            let nj = rng.random_range(5..30);
            let mut jit: Vec<f64> = (0..nj)
                .map(|_| {
                    if rng.random::<f64>() < 0.3 {
                        // near-coincident with a reference spike
                        let r = reference.times()[rng.random_range(0..nr)];
                        (r + rng.random_range(-0.003..0.003)).clamp(0.0, 0.999_999)
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect();
            jit.dedup();
            let jittered = SpikeTrain::from_unsorted(jit, 0.0, 1.0).unwrap();
            let exact = exact_sync_test(&jittered, &reference, delta, tol).unwrap();
            let mut values = Vec::with_capacity(j + 1);
            values.push(sync_participation(&jittered, &reference, tol) as f64);
            let mut mc_rng = RngStream::new(15).derive(i).rng();
            for _ in 0..j {
                let s = interval_jitter(&jittered, delta, &mut mc_rng).unwrap();
                values.push(sync_participation(&s, &reference, tol) as f64);
            }
            let mc = mc_pvalue(&values).unwrap();
            let p = exact.p_value;
            // the +1 in the Monte Carlo numerator shifts its mean by at most 1/(J+1)
            let allowance = 3.0 * (p * (1.0 - p) / j as f64).sqrt() + 1.0 / (j as f64 + 1.0);
            (p, mc, allowance)
        })
        .collect();
    let worst = results.iter().map(|&(p, mc, a)| (p - mc).abs() / a).fold(0.0, f64::max);
    let pass = results.iter().all(|&(p, mc, a)| (p - mc).abs() <= a);
    outcome(pass, format!("20 instances, J={j}, worst |exact - mc| / allowance = {worst:.3}"))
}

fn c5_closed_forms() -> Outcome {
    let mut rng = RngStream::new(16).rng();
    let mut worst_mass = 0.0f64;
    let mut worst_alpha = 0.0f64;
    let mut linear_ok = true;
    for _ in 0..200 {
        let n = rng.random_range(1..4);
        let mut pts: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>()).collect();
        pts.sort_by(f64::total_cmp);
        let r = IntervalSet::new(pts.chunks(2).map(|c| (c[0], c[1])).collect()).unwrap();
        let m = r.measure();
        let eps: f64 = rng.random_range(0.01..2.0);
        if !(m > 0.0 && m < 1.0) {
            continue;
        }
        let f = fstar_unconstrained(&r, eps).unwrap();
        let beta = (1.0 + eps) * m / (1.0 + eps * m);
        worst_mass = worst_mass.max((f.mass - beta).abs()).max((f.density.mass(&r) - beta).abs());
        worst_alpha = worst_alpha.max((f.density.variation() - eps).abs());
        let lin = fstar_linear(&r, eps).unwrap();
        let tb = theta_bound(eps);
        let moment: f64 = r.parts().iter().map(|&(a, b)| (b * b - a * a) / 2.0 - (b - a) / 2.0).sum();
        let mut theta = -tb;
        while theta <= tb + 1e-15 {
            let mass = m + theta * moment;
            if mass > lin.mass + 1e-12 {
                linear_ok = false;
            }
            theta += 1e-3;
        }
    }
    let pass = worst_mass <= 1e-12 && worst_alpha <= 1e-10 && linear_ok;
    outcome(pass, format!("max |mass - beta| {worst_mass:.2e}, max |alpha - eps| {worst_alpha:.2e}, linear optimum dominates grid: {linear_ok}"))
}

fn power_run(h: f64, targets: Vec<usize>, replicates: u64) -> f64 {
    let rejections: usize = (0..replicates)
        .map(|r| {
            let data = injected_data(600 + r, 100, 0.05, h).unwrap();
            let spec = SurrogateSpec { jitter_targets: targets.clone(), ..SurrogateSpec::new(Method::IntervalJitter, 0.02, 999, 700 + r) };
            let vals = Resampler::new(spec, data).unwrap().evaluate(|ts| sync_pairs(ts, 0, 1, 0.001)).unwrap();
            usize::from(mc_p_count(&vals) <= 0.05)
        })
        .sum();
    rejections as f64 / replicates as f64
}

fn c6_power() -> Outcome {
    let both_hi = power_run(0.75, vec![0, 1], 50);
    let both_null = power_run(0.0, vec![0, 1], 50);
    let pass = both_hi >= 0.9 && both_null <= 0.065;
    outcome(
        pass,
        format!("power {both_hi:.2} at h=0.75 (need >= 0.90), size {both_null:.2} at h=0 (need <= 0.065); 50 replicates, M=999"),
    )
}

fn band_rejection(method: Method, replicates: u64, m: usize) -> f64 {
    let rejections: usize = (0..replicates)
        .map(|r| {
            let data = burst_data(800 + r, 100, 0.05, 0.0, 1.0 / 30000.0).unwrap();
            let spec = SurrogateSpec {
                history: 0.01,
                jitter_targets: vec![0, 1],
                ..SurrogateSpec::new(method, 0.02, m, 900 + r)
            };
            let curves = Resampler::new(spec, data).unwrap().evaluate(|ts| Ok(cch(ts, 0, 1)?.as_f64())).unwrap();
            let bands = simultaneous_bands(&SurrogateEnsemble::new(curves).unwrap()).unwrap();
            usize::from(bands.reject())
        })
        .sum();
    rejections as f64 / replicates as f64
}

fn c7_bursting() -> Outcome {
    let interval = band_rejection(Method::IntervalJitterDiscrete, 50, 999);
    let pattern = band_rejection(Method::PatternJitter, 50, 999);
    outcome(
        interval >= 0.5 && pattern <= 0.065,
        format!("simultaneous-band rejection: interval jitter {interval:.2} (need >= 0.50), pattern jitter {pattern:.2} (need <= 0.065)"),
    )
}

fn c8_triplets() -> Outcome {
    let res = 1.0 / 30000.0;
    let mut deviations = 0u64;
    let mut checked = 0u64;
    for i in 0..100u64 {
        let s = RngStream::new(18).derive(i);
        let mut rng = s.rng();
        let d: u32 = rng.random_range(1..=6);
        // bursty train: clusters of spikes a few ms apart
        let mut times = Vec::new();
        let mut t = rng.random_range(0.0..0.05);
        while t < 0.95 {
            let n = rng.random_range(1..5);
            let mut u = t;
            for _ in 0..n {
                times.push(u);
                u += rng.random_range(0.0005..0.008);
            }
            t = u + rng.random_range(0.01..0.1);
        }
        times.retain(|&x| x < 1.0);
        let train = SpikeTrain::continuous(times, 1.0).unwrap().discretize(res).unwrap();
        let h0 = repeating_triplets(&TrialSet::new(vec![vec![train.clone()]], 1.0).unwrap(), 0).unwrap();
        let r = (d as f64 + 0.5) / 1000.0;
        for _ in 0..100 {
            let sur = pattern_jitter(&train, r, 0.02, &mut rng).unwrap();
            let h = repeating_triplets(&TrialSet::new(vec![vec![sur]], 1.0).unwrap(), 0).unwrap();
            for a in 0..=d {
                for b in 0..=d {
                    checked += 1;
                    deviations += u64::from(h.get(a, b) != h0.get(a, b));
                }
            }
        }
    }
    outcome(deviations == 0, format!("{deviations} deviations over {checked} checked cells (100 trains x 100 surrogates)"))
}

/// Independent threshold decision: all `M + 1` curves (original included) are
/// ranked, with 0-based order statistics.
fn threshold_oracle(curves: &[Vec<f64>]) -> (bool, bool) {
    let m = curves.len() - 1;
    let width = curves[0].len();
    let mut stdz = vec![vec![0.0; width]; m + 1];
    let mut live = vec![false; width];
    for j in 0..width {
        let mut col: Vec<f64> = curves.iter().map(|c| c[j]).collect();
        col.sort_by(f64::total_cmp);
        let mid = &col[1..m];
        let nu = mid.iter().sum::<f64>() / mid.len() as f64;
        let s = (mid.iter().map(|v| (v - nu).powi(2)).sum::<f64>() / (m as f64 - 2.0)).sqrt();
        if s > 0.0 {
            live[j] = true;
            for i in 0..=m {
                stdz[i][j] = (curves[i][j] - nu) / s;
            }
        }
    }
    if !live.iter().any(|&l| l) {
        return (false, false);
    }
    let lo_of = |i: usize| (0..width).filter(|&j| live[j]).map(|j| stdz[i][j]).fold(f64::INFINITY, f64::min);
    let hi_of = |i: usize| (0..width).filter(|&j| live[j]).map(|j| stdz[i][j]).fold(f64::NEG_INFINITY, f64::max);
    let mut mins: Vec<f64> = (0..=m).map(lo_of).collect();
    let mut maxs: Vec<f64> = (0..=m).map(hi_of).collect();
    mins.sort_by(f64::total_cmp);
    maxs.sort_by(f64::total_cmp);
    let lo = mins[25 * m / 1000];
    let hi = maxs[(975 * m).div_ceil(1000)];
    let tol = 1e-9;
    (lo_of(0) < lo - tol, hi_of(0) > hi + tol)
}

fn c9_band_identity() -> Outcome {
    let mut rng = RngStream::new(19).rng();
    let mut mismatches = 0;
    let mut rejections = 0;
    for e in 0..100 {
        let m = [39, 99, 199, 999][e % 4];
        let width = rng.random_range(1..40);
        let integer = e % 2 == 0;
        let shift: f64 = rng.random_range(-3.0..3.0);
        let curves: Vec<Vec<f64>> = (0..=m)
            .map(|i| {
                (0..width)
                    .map(|j| {
                        let base = 10.0 + j as f64;
                        let v = base + rng.random_range(-4.0..4.0) + if i == 0 { shift } else { 0.0 };
                        if integer {
                            v.round()
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let b = simultaneous_bands(&SurrogateEnsemble::new(curves.clone()).unwrap()).unwrap();
        let oracle = threshold_oracle(&curves);
        rejections += usize::from(b.reject());
        if b.band_reject != b.threshold_reject || b.threshold_reject != oracle {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over 100 ensembles ({rejections} rejections)"))
}

fn c10_tuning() -> Outcome {
    let n = 100_000;
    let mut rng = RngStream::new(20).rng();
    let dirs: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
    let mut events: Vec<bool> = (0..n).map(|i| i % 4 == 0).collect();
    events.shuffle(&mut rng);
    let grid = 720;
    let tc = lr_tuning_curve(&dirs, &events, 0.3, grid).unwrap();
    let sup = tc.theta.iter().filter(|t| t.is_finite()).map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    let h = TAU / grid as f64;
    let ia = tc.p_all.iter().sum::<f64>() * h;
    let ie = tc.p_event.iter().sum::<f64>() * h;
    let pass = sup < 0.1 && (ia - 1.0).abs() <= 1e-6 && (ie - 1.0).abs() <= 1e-6;
    outcome(pass, format!("sup |theta - 1| = {sup:.4}, integrals {ia:.9} and {ie:.9}"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "super-uniformity of jitter p-values", c1_super_uniformity),
        (2, "unconditional synchrony mean", c2_unconditional_mean),
        (3, "enumeration oracle equivalence", c3_enumeration),
        (4, "exact vs Monte Carlo p-values", c4_exact_vs_mc),
        (5, "extremal density closed forms", c5_closed_forms),
        (6, "injected-synchrony power", c6_power),
        (7, "bursting separation", c7_bursting),
        (8, "triplet preservation", c8_triplets),
        (9, "simultaneous-band identity", c9_band_identity),
        (10, "tuning-curve null behavior", c10_tuning),
    ];
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {id:>2} [{}] {name}: {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
