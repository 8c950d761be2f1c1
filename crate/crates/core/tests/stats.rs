use std::f64::consts::PI;

use jitter_core::resample::trial_shuffle;
use jitter_core::stats::{
    cch, cch_trains, lr_tuning_curve, psth, repeating_triplets, sync_pairs_trains, sync_participation, wrapped_kde,
    CCH_MAX_INDEX, CCH_STEP,
};
use jitter_core::synth::{sample_poisson, ConstantRate};
use jitter_core::{RngStream, SpikeTrain, TrialSet};
use proptest::prelude::*;

fn train(times: &[f64]) -> SpikeTrain {
    SpikeTrain::continuous(times.to_vec(), 1.0).unwrap()
}

fn one_neuron(trials: Vec<SpikeTrain>) -> TrialSet {
    TrialSet::new(vec![trials], 1.0).unwrap()
}

#[test]
fn psth_of_silent_neuron_is_zero() {
    let p = psth(&one_neuron(vec![train(&[]); 3]), 0).unwrap();
    assert!(p.rate.iter().all(|&r| r == 0.0));
    assert_eq!(p.times.len(), 499);
}

#[test]
fn psth_of_single_spike_is_a_box() {
    let p = psth(&one_neuron(vec![train(&[0.5])]), 0).unwrap();
    for (&t, &r) in p.times.iter().zip(&p.rate) {
        let inside = t > 0.475 + 1e-9 && t < 0.525 - 1e-9;
        let outside = t < 0.475 - 1e-9 || t > 0.525 + 1e-9;
        if inside {
            assert!((r - 20.0).abs() < 1e-9, "t={t} r={r}");
        } else if outside {
            assert_eq!(r, 0.0, "t={t}");
        }
    }
}

#[test]
fn psth_of_homogeneous_process_is_flat() {
    let s = RngStream::new(1);
    let trials = 1000;
    let ts = one_neuron(
        (0..trials).map(|k| sample_poisson(&ConstantRate(50.0), 1.0, &mut s.derive(k).rng()).unwrap()).collect(),
    );
    let p = psth(&ts, 0).unwrap();
    // box counts are Poisson(50 * 0.05 * trials)
    let sd = (50.0 * 0.05 * trials as f64).sqrt() / (trials as f64 * 0.05);
    let inner: Vec<f64> = p.times.iter().zip(&p.rate).filter(|(&t, _)| (0.025..=0.975).contains(&t)).map(|(_, &r)| r).collect();
    // each point has a 0.27% chance to leave 3 sd; over ~475 correlated points a few may
    let outside = inner.iter().filter(|&&r| (r - 50.0).abs() >= 3.0 * sd).count();
    assert!(outside as f64 <= 0.02 * inner.len() as f64, "{outside} of {} beyond 3 sd", inner.len());
    assert!(inner.iter().all(|&r| (r - 50.0).abs() < 5.0 * sd));
}

#[test]
fn psth_is_unchanged_by_trial_shuffle() {
    let s = RngStream::new(2);
    let ts = one_neuron((0..20).map(|k| sample_poisson(&ConstantRate(30.0), 1.0, &mut s.derive(k).rng()).unwrap()).collect());
    let shuffled = trial_shuffle(&ts, 0, &mut s.derive(99).rng()).unwrap();
    assert_eq!(psth(&ts, 0).unwrap(), psth(&shuffled, 0).unwrap());
}

#[test]
fn identical_single_spikes_give_one_synchrony() {
    let ts = TrialSet::new(vec![vec![train(&[0.4])], vec![train(&[0.4])]], 1.0).unwrap();
    let c = cch(&ts, 0, 1).unwrap();
    assert_eq!(c.lag0(), 1);
    assert_eq!(c.lags.len(), 2 * CCH_MAX_INDEX as usize + 1);
}

#[test]
fn sync_pair_examples() {
    assert_eq!(sync_pairs_trains(&train(&[0.1]), &train(&[0.5]), 0.001), 0);
    assert_eq!(sync_pairs_trains(&train(&[0.5]), &train(&[0.4995, 0.5008]), 0.001), 2);
    // half-open box: a lag of exactly +tol is outside, -tol inside (dyadic values keep the edge exact)
    let tol = 0.0009765625;
    assert_eq!(sync_pairs_trains(&train(&[0.5]), &train(&[0.5 + tol]), tol), 0);
    assert_eq!(sync_pairs_trains(&train(&[0.5]), &train(&[0.5 - tol]), tol), 1);
}

#[test]
fn participation_examples() {
    let a = train(&[0.1, 0.3, 0.5]);
    assert_eq!(sync_participation(&a, &train(&[]), 0.001), 0);
    assert_eq!(sync_participation(&a, &train(&[0.1005, 0.2999, 0.5]), 0.001), 3);
}

#[test]
fn triplet_examples() {
    let h = repeating_triplets(&one_neuron(vec![train(&[0.010, 0.033, 0.060])]), 0).unwrap();
    assert_eq!(h.get(23, 27), 1);
    assert_eq!(h.max_value(), 1);
    assert_eq!(h.counts.values().sum::<u64>(), 1);

    let h = repeating_triplets(&one_neuron(vec![train(&[0.0, 0.005, 0.010]); 2]), 0).unwrap();
    assert_eq!(h.get(5, 5), 2);
}

#[test]
fn refractory_train_has_no_zero_intervals() {
    let s = RngStream::new(3);
    let mut rng = s.rng();
    let raw = sample_poisson(&ConstantRate(200.0), 1.0, &mut rng).unwrap();
    let mut kept: Vec<f64> = Vec::new();
    for &t in raw.times() {
        if kept.last().is_none_or(|&p| t - p > 0.0006) {
            kept.push(t);
        }
    }
    let h = repeating_triplets(&one_neuron(vec![train(&kept)]), 0).unwrap();
    assert!(!h.counts.is_empty());
    assert!(h.counts.keys().all(|&(i, j)| i > 0 && j > 0));
}

#[test]
fn tuning_curve_with_every_bin_an_event_is_one() {
    let dirs: Vec<f64> = (0..500).map(|i| (i as f64 * 2.399).rem_euclid(2.0 * PI) - PI).collect();
    let curve = lr_tuning_curve(&dirs, &vec![true; dirs.len()], 0.3, 360).unwrap();
    assert!(curve.theta.iter().all(|&t| t == 1.0));
}

#[test]
fn kde_wraps_around_minus_pi() {
    let k = wrapped_kde(&[PI - 0.01; 10], 0.1, 360);
    // grid point 0 sits at -π, 0.01 away from the data across the wrap
    assert!(k[0] > 0.5 * k.iter().cloned().fold(0.0, f64::max));
    assert!(k[180] < 1e-12);
}

#[test]
fn tuning_inputs_are_validated() {
    assert!(lr_tuning_curve(&[], &[], 0.3, 10).is_err());
    assert!(lr_tuning_curve(&[0.0], &[true, false], 0.3, 10).is_err());
    assert!(lr_tuning_curve(&[0.0], &[false], 0.3, 10).is_err());
    assert!(lr_tuning_curve(&[0.0], &[true], 0.0, 10).is_err());
}

fn sorted_times(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

proptest! {
    #[test]
    fn cch_reflects_when_neurons_swap(a in proptest::collection::vec(0.0f64..1.0, 0..40), b in proptest::collection::vec(0.0f64..1.0, 0..40)) {
        let (a, b) = (train(&sorted_times(a)), train(&sorted_times(b)));
        let ab = cch_trains(&a, &b).values;
        let mut ba = cch_trains(&b, &a).values;
        ba.reverse();
        // the boxes differ only at their edges, which random times do not hit
        let diff: u64 = ab.iter().zip(&ba).map(|(x, y)| x.abs_diff(*y)).sum();
        prop_assert_eq!(diff, 0);
    }

    #[test]
    fn cch_mass_is_five_per_pair(a in proptest::collection::vec(0.0f64..0.2, 0..30), b in proptest::collection::vec(0.0f64..0.2, 0..30)) {
        let (a, b) = (sorted_times(a), sorted_times(b));
        let pairs = a.iter().flat_map(|x| b.iter().map(move |y| (y - x).abs())).filter(|d| *d < 0.25).count() as u64;
        let total: u64 = cch_trains(&train(&a), &train(&b)).values.iter().sum();
        prop_assert_eq!(total, 5 * pairs);
    }

    #[test]
    fn cch_counts_match_brute_force(a in proptest::collection::vec(0.0f64..1.0, 0..25), b in proptest::collection::vec(0.0f64..1.0, 0..25), i in -CCH_MAX_INDEX..=CCH_MAX_INDEX) {
        let (a, b) = (sorted_times(a), sorted_times(b));
        let tau = i as f64 * CCH_STEP;
        let brute = a.iter().flat_map(|x| b.iter().map(move |y| y - x)).filter(|d| tau - 0.001 <= *d && *d < tau + 0.001).count() as u64;
        prop_assert_eq!(cch_trains(&train(&a), &train(&b)).values[(i + CCH_MAX_INDEX) as usize], brute);
    }

    #[test]
    fn participation_never_exceeds_pairs(a in proptest::collection::vec(0.0f64..1.0, 0..60), b in proptest::collection::vec(0.0f64..1.0, 0..60)) {
        let (a, b) = (train(&sorted_times(a)), train(&sorted_times(b)));
        // participation uses a closed box, so compare against the open-right pair count widened by one ulp-scale step
        prop_assert!(sync_participation(&a, &b, 0.001) <= sync_pairs_trains(&a, &b, 0.001 + 1e-12));
    }
}
