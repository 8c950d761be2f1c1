use jitter_core::{
    interval_counts, pattern_decompose, pattern_encode, IntervalSet, PatternRow, SpikeTrain, TrialSet, WindowPartition,
};
use proptest::prelude::*;

fn train(times: &[f64], duration: f64) -> SpikeTrain {
    SpikeTrain::continuous(times.to_vec(), duration).unwrap()
}

#[test]
fn interval_counts_by_window() {
    let t = train(&[0.001, 0.015, 0.025], 0.04);
    let part = WindowPartition::for_train(&t, 0.02).unwrap();
    assert_eq!(interval_counts(&t, &part).unwrap().counts, vec![2, 1]);
}

#[test]
fn interval_counts_of_empty_train() {
    let t = train(&[], 0.1);
    let part = WindowPartition::for_train(&t, 0.02).unwrap();
    assert_eq!(interval_counts(&t, &part).unwrap().counts, vec![0; 5]);
}

#[test]
fn window_boundary_is_half_open() {
    let t = train(&[0.02], 0.04);
    let part = WindowPartition::for_train(&t, 0.02).unwrap();
    assert_eq!(interval_counts(&t, &part).unwrap().counts, vec![0, 1]);
}

#[test]
fn trailing_partial_window_is_frozen() {
    let t = train(&[0.005, 0.045], 0.05);
    let part = WindowPartition::for_train(&t, 0.02).unwrap();
    let c = interval_counts(&t, &part).unwrap();
    assert_eq!(c.counts, vec![1, 0]);
    assert_eq!(c.frozen, vec![0.045]);
}

#[test]
fn non_positive_delta_is_rejected() {
    assert!(WindowPartition::new(0.0, 0.0, 1.0).is_err());
    assert!(WindowPartition::new(-0.02, 0.0, 1.0).is_err());
}

#[test]
fn decompose_splits_on_gaps_above_r() {
    let t = train(&[0.010, 0.012, 0.030], 0.1);
    assert_eq!(pattern_decompose(&t, 0.005).unwrap(), vec![vec![0.010, 0.012], vec![0.030]]);
    assert_eq!(pattern_decompose(&t, 0.0).unwrap().len(), 3);
}

#[test]
fn gap_equal_to_r_keeps_pattern_together() {
    let t = train(&[0.010, 0.015], 0.1);
    assert_eq!(pattern_decompose(&t, 0.005).unwrap().len(), 1);
}

#[test]
fn encoding_rows() {
    let t = train(&[0.010, 0.012, 0.030], 0.1);
    let part = WindowPartition::for_train(&t, 0.02).unwrap();
    let v = pattern_encode(&t, 0.005, &part).unwrap();
    assert_eq!(v.rows.len(), 3);
    // zero-based windows: 0.010 lies in the first window, 0.030 in the second
    assert_eq!(v.rows[0], PatternRow::Start { window: 0 });
    match v.rows[1] {
        PatternRow::Within { gap } => assert!((gap - 0.002).abs() < 1e-12),
        other => panic!("unexpected row {other:?}"),
    }
    assert_eq!(v.rows[2], PatternRow::Start { window: 1 });

    let one = train(&[0.05], 0.1);
    let v = pattern_encode(&one, 0.005, &part).unwrap();
    assert_eq!(v.rows, vec![PatternRow::Start { window: 2 }]);
}

#[test]
fn trains_validate_their_invariants() {
    assert!(SpikeTrain::continuous(vec![0.2, 0.1], 1.0).is_err());
    assert!(SpikeTrain::continuous(vec![1.0], 1.0).is_err());
    assert!(SpikeTrain::continuous(vec![-0.1], 1.0).is_err());
    assert!(SpikeTrain::new(vec![0.1, 0.1], 0.001, 1.0).is_err());
    let d = SpikeTrain::from_bins(&[3, 7], 0.001, 0.01).unwrap();
    assert_eq!(d.bins().unwrap(), vec![3, 7]);
}

#[test]
fn concatenation_round_trips() {
    let ts = TrialSet::new(
        vec![vec![train(&[0.1, 0.5], 1.0), train(&[0.2], 1.0)], vec![train(&[], 1.0), train(&[0.9], 1.0)]],
        1.0,
    )
    .unwrap();
    let cat = ts.concatenated(0);
    assert_eq!(cat.times(), &[0.1, 0.5, 1.2]);
    let back = TrialSet::from_concatenated(&[ts.concatenated(0), ts.concatenated(1)], 2, 1.0).unwrap();
    // continuous times pass through an add and a subtract, so compare to rounding
    for n in 0..2 {
        for k in 0..2 {
            let (a, b) = (back.train(n, k).times(), ts.train(n, k).times());
            assert_eq!(a.len(), b.len());
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }
    let discrete = TrialSet::new(
        vec![vec![SpikeTrain::from_bins(&[1, 9], 0.1, 1.0).unwrap(), SpikeTrain::from_bins(&[0], 0.1, 1.0).unwrap()]],
        1.0,
    )
    .unwrap();
    let cat = discrete.concatenated(0);
    assert_eq!(cat.bins().unwrap(), vec![1, 9, 10]);
    assert_eq!(TrialSet::from_concatenated(&[cat], 2, 1.0).unwrap(), discrete);
}

#[test]
fn interval_set_normalizes_window_slices() {
    let s = IntervalSet::around_points(&[0.019, 0.5], 0.001).unwrap();
    let first = s.normalized(0.0, 0.02);
    assert_eq!(first.parts().len(), 1);
    assert!((first.parts()[0].0 - 0.9).abs() < 1e-9 && first.parts()[0].1 == 1.0);
    let second = s.normalized(0.02, 0.02);
    assert!((second.measure() - 0.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn counts_sum_to_spike_total(mut times in proptest::collection::vec(0.0f64..1.0, 0..60), delta in 0.005f64..0.3) {
        times.sort_by(f64::total_cmp);
        times.dedup();
        let t = train(&times, 1.0);
        let part = WindowPartition::for_train(&t, delta).unwrap();
        let c = interval_counts(&t, &part).unwrap();
        prop_assert_eq!(c.total() + c.frozen.len(), times.len());
    }

    #[test]
    fn patterns_are_maximal_runs(mut times in proptest::collection::vec(0.0f64..1.0, 1..40), r in 0.0f64..0.05) {
        times.sort_by(f64::total_cmp);
        times.dedup();
        let t = train(&times, 1.0);
        let pats = pattern_decompose(&t, r).unwrap();
        let flat: Vec<f64> = pats.iter().flatten().copied().collect();
        prop_assert_eq!(&flat, &times);
        for p in &pats {
            for w in p.windows(2) {
                prop_assert!(w[1] - w[0] <= r);
            }
        }
        for w in pats.windows(2) {
            prop_assert!(w[1][0] - w[0].last().unwrap() > r);
        }
    }
}
