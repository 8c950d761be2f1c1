use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::train::{snap_to_integer, SpikeTrain, TrialSet};

/// Largest interval (ms) tracked by the triplet histogram.
pub const TRIPLET_MAX_MS: u32 = 1000;

/// `H(i, j)`: the number of increasing spike triples from one trial whose two
/// intervals, rounded to whole milliseconds, are `(i, j)`. Only non-zero cells
/// are stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletHistogram {
    pub counts: BTreeMap<(u32, u32), u64>,
}

impl TripletHistogram {
    pub fn get(&self, i: u32, j: u32) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    /// The largest cell and its position; ties go to the smallest `(i, j)`.
    pub fn max(&self) -> (u64, Option<(u32, u32)>) {
        let mut best = (0, None);
        for (&ij, &c) in &self.counts {
            if c > best.0 {
                best = (c, Some(ij));
            }
        }
        best
    }

    pub fn max_value(&self) -> u64 {
        self.max().0
    }
}

/// Rounds train intervals to milliseconds, half away from zero. For lattices
/// with a whole number of bins per millisecond the rounding is done in integers.
struct MsRounder {
    bins_per_ms: Option<u64>,
    ms_per_unit: f64,
}

impl MsRounder {
    fn new(train: &SpikeTrain) -> Self {
        let res = train.resolution();
        let bins_per_ms = if res > 0.0 { snap_to_integer(0.001 / res).filter(|&q| q > 0).map(|q| q as u64) } else { None };
        MsRounder { bins_per_ms, ms_per_unit: if res > 0.0 { res * 1000.0 } else { 1000.0 } }
    }

    fn positions(&self, train: &SpikeTrain) -> Vec<f64> {
        if train.resolution() > 0.0 {
            train.bins().expect("discrete").into_iter().map(|b| b as f64).collect()
        } else {
            train.times().to_vec()
        }
    }

    fn round(&self, diff: f64) -> u64 {
        match self.bins_per_ms {
            Some(q) => {
                let d = diff as u64;
                (2 * d + q) / (2 * q)
            }
            None => (diff * self.ms_per_unit).round() as u64,
        }
    }
}

/// Triplet histogram of one neuron, counting triples within single trials.
pub fn repeating_triplets(ts: &TrialSet, neuron: usize) -> Result<TripletHistogram> {
    if neuron >= ts.neurons() {
        return Err(JitterError::param("neuron", "index out of range"));
    }
    let mut h = TripletHistogram::default();
    for train in ts.neuron_trains(neuron) {
        let rounder = MsRounder::new(train);
        let pos = rounder.positions(train);
        let n = pos.len();
        for k in 0..n {
            for l in k + 1..n {
                let i = rounder.round(pos[l] - pos[k]);
                if i > TRIPLET_MAX_MS as u64 {
                    break;
                }
                for m in l + 1..n {
                    let j = rounder.round(pos[m] - pos[l]);
                    if j > TRIPLET_MAX_MS as u64 {
                        break;
                    }
                    *h.counts.entry((i as u32, j as u32)).or_insert(0) += 1;
                }
            }
        }
    }
    Ok(h)
}
