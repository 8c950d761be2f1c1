use rand::Rng;

use crate::error::{JitterError, Result};
use crate::pattern::{pattern_spans, GapRule};
use crate::train::SpikeTrain;
use crate::window::WindowPartition;

/// One pattern: its spike offsets from its first spike, and the normalized
/// suffix sums of the placement weights over its admissible start bins.
#[derive(Debug, Clone)]
struct Layer {
    offsets: Vec<u64>,
    lo: u64,
    /// `suffix[i]` is proportional to the number of completions of the train
    /// with this pattern starting at bin `>= lo + i`.
    suffix: Vec<f64>,
}

impl Layer {
    fn span(&self) -> u64 {
        *self.offsets.last().expect("patterns are non-empty")
    }
}

/// Precomputed sampler for pattern jitter of one discrete train.
///
/// Every pattern keeps its shape and its start window; successive patterns stay
/// separated by more than `R`. Patterns starting outside the full windows, and
/// patterns ending within `R` of the end of the recording (which could be the
/// head of a longer, partly unobserved pattern), are held fixed. The sampler
/// draws uniformly from all trains sharing the original's pattern encoding by
/// backward counting over start positions and forward sampling.
#[derive(Debug, Clone)]
pub struct PatternPlan {
    layers: Vec<Layer>,
    gap: u64,
    resolution: f64,
    duration: f64,
}

impl PatternPlan {
    pub fn new(train: &SpikeTrain, r: f64, part: &WindowPartition) -> Result<Self> {
        if !train.is_discrete() {
            return Err(JitterError::RequiresDiscrete);
        }
        let r_bins = match GapRule::new(train, r)? {
            GapRule::Bins(b) => b,
            GapRule::Seconds(_) => unreachable!("discrete train"),
        };
        let gap = r_bins + 1;
        let (origin, per) = part.lattice(train.resolution())?;
        let n_full = part.full_windows() as u64;
        let n_bins = train.n_bins()?;
        let bins = train.bins()?;
        let mut layers = Vec::new();
        for span in pattern_spans(train, r)? {
            let first = bins[span.start];
            let offsets: Vec<u64> = bins[span.clone()].iter().map(|&b| b - first).collect();
            let last = bins[span.end - 1];
            let in_full = first >= origin && (first - origin) / per < n_full;
            let near_end = n_bins - last <= r_bins;
            let (lo, hi) = if in_full && !near_end {
                let lo = origin + (first - origin) / per * per;
                let span_len = last - first;
                (lo, (lo + per - 1).min(n_bins - 1 - span_len))
            } else {
                (first, first)
            };
            layers.push(Layer { offsets, lo, suffix: vec![0.0; (hi - lo + 1) as usize] });
        }
        for j in (0..layers.len()).rev() {
            let n = layers[j].suffix.len();
            let mut w = vec![0.0; n];
            if j + 1 == layers.len() {
                w.fill(1.0);
            } else {
                let next = &layers[j + 1];
                let need0 = layers[j].lo + layers[j].span() + gap;
                for (i, wi) in w.iter_mut().enumerate() {
                    let need = need0 + i as u64;
                    let idx = need.saturating_sub(next.lo) as usize;
                    *wi = next.suffix.get(idx).copied().unwrap_or(0.0);
                }
            }
            let layer = &mut layers[j];
            let mut acc = 0.0;
            for i in (0..n).rev() {
                acc += w[i];
                layer.suffix[i] = acc;
            }
            let total = layer.suffix[0];
            if !(total > 0.0) {
                return Err(JitterError::Infeasible(format!("pattern {j} has no admissible placement")));
            }
            layer.suffix.iter_mut().for_each(|x| *x /= total);
        }
        Ok(PatternPlan { layers, gap, resolution: train.resolution(), duration: train.duration() })
    }

    pub fn pattern_count(&self) -> usize {
        self.layers.len()
    }

    /// Number of admissible start bins of each pattern, ignoring its neighbours.
    pub fn start_choices(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.suffix.len()).collect()
    }

    pub fn sample_bins<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.layers.iter().map(|l| l.offsets.len()).sum());
        let mut min_start = 0u64;
        for layer in &self.layers {
            let a = min_start.saturating_sub(layer.lo) as usize;
            let s = &layer.suffix[a..];
            // suffix sums decrease; pick the last index whose suffix >= y
            let y = s[0] * (1.0 - rng.random::<f64>());
            let i = s.partition_point(|&v| v >= y).max(1) - 1;
            let start = layer.lo + (a + i) as u64;
            out.extend(layer.offsets.iter().map(|&o| start + o));
            min_start = start + layer.span() + self.gap;
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpikeTrain> {
        SpikeTrain::from_bins(&self.sample_bins(rng), self.resolution, self.duration)
    }
}

/// One pattern-jitter surrogate of a discrete train (windows `[kΔ, (k+1)Δ)`).
pub fn pattern_jitter<R: Rng + ?Sized>(train: &SpikeTrain, r: f64, delta: f64, rng: &mut R) -> Result<SpikeTrain> {
    let part = WindowPartition::for_train(train, delta)?;
    PatternPlan::new(train, r, &part)?.sample(rng)
}
