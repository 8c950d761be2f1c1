//! Jitter-window partitions and the interval counts they induce.

use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::train::{snap_to_integer, snapped_floor, SpikeTrain};

/// Half-open windows `[origin + kΔ, origin + (k+1)Δ)`, `k = 0, 1, ...`, tiling
/// `[origin, end)`. A trailing window shorter than Δ is *frozen*: its spikes are
/// conditioned on and never moved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPartition {
    delta: f64,
    origin: f64,
    end: f64,
}

/// Where a time falls in a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// Zero-based index of a full window.
    Window(usize),
    /// Outside the full windows (trailing partial window, or outside the span).
    Frozen,
}

impl WindowPartition {
    pub fn new(delta: f64, origin: f64, end: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(JitterError::param("delta", format!("window length must be positive, got {delta}")));
        }
        if !(end > origin) {
            return Err(JitterError::param("end", "partition span is empty"));
        }
        Ok(WindowPartition { delta, origin, end })
    }

    /// Partition of `[0, train.duration())`.
    pub fn for_train(train: &SpikeTrain, delta: f64) -> Result<Self> {
        Self::new(delta, 0.0, train.duration())
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Number of full-length windows.
    pub fn full_windows(&self) -> usize {
        snapped_floor((self.end - self.origin) / self.delta).max(0) as usize
    }

    pub fn has_frozen_tail(&self) -> bool {
        let covered = self.origin + self.full_windows() as f64 * self.delta;
        self.end - covered > crate::train::SNAP_TOL * self.end.abs().max(1.0)
    }

    /// Left edge of window `k`.
    pub fn window_start(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.delta
    }

    pub fn slot(&self, t: f64) -> Slot {
        let k = snapped_floor((t - self.origin) / self.delta);
        if k < 0 || k as usize >= self.full_windows() {
            Slot::Frozen
        } else {
            Slot::Window(k as usize)
        }
    }

    /// Lattice description of the partition for a discrete train: first bin of
    /// window 0 and bins per window. Δ and the origin must be whole numbers of bins.
    pub fn lattice(&self, resolution: f64) -> Result<(u64, u64)> {
        let per = snap_to_integer(self.delta / resolution)
            .filter(|&n| n > 0)
            .ok_or_else(|| JitterError::param("delta", "must be a whole number of time bins"))?;
        let origin = snap_to_integer(self.origin / resolution)
            .filter(|&n| n >= 0)
            .ok_or_else(|| JitterError::param("origin", "must be a non-negative whole number of time bins"))?;
        Ok((origin as u64, per as u64))
    }
}

/// Spike counts per full window plus the frozen spikes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCounts {
    pub counts: Vec<u32>,
    pub frozen: Vec<f64>,
}

impl IntervalCounts {
    pub fn total(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }
}

/// Counts the spikes of `train` in every full window of `part`.
pub fn interval_counts(train: &SpikeTrain, part: &WindowPartition) -> Result<IntervalCounts> {
    let mut counts = vec![0u32; part.full_windows()];
    let mut frozen = Vec::new();
    if train.is_discrete() {
        let (origin, per) = part.lattice(train.resolution())?;
        let n_full = counts.len() as u64;
        for (b, &t) in train.bins()?.into_iter().zip(train.times()) {
            if b >= origin && (b - origin) / per < n_full {
                counts[((b - origin) / per) as usize] += 1;
            } else {
                frozen.push(t);
            }
        }
    } else {
        for &t in train.times() {
            match part.slot(t) {
                Slot::Window(k) => counts[k] += 1,
                Slot::Frozen => frozen.push(t),
            }
        }
    }
    Ok(IntervalCounts { counts, frozen })
}
