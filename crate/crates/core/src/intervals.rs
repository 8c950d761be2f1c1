//! Finite unions of disjoint half-open intervals.

use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};

/// A normalized union of disjoint, non-empty half-open intervals `[a, b)`,
/// sorted by left edge.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    parts: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    /// Builds the union of `intervals`, merging overlaps and touching ends and
    /// dropping empty pieces.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.iter().any(|&(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(JitterError::param("interval", "endpoints must be finite"));
        }
        intervals.retain(|&(a, b)| b > a);
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut parts: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match parts.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => parts.push((a, b)),
            }
        }
        Ok(IntervalSet { parts })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    /// `[t - radius, t + radius)` around every point.
    pub fn around_points(points: &[f64], radius: f64) -> Result<Self> {
        Self::new(points.iter().map(|&t| (t - radius, t + radius)).collect())
    }

    pub fn parts(&self) -> &[(f64, f64)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.parts.partition_point(|&(a, _)| a <= x);
        i > 0 && x < self.parts[i - 1].1
    }

    /// Intersection with `[lo, hi)`.
    pub fn clip(&self, lo: f64, hi: f64) -> IntervalSet {
        let start = self.parts.partition_point(|&(_, b)| b <= lo);
        let parts = self.parts[start..]
            .iter()
            .take_while(|&&(a, _)| a < hi)
            .map(|&(a, b)| (a.max(lo), b.min(hi)))
            .filter(|&(a, b)| b > a)
            .collect();
        IntervalSet { parts }
    }

    /// The part inside `[lo, lo + width)`, mapped affinely onto `[0, 1)`.
    pub fn normalized(&self, lo: f64, width: f64) -> IntervalSet {
        let parts = self
            .clip(lo, lo + width)
            .parts
            .into_iter()
            .map(|(a, b)| (((a - lo) / width).clamp(0.0, 1.0), ((b - lo) / width).clamp(0.0, 1.0)))
            .filter(|&(a, b)| b > a)
            .collect();
        IntervalSet { parts }
    }

    /// `∫ g` over the set, given an antiderivative `big_g`.
    pub fn integrate_with(&self, big_g: impl Fn(f64) -> f64) -> f64 {
        self.parts.iter().map(|&(a, b)| big_g(b) - big_g(a)).sum()
    }

    /// `∫ (2x - 1) dx` over the set.
    pub fn linear_moment(&self) -> f64 {
        self.parts.iter().map(|&(a, b)| (b - a) * (a + b - 1.0)).sum()
    }
}
