//! Pattern decomposition and the pattern-encoding statistic.
//!
//! With history length `R`, a pattern is a maximal run of spikes whose
//! consecutive gaps are all `<= R`; distinct patterns are separated by gaps `> R`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::train::{snapped_floor, SpikeTrain};
use crate::window::WindowPartition;

/// Absolute slack (seconds) when comparing a continuous gap against `R`.
const GAP_TOL: f64 = 1e-12;

/// Decides whether consecutive spikes belong to the same pattern.
#[derive(Debug, Clone, Copy)]
pub(crate) enum GapRule {
    Bins(u64),
    Seconds(f64),
}

impl GapRule {
    pub(crate) fn new(train: &SpikeTrain, r: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(JitterError::param("R", format!("history length must be >= 0, got {r}")));
        }
        Ok(if train.is_discrete() {
            GapRule::Bins(snapped_floor(r / train.resolution()).max(0) as u64)
        } else {
            GapRule::Seconds(r)
        })
    }

    fn joins_bins(&self, gap: u64) -> bool {
        match *self {
            GapRule::Bins(max) => gap <= max,
            GapRule::Seconds(_) => unreachable!(),
        }
    }

    fn joins_seconds(&self, gap: f64) -> bool {
        match *self {
            GapRule::Seconds(r) => gap <= r + GAP_TOL,
            GapRule::Bins(_) => unreachable!(),
        }
    }
}

/// Index ranges of the patterns of `train`, in time order.
pub fn pattern_spans(train: &SpikeTrain, r: f64) -> Result<Vec<Range<usize>>> {
    let rule = GapRule::new(train, r)?;
    let n = train.len();
    let mut spans = Vec::new();
    if n == 0 {
        return Ok(spans);
    }
    let joined: Vec<bool> = if train.is_discrete() {
        let bins = train.bins()?;
        bins.windows(2).map(|w| rule.joins_bins(w[1] - w[0])).collect()
    } else {
        train.times().windows(2).map(|w| rule.joins_seconds(w[1] - w[0])).collect()
    };
    let mut start = 0;
    for (i, &j) in joined.iter().enumerate() {
        if !j {
            spans.push(start..i + 1);
            start = i + 1;
        }
    }
    spans.push(start..n);
    Ok(spans)
}

/// Splits `train` into its patterns.
pub fn pattern_decompose(train: &SpikeTrain, r: f64) -> Result<Vec<Vec<f64>>> {
    Ok(pattern_spans(train, r)?
        .into_iter()
        .map(|s| train.times()[s].to_vec())
        .collect())
}

/// One row of the encoding matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternRow {
    /// The spike starts a pattern; `window` is the zero-based jitter window holding it.
    Start { window: i64 },
    /// The spike continues a pattern; `gap` is the preceding interspike interval.
    Within { gap: f64 },
}

/// The per-spike encoding of the pattern sequence and of the windows holding each
/// pattern start. Two trains share an encoding iff they have the same patterns and
/// the same pattern-start windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternEncoding {
    pub history: f64,
    pub rows: Vec<PatternRow>,
}

impl PatternEncoding {
    pub fn pattern_count(&self) -> usize {
        self.rows.iter().filter(|r| matches!(r, PatternRow::Start { .. })).count()
    }
}

pub fn pattern_encode(train: &SpikeTrain, r: f64, part: &WindowPartition) -> Result<PatternEncoding> {
    let spans = pattern_spans(train, r)?;
    let mut rows = Vec::with_capacity(train.len());
    let times = train.times();
    let bins = if train.is_discrete() { Some(train.bins()?) } else { None };
    let lattice = match &bins {
        Some(_) => Some(part.lattice(train.resolution())?),
        None => None,
    };
    for span in spans {
        for i in span.clone() {
            if i == span.start {
                let window = match (&bins, lattice) {
                    (Some(b), Some((origin, per))) => (b[i] as i64 - origin as i64).div_euclid(per as i64),
                    _ => snapped_floor((times[i] - part.origin()) / part.delta()),
                };
                rows.push(PatternRow::Start { window });
            } else {
                let gap = match &bins {
                    Some(b) => (b[i] - b[i - 1]) as f64 * train.resolution(),
                    None => times[i] - times[i - 1],
                };
                rows.push(PatternRow::Within { gap });
            }
        }
    }
    Ok(PatternEncoding { history: r, rows })
}
