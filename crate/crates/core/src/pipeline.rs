//! Statistic selection and the analysis pipeline shared by the CLI and bindings.

use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::infer::{corrected_curve, mc_pvalue, BandSet, Corrected, SurrogateEnsemble, MIN_BAND_SURROGATES};
use crate::resample::{Resampler, SurrogateSpec};
use crate::stats::{
    cch, psth, repeating_triplets, sync_pairs, sync_participation_trials, CCH_MAX_INDEX, CCH_STEP, PSTH_GRID,
};
use crate::train::TrialSet;

fn default_tol() -> f64 {
    0.001
}

/// A statistic computed on original and surrogate datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Statistic {
    /// CCH of `b` relative to `a`; the p-value is taken at lag 0.
    Cch { a: usize, b: usize },
    /// Number of pairs within `±tol`.
    SyncPairs {
        a: usize,
        b: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Spikes of `jittered` within `tol` of a `reference` spike.
    SyncParticipation {
        jittered: usize,
        reference: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Largest repeating-triplet count of one neuron.
    MaxTriplets { neuron: usize },
    /// PSTH of one neuron (no p-value).
    Psth { neuron: usize },
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Cch { .. } => "cch",
            Statistic::SyncPairs { .. } => "sync_pairs",
            Statistic::SyncParticipation { .. } => "sync_participation",
            Statistic::MaxTriplets { .. } => "max_triplets",
            Statistic::Psth { .. } => "psth",
        }
    }

    pub fn evaluate(&self, ts: &TrialSet) -> Result<Vec<f64>> {
        Ok(match *self {
            Statistic::Cch { a, b } => cch(ts, a, b)?.as_f64(),
            Statistic::SyncPairs { a, b, tol } => vec![sync_pairs(ts, a, b, tol)? as f64],
            Statistic::SyncParticipation { jittered, reference, tol } => {
                vec![sync_participation_trials(ts, jittered, reference, tol)? as f64]
            }
            Statistic::MaxTriplets { neuron } => vec![repeating_triplets(ts, neuron)?.max_value() as f64],
            Statistic::Psth { neuron } => psth(ts, neuron)?.rate,
        })
    }

    /// Grid coordinates of the evaluated values.
    pub fn grid(&self, ts: &TrialSet) -> Vec<f64> {
        match self {
            Statistic::Cch { .. } => (-CCH_MAX_INDEX..=CCH_MAX_INDEX).map(|i| i as f64 * CCH_STEP).collect(),
            Statistic::Psth { .. } => {
                let n = crate::train::snapped_floor(ts.trial_length() / PSTH_GRID);
                (1..n.max(1)).map(|i| i as f64 * PSTH_GRID).collect()
            }
            _ => vec![0.0],
        }
    }

    /// Grid point tested by the p-value, if any.
    pub fn focus(&self) -> Option<usize> {
        match self {
            Statistic::Cch { .. } => Some(CCH_MAX_INDEX as usize),
            Statistic::Psth { .. } => None,
            _ => Some(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub spec: SurrogateSpec,
    pub statistic: Statistic,
    /// Allows p-values from heuristic (basic jitter) surrogates.
    #[serde(default)]
    pub heuristic: bool,
}

/// Summary of one analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: String,
    pub delta: f64,
    #[serde(rename = "R")]
    pub history: f64,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
    pub statistic: String,
    pub heuristic: bool,
    pub original: Option<f64>,
    pub surrogate_mean: Option<f64>,
    pub corrected: Option<f64>,
    pub p_value: Option<f64>,
    pub reject_pointwise: Option<bool>,
    pub reject_simultaneous: Option<bool>,
    pub reject_simultaneous_lower: Option<bool>,
    pub reject_simultaneous_upper: Option<bool>,
    pub degenerate_points: usize,
    pub band_csv: Option<String>,
}

pub struct Analysis {
    pub grid: Vec<f64>,
    pub ensemble: SurrogateEnsemble,
    pub bands: Option<BandSet>,
    pub corrected: Option<Corrected>,
    pub report: Report,
}

/// Builds the surrogate ensemble of `config.statistic` and derives p-value and bands.
/// Bands need at least [`MIN_BAND_SURROGATES`] surrogates and are omitted otherwise.
pub fn analyze(data: &TrialSet, config: &AnalysisConfig) -> Result<Analysis> {
    if config.spec.method.is_heuristic() && !config.heuristic {
        return Err(JitterError::HeuristicRefused);
    }
    let resampler = Resampler::new(config.spec.clone(), data.clone())?;
    let stat = &config.statistic;
    let curves = resampler.evaluate(|ts| stat.evaluate(ts))?;
    let ensemble = SurrogateEnsemble::new(curves)?;
    let grid = stat.grid(data);
    let (bands, corrected) = if ensemble.m() >= MIN_BAND_SURROGATES {
        let b = BandSet::new(&ensemble)?;
        let c = corrected_curve(&ensemble, &b);
        (Some(b), Some(c))
    } else {
        (None, None)
    };
    let focus = stat.focus();
    let p_value = focus.map(|j| mc_pvalue(&ensemble.column(j))).transpose()?;
    let mean = ensemble.mean();
    let spec = &config.spec;
    let report = Report {
        method: spec.method.name().to_string(),
        delta: spec.delta,
        history: spec.history,
        epsilon: spec.epsilon,
        m: ensemble.m(),
        seed: spec.seed,
        statistic: stat.name().to_string(),
        heuristic: spec.method.is_heuristic(),
        original: focus.map(|j| ensemble.original()[j]),
        surrogate_mean: focus.map(|j| mean[j]),
        corrected: focus.map(|j| ensemble.original()[j] - mean[j]),
        p_value,
        reject_pointwise: match (&bands, focus) {
            (Some(b), Some(j)) => Some(b.pointwise.exits(ensemble.original())[j]),
            _ => None,
        },
        reject_simultaneous: bands.as_ref().map(|b| b.simultaneous.reject()),
        reject_simultaneous_lower: bands.as_ref().map(|b| b.simultaneous.reject_lower()),
        reject_simultaneous_upper: bands.as_ref().map(|b| b.simultaneous.reject_upper()),
        degenerate_points: bands.as_ref().map_or(0, |b| b.simultaneous.degenerate.iter().filter(|&&d| d).count()),
        band_csv: None,
    };
    Ok(Analysis { grid, ensemble, bands, corrected, report })
}
