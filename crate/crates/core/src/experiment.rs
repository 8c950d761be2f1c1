//! Simulation designs and reproducible output bundles.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{JitterError, Result};
use crate::io::{sha256_hex, write_bands, write_ensemble, write_histogram, write_spikes, DataMeta};
use crate::pattern::pattern_encode;
use crate::pipeline::{analyze, AnalysisConfig, Report, Statistic};
use crate::resample::{Method, PatternPlan, Resampler, SurrogateSpec};
use crate::rng::{purpose, RngStream};
use crate::stats::{psth, sync_pairs};
use crate::synth::{
    burstify, fixed_intensity_trialset, inject_synchrony, sample_cox_trialset, sample_poisson, ConstantRate,
    CoxDesign, Injection, FAMILY_SIGMAS, FIXED_CENTERS,
};
use crate::train::TrialSet;
use crate::window::WindowPartition;

pub const TOOL_NAME: &str = "jitterkit";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Figure {
    #[serde(rename = "fig1")]
    Fig1,
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "fig4")]
    Fig4,
    #[serde(rename = "fig5")]
    Fig5,
    #[serde(rename = "figS13")]
    FigS13,
    #[serde(rename = "bursts")]
    Bursts,
}

impl Figure {
    pub const ALL: [Figure; 7] =
        [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::FigS13, Figure::Bursts];

    pub fn id(&self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::FigS13 => "figS13",
            Figure::Bursts => "bursts",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = JitterError;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| JitterError::Unknown { kind: "figure", name: s.to_string() })
    }
}

/// Parameters of a reproduction run. Every field has a default; see [`Default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Surrogates per analysis.
    pub surrogates: usize,
    pub trials: usize,
    /// Jitter window (s).
    pub delta: f64,
    /// Pattern history (s).
    pub history: f64,
    /// Bump bandwidth of the random-intensity design (s).
    pub sigma: f64,
    /// Injected synchrony rates (Hz).
    pub h_grid: Vec<f64>,
    /// Bandwidths of the fixed-intensity family (s).
    pub sigmas: Vec<f64>,
    /// Datasets drawn for the unconditional distribution.
    pub datasets: usize,
    /// Jitter window of the conditional-distribution study (s).
    pub conditional_delta: f64,
    /// Bin width of discretized data (s).
    pub resolution: f64,
    /// Neurons that are resampled by the jitter engines.
    pub jitter_targets: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            surrogates: 1000,
            trials: 100,
            delta: 0.02,
            history: 0.01,
            sigma: 0.05,
            h_grid: vec![0.0, 0.25, 0.5, 0.75],
            sigmas: FAMILY_SIGMAS.to_vec(),
            datasets: 1000,
            conditional_delta: 0.005,
            resolution: 1.0 / 30000.0,
            jitter_targets: vec![0, 1],
        }
    }
}

fn stream(seed: u64, tag: u64) -> RngStream {
    RngStream::new(seed).derive(tag)
}

/// Random-intensity data with two neurons.
pub fn cox_data(seed: u64, trials: usize, sigma: f64) -> Result<TrialSet> {
    let design = CoxDesign { sigma, ..CoxDesign::default() };
    sample_cox_trialset(&design, trials, 2, &stream(seed, purpose::DATA))
}

fn split_donor(ts: TrialSet) -> Result<(TrialSet, TrialSet)> {
    let len = ts.trial_length();
    let mut trains = ts.into_trains();
    let donor = trains.split_off(2);
    Ok((TrialSet::new(trains, len)?, TrialSet::new(donor, len)?))
}

/// Random-intensity data with synchrony injected at rate `h` (Hz). The two
/// base neurons equal [`cox_data`] for the same seed.
pub fn injected_data(seed: u64, trials: usize, sigma: f64, h: f64) -> Result<TrialSet> {
    let design = CoxDesign { sigma, ..CoxDesign::default() };
    let (base, donor) = split_donor(sample_cox_trialset(&design, trials, 3, &stream(seed, purpose::DATA))?)?;
    inject_synchrony(&base, &donor, &Injection::new(h), &stream(seed, purpose::INJECTION))
}

/// Bursting version of [`injected_data`], discretized at `resolution`.
pub fn burst_data(seed: u64, trials: usize, sigma: f64, h: f64, resolution: f64) -> Result<TrialSet> {
    let design = CoxDesign { sigma, ..CoxDesign::default() };
    let (base, donor) = split_donor(sample_cox_trialset(&design, trials, 3, &stream(seed, purpose::DATA))?)?;
    let bursty = burstify(&base, &stream(seed, purpose::BURST))?;
    let ts = inject_synchrony(&bursty, &donor, &Injection::new(h), &stream(seed, purpose::INJECTION))?;
    discretize_set(&ts, resolution)
}

pub fn discretize_set(ts: &TrialSet, resolution: f64) -> Result<TrialSet> {
    let trains = (0..ts.neurons())
        .map(|n| ts.neuron_trains(n).iter().map(|t| t.discretize(resolution)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    TrialSet::new(trains, ts.trial_length())
}

/// Fixed-intensity family member with bandwidth `sigma`.
pub fn family_data(seed: u64, trials: usize, sigma: f64) -> Result<TrialSet> {
    fixed_intensity_trialset(sigma, 10.0, &FIXED_CENTERS, trials, 2, &stream(seed, purpose::DATA))
}

/// Independent homogeneous Poisson neurons at the given rates.
pub fn poisson_pair(stream: &RngStream, trials: usize, rates: [f64; 2]) -> Result<TrialSet> {
    let trains = rates
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            (0..trials)
                .map(|k| sample_poisson(&ConstantRate(r), 1.0, &mut stream.derive_path(&[i as u64, k as u64]).rng()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    TrialSet::new(trains, 1.0)
}

/// Files written by a reproduction, relative to its output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub figure: String,
    pub files: Vec<String>,
    pub reports: Vec<Report>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    figure: &'a str,
    seed: u64,
    config_sha256: String,
    config: &'a ExperimentConfig,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut f = self.create(name)?;
        serde_json::to_writer_pretty(&mut f, value)?;
        std::io::Write::write_all(&mut f, b"\n")?;
        Ok(())
    }

    fn spikes(&mut self, name: &str, ts: &TrialSet) -> Result<()> {
        write_spikes(ts, self.create(name)?)?;
        let meta = name.trim_end_matches(".csv").to_string() + ".json";
        self.json(&meta, &DataMeta::of(ts))
    }

    /// Runs one analysis and writes its ensemble, bands and report under `prefix`.
    fn analysis(&mut self, prefix: &str, data: &TrialSet, config: &AnalysisConfig) -> Result<Report> {
        let a = analyze(data, config)?;
        write_ensemble(&a.ensemble, &a.grid, self.create(&format!("{prefix}ensemble.csv"))?)?;
        let mut report = a.report;
        if let (Some(b), Some(c)) = (&a.bands, &a.corrected) {
            let name = format!("{prefix}bands.csv");
            write_bands(&a.grid, &a.ensemble, b, c, self.create(&name)?)?;
            report.band_csv = Some(name);
        }
        self.json(&format!("{prefix}report.json"), &report)?;
        Ok(report)
    }
}

fn spec(cfg: &ExperimentConfig, method: Method, delta: f64, targets: Vec<usize>) -> SurrogateSpec {
    SurrogateSpec {
        method,
        delta,
        history: cfg.history,
        n_surrogates: cfg.surrogates,
        jitter_targets: targets,
        seed: cfg.seed,
        ..SurrogateSpec::default()
    }
}

fn cch_config(spec: SurrogateSpec) -> AnalysisConfig {
    AnalysisConfig { spec, statistic: Statistic::Cch { a: 0, b: 1 }, heuristic: false }
}

/// Runs a reproduction and writes its bundle (including `manifest.json`) into `out`.
pub fn run_reproduction(figure: Figure, cfg: &ExperimentConfig, out: &Path) -> Result<Bundle> {
    if cfg.trials == 0 || cfg.surrogates == 0 {
        return Err(JitterError::param("trials", "trials and surrogates must be >= 1"));
    }
    fs::create_dir_all(out)?;
    let mut w = Writer { dir: out.to_path_buf(), files: Vec::new() };
    let config_text = serde_json::to_string(cfg)?;
    w.json(
        "manifest.json",
        &Manifest {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            figure: figure.id(),
            seed: cfg.seed,
            config_sha256: sha256_hex(config_text.as_bytes()),
            config: cfg,
        },
    )?;
    let mut reports = Vec::new();
    match figure {
        Figure::Fig1 | Figure::Fig2 => {
            let data = cox_data(cfg.seed, cfg.trials, cfg.sigma)?;
            w.spikes("spikes.csv", &data)?;
            write_psth(&mut w, &data)?;
            let s = if figure == Figure::Fig1 {
                spec(cfg, Method::TrialShuffle, cfg.delta, vec![0])
            } else {
                spec(cfg, Method::IntervalJitter, cfg.delta, cfg.jitter_targets.clone())
            };
            reports.push(w.analysis("", &data, &cch_config(s))?);
        }
        Figure::Fig3 => {
            for &h in &cfg.h_grid {
                let data = injected_data(cfg.seed, cfg.trials, cfg.sigma, h)?;
                let prefix = format!("h{h}/");
                w.spikes(&format!("{prefix}spikes.csv"), &data)?;
                let s = spec(cfg, Method::IntervalJitter, cfg.delta, cfg.jitter_targets.clone());
                reports.push(w.analysis(&prefix, &data, &cch_config(s))?);
            }
        }
        Figure::Fig4 => {
            for &sigma in &cfg.sigmas {
                let data = family_data(cfg.seed, cfg.trials, sigma)?;
                let prefix = format!("sigma{sigma}/");
                w.spikes(&format!("{prefix}spikes.csv"), &data)?;
                let s = spec(cfg, Method::IntervalJitter, cfg.delta, cfg.jitter_targets.clone());
                reports.push(w.analysis(&prefix, &data, &cch_config(s))?);
            }
        }
        Figure::Fig5 => write_pattern_examples(&mut w, cfg)?,
        Figure::FigS13 => reports.extend(write_conditional_study(&mut w, cfg)?),
        Figure::Bursts => {
            for &h in &cfg.h_grid {
                let data = burst_data(cfg.seed, cfg.trials, cfg.sigma, h, cfg.resolution)?;
                let prefix = format!("h{h}/");
                w.spikes(&format!("{prefix}spikes.csv"), &data)?;
                for method in [Method::IntervalJitterDiscrete, Method::PatternJitter] {
                    let s = spec(cfg, method, cfg.delta, cfg.jitter_targets.clone());
                    reports.push(w.analysis(&format!("{prefix}{}/", method.name()), &data, &cch_config(s))?);
                }
            }
        }
    }
    let bundle = Bundle { figure: figure.id().to_string(), files: w.files.clone(), reports };
    w.json("bundle.json", &bundle)?;
    Ok(bundle)
}

fn write_psth(w: &mut Writer, data: &TrialSet) -> Result<()> {
    let curves = (0..data.neurons()).map(|n| psth(data, n)).collect::<Result<Vec<_>>>()?;
    let mut out = csv_writer(w.create("psth.csv")?);
    let mut header = vec!["t".to_string()];
    header.extend((0..curves.len()).map(|n| format!("neuron{n}")));
    write_row(&mut out, &header)?;
    for (j, t) in curves[0].times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(curves.iter().map(|c| c.rate[j].to_string()));
        write_row(&mut out, &row)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_writer(f: BufWriter<File>) -> csv::Writer<BufWriter<File>> {
    csv::Writer::from_writer(f)
}

fn write_row(w: &mut csv::Writer<BufWriter<File>>, row: &[String]) -> Result<()> {
    w.write_record(row).map_err(|e| JitterError::Io(std::io::Error::other(e.to_string())))
}

/// Example pattern-jitter surrogates of one bursting discrete train.
fn write_pattern_examples(w: &mut Writer, cfg: &ExperimentConfig) -> Result<()> {
    let data = burst_data(cfg.seed, 1, cfg.sigma, 0.0, cfg.resolution)?;
    let train = data.train(0, 0);
    let one = TrialSet::new(vec![vec![train.clone()]], train.duration())?;
    w.spikes("original.csv", &one)?;
    let mut out = csv_writer(w.create("surrogates.csv")?);
    write_row(&mut out, &["delta".into(), "R".into(), "surrogate".into(), "time_s".into()])?;
    let examples = 5;
    for &delta in &[0.005, 0.02] {
        for &r in &[0.0, 0.005, 0.02] {
            let part = WindowPartition::for_train(train, delta)?;
            let plan = PatternPlan::new(train, r, &part)?;
            let encoding = pattern_encode(train, r, &part)?;
            for i in 0..examples {
                let mut rng = RngStream::new(cfg.seed).derive_path(&[purpose::SURROGATE, i as u64]).rng();
                let s = plan.sample(&mut rng)?;
                debug_assert_eq!(pattern_encode(&s, r, &part)?, encoding);
                for t in s.times() {
                    write_row(&mut out, &[delta.to_string(), r.to_string(), (i + 1).to_string(), t.to_string()])?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Unconditional and conditional distributions of the synchrony count for
/// independent 50 Hz and 25 Hz Poisson neurons.
fn write_conditional_study(w: &mut Writer, cfg: &ExperimentConfig) -> Result<Vec<Report>> {
    let base = stream(cfg.seed, purpose::REPLICATE);
    let count = |ts: &TrialSet| -> Result<i64> { Ok(sync_pairs(ts, 0, 1, 0.001)? as i64) };
    let values = crate::resample::with_workers(0, || {
        use rayon::prelude::*;
        (0..cfg.datasets)
            .into_par_iter()
            .map(|d| count(&poisson_pair(&base.derive(d as u64), cfg.trials, [50.0, 25.0])?))
            .collect::<Result<Vec<i64>>>()
    })??;
    let mut hist = BTreeMap::new();
    for v in values {
        *hist.entry(v).or_insert(0u64) += 1;
    }
    write_histogram(&hist, w.create("unconditional.csv")?)?;
    let mut reports = Vec::new();
    for d in 0..4 {
        let data = poisson_pair(&base.derive(d as u64), cfg.trials, [50.0, 25.0])?;
        let mut s = spec(cfg, Method::IntervalJitter, cfg.conditional_delta, cfg.jitter_targets.clone());
        s.seed = s.seed.wrapping_add(d as u64);
        let config = AnalysisConfig { spec: s, statistic: Statistic::SyncPairs { a: 0, b: 1, tol: 0.001 }, heuristic: false };
        let resampler = Resampler::new(config.spec.clone(), data.clone())?;
        let vals = resampler.evaluate(|ts| count(ts))?;
        let mut hist = BTreeMap::new();
        for &v in &vals[1..] {
            *hist.entry(v).or_insert(0u64) += 1;
        }
        write_histogram(&hist, w.create(&format!("conditional{}.csv", d + 1))?)?;
        let prefix = format!("conditional{}/", d + 1);
        reports.push(w.analysis(&prefix, &data, &config)?);
    }
    Ok(reports)
}
