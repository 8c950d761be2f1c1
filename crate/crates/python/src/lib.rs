//! Python bindings: spike containers, surrogate generation, statistics and tests.

use std::path::PathBuf;

use jitter_core::experiment::{self, ExperimentConfig, Figure};
use jitter_core::infer::{self, SurrogateEnsemble};
use jitter_core::io::{read_meta, read_spikes_path, write_spikes, DataMeta};
use jitter_core::pipeline::{AnalysisConfig, Statistic};
use jitter_core::{resample, stats, tilt, IntervalSet, JitterError, Method};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn err(e: JitterError) -> PyErr {
    match e {
        JitterError::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py(py: Python<'_>, text: serde_json::Result<String>) -> PyResult<Py<PyAny>> {
    let text = text.map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// One spike train: sorted times in `[0, duration)`, on a lattice when `resolution > 0`.
#[pyclass(name = "SpikeTrain", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpikeTrain(jitter_core::SpikeTrain);

#[pymethods]
impl PySpikeTrain {
    #[new]
    #[pyo3(signature = (times, duration, resolution = 0.0))]
    fn new(times: Vec<f64>, duration: f64, resolution: f64) -> PyResult<Self> {
        jitter_core::SpikeTrain::from_unsorted(times, resolution, duration).map(PySpikeTrain).map_err(err)
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times().to_vec()
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.0.duration()
    }

    #[getter]
    fn resolution(&self) -> f64 {
        self.0.resolution()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("SpikeTrain(n={}, duration={}, resolution={})", self.0.len(), self.0.duration(), self.0.resolution())
    }
}

/// Spike trains indexed by neuron and trial.
#[pyclass(name = "TrialSet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTrialSet(jitter_core::TrialSet);

#[pymethods]
impl PyTrialSet {
    /// `trains[neuron][trial]` is a list of spike times.
    #[new]
    #[pyo3(signature = (trains, trial_length, resolution = 0.0))]
    fn new(trains: Vec<Vec<Vec<f64>>>, trial_length: f64, resolution: f64) -> PyResult<Self> {
        let trains = trains
            .into_iter()
            .map(|n| {
                n.into_iter()
                    .map(|t| jitter_core::SpikeTrain::from_unsorted(t, resolution, trial_length))
                    .collect::<jitter_core::Result<Vec<_>>>()
            })
            .collect::<jitter_core::Result<Vec<_>>>()
            .map_err(err)?;
        jitter_core::TrialSet::new(trains, trial_length).map(PyTrialSet).map_err(err)
    }

    /// Reads a spike CSV and its JSON sidecar (defaults to the CSV path with `.json`).
    #[staticmethod]
    #[pyo3(signature = (path, meta = None))]
    fn read_csv(path: PathBuf, meta: Option<PathBuf>) -> PyResult<Self> {
        let meta = read_meta(&meta.unwrap_or_else(|| path.with_extension("json"))).map_err(err)?;
        read_spikes_path(&path, &meta).map(PyTrialSet).map_err(err)
    }

    /// Writes the CSV and its `.json` sidecar.
    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        let f = std::fs::File::create(&path)?;
        write_spikes(&self.0, f).map_err(err)?;
        let meta = serde_json::to_string_pretty(&DataMeta::of(&self.0)).map_err(|e| PyValueError::new_err(e.to_string()))?;
        std::fs::write(path.with_extension("json"), meta + "\n")?;
        Ok(())
    }

    #[getter]
    fn neurons(&self) -> usize {
        self.0.neurons()
    }

    #[getter]
    fn trials(&self) -> usize {
        self.0.trials()
    }

    #[getter]
    fn trial_length(&self) -> f64 {
        self.0.trial_length()
    }

    #[getter]
    fn resolution(&self) -> f64 {
        self.0.resolution()
    }

    fn train(&self, neuron: usize, trial: usize) -> PyResult<PySpikeTrain> {
        if neuron >= self.0.neurons() || trial >= self.0.trials() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(PySpikeTrain(self.0.train(neuron, trial).clone()))
    }

    fn spike_count(&self, neuron: usize) -> usize {
        self.0.spike_count(neuron)
    }

    fn __repr__(&self) -> String {
        format!("TrialSet(neurons={}, trials={}, trial_length={})", self.0.neurons(), self.0.trials(), self.0.trial_length())
    }
}

/// Reproducible surrogate generator for one dataset.
#[pyclass(name = "Resampler", frozen)]
struct PyResampler(jitter_core::Resampler);

#[pymethods]
impl PyResampler {
    #[new]
    #[pyo3(signature = (data, method = "interval_jitter", delta = 0.02, n_surrogates = 1000, seed = 0, history = 0.0, epsilon = 0.0, targets = vec![0], reference = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        data: &PyTrialSet,
        method: &str,
        delta: f64,
        n_surrogates: usize,
        seed: u64,
        history: f64,
        epsilon: f64,
        targets: Vec<usize>,
        reference: Option<usize>,
    ) -> PyResult<Self> {
        let spec = spec(method, delta, n_surrogates, seed, history, epsilon, targets, reference)?;
        jitter_core::Resampler::new(spec, data.0.clone()).map(PyResampler).map_err(err)
    }

    /// Surrogate `i` (1-based); depends only on the seed and `i`.
    fn surrogate(&self, i: usize) -> PyResult<PyTrialSet> {
        self.0.surrogate(i).map(PyTrialSet).map_err(err)
    }
}

#[allow(clippy::too_many_arguments)]
fn spec(
    method: &str,
    delta: f64,
    n_surrogates: usize,
    seed: u64,
    history: f64,
    epsilon: f64,
    targets: Vec<usize>,
    reference: Option<usize>,
) -> PyResult<jitter_core::SurrogateSpec> {
    let method: Method = method.parse().map_err(err)?;
    Ok(jitter_core::SurrogateSpec {
        history,
        epsilon,
        jitter_targets: targets,
        reference,
        ..jitter_core::SurrogateSpec::new(method, delta, n_surrogates, seed)
    })
}

#[pyfunction]
#[pyo3(signature = (train, delta, seed = 0))]
fn interval_jitter(train: &PySpikeTrain, delta: f64, seed: u64) -> PyResult<PySpikeTrain> {
    resample::interval_jitter(&train.0, delta, &mut jitter_core::RngStream::new(seed).rng()).map(PySpikeTrain).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (train, delta, seed = 0))]
fn interval_jitter_discrete(train: &PySpikeTrain, delta: f64, seed: u64) -> PyResult<PySpikeTrain> {
    resample::interval_jitter_discrete(&train.0, delta, &mut jitter_core::RngStream::new(seed).rng()).map(PySpikeTrain).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (train, history, delta, seed = 0))]
fn pattern_jitter(train: &PySpikeTrain, history: f64, delta: f64, seed: u64) -> PyResult<PySpikeTrain> {
    resample::pattern_jitter(&train.0, history, delta, &mut jitter_core::RngStream::new(seed).rng()).map(PySpikeTrain).map_err(err)
}

/// `(lags, counts)` of the cross-correlation histogram of neuron `b` against `a`.
#[pyfunction]
fn cch(data: &PyTrialSet, a: usize, b: usize) -> PyResult<(Vec<f64>, Vec<u64>)> {
    let c = stats::cch(&data.0, a, b).map_err(err)?;
    Ok((c.lags, c.values))
}

#[pyfunction]
#[pyo3(signature = (data, a, b, tol = 0.001))]
fn sync_pairs(data: &PyTrialSet, a: usize, b: usize, tol: f64) -> PyResult<u64> {
    stats::sync_pairs(&data.0, a, b, tol).map_err(err)
}

/// `(times, rate)` in Hz.
#[pyfunction]
fn psth(data: &PyTrialSet, neuron: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = stats::psth(&data.0, neuron).map_err(err)?;
    Ok((p.times, p.rate))
}

#[pyfunction]
fn mc_pvalue(values: Vec<f64>) -> PyResult<f64> {
    infer::mc_pvalue(&values).map_err(err)
}

/// Pointwise and simultaneous bands of `curves[0]` (original) against `curves[1..]`.
#[pyfunction]
fn acceptance_bands(py: Python<'_>, curves: Vec<Vec<f64>>) -> PyResult<Py<PyAny>> {
    let ens = SurrogateEnsemble::new(curves).map_err(err)?;
    let bands = infer::BandSet::new(&ens).map_err(err)?;
    to_py(py, serde_json::to_string(&bands))
}

/// Exact p-value of the participation of `jittered` in synchrony with `reference`.
#[pyfunction]
#[pyo3(signature = (jittered, reference, delta, tol = 0.001))]
fn exact_sync_test(py: Python<'_>, jittered: &PySpikeTrain, reference: &PySpikeTrain, delta: f64, tol: f64) -> PyResult<Py<PyAny>> {
    to_py(py, serde_json::to_string(&infer::exact_sync_test(&jittered.0, &reference.0, delta, tol).map_err(err)?))
}

/// Extremal density over `[0, 1)` for the target intervals; `kind` is
/// `unconstrained` or `linear`.
#[pyfunction]
#[pyo3(signature = (intervals, epsilon, kind = "unconstrained"))]
fn extremal_density(py: Python<'_>, intervals: Vec<(f64, f64)>, epsilon: f64, kind: &str) -> PyResult<Py<PyAny>> {
    let r = IntervalSet::new(intervals).map_err(err)?;
    let f = match kind {
        "unconstrained" => tilt::fstar_unconstrained(&r, epsilon),
        "linear" => tilt::fstar_linear(&r, epsilon),
        _ => return Err(PyValueError::new_err(format!("unknown kind `{kind}`"))),
    }
    .map_err(err)?;
    to_py(py, serde_json::to_string(&f))
}

/// Runs the analysis pipeline; `statistic` is a dict such as `{"name": "cch", "a": 0, "b": 1}`.
#[pyfunction]
#[pyo3(signature = (data, statistic, method = "interval_jitter", delta = 0.02, n_surrogates = 1000, seed = 0, history = 0.0, epsilon = 0.0, targets = vec![0], reference = None, heuristic = false))]
#[allow(clippy::too_many_arguments)]
fn analyze(
    py: Python<'_>,
    data: &PyTrialSet,
    statistic: &Bound<'_, PyAny>,
    method: &str,
    delta: f64,
    n_surrogates: usize,
    seed: u64,
    history: f64,
    epsilon: f64,
    targets: Vec<usize>,
    reference: Option<usize>,
    heuristic: bool,
) -> PyResult<Py<PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (statistic,))?.extract()?;
    let statistic: Statistic = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let config = AnalysisConfig {
        spec: spec(method, delta, n_surrogates, seed, history, epsilon, targets, reference)?,
        statistic,
        heuristic,
    };
    let analysis = py.detach(|| jitter_core::pipeline::analyze(&data.0, &config)).map_err(err)?;
    to_py(py, serde_json::to_string(&analysis.report))
}

/// Simulated dataset: `cox`, `injected`, `bursts`, `family` or `poisson`.
#[pyfunction]
#[pyo3(signature = (design = "cox", seed = 0, trials = 100, sigma = 0.05, h = 0.0, resolution = 1.0 / 30000.0))]
fn generate(design: &str, seed: u64, trials: usize, sigma: f64, h: f64, resolution: f64) -> PyResult<PyTrialSet> {
    let ts = match design {
        "cox" => experiment::cox_data(seed, trials, sigma),
        "injected" => experiment::injected_data(seed, trials, sigma, h),
        "bursts" => experiment::burst_data(seed, trials, sigma, h, resolution),
        "family" => experiment::family_data(seed, trials, sigma),
        "poisson" => experiment::poisson_pair(&jitter_core::RngStream::new(seed), trials, [50.0, 25.0]),
        _ => return Err(PyValueError::new_err(format!("unknown design `{design}`"))),
    };
    ts.map(PyTrialSet).map_err(err)
}

/// Writes a reproduction bundle to `out` and returns the list of files.
#[pyfunction]
#[pyo3(signature = (figure, out, config = None))]
fn reproduce(py: Python<'_>, figure: &str, out: PathBuf, config: Option<&Bound<'_, PyAny>>) -> PyResult<Vec<String>> {
    let figure: Figure = figure.parse().map_err(err)?;
    let cfg: ExperimentConfig = match config {
        Some(c) => {
            let text: String = py.import("json")?.call_method1("dumps", (c,))?.extract()?;
            serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?
        }
        None => ExperimentConfig::default(),
    };
    let bundle = py.detach(|| experiment::run_reproduction(figure, &cfg, &out)).map_err(err)?;
    Ok(bundle.files)
}

#[pymodule]
fn jitterkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySpikeTrain>()?;
    m.add_class::<PyTrialSet>()?;
    m.add_class::<PyResampler>()?;
    m.add_function(wrap_pyfunction!(interval_jitter, m)?)?;
    m.add_function(wrap_pyfunction!(interval_jitter_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(pattern_jitter, m)?)?;
    m.add_function(wrap_pyfunction!(cch, m)?)?;
    m.add_function(wrap_pyfunction!(sync_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(psth, m)?)?;
    m.add_function(wrap_pyfunction!(mc_pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance_bands, m)?)?;
    m.add_function(wrap_pyfunction!(exact_sync_test, m)?)?;
    m.add_function(wrap_pyfunction!(extremal_density, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
