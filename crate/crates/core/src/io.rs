//! Text formats: spike CSV with a JSON sidecar, ensemble and band tables.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{JitterError, Result};
use crate::infer::{BandSet, Corrected, SurrogateEnsemble};
use crate::train::{snap_to_integer, SpikeTrain, TrialSet};

pub const SPIKE_HEADER: [&str; 3] = ["neuron_id", "trial_id", "time_s"];

/// Sidecar metadata for a spike CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMeta {
    /// Bin width (s); 0 for continuous times.
    #[serde(default)]
    pub resolution: f64,
    pub trial_length: f64,
    /// Neuron and trial counts; inferred from the largest ids when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neurons: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

impl DataMeta {
    pub fn of(ts: &TrialSet) -> Self {
        DataMeta {
            resolution: ts.resolution(),
            trial_length: ts.trial_length(),
            neurons: Some(ts.neurons()),
            trials: Some(ts.trials()),
        }
    }
}

pub fn read_meta(path: &Path) -> Result<DataMeta> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn data_err(line: u64, reason: impl Into<String>) -> JitterError {
    JitterError::Data { line: line as usize, reason: reason.into() }
}

/// Parses `neuron_id,trial_id,time_s` rows (times relative to the trial start).
pub fn read_spikes<R: Read>(reader: R, meta: &DataMeta) -> Result<TrialSet> {
    if !(meta.trial_length > 0.0) {
        return Err(JitterError::param("trial_length", "must be positive"));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(data_err(1, "empty file (expected a header line)")),
        Some(r) => r.map_err(|e| data_err(1, e.to_string()))?,
    };
    if header.iter().collect::<Vec<_>>() != SPIKE_HEADER {
        return Err(data_err(1, format!("expected header {}", SPIKE_HEADER.join(","))));
    }
    let mut spikes: BTreeMap<(usize, usize), Vec<(f64, u64)>> = BTreeMap::new();
    let (mut max_n, mut max_k) = (None, None);
    for rec in records {
        let rec = rec.map_err(|e| data_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(data_err(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let n: usize = rec[0].parse().map_err(|_| data_err(line, format!("bad neuron_id `{}`", &rec[0])))?;
        let k: usize = rec[1].parse().map_err(|_| data_err(line, format!("bad trial_id `{}`", &rec[1])))?;
        let t: f64 = rec[2].parse().map_err(|_| data_err(line, format!("bad time_s `{}`", &rec[2])))?;
        if !(t >= 0.0 && t < meta.trial_length) {
            return Err(data_err(line, format!("time {t} outside [0, {})", meta.trial_length)));
        }
        if meta.resolution > 0.0 && snap_to_integer(t / meta.resolution).is_none() {
            return Err(data_err(line, format!("time {t} is not a multiple of resolution {}", meta.resolution)));
        }
        if meta.neurons.is_some_and(|m| n >= m) || meta.trials.is_some_and(|m| k >= m) {
            return Err(data_err(line, "neuron or trial id exceeds the declared count"));
        }
        max_n = max_n.max(Some(n));
        max_k = max_k.max(Some(k));
        spikes.entry((n, k)).or_default().push((t, line));
    }
    let neurons = meta.neurons.or(max_n.map(|n| n + 1)).ok_or_else(|| data_err(1, "no spikes and no neuron count"))?;
    let trials = meta.trials.or(max_k.map(|k| k + 1)).ok_or_else(|| data_err(1, "no spikes and no trial count"))?;
    let mut trains = Vec::with_capacity(neurons);
    for n in 0..neurons {
        let mut per = Vec::with_capacity(trials);
        for k in 0..trials {
            let mut v = spikes.remove(&(n, k)).unwrap_or_default();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            if meta.resolution > 0.0 {
                for w in v.windows(2) {
                    if snap_to_integer(w[0].0 / meta.resolution) == snap_to_integer(w[1].0 / meta.resolution) {
                        return Err(data_err(w[1].1, "two spikes share a time bin"));
                    }
                }
            }
            let times = v.into_iter().map(|p| p.0).collect();
            per.push(SpikeTrain::new(times, meta.resolution, meta.trial_length)?);
        }
        trains.push(per);
    }
    TrialSet::new(trains, meta.trial_length)
}

pub fn read_spikes_path(path: &Path, meta: &DataMeta) -> Result<TrialSet> {
    read_spikes(std::fs::File::open(path)?, meta)
}

fn csv_err(e: csv::Error) -> JitterError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => JitterError::Io(io),
        other => JitterError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_spikes<W: Write>(ts: &TrialSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SPIKE_HEADER).map_err(csv_err)?;
    for n in 0..ts.neurons() {
        for k in 0..ts.trials() {
            for t in ts.train(n, k).times() {
                w.write_record([n.to_string(), k.to_string(), t.to_string()]).map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per curve (`0` = original), one column per grid point.
pub fn write_ensemble<W: Write>(ens: &SurrogateEnsemble, grid: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["surrogate".to_string()];
    header.extend(grid.iter().map(|g| g.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, c) in ens.curves().iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(c.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per grid point with the original, the bands and the corrected values.
pub fn write_bands<W: Write>(
    grid: &[f64],
    ens: &SurrogateEnsemble,
    bands: &BandSet,
    corrected: &Corrected,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "grid", "original", "mu", "a", "b", "nu", "s", "a_star", "b_star", "degenerate", "corrected", "corrected_a",
        "corrected_b", "corrected_a_star", "corrected_b_star",
    ])
    .map_err(csv_err)?;
    let (p, s) = (&bands.pointwise, &bands.simultaneous);
    for j in 0..grid.len() {
        let row = [
            grid[j],
            ens.original()[j],
            p.mu[j],
            p.a[j],
            p.b[j],
            s.nu[j],
            s.s[j],
            s.a_star[j],
            s.b_star[j],
            if s.degenerate[j] { 1.0 } else { 0.0 },
            corrected.curve[j],
            corrected.a[j],
            corrected.b[j],
            corrected.a_star[j],
            corrected.b_star[j],
        ];
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `(value, count)` rows.
pub fn write_histogram<W: Write>(hist: &BTreeMap<i64, u64>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["value", "count"]).map_err(csv_err)?;
    for (v, c) in hist {
        w.write_record([v.to_string(), c.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
