use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jitter_core::experiment::{
    burst_data, cox_data, family_data, injected_data, poisson_pair, run_reproduction, ExperimentConfig, Figure,
};
use jitter_core::io::{read_meta, read_spikes_path, write_bands, write_ensemble, write_spikes, DataMeta};
use jitter_core::pipeline::{analyze, AnalysisConfig, Statistic};
use jitter_core::resample::with_workers;
use jitter_core::tilt::TiltedWindowPlan;
use jitter_core::{IntervalSet, JitterError, Method, Resampler, RngStream, SurrogateSpec, TrialSet, WindowPartition};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "jitterkit", version, about = "Conditional-inference resampling of spike trains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset.
    Generate(GenerateArgs),
    /// Write surrogate datasets.
    Resample(ResampleArgs),
    /// Surrogate ensemble, p-value and acceptance bands of a statistic.
    Analyze(AnalyzeArgs),
    /// Rebuild a simulation study into an output bundle.
    Reproduce(ReproduceArgs),
    /// Per-window extremal tilts for a synchrony target.
    TiltPlan(TiltPlanArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Design {
    Cox,
    Injected,
    Bursts,
    Family,
    Poisson,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "cox")]
    design: Design,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Bump bandwidth (s).
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    /// Injected synchrony rate (Hz).
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    /// Bin width (s) for the bursting design.
    #[arg(long, default_value_t = 1.0 / 30000.0)]
    resolution: f64,
    /// Output directory; receives spikes.csv and spikes.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// Spike CSV with columns neuron_id,trial_id,time_s.
    #[arg(long)]
    data: PathBuf,
    /// JSON sidecar; defaults to the data path with a .json extension.
    #[arg(long)]
    meta: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> Result<TrialSet, JitterError> {
        let meta_path = self.meta.clone().unwrap_or_else(|| self.data.with_extension("json"));
        let meta = read_meta(&meta_path)?;
        read_spikes_path(&self.data, &meta)
    }
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long, default_value = "interval_jitter")]
    method: Method,
    /// Jitter window (s).
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    /// Pattern history (s).
    #[arg(long = "pattern-R", default_value_t = 0.0)]
    pattern_r: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    surrogates: usize,
    /// Neurons to resample.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    targets: Vec<usize>,
    /// Tilted jitter reference neuron.
    #[arg(long)]
    reference: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl SpecArgs {
    fn spec(&self) -> SurrogateSpec {
        SurrogateSpec {
            method: self.method,
            delta: self.delta,
            history: self.pattern_r,
            epsilon: self.epsilon,
            n_surrogates: self.surrogates,
            jitter_targets: self.targets.clone(),
            reference: self.reference,
            seed: self.seed,
            ..SurrogateSpec::default()
        }
    }
}

#[derive(Args)]
struct ResampleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    spec: SpecArgs,
    /// Output CSV with columns surrogate,neuron_id,trial_id,time_s.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatName {
    Cch,
    Sync,
    Participation,
    Triplets,
    Psth,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value = "cch")]
    statistic: StatName,
    /// First neuron (or the jittered neuron for participation).
    #[arg(long, default_value_t = 0)]
    a: usize,
    /// Second neuron (or the reference neuron for participation).
    #[arg(long, default_value_t = 1)]
    b: usize,
    /// Synchrony tolerance (s).
    #[arg(long, default_value_t = 0.001)]
    tol: f64,
    /// Report p-values from basic jitter even though they are heuristic.
    #[arg(long)]
    heuristic: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReproduceArgs {
    /// fig1, fig2, fig3, fig4, fig5, figS13 or bursts.
    figure: String,
    /// JSON experiment configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    surrogates: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "pattern-R")]
    pattern_r: Option<f64>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TiltPlanArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0)]
    jittered: usize,
    #[arg(long, default_value_t = 1)]
    reference: usize,
    #[arg(long, default_value_t = 0)]
    trial: usize,
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.001)]
    tol: f64,
    /// Output JSON; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_data(dir: &Path, ts: &TrialSet) -> Result<(), JitterError> {
    fs::create_dir_all(dir)?;
    write_spikes(ts, fs::File::create(dir.join("spikes.csv"))?)?;
    fs::write(dir.join("spikes.json"), serde_json::to_string_pretty(&DataMeta::of(ts))? + "\n")?;
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<(), JitterError> {
    let ts = match args.design {
        Design::Cox => cox_data(args.seed, args.trials, args.sigma)?,
        Design::Injected => injected_data(args.seed, args.trials, args.sigma, args.h)?,
        Design::Bursts => burst_data(args.seed, args.trials, args.sigma, args.h, args.resolution)?,
        Design::Family => family_data(args.seed, args.trials, args.sigma)?,
        Design::Poisson => poisson_pair(&RngStream::new(args.seed), args.trials, [50.0, 25.0])?,
    };
    write_data(&args.out, &ts)
}

fn resample(args: &ResampleArgs) -> Result<(), JitterError> {
    let data = args.data.load()?;
    let spec = args.spec.spec();
    let resampler = Resampler::new(spec, data)?;
    let all = with_workers(args.spec.workers, || resampler.evaluate(|ts| Ok(ts.clone())))??;
    let surrogates = &all[1..];
    if let Some(parent) = args.out.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(&args.out).map_err(to_io)?;
    w.write_record(["surrogate", "neuron_id", "trial_id", "time_s"]).map_err(to_io)?;
    for (i, ts) in surrogates.iter().enumerate() {
        for n in 0..ts.neurons() {
            for k in 0..ts.trials() {
                for t in ts.train(n, k).times() {
                    w.write_record([(i + 1).to_string(), n.to_string(), k.to_string(), t.to_string()]).map_err(to_io)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn to_io(e: csv::Error) -> JitterError {
    JitterError::Io(std::io::Error::other(e.to_string()))
}

fn analyze_cmd(args: &AnalyzeArgs) -> Result<(), JitterError> {
    let data = args.data.load()?;
    let statistic = match args.statistic {
        StatName::Cch => Statistic::Cch { a: args.a, b: args.b },
        StatName::Sync => Statistic::SyncPairs { a: args.a, b: args.b, tol: args.tol },
        StatName::Participation => Statistic::SyncParticipation { jittered: args.a, reference: args.b, tol: args.tol },
        StatName::Triplets => Statistic::MaxTriplets { neuron: args.a },
        StatName::Psth => Statistic::Psth { neuron: args.a },
    };
    let config = AnalysisConfig { spec: args.spec.spec(), statistic, heuristic: args.heuristic };
    let analysis = with_workers(args.spec.workers, || analyze(&data, &config))??;
    fs::create_dir_all(&args.out)?;
    write_ensemble(&analysis.ensemble, &analysis.grid, fs::File::create(args.out.join("ensemble.csv"))?)?;
    let mut report = analysis.report;
    if let (Some(b), Some(c)) = (&analysis.bands, &analysis.corrected) {
        write_bands(&analysis.grid, &analysis.ensemble, b, c, fs::File::create(args.out.join("bands.csv"))?)?;
        report.band_csv = Some("bands.csv".into());
    }
    let text = serde_json::to_string_pretty(&report)?;
    fs::write(args.out.join("report.json"), text.clone() + "\n")?;
    println!("{text}");
    Ok(())
}

fn reproduce(args: &ReproduceArgs) -> Result<(), JitterError> {
    let figure: Figure = args.figure.parse()?;
    let mut cfg = match &args.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.surrogates {
        cfg.surrogates = m;
    }
    if let Some(k) = args.trials {
        cfg.trials = k;
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    if let Some(r) = args.pattern_r {
        cfg.history = r;
    }
    let bundle = with_workers(args.workers, || run_reproduction(figure, &cfg, &args.out))??;
    for r in &bundle.reports {
        println!(
            "{} {} p={} simultaneous_reject={}",
            bundle.figure,
            r.method,
            r.p_value.map_or("-".into(), |p| p.to_string()),
            r.reject_simultaneous.map_or("-".into(), |b| b.to_string())
        );
    }
    println!("wrote {} files to {}", bundle.files.len() + 1, args.out.display());
    Ok(())
}

fn tilt_plan(args: &TiltPlanArgs) -> Result<(), JitterError> {
    let data = args.data.load()?;
    if args.jittered >= data.neurons() || args.reference >= data.neurons() || args.trial >= data.trials() {
        return Err(JitterError::InvalidParameter { name: "neuron", reason: "index out of range".into() });
    }
    let train = data.train(args.jittered, args.trial);
    let target = IntervalSet::around_points(data.train(args.reference, args.trial).times(), args.tol)?;
    let part = WindowPartition::for_train(train, args.delta)?;
    let plan = TiltedWindowPlan::new(&target, &part, args.epsilon)?;
    let text = serde_json::to_string_pretty(&plan)? + "\n";
    match &args.out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Resample(a) => resample(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Reproduce(a) => reproduce(a),
        Command::TiltPlan(a) => tilt_plan(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { EXIT_DATA } else { EXIT_CONFIG })
        }
    }
}
