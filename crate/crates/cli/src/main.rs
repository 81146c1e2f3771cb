//! Batch runner: simulate datasets, compare a comparison dataset against a
//! reference, or estimate a reference dataset's natural variability.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 computation error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jointcoord::baseline::{shuffle_split_baseline, BaselineConfig, ThresholdRule, DEFAULT_SPLITS};
use jointcoord::crp::{Alignment, CrpOptions};
use jointcoord::dataset::{
    generate_simulated, load_dataset, write_dataset, AngleUnit, NormalizedGrid, SimConfig,
};
use jointcoord::jcvpca::JcvPcaConfig;
use jointcoord::report::{
    analyze, baseline_csv, export_plot_data, render_baseline_json, render_baseline_tables,
    render_json, render_summary, AnalysisConfig,
};
use jointcoord::Error;

use crate::config::FileConfig;

#[derive(Parser, Debug)]
#[command(
    name = "jointcoord",
    version,
    about = "Inter-joint coordination metrics (JcvPCA, JsvCRP)"
)]
struct Cli {
    /// Optional key = value file mirroring the flags; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the simulated datasets sim_A/ and sim_B/ as CSV repetitions.
    Simulate(SimulateArgs),
    /// Compare a dataset against a reference dataset.
    Compare(CompareArgs),
    /// Estimate a dataset's natural variability by repeated half splits.
    Baseline(BaselineArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Output directory that receives sim_A/ and sim_B/.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Angular frequency in rad/s.
    #[arg(long)]
    omega: Option<f64>,
    /// Movement duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Gaussian noise standard deviation.
    #[arg(long)]
    noise: Option<f64>,
    /// Repetitions per dataset.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct MetricArgs {
    /// Angle unit of the CSV data (deg or rad).
    #[arg(long)]
    unit: Option<AngleUnit>,
    /// Task dimensionality.
    #[arg(long = "p")]
    p: Option<usize>,
    /// Retained components (default p + 1).
    #[arg(long = "m")]
    m: Option<usize>,
    /// Normalized time grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Align repetitions with DTW before averaging CRP curves.
    #[arg(long)]
    dtw: bool,
    /// Moving-average window applied before differentiation.
    #[arg(long)]
    smoothing: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of shuffle splits.
    #[arg(long)]
    splits: Option<usize>,
    /// Threshold rule: std or sem.
    #[arg(long)]
    rule: Option<ThresholdRule>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Reference dataset directory.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
    /// Comparison dataset directory.
    #[arg(long = "cmp")]
    comparison: Option<PathBuf>,
    /// Also run the baseline on the reference and classify the results.
    #[arg(long)]
    baseline: bool,
    #[command(flatten)]
    metric: MetricArgs,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    /// Dataset directory to split.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
    #[command(flatten)]
    metric: MetricArgs,
}

/// Settings shared by `compare` and `baseline` after merging flags and file.
struct MetricSettings {
    unit: AngleUnit,
    p: usize,
    m: usize,
    grid: NormalizedGrid,
    crp: CrpOptions,
    seed: u64,
    splits: usize,
    rule: ThresholdRule,
    out: PathBuf,
}

impl MetricSettings {
    fn resolve(args: MetricArgs, file: &FileConfig) -> Result<Self, Error> {
        let p = file.pick(args.p, "p", 1)?;
        if p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        let m = file.pick(args.m, "m", p + 1)?;
        let grid =
            NormalizedGrid::new(file.pick(args.grid, "grid", NormalizedGrid::DEFAULT_SIZE)?)
                .map_err(|e| Error::Config(e.to_string()))?;
        let crp = CrpOptions {
            smoothing: file.pick_opt(args.smoothing, "smoothing")?,
            alignment: if file.switch(args.dtw, "dtw")? {
                Alignment::Dtw
            } else {
                Alignment::Linear
            },
            ..CrpOptions::default()
        };
        Ok(Self {
            unit: file.pick(args.unit, "unit", AngleUnit::Deg)?,
            p,
            m,
            grid,
            crp,
            seed: file.pick(args.seed, "seed", 0)?,
            splits: file.pick(args.splits, "splits", DEFAULT_SPLITS)?,
            rule: file.pick(args.rule, "rule", ThresholdRule::default())?,
            out: file.pick(args.out, "out", PathBuf::from("jointcoord-out"))?,
        })
    }

    fn baseline_config(&self) -> BaselineConfig {
        BaselineConfig {
            n_splits: self.splits,
            seed: self.seed,
            m: self.m,
            grid: self.grid.clone(),
            crp: self.crp,
            rule: self.rule,
        }
    }
}

fn required(value: Option<PathBuf>, file: &FileConfig, key: &str) -> Result<PathBuf, Error> {
    file.pick_opt(value, key)?
        .ok_or_else(|| Error::Config(format!("missing --{key} (flag or config file)")))
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf, Error> {
    fs::write(&path, body).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn simulate(args: SimulateArgs, file: &FileConfig) -> Result<(), Error> {
    let d = SimConfig::default();
    let cfg = SimConfig {
        amplitude: file.pick(args.amplitude, "amplitude", d.amplitude)?,
        omega: file.pick(args.omega, "omega", d.omega)?,
        duration: file.pick(args.duration, "duration", d.duration)?,
        samples: file.pick(args.samples, "samples", d.samples)?,
        noise_sigma: file.pick(args.noise, "noise", d.noise_sigma)?,
        repetitions: file.pick(args.reps, "reps", d.repetitions)?,
        seed: file.pick(args.seed, "seed", d.seed)?,
        unit: d.unit,
    };
    let out = file.pick(args.out, "out", PathBuf::from("."))?;
    let (a, b) = generate_simulated(&cfg)?;
    println!(
        "simulate: amplitude {} omega {} rad/s duration {} s samples {} noise {} reps {} seed {} unit {}",
        cfg.amplitude, cfg.omega, cfg.duration, cfg.samples, cfg.noise_sigma, cfg.repetitions, cfg.seed, cfg.unit
    );
    for (ds, dir) in [(&a, "sim_A"), (&b, "sim_B")] {
        let files = write_dataset(ds, &out.join(dir))?;
        println!(
            "wrote {} file(s) to {}",
            files.len(),
            out.join(dir).display()
        );
    }
    Ok(())
}

fn compare(args: CompareArgs, file: &FileConfig) -> Result<(), Error> {
    let reference = required(args.reference, file, "ref")?;
    let comparison = required(args.comparison, file, "cmp")?;
    let with_baseline = file.switch(args.baseline, "baseline")?;
    let s = MetricSettings::resolve(args.metric, file)?;

    let a = load_dataset(&reference, s.unit)?;
    let b = load_dataset(&comparison, s.unit)?;
    let config = AnalysisConfig {
        jcvpca: JcvPcaConfig {
            p: s.p,
            m: s.m,
            weight_by_variance: true,
        },
        grid: s.grid.clone(),
        crp: s.crp,
        baseline: with_baseline.then(|| s.baseline_config()),
    };
    let report = analyze(&a, &b, &config)?;

    create_dir(&s.out)?;
    let json = write(s.out.join("report.json"), &render_json(&report)?)?;
    let csvs = export_plot_data(&report, &s.out)?;
    print!("{}", render_summary(&report));
    for w in report
        .jcvpca
        .jrw
        .warnings_a
        .iter()
        .chain(&report.jcvpca.jrw.warnings_b)
    {
        eprintln!("warning: {w:?}");
    }
    println!(
        "wrote {} and {} plot file(s) to {}",
        json.display(),
        csvs.len(),
        s.out.display()
    );
    Ok(())
}

fn baseline(args: BaselineArgs, file: &FileConfig) -> Result<(), Error> {
    let reference = required(args.reference, file, "ref")?;
    let s = MetricSettings::resolve(args.metric, file)?;
    let ds = load_dataset(&reference, s.unit)?;
    JcvPcaConfig {
        p: s.p,
        m: s.m,
        weight_by_variance: false,
    }
    .validate(ds.n_joints())?;
    let base = shuffle_split_baseline(&ds, &s.baseline_config())?;

    create_dir(&s.out)?;
    let json = write(s.out.join("baseline.json"), &render_baseline_json(&base)?)?;
    write(
        s.out.join("baseline_summary.csv"),
        &baseline_csv(&base, ds.joints()),
    )?;
    print!("{}", render_baseline_tables(&base, ds.joints()));
    println!("wrote {}", json.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Simulate(args) => simulate(args, &file),
        Command::Compare(args) => compare(args, &file),
        Command::Baseline(args) => baseline(args, &file),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
