//! Subcommands of the `robust-fva` binary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use sha2::{Digest, Sha256};

use robust_fva::market::{simulate, SimulationConfig};
use robust_fva::oracle::run_verification;
use robust_fva::radius::{empirical_domain_radius, radius_table, RadiusRow, TABLE_CONFIDENCES};
use robust_fva::samples::{read_samples_file, write_samples_file};
use robust_fva::sum::Summation;
use robust_fva::{robust_adjustment, Error, Kind, ResultRecord, Result, RobustConfig};

#[derive(Debug, Parser)]
#[command(name = "robust-fva", version)]
#[command(about = "Worst-case FCA, FBA and FVA over Wasserstein balls")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// Use compensated summation for bit-reproducible sums
    #[arg(long, global = true)]
    pub strict_sum: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate exposure samples from a market/portfolio config
    Simulate(SimulateArgs),
    /// Worst-case adjustment at one radius
    Robust(RobustArgs),
    /// Worst-case adjustment over a list of radii or confidence levels
    Sweep(SweepArgs),
    /// Confidence level to Wasserstein radius table
    Radius(RadiusArgs),
    /// Cross-check the closed-form inner supremum against brute force
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML or JSON run configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override the seed in the config
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Sample CSV (`path_id,z_1..z_n,y_1..y_n`)
    #[arg(long)]
    pub samples: PathBuf,
    /// Adjustment kind: fca, fba or fva
    #[arg(long, value_parser = parse_kind)]
    pub kind: Kind,
    /// Survival transport cost scale S
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Debug, Args)]
pub struct RobustArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Wasserstein radius
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    /// Write the JSON here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Comma-separated radii
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    /// Comma-separated confidence levels, mapped to radii from the samples
    #[arg(long, value_delimiter = ',')]
    pub confidences: Vec<f64>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    /// Take N and the domain radius from this sample CSV
    #[arg(long, requires = "kind")]
    pub samples: Option<PathBuf>,
    /// Kind of the sample file
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<Kind>,
    /// Survival transport cost scale S
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Number of samples N (without --samples)
    #[arg(long = "n-samples", conflicts_with = "samples", requires = "domain_radius")]
    pub n_samples: Option<usize>,
    /// Domain radius r (without --samples)
    #[arg(long = "domain-radius", conflicts_with = "samples")]
    pub domain_radius: Option<f64>,
    /// Comma-separated confidence levels
    #[arg(long, value_delimiter = ',')]
    pub confidences: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2019)]
    pub seed: u64,
    /// Random instances per kind
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    /// Brute-force lattice step
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<Kind, String> {
    s.parse::<Kind>().map_err(|e| e.to_string())
}

/// Process exit status for an error: 1 validation, 2 numerical, 3 IO.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        3
    } else if err.is_numerical() {
        2
    } else {
        1
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let summation = if cli.strict_sum {
        Summation::Compensated
    } else {
        Summation::Pairwise
    };
    match cli.command {
        Command::Simulate(args) => run_simulate(&args),
        Command::Robust(args) => run_robust(&args, summation),
        Command::Sweep(args) => run_sweep(&args, summation),
        Command::Radius(args) => run_radius(&args),
        Command::Verify(args) => run_verify(&args),
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(io::BufWriter::new(fs::File::create(path)?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub n_paths: usize,
    pub n_dates: usize,
    pub grid: Vec<f64>,
    pub exposure_unit: f64,
    pub hazard_cpty: f64,
    pub hazard_firm: f64,
    pub files: Vec<String>,
    pub version: String,
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let raw = fs::read(&args.config)?;
    let mut config = SimulationConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    info!(
        "simulating {} paths from {}",
        config.hull_white.n_paths,
        args.config.display()
    );
    let sim = simulate(&config)?;
    fs::create_dir_all(&args.out)?;
    let mut files = Vec::new();
    for kind in Kind::ALL {
        let name = format!("{}_samples.csv", kind.as_str());
        write_samples_file(args.out.join(&name), sim.measure(kind))?;
        files.push(name);
    }
    let profile = sim.profile(config.pfe_quantile)?;
    write_csv(&profile, Some(&args.out.join("profile.csv")))?;
    files.push("profile.csv".into());

    let manifest = Manifest {
        config: args.config.display().to_string(),
        config_sha256: hex(&Sha256::digest(&raw)),
        seed: config.seed,
        n_paths: config.hull_white.n_paths,
        n_dates: sim.grid.n(),
        grid: sim.grid.times().to_vec(),
        exposure_unit: config.exposure_unit,
        hazard_cpty: sim.curves.hazard_cpty,
        hazard_firm: sim.curves.hazard_firm,
        files,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_json(&manifest, Some(&args.out.join("manifest.json")))
}

fn robust_config(scale: f64, summation: Summation) -> Result<RobustConfig> {
    Ok(RobustConfig::new(0.0, scale)?.with_summation(summation))
}

pub fn run_robust(args: &RobustArgs, summation: Summation) -> Result<()> {
    let m = &args.measure;
    let measure = read_samples_file(&m.samples, m.kind, None)?;
    let config = robust_config(m.scale, summation)?.with_delta(args.delta)?;
    let result = robust_adjustment(&measure, &config)?;
    write_json(&ResultRecord::from(&result), args.out.as_deref())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub confidence: Option<f64>,
    pub baseline: f64,
    pub robust: f64,
    pub multiplier: f64,
}

/// Radii to evaluate: explicit deltas plus calibrated confidences, sorted
/// and deduplicated (a calibrated entry keeps its confidence).
pub fn sweep_points(
    deltas: &[f64],
    calibrated: &[RadiusRow],
) -> Result<Vec<(f64, Option<f64>)>> {
    if deltas.is_empty() && calibrated.is_empty() {
        return Err(Error::Validation(
            "sweep needs --deltas or --confidences".into(),
        ));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
        return Err(Error::Validation(format!("radius must be finite and >= 0, got {d}")));
    }
    let mut points: Vec<(f64, Option<f64>)> = calibrated
        .iter()
        .map(|r| (r.delta, Some(r.confidence)))
        .chain(deltas.iter().map(|&d| (d, None)))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.dedup_by(|later, kept| {
        if later.0 == kept.0 {
            kept.1 = kept.1.or(later.1);
            true
        } else {
            false
        }
    });
    Ok(points)
}

pub fn sweep_rows(
    measure: &robust_fva::EmpiricalMeasure,
    points: &[(f64, Option<f64>)],
    base: &RobustConfig,
) -> Result<Vec<SweepRow>> {
    points
        .iter()
        .map(|&(delta, confidence)| {
            let r = robust_adjustment(measure, &base.clone().with_delta(delta)?)?;
            Ok(SweepRow {
                delta,
                confidence,
                baseline: r.baseline,
                robust: r.robust_value,
                multiplier: r.multiplier_star,
            })
        })
        .collect()
}

pub fn run_sweep(args: &SweepArgs, summation: Summation) -> Result<()> {
    let m = &args.measure;
    let measure = read_samples_file(&m.samples, m.kind, None)?;
    let base = robust_config(m.scale, summation)?;
    let calibrated = if args.confidences.is_empty() {
        Vec::new()
    } else {
        // one domain radius for the whole sweep
        let r = empirical_domain_radius(&measure, m.scale)?;
        info!("domain radius r_N = {r} over N = {}", measure.len());
        radius_table(measure.len(), r, &args.confidences)?
    };
    let points = sweep_points(&args.deltas, &calibrated)?;
    let rows = sweep_rows(&measure, &points, &base)?;
    write_csv(&rows, args.out.as_deref())
}

pub fn run_radius(args: &RadiusArgs) -> Result<()> {
    let (n, r) = match (&args.samples, args.kind, args.n_samples, args.domain_radius) {
        (Some(path), Some(kind), _, _) => {
            let measure = read_samples_file(path, kind, None)?;
            (measure.len(), empirical_domain_radius(&measure, args.scale)?)
        }
        (None, _, Some(n), Some(r)) => (n, r),
        _ => {
            return Err(Error::Validation(
                "radius needs --samples with --kind, or --n-samples with --domain-radius".into(),
            ))
        }
    };
    let confidences = if args.confidences.is_empty() {
        TABLE_CONFIDENCES.to_vec()
    } else {
        args.confidences.clone()
    };
    let rows = radius_table(n, r, &confidences)?;
    write_csv(&rows, args.out.as_deref())
}

pub fn run_verify(args: &VerifyArgs) -> Result<()> {
    let report = run_verification(args.seed, args.instances, args.step)?;
    write_json(&report, args.out.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        Err(Error::Range(
            "closed-form inner supremum disagrees with brute force".into(),
        ))
    }
}
