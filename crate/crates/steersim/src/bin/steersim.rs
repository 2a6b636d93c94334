//! Command-line front end: exact analysis, region sweeps, finite-shot
//! simulation and tomography for small multiqubit states.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 I/O error,
//! 4 statistical-validity error (some required setting pooled to zero
//! counts, shots too low for stable estimates).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use steersim::analysis::{
    analyze_report, matrix_to_csv, simulate_report, tomo_report, SimulateConfig,
};
use steersim::measurement::SamplingMode;
use steersim::statespec::parse_state_spec;
use steersim::steering::{sweep_region_map, sweep_to_csv, ArrowRule, SweepGrid};
use steersim::states::depolarize;
use steersim::{DensityMatrix, Error};

#[derive(Debug, Parser)]
#[command(
    name = "steersim",
    version,
    about = "Three-setting steering analysis, monogamy maps and finite-shot simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// State specifier: w:a,b,g | wn:N | ghz:mu,nu | prep:t1,t2 | file:path
    #[arg(long)]
    state: Option<String>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// RNG seed; fully determines all sampling and resampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Shots per setting; 0 switches to analytic probabilities
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    /// Bootstrap resamples behind each error bar
    #[arg(long, default_value_t = 200)]
    resamples: usize,
    /// Violation margin: an arrow needs value < threshold - epsilon
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Grid points per axis in sweep
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    /// Depolarizing noise strength p in [0, 1]
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Statistical rule multiplier: value + k * stderr must clear the bound
    #[arg(long = "sigma-k", default_value_t = 1.0)]
    sigma_k: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact steering matrix, classification and entanglement verdicts
    Analyze(CommonArgs),
    /// Region map CSV of the W-class coefficient plane
    Sweep(CommonArgs),
    /// Finite-shot estimates with bootstrap error bars
    Simulate(CommonArgs),
    /// Simulated tomography: reconstructed state plus fidelity report
    Tomo(CommonArgs),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::EmptyCounts { .. } | Error::MissingAlignedSetting { .. } => 4,
        _ => 2,
    }
}

/// (prepared, ideal, label): `prepared` carries the depolarizing noise,
/// `ideal` is the named target itself.
fn load_state(args: &CommonArgs) -> steersim::Result<(DensityMatrix, DensityMatrix, String)> {
    let spec = args
        .state
        .as_deref()
        .ok_or_else(|| Error::Parse("--state is required for this command".into()))?;
    let parsed = parse_state_spec(spec)?;
    let ideal = parsed.density_matrix();
    let prepared = if args.noise != 0.0 {
        depolarize(&ideal, args.noise)?
    } else {
        ideal.clone()
    };
    Ok((prepared, ideal, spec.to_string()))
}

fn to_json<T: serde::Serialize>(value: &T) -> steersim::Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn emit(out: &Option<PathBuf>, text: &str) -> steersim::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> steersim::Result<()> {
    match cli.command {
        Command::Analyze(args) => {
            let (rho, _ideal, label) = load_state(&args)?;
            let report = analyze_report(&rho, &label, args.noise, args.epsilon)?;
            let text = match args.format {
                Format::Json => to_json(&report)?,
                Format::Csv => matrix_to_csv(&report.steering_matrix),
            };
            emit(&args.out, &text)
        }
        Command::Sweep(args) => {
            let grid = SweepGrid {
                resolution: args.resolution,
                ..SweepGrid::default()
            };
            let cells = sweep_region_map(&grid, &ArrowRule::exact(args.epsilon))?;
            // The sweep artifact is plot-ready CSV in both formats.
            emit(&args.out, &sweep_to_csv(&cells))
        }
        Command::Simulate(args) => {
            let (rho, _ideal, label) = load_state(&args)?;
            let config = SimulateConfig {
                shots: args.shots,
                seed: args.seed,
                resamples: args.resamples,
                epsilon: args.epsilon,
                sigma_k: args.sigma_k,
                mode: SamplingMode::Multinomial,
            };
            let report = simulate_report(&rho, &label, args.noise, config)?;
            let text = match args.format {
                Format::Json => to_json(&report)?,
                Format::Csv => matrix_to_csv(&report.steering_matrix),
            };
            emit(&args.out, &text)
        }
        Command::Tomo(args) => {
            let (prepared, ideal, label) = load_state(&args)?;
            let (report, reconstructed) = tomo_report(
                &prepared,
                &ideal,
                &label,
                args.noise,
                args.shots,
                args.seed,
                SamplingMode::Multinomial,
            )?;
            if let Some(path) = &args.out {
                std::fs::write(path, to_json(&reconstructed)?).map_err(Error::from)?;
            }
            print!("{}", to_json(&report)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
