//! `cpskit` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 validation failure.

mod input;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpskit::harness::{
    consistency_curve, curve_csv, ks_threshold, ks_uniform, marginal_calibration_exchangeable,
    marginal_calibration_iid, online_coverage, pit_sample, Sampler, Summary, TestFunction,
};
use cpskit::{derive_stream, predictive_band_seeded, PredictiveBand, SystemId, TauPolicy};
use serde::Serialize;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl fmt::Display) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

/// Errors while processing user data: configuration problems stay usage
/// errors, everything else is a data error.
fn data_error(e: cpskit::Error) -> CliError {
    match e {
        cpskit::Error::Configuration(_) => CliError::usage(e),
        _ => CliError::data(e),
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "cpskit", version, about = "Randomized predictive systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predictive band for one test predictor given training data.
    Band(BandArgs),
    /// Probabilistic calibration check (KS test on PITs, online coverage).
    Validate(ValidateArgs),
    /// Median discrepancy between predicted and true conditional expectations.
    Consistency(ConsistencyArgs),
    /// Exact marginal-calibration counterexamples.
    CalibDemo,
}

#[derive(Args)]
struct SeedArg {
    /// Master seed.
    #[arg(long, env = "CPSKIT_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct BandArgs {
    #[arg(long)]
    system: SystemId,
    /// Training CSV with header x1,...,xd,y; "-" reads standard input.
    #[arg(long)]
    input: PathBuf,
    /// Test predictor, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    x: Vec<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    system: SystemId,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value = "P1")]
    sampler: Sampler,
    #[arg(long, default_value = "random")]
    tau: TauPolicy,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Require the online coverage check (conformal systems only).
    #[arg(long)]
    online: bool,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct ConsistencyArgs {
    #[arg(long)]
    system: SystemId,
    #[arg(long, default_value = "P1")]
    sampler: Sampler,
    #[arg(long, default_value = "clamp")]
    function: String,
    /// Training sizes, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    seed: SeedArg,
}

fn band_csv(band: &PredictiveBand) -> String {
    let mut out = String::from("y,lower,upper\n");
    for ((y, lo), hi) in band.jumps().iter().zip(band.at_jump_lower()).zip(band.at_jump_upper()) {
        out.push_str(&format!("{y},{lo},{hi}\n"));
    }
    out
}

fn cmd_band(args: BandArgs) -> CliResult<String> {
    let training = input::read_training(&args.input)?;
    let mut stream = derive_stream(args.seed.seed, &[]);
    let band = predictive_band_seeded(args.system, &training, &args.x, &mut stream).map_err(data_error)?;
    Ok(match args.format {
        Format::Json => serde_json::to_string(&band).map_err(CliError::data)? + "\n",
        Format::Csv => band_csv(&band),
    })
}

#[derive(Serialize)]
struct OnlineReport {
    steps: usize,
    epsilon: f64,
    coverage: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ValidateReport {
    system: String,
    sampler: String,
    n: usize,
    trials: usize,
    tau: String,
    seed: u64,
    ks: Summary,
    online: Option<OnlineReport>,
    pass: bool,
}

/// Allowed deviation of online coverage from `1 - epsilon`: 0.02, widened
/// to three binomial standard deviations for short runs.
fn online_tolerance(epsilon: f64, steps: usize) -> f64 {
    (3.0 * (epsilon * (1.0 - epsilon) / steps as f64).sqrt()).max(0.02)
}

fn cmd_validate(args: ValidateArgs) -> CliResult<(String, bool)> {
    if args.trials < 100 {
        return Err(CliError::usage(format!("--trials must be at least 100, got {}", args.trials)));
    }
    if !args.system.is_randomized() {
        return Err(CliError::usage(format!(
            "system '{}' is not a randomized predictive system",
            args.system
        )));
    }
    if args.online && !args.system.is_conformal() {
        return Err(CliError::usage(format!(
            "online validity is not claimed for '{}'",
            args.system
        )));
    }
    if !(0.0..=1.0).contains(&args.epsilon) {
        return Err(CliError::usage(format!("--epsilon {} outside [0, 1]", args.epsilon)));
    }
    let seed = args.seed.seed;
    let pits = pit_sample(args.system, args.sampler, args.n, args.trials, seed, args.tau).map_err(CliError::usage)?;
    let ks = Summary::below(ks_uniform(&pits).map_err(CliError::usage)?, ks_threshold(args.trials));

    let online = if args.system.is_conformal() {
        let coverage = online_coverage(args.system, args.sampler, args.trials, args.epsilon, seed)
            .map_err(CliError::usage)?;
        let tolerance = online_tolerance(args.epsilon, args.trials);
        Some(OnlineReport {
            steps: args.trials,
            epsilon: args.epsilon,
            coverage,
            tolerance,
            pass: (coverage - (1.0 - args.epsilon)).abs() <= tolerance,
        })
    } else {
        None
    };
    let pass = ks.pass && online.as_ref().is_none_or(|o| o.pass);
    let report = ValidateReport {
        system: args.system.to_string(),
        sampler: args.sampler.to_string(),
        n: args.n,
        trials: args.trials,
        tau: args.tau.to_string(),
        seed,
        ks,
        online,
        pass,
    };
    let json = serde_json::to_string_pretty(&report).map_err(CliError::data)?;
    Ok((json + "\n", pass))
}

fn cmd_consistency(args: ConsistencyArgs) -> CliResult<String> {
    let f = TestFunction::by_name(&args.function).map_err(CliError::usage)?;
    if args.ns.is_empty() {
        return Err(CliError::usage("--ns must list at least one size"));
    }
    let curve = consistency_curve(args.system, args.sampler, &f, &args.ns, args.trials, args.seed.seed)
        .map_err(CliError::usage)?;
    Ok(match args.format {
        Format::Csv => curve_csv(&curve),
        Format::Json => serde_json::to_string(&curve).map_err(CliError::data)? + "\n",
    })
}

fn cmd_calib_demo() -> String {
    let ex = marginal_calibration_exchangeable();
    let iid = marginal_calibration_iid();
    format!("exchangeable: {} vs {}\niid: {} vs {}\n", ex.lhs, ex.rhs, iid.lhs, iid.rhs)
}

fn run(cli: Cli) -> CliResult<(String, bool)> {
    match cli.command {
        Command::Band(a) => cmd_band(a).map(|s| (s, true)),
        Command::Validate(a) => cmd_validate(a),
        Command::Consistency(a) => cmd_consistency(a).map(|s| (s, true)),
        Command::CalibDemo => Ok((cmd_calib_demo(), true)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((out, pass)) => {
            print!("{out}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
