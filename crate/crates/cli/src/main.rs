use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mecsim_core::harness::{calibrate_ruin, run_experiment, write_csv, ExperimentPreset, PresetName};
use mecsim_core::scenario::{Arrivals, Config};
use mecsim_core::units::parse_size_bits;
use mecsim_core::{solve, ConfigError, HarnessError, SurplusParams};

#[derive(Parser)]
#[command(
    name = "mecsim",
    version,
    about = "MEC buffer-aware association and offloading simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment and write its rows as CSV.
    Run(RunArgs),
    /// Ruin probability of a single surplus process.
    Ruin(RuinArgs),
    /// Associate and offload one scenario; dump per-user decisions as CSV.
    Solve(SolveArgs),
    /// Check a configuration file.
    Validate(ValidateArgs),
    /// Fit premium and claim unit of a ruin preset to target points.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Shipped preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Configuration file; with --preset it replaces the preset's base config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArrivalsArg {
    Poisson,
    Periodic,
}

#[derive(Args)]
struct RuinArgs {
    /// Initial surplus, e.g. `2MB` or bits.
    #[arg(long)]
    initial: String,
    /// Premium per slot, e.g. `160KB` or bits.
    #[arg(long)]
    premium: String,
    /// Exponential claim-size rate, per bit.
    #[arg(long)]
    mu: f64,
    /// Claims per slot.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Horizon in slots (Monte Carlo only).
    #[arg(long, default_value_t = 50.0)]
    horizon: f64,
    /// Tolerable surplus.
    #[arg(long, default_value = "0")]
    epsilon: String,
    #[arg(long, conflicts_with = "paths")]
    analytic_terms: Option<usize>,
    /// Monte Carlo path count.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, value_enum, default_value = "periodic")]
    arrivals: ArrivalsArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Scenario seed; defaults to `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    preset: String,
    /// `value:probability` pairs on the preset's sweep.
    #[arg(long = "target", required = true, value_parser = parse_target)]
    targets: Vec<(f64, f64)>,
}

fn parse_target(text: &str) -> Result<(f64, f64), String> {
    let (x, p) = text.split_once(':').ok_or("expected value:probability")?;
    let x = x.trim().parse().map_err(|e| format!("{e}"))?;
    let p = p.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((x, p))
}

/// Exit 1 for anything the user can fix in their input, 2 otherwise.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.into())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => Failure::Config(c.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Config(anyhow!(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Ruin(a) => ruin(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Validate(a) => validate(a),
        Command::Calibrate(a) => calibrate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_preset(name: Option<&str>, config: Option<&Path>) -> Result<ExperimentPreset, Failure> {
    match (name, config) {
        (Some(name), None) => Ok(ExperimentPreset::builtin(PresetName::parse(name)?)?),
        (None, Some(path)) => Ok(ExperimentPreset::from_config(Config::from_path(path)?)?),
        (Some(name), Some(path)) => {
            let builtin = ExperimentPreset::builtin(PresetName::parse(name)?)?;
            let mut config = Config::from_path(path)?;
            config.experiment.preset = Some(name.to_string());
            if config.experiment.swept_param.is_none() {
                config.experiment.swept_param = Some(builtin.swept_param.clone());
                config.experiment.values = builtin.values.clone();
            }
            Ok(ExperimentPreset::from_config(config)?)
        }
        (None, None) => Err(usage("run needs --preset, --config or both")),
    }
}

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))
                .map_err(runtime)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let mut preset = load_preset(a.preset.as_deref(), a.config.as_deref())?;
    if let Some(reps) = a.reps {
        preset.replications = reps;
    }
    if let Some(seed) = a.seed {
        preset.seed = seed;
    }
    let result = run_experiment(&preset)?;
    let mut sink = open_out(a.out.as_deref())?;
    let bytes = write_csv(&result, &mut sink).map_err(runtime)?;
    sink.flush().map_err(runtime)?;
    if let Some(path) = &a.out {
        eprintln!("wrote {} rows ({bytes} bytes) to {}", result.rows.len(), path.display());
    }
    Ok(())
}

fn size_arg(flag: &str, text: &str) -> Result<f64, Failure> {
    parse_size_bits(text).ok_or_else(|| usage(format!("--{flag}: cannot read `{text}` as a data size")))
}

fn ruin(a: RuinArgs) -> Result<(), Failure> {
    let params = SurplusParams {
        initial_surplus: size_arg("initial", &a.initial)?,
        premium_rate: size_arg("premium", &a.premium)?,
        claim_intensity: a.lambda,
        claim_rate: a.mu,
        horizon: a.horizon,
        epsilon: size_arg("epsilon", &a.epsilon)?,
        tau: 1.0,
        arrivals: match a.arrivals {
            ArrivalsArg::Poisson => Arrivals::Poisson,
            ArrivalsArg::Periodic => Arrivals::Periodic,
        },
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    let estimate = match a.paths {
        Some(paths) => mecsim_core::ruin_probability_mc(&params, paths, a.seed),
        None => params.analytic(a.analytic_terms.unwrap_or(50)),
    }
    .map_err(|e| usage(e.to_string()))?;
    println!("{}", estimate.probability);
    println!(
        "method={:?} samples={} std_error={} clamped={}",
        estimate.method, estimate.samples, estimate.std_error, estimate.clamped
    );
    Ok(())
}

fn solve_cmd(a: SolveArgs) -> Result<(), Failure> {
    let config = Config::from_path(&a.config)?;
    config.validate()?;
    let seed = a.seed.unwrap_or(config.experiment.seed);
    let solution = solve(&config, seed).map_err(runtime)?;
    let mut sink = open_out(a.out.as_deref())?;
    let io_err = |e: io::Error| runtime(e);
    writeln!(
        sink,
        "user,server,task_bits,alpha_bits,beta_bits,feasible,objective_j,bound_lo,bound_hi"
    )
    .map_err(io_err)?;
    for u in &solution.users {
        let server = u.server.map_or(String::new(), |n| n.to_string());
        match &u.decision {
            Some(d) => writeln!(
                sink,
                "{},{},{},{},{},{},{},{},{}",
                u.user,
                server,
                u.task_bits,
                d.alpha_bits,
                d.beta_bits,
                d.feasible,
                d.objective_value,
                d.bound_lo,
                d.bound_hi
            ),
            None => writeln!(sink, "{},,{},,,,,,", u.user, u.task_bits),
        }
        .map_err(io_err)?;
    }
    sink.flush().map_err(io_err)?;
    eprintln!(
        "associated {}/{} users, total energy {} J over {} counted users",
        solution.association.n_assigned(),
        solution.users.len(),
        solution.energy.total,
        solution.energy.users
    );
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let config = Config::from_path(&a.config)?;
    config.validate()?;
    println!("ok");
    Ok(())
}

fn calibrate(a: CalibrateArgs) -> Result<(), Failure> {
    let preset = ExperimentPreset::builtin(PresetName::parse(&a.preset)?)?;
    let cal = calibrate_ruin(&preset.base_config, &preset.swept_param, &a.targets)?;
    println!("premium_kb_per_slot = {}", cal.premium_kb_per_slot);
    println!("claim_unit_kb = {}", cal.claim_unit_kb);
    for p in &cal.points {
        println!(
            "{} = {}: target {} model {}",
            preset.swept_param, p.swept_value, p.target, p.model
        );
    }
    Ok(())
}
