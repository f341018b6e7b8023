//! Command-line front end for the coded-caching simulator.
//!
//! Three subcommands: `run` sweeps a rate-memory experiment and emits CSV,
//! `replay` prints a scheduler's transmission log for a fixture file, and
//! `allocate` prints the per-file cache allocation a placement method picks.
//!
//! Exit codes: 0 on success, 2 for unreadable or unparsable input, 3 when a
//! parameter or result violates a documented constraint.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use ccsim_core::allocation::{group_files, solve_exact_allocation, solve_group_allocation, Regime};
use ccsim_core::bounds::lower_bound_rate;
use ccsim_core::delivery::{
    deliver_bgd, deliver_od, deliver_semi_sgd, deliver_sgd, deliver_uncoded,
};
use ccsim_core::fixture::{format_log, parse_fixture};
use ccsim_core::model::SystemParams;
use ccsim_core::sim::{
    placement_allocation, run_experiment, zipf_popularity, DeliveryScheme, ExperimentConfig,
    PlacementScheme,
};
use ccsim_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "ccsim", version, about = "Coded-caching placement and delivery simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo rate-memory sweep and emit one CSV row per
    /// (memory, scheme) grid point.
    Run(RunArgs),
    /// Print a scheduler's transmission log for a fixture file.
    Replay(ReplayArgs),
    /// Print the cache allocation a placement method assigns to each file.
    Allocate(AllocateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description in TOML; any flag below overrides its value.
    config: Option<PathBuf>,
    /// Number of files N.
    #[arg(long = "files")]
    n_files: Option<usize>,
    /// Number of users K.
    #[arg(long = "users")]
    n_users: Option<usize>,
    /// Bits per file F.
    #[arg(long = "file-bits")]
    file_size_bits: Option<usize>,
    /// Memory grid point M in file units; repeat for a sweep.
    #[arg(long = "memory")]
    memory: Vec<f64>,
    /// Zipf popularity exponent (0 = uniform).
    #[arg(long)]
    alpha: Option<f64>,
    /// Placement: UNIFORM, EXACT_KKT, SQRT, or GROUPED.
    #[arg(long)]
    placement: Option<String>,
    /// Delivery scheme; repeat to compare several in one run.
    #[arg(long = "delivery")]
    delivery: Vec<String>,
    /// Monte-Carlo trials per grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed for the reproducible random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Fixture file listing the demanded bits and their cover sets.
    fixture: PathBuf,
    /// Scheduler to replay: OD, SGD, SEMI_SGD, BGD, or UNCODED.
    scheme: String,
}

#[derive(Args)]
struct AllocateArgs {
    /// Number of files N.
    #[arg(long = "files")]
    n_files: usize,
    /// Number of users K.
    #[arg(long = "users")]
    n_users: usize,
    /// Cache budget M in file units.
    #[arg(long)]
    memory: f64,
    /// Zipf popularity exponent (0 = uniform).
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Placement method: uniform, exact, sqrt, or grouped.
    #[arg(long)]
    method: String,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---- error handling ----

enum CliError {
    /// Unreadable or unparsable input; exits 2.
    Input(String),
    /// Valid syntax but a violated constraint; exits 3.
    Constraint(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Fixture(_) | CoreError::Config(_) => CliError::Input(e.to_string()),
            CoreError::InvalidParameter(_) | CoreError::DimensionMismatch(_) => {
                CliError::Constraint(e.to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Replay(args) => cmd_replay(args),
        Command::Allocate(args) => cmd_allocate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Constraint(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

// ---- formatting ----

/// Ten significant digits, locale independent; scientific notation only for
/// magnitudes that would not print faithfully in plain decimal.
fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..=14).contains(&exp) {
        return format!("{:.9e}", x);
    }
    format!("{:.*}", (9 - exp).max(0) as usize, x)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---- run ----

/// TOML schema mirroring the experiment configuration field names.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n_files: Option<usize>,
    n_users: Option<usize>,
    file_size_bits: Option<usize>,
    zipf_alpha: Option<f64>,
    placement: Option<String>,
    delivery: Option<OneOrMany>,
    memory_grid: Option<Vec<f64>>,
    trials: Option<usize>,
    seed: Option<u64>,
}

/// Accepts `delivery = "OD"` as well as `delivery = ["OD", "SGD"]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Input(format!("{what} missing: set it in the config file or by flag"))
    })
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let file: ConfigFile = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };

    let n_files = require(args.n_files.or(file.n_files), "--files")?;
    let n_users = require(args.n_users.or(file.n_users), "--users")?;
    let file_size_bits = require(args.file_size_bits.or(file.file_size_bits), "--file-bits")?;
    let memory_grid = if args.memory.is_empty() {
        require(file.memory_grid, "--memory")?
    } else {
        args.memory.clone()
    };
    let zipf_alpha = args.alpha.or(file.zipf_alpha).unwrap_or(0.0);
    let trials = args.trials.or(file.trials).unwrap_or(500);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let placement: PlacementScheme = args
        .placement
        .clone()
        .or(file.placement)
        .unwrap_or_else(|| "UNIFORM".into())
        .parse()?;
    let delivery_names: Vec<String> = if args.delivery.is_empty() {
        file.delivery
            .map(OneOrMany::into_vec)
            .unwrap_or_else(|| vec!["OD".into()])
    } else {
        args.delivery.clone()
    };
    let deliveries: Vec<DeliveryScheme> = delivery_names
        .iter()
        .map(|name| name.parse())
        .collect::<Result<_, _>>()?;

    // Surface parameter-domain problems (memory range, user count) before the
    // experiment runner reports them as configuration issues.
    for &memory in &memory_grid {
        SystemParams::new(n_files, n_users, file_size_bits, memory)?;
    }

    let popularity = zipf_popularity(n_files, zipf_alpha)?;
    let mut csv = String::from("memory,scheme,mean_rate,std_error,trials,bound_rate\n");
    for &delivery in &deliveries {
        let rows = run_experiment(&ExperimentConfig {
            n_files,
            n_users,
            file_size_bits,
            zipf_alpha,
            placement,
            delivery,
            memory_grid: memory_grid.clone(),
            trials,
            seed,
        })?;
        for (memory, stats) in rows {
            let params = SystemParams::new(n_files, n_users, file_size_bits, memory)?;
            let (allocation, _) = placement_allocation(placement, &popularity, &params)?;
            let bound = lower_bound_rate(&allocation, &popularity, n_users)?;
            if bound > stats.mean + 3.0 * stats.std_error {
                return Err(CliError::Constraint(format!(
                    "{} at memory {}: mean rate {} is below the analytic floor {}",
                    delivery.as_str(),
                    sig10(memory),
                    sig10(stats.mean),
                    sig10(bound)
                )));
            }
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                sig10(memory),
                delivery.as_str(),
                sig10(stats.mean),
                sig10(stats.std_error),
                stats.trials,
                sig10(bound)
            )
            .expect("string write");
        }
    }
    emit(&args.out, &csv)
}

// ---- replay ----

fn cmd_replay(args: &ReplayArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.fixture)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.fixture.display())))?;
    let fixture = parse_fixture(&text)?;
    let scheme: DeliveryScheme = args.scheme.parse()?;
    let log = match scheme {
        DeliveryScheme::Od => deliver_od(&fixture.bits, fixture.n_users, fixture.file_size_bits),
        DeliveryScheme::Sgd => deliver_sgd(&fixture.bits, fixture.n_users, fixture.file_size_bits),
        DeliveryScheme::SemiSgd => {
            deliver_semi_sgd(&fixture.bits, fixture.n_users, fixture.file_size_bits)
        }
        DeliveryScheme::Bgd => deliver_bgd(&fixture.bits, fixture.n_users, fixture.file_size_bits),
        DeliveryScheme::Uncoded => {
            deliver_uncoded(&fixture.bits, fixture.n_users, fixture.file_size_bits)
        }
        DeliveryScheme::GroupedOd => {
            return Err(CliError::Input(
                "GROUPED_OD needs a popularity grouping; replay supports OD, SGD, \
                 SEMI_SGD, BGD, and UNCODED"
                    .into(),
            ))
        }
    }?;
    print!("{}", format_log(&log));
    Ok(())
}

// ---- allocate ----

fn regime_label(regime: Regime) -> &'static str {
    match regime {
        Regime::Saturated => "SATURATED",
        Regime::Interior => "INTERIOR",
        Regime::Zero => "ZERO",
    }
}

fn cmd_allocate(args: &AllocateArgs) -> Result<(), CliError> {
    let params = SystemParams::new(args.n_files, args.n_users, 1, args.memory)?;
    let popularity = zipf_popularity(args.n_files, args.alpha)?;
    let method: PlacementScheme = args.method.parse()?;

    let mut table = String::from("file,popularity,q,regime\n");
    let mut summary = String::new();
    match method {
        PlacementScheme::ExactKkt => {
            let solved = solve_exact_allocation(&popularity, &params)?;
            for i in 0..args.n_files {
                writeln!(
                    table,
                    "{},{},{},{}",
                    i + 1,
                    sig10(popularity.probs()[i]),
                    sig10(solved.allocation.fractions()[i]),
                    regime_label(solved.regimes[i])
                )
                .expect("string write");
            }
        }
        PlacementScheme::Grouped => {
            let solved = solve_group_allocation(&group_files(&popularity), &params)?;
            let fractions = solved.file_fractions()?;
            for i in 0..args.n_files {
                writeln!(
                    table,
                    "{},{},{},",
                    i + 1,
                    sig10(popularity.probs()[i]),
                    sig10(fractions.fractions()[i])
                )
                .expect("string write");
            }
            summary.push_str("\ngroup,n_files,P_l,M_l\n");
            for (g, block) in solved.blocks().iter().enumerate() {
                writeln!(
                    summary,
                    "{},{},{},{}",
                    g + 1,
                    block.len(),
                    sig10(solved.group_probs()[g]),
                    sig10(solved.group_memories()[g])
                )
                .expect("string write");
            }
        }
        other => {
            let (allocation, _) = placement_allocation(other, &popularity, &params)?;
            for i in 0..args.n_files {
                writeln!(
                    table,
                    "{},{},{},",
                    i + 1,
                    sig10(popularity.probs()[i]),
                    sig10(allocation.fractions()[i])
                )
                .expect("string write");
            }
        }
    }
    table.push_str(&summary);
    emit(&args.out, &table)
}
