//! Batch CLI over the library: solve an instance, evaluate heuristics and
//! bounds, run the simulation estimator, or execute a randomized campaign.
//! JSON goes to stdout unless `--out` redirects it to a file (campaigns
//! always write a directory of artifacts).
//!
//! Exit codes: 0 success, 2 invalid input, 1 numeric/solver failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use apq::experiments::{self, ExperimentSpec};
use apq::heuristics;
use apq::mdp;
use apq::sim::{self, SimConfig};
use apq::{Instance, Policy};

#[derive(Parser)]
#[command(name = "apq", version, about = "Dynamic pricing for finite-buffer queues with abandonment")]
struct Cli {
    /// Worker threads for parallel work (default: APQ_THREADS env, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArg {
    /// Path to an instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Write the JSON result to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Which {
    Static,
    Cutoff,
    TwoPrice,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the optimal dynamic pricing policy.
    Solve {
        #[command(flatten)]
        common: InstanceArg,
        /// Use unrestricted policy iteration instead of the
        /// structure-restricted variant.
        #[arg(long)]
        baseline: bool,
        /// Convergence threshold for the stopping rule (default 1e-9
        /// times the maximal arrival rate).
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Compute the best static / cutoff-static / two-price heuristics.
    Heuristics {
        #[command(flatten)]
        common: InstanceArg,
        #[arg(long, value_enum, default_value = "all")]
        which: Which,
    },
    /// Solve and evaluate every analytic performance bound.
    Bounds {
        #[command(flatten)]
        common: InstanceArg,
    },
    /// Monte-Carlo estimate of a policy's gain.
    Simulate {
        #[command(flatten)]
        common: InstanceArg,
        /// Path to a policy JSON file (array of per-state arrival rates).
        #[arg(long)]
        policy: PathBuf,
        /// Simulated time per replication.
        #[arg(long)]
        horizon: f64,
        /// Initial time span discarded from the statistics.
        #[arg(long, default_value_t = 0.0)]
        warmup: f64,
        /// Number of independent replications.
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Run a randomized benchmark campaign and write its artifacts.
    Campaign {
        /// Path to a campaign spec JSON file.
        #[arg(long)]
        spec: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    /// Bad input: exit 2.
    Invalid(String),
    /// Numeric or solver failure: exit 1.
    Numeric(String),
}

impl From<apq::model::ModelError> for CliError {
    fn from(e: apq::model::ModelError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<mdp::MdpError> for CliError {
    fn from(e: mdp::MdpError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("invalid {what} {}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))?;
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads.or_else(|| {
        std::env::var("APQ_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    }) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("cannot configure thread pool: {e}")))?;
    }

    match cli.command {
        Command::Solve { common, baseline, eps } => {
            let inst: Instance = read_json(&common.instance, "instance")?;
            let eps = match eps {
                Some(e) if e.is_finite() && e > 0.0 => e,
                Some(e) => return Err(CliError::Invalid(format!("--eps must be positive, got {e}"))),
                None => mdp::default_epsilon(&inst),
            };
            let result = if baseline {
                mdp::solve_baseline(&inst, eps)?
            } else {
                mdp::solve_unimodal(&inst, eps)?
            };
            emit(&result, &common.out)
        }
        Command::Heuristics { common, which } => {
            let inst: Instance = read_json(&common.instance, "instance")?;
            let mut doc = serde_json::Map::new();
            if matches!(which, Which::All) {
                let solved = mdp::solve_unimodal(&inst, mdp::default_epsilon(&inst))?;
                doc.insert("g_star".into(), json!(solved.gain));
            }
            if matches!(which, Which::Static | Which::All) {
                let s = heuristics::best_static(&inst);
                doc.insert("g_S".into(), json!(s.gain));
                doc.insert("static".into(), json!(s));
            }
            if matches!(which, Which::Cutoff | Which::All) {
                let c = heuristics::best_cutoff_static(&inst);
                doc.insert("g_C".into(), json!(c.gain));
                doc.insert("cutoff".into(), json!(c));
            }
            if matches!(which, Which::TwoPrice | Which::All) {
                let t = heuristics::best_two_price(&inst);
                doc.insert("g_T".into(), json!(t.gain));
                doc.insert("two_price".into(), json!(t));
            }
            emit(&doc, &common.out)
        }
        Command::Bounds { common } => {
            let inst: Instance = read_json(&common.instance, "instance")?;
            let solved = mdp::solve_unimodal(&inst, mdp::default_epsilon(&inst))?;
            let report = heuristics::bound_report(&inst, &solved)?;
            emit(&json!({ "g_star": solved.gain, "bounds": report }), &common.out)
        }
        Command::Simulate { common, policy, horizon, warmup, reps, seed } => {
            let inst: Instance = read_json(&common.instance, "instance")?;
            let rates: Vec<f64> = read_json(&policy, "policy")?;
            let pol = Policy::new(rates, &inst)?;
            let cfg = SimConfig::new(horizon, warmup, reps, seed)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            let est = sim::simulate(&inst, &pol, &cfg)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            emit(&est, &common.out)
        }
        Command::Campaign { spec, out } => {
            let spec: ExperimentSpec = read_json(&spec, "campaign spec")?;
            spec.validate()
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            let campaign = experiments::run_campaign(&spec)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            fs::create_dir_all(&out)?;
            emit(&campaign, &Some(out.join("records.json")))?;
            fs::write(out.join("scatter.csv"), experiments::scatter_table(&campaign.records))?;
            let agree = experiments::structure_agreement(&campaign.records);
            fs::write(out.join("structure_agreement.csv"), agree.csv())?;
            let timing = experiments::timing_report(&campaign.records);
            emit(&timing, &Some(out.join("timing.json")))?;
            let ratio_files: [(&str, fn(&experiments::InstanceRecord) -> Option<f64>, f64); 4] = [
                ("hist_static.csv", |r| r.ratio_static, 0.1),
                ("hist_cutoff.csv", |r| r.ratio_cutoff, 0.1),
                ("hist_two_price.csv", |r| r.ratio_two_price, 0.1),
                ("hist_two_price_zoom.csv", |r| r.ratio_two_price, 0.01),
            ];
            for (name, pick, width) in ratio_files {
                let hist = experiments::ratio_histogram(
                    campaign.records.iter().filter_map(pick),
                    width,
                );
                fs::write(out.join(name), experiments::histogram_csv(&hist))?;
            }
            eprintln!(
                "campaign done: {} records, {} failures -> {}",
                campaign.records.len(),
                campaign.failures.len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
