//! `risbeam` — experiment harness for the RIS hybrid-beamforming solvers.
//!
//! Exit codes: 0 on success, 2 when any realization was infeasible (rows are
//! still written), 1 on error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use risbeam_cli::{
    dump_channels_csv, method_trace_csv, mmf_bisection_trace_csv, penalty_trace_csv,
    resolve_scenario, run_experiment, run_mmf_experiment, sequential_diagnostics_csv, Algorithm,
    CliError, ExperimentSpec, MmfProbeMode, SweepAxis,
};
use risbeam_core::penalty::PhaseMethod;

#[derive(Parser)]
#[command(name = "risbeam", version, about = "RIS-aided hybrid beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario: a TOML path, or the built-in profiles `desk` / `full`.
    /// Falls back to $RISBEAM_SCENARIO, then to `desk`.
    #[arg(long)]
    scenario: Option<String>,
    /// Base seed; realization r derives its streams from (seed, r).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Independent channel realizations.
    #[arg(long, default_value_t = 20)]
    realizations: u64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Power-minimization runs for one or more algorithms.
    Qos {
        #[command(flatten)]
        common: Common,
        /// Comma-separated algorithms (penalty-alt, penalty-joint-rcg,
        /// penalty-joint-sca, sequential, random-theta, sdr-theta,
        /// fully-digital).
        #[arg(long, default_value = "penalty-joint-rcg")]
        algorithms: String,
        /// Also dump the first realization's channels to this CSV path.
        #[arg(long)]
        dump_channels: Option<PathBuf>,
        /// Also write per-stage diagnostics of one sequential run
        /// (realization 0) to this CSV path.
        #[arg(long)]
        sequential_diagnostics: Option<PathBuf>,
    },
    /// Max-min fairness under a power budget.
    Mmf {
        #[command(flatten)]
        common: Common,
        /// Total power budget in dBm.
        #[arg(long)]
        budget_dbm: f64,
        /// `full` re-runs the joint solver per probe; `fixed` pins the phases
        /// from the sequential stages and probes the exact digital solve.
        #[arg(long, default_value = "fixed")]
        mode: String,
        /// Also write the bisection trace of realization 0 to this CSV path.
        #[arg(long)]
        bisection_trace: Option<PathBuf>,
    },
    /// Sweep one axis over a list of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// sinr-target | ris-elements | ris-distance | phase-bits
        #[arg(long)]
        axis: String,
        /// Comma-separated sweep values (dB, element counts, meters, or bits
        /// with 0 meaning continuous).
        #[arg(long)]
        values: String,
        #[arg(long, default_value = "penalty-joint-rcg")]
        algorithms: String,
    },
    /// Paired comparison of the three phase-update methods.
    CompareMethods {
        #[command(flatten)]
        common: Common,
        /// Also write fixed-penalty convergence curves of all methods
        /// (realization 0) to this CSV path.
        #[arg(long)]
        method_trace: Option<PathBuf>,
        /// Penalty factor for the trace curves.
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
    },
    /// Penalty-solver convergence trace of one realization.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "penalty-joint-rcg")]
        algorithm: String,
        #[arg(long, default_value_t = 0)]
        realization: u64,
    },
}

fn parse_algorithms(arg: &str) -> Result<Vec<Algorithm>, CliError> {
    arg.split(',').map(|s| Algorithm::parse(s.trim())).collect()
}

fn parse_values(arg: &str) -> Result<Vec<f64>, CliError> {
    arg.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::BadSpec(format!("bad sweep value {s:?}: {e}")))
        })
        .collect()
}

fn penalty_method(name: &str) -> Result<PhaseMethod, CliError> {
    match Algorithm::parse(name)? {
        Algorithm::PenaltyAlt => Ok(PhaseMethod::AlternatingRcg),
        Algorithm::PenaltyJointRcg => Ok(PhaseMethod::JointRcg),
        Algorithm::PenaltyJointSca => Ok(PhaseMethod::JointSca),
        other => Err(CliError::BadSpec(format!(
            "{} is not a penalty method",
            other.name()
        ))),
    }
}

fn emit(out: &Option<PathBuf>, csv: &str, summary: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, csv)?;
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Qos { common, algorithms, dump_channels, sequential_diagnostics } => {
            let scenario = resolve_scenario(common.scenario.as_deref())?;
            for w in &scenario.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(path) = dump_channels {
                std::fs::write(&path, dump_channels_csv(&scenario, common.seed, 0))?;
            }
            if let Some(path) = sequential_diagnostics {
                std::fs::write(&path, sequential_diagnostics_csv(&scenario, common.seed, 0)?)?;
            }
            let spec = ExperimentSpec {
                scenario,
                algorithms: parse_algorithms(&algorithms)?,
                axis: SweepAxis::None,
                values: Vec::new(),
                realizations: common.realizations,
                seed: common.seed,
            };
            let outcome = run_experiment(&spec)?;
            emit(&common.out, &outcome.csv(), &outcome.summary_text())?;
            Ok(outcome.any_infeasible)
        }
        Command::Sweep { common, axis, values, algorithms } => {
            let scenario = resolve_scenario(common.scenario.as_deref())?;
            let spec = ExperimentSpec {
                scenario,
                algorithms: parse_algorithms(&algorithms)?,
                axis: SweepAxis::parse(&axis)?,
                values: parse_values(&values)?,
                realizations: common.realizations,
                seed: common.seed,
            };
            let outcome = run_experiment(&spec)?;
            emit(&common.out, &outcome.csv(), &outcome.summary_text())?;
            Ok(outcome.any_infeasible)
        }
        Command::CompareMethods { common, method_trace, rho } => {
            let scenario = resolve_scenario(common.scenario.as_deref())?;
            if let Some(path) = method_trace {
                let csv = method_trace_csv(&scenario, common.seed, 0, rho)?;
                std::fs::write(&path, csv)?;
            }
            let spec = ExperimentSpec {
                scenario,
                algorithms: vec![
                    Algorithm::PenaltyAlt,
                    Algorithm::PenaltyJointRcg,
                    Algorithm::PenaltyJointSca,
                ],
                axis: SweepAxis::None,
                values: Vec::new(),
                realizations: common.realizations,
                seed: common.seed,
            };
            let outcome = run_experiment(&spec)?;
            emit(&common.out, &outcome.csv(), &outcome.summary_text())?;
            Ok(outcome.any_infeasible)
        }
        Command::Mmf { common, budget_dbm, mode, bisection_trace } => {
            let scenario = resolve_scenario(common.scenario.as_deref())?;
            let mode = match mode.as_str() {
                "full" => MmfProbeMode::Full,
                "fixed" => MmfProbeMode::Fixed,
                other => {
                    return Err(CliError::BadSpec(format!(
                        "unknown mmf mode {other:?}; expected full or fixed"
                    )))
                }
            };
            if let Some(path) = bisection_trace {
                let csv = mmf_bisection_trace_csv(
                    &scenario,
                    budget_dbm,
                    mode,
                    PhaseMethod::JointRcg,
                    common.seed,
                    0,
                )?;
                std::fs::write(&path, csv)?;
            }
            let (csv, summary, any_infeasible) = run_mmf_experiment(
                &scenario,
                budget_dbm,
                mode,
                PhaseMethod::JointRcg,
                common.seed,
                common.realizations,
            )?;
            emit(&common.out, &csv, &summary)?;
            Ok(any_infeasible)
        }
        Command::Trace { common, algorithm, realization } => {
            let scenario = resolve_scenario(common.scenario.as_deref())?;
            let method = penalty_method(&algorithm)?;
            let csv = penalty_trace_csv(&scenario, method, common.seed, realization)?;
            emit(&common.out, &csv, "")?;
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
