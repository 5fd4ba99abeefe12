//! Experiment harness: Monte-Carlo orchestration across seeds and sweep
//! values, algorithm selection, and CSV emission.
//!
//! Every algorithm in one experiment sees the same channel realization per
//! (realization, sweep value): channels are drawn once and shared, and even
//! across sweep values that change the array sizes the generator consumes its
//! random stream in a size-independent order, so the comparisons stay paired.
//! Realizations run on a worker pool and results are gathered in realization
//! order, making the output CSV byte-stable for a given spec.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use risbeam_core::channel::{dump_csv, sample_channels, ChannelSet};
use risbeam_core::mmf::{solve_mmf, MmfMode};
use risbeam_core::penalty::{
    phase_method_trace, run_qos_with, PhaseMethod, QoSSolution, QosOptions, RisMode, RisResponse,
};
use risbeam_core::scenario::{
    dbm_to_watts, linear_to_db, load_scenario, streams, PhaseBits, RngSeed, Scenario,
    SystemConfig, SCENARIO_ENV,
};
use risbeam_core::sequential::{build_codebook, omp_analog, ris_maxmin_design, run_sequential};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scenario: {0}")]
    Scenario(#[from] risbeam_core::scenario::ScenarioError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    BadSpec(String),
}

// ── Experiment definition ───────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    PenaltyAlt,
    PenaltyJointRcg,
    PenaltyJointSca,
    Sequential,
    RandomTheta,
    SdrTheta,
    FullyDigital,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::PenaltyAlt,
        Algorithm::PenaltyJointRcg,
        Algorithm::PenaltyJointSca,
        Algorithm::Sequential,
        Algorithm::RandomTheta,
        Algorithm::SdrTheta,
        Algorithm::FullyDigital,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::PenaltyAlt => "penalty-alt",
            Algorithm::PenaltyJointRcg => "penalty-joint-rcg",
            Algorithm::PenaltyJointSca => "penalty-joint-sca",
            Algorithm::Sequential => "sequential",
            Algorithm::RandomTheta => "random-theta",
            Algorithm::SdrTheta => "sdr-theta",
            Algorithm::FullyDigital => "fully-digital",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.name() == name)
            .ok_or_else(|| {
                CliError::BadSpec(format!(
                    "unknown algorithm {name:?}; expected one of {}",
                    Self::ALL.map(|a| a.name()).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SinrTarget,
    RisElements,
    RisDistance,
    PhaseBits,
    None,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "sinr-target" => Ok(SweepAxis::SinrTarget),
            "ris-elements" => Ok(SweepAxis::RisElements),
            "ris-distance" => Ok(SweepAxis::RisDistance),
            "phase-bits" => Ok(SweepAxis::PhaseBits),
            "none" => Ok(SweepAxis::None),
            other => Err(CliError::BadSpec(format!(
                "unknown sweep axis {other:?}; expected sinr-target, ris-elements, ris-distance, phase-bits or none"
            ))),
        }
    }

    /// Whether a sweep value changes the physical channel draw.
    fn resamples_channels(&self) -> bool {
        matches!(self, SweepAxis::RisElements | SweepAxis::RisDistance)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub algorithms: Vec<Algorithm>,
    pub axis: SweepAxis,
    /// Sweep values; ignored (single pass) when the axis is `None`.
    pub values: Vec<f64>,
    pub realizations: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    fn validate(&self) -> Result<(), CliError> {
        if self.realizations == 0 {
            return Err(CliError::BadSpec("realizations must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(CliError::BadSpec("at least one algorithm required".into()));
        }
        if self.axis != SweepAxis::None && self.values.is_empty() {
            return Err(CliError::BadSpec("sweeps need a nonempty value list".into()));
        }
        Ok(())
    }

    fn system_for(&self, value: f64) -> Result<SystemConfig, CliError> {
        let sys = &self.scenario.system;
        Ok(match self.axis {
            SweepAxis::None => sys.clone(),
            SweepAxis::SinrTarget => sys.with_sinr_target_db(value),
            SweepAxis::RisDistance => sys.with_ris_distance(value),
            SweepAxis::RisElements => sys
                .with_ris_elements(value as usize)
                .map_err(CliError::Scenario)?,
            SweepAxis::PhaseBits => {
                let bits = if value <= 0.0 {
                    PhaseBits::Continuous
                } else {
                    PhaseBits::Bits(value as u32)
                };
                sys.with_phase_bits(bits, bits)
            }
        })
    }
}

// ── Result rows ─────────────────────────────────────────────────────────────

/// One algorithm outcome on one realization. The wall clock stays in memory
/// for the printed summary; the CSV omits it so identical specs produce
/// identical bytes.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub realization: u64,
    pub algorithm: &'static str,
    pub sweep_value: Option<f64>,
    pub power_dbm: f64,
    pub min_sinr_db: f64,
    pub feasible: bool,
    pub converged: bool,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub rcg_iterations: usize,
    pub wall_clock_ms: f64,
}

pub const CSV_HEADER: &str =
    "realization,algorithm,sweep_value,power_dbm,min_sinr_db,feasible,converged,outer_iters,inner_iters,rcg_iters";

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let sweep = self
            .sweep_value
            .map(|v| format!("{v:.6}"))
            .unwrap_or_default();
        format!(
            "{},{},{},{:.6},{:.6},{},{},{},{},{}",
            self.realization,
            self.algorithm,
            sweep,
            self.power_dbm,
            self.min_sinr_db,
            self.feasible,
            self.converged,
            self.outer_iterations,
            self.inner_iterations,
            self.rcg_iterations
        )
    }
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub algorithm: &'static str,
    pub sweep_value: Option<f64>,
    pub feasible_count: usize,
    pub total: usize,
    pub mean_power_dbm: f64,
    pub std_power_dbm: f64,
    pub mean_wall_clock_ms: f64,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub summaries: Vec<SummaryRow>,
    pub any_infeasible: bool,
}

impl ExperimentOutcome {
    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<18} {:>12} {:>10} {:>12} {:>10} {:>10}",
            "algorithm", "sweep_value", "feasible", "mean_dBm", "std_dB", "mean_ms"
        );
        for s in &self.summaries {
            let sweep = s.sweep_value.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<18} {:>12} {:>7}/{:<2} {:>12.2} {:>10.2} {:>10.1}",
                s.algorithm,
                sweep,
                s.feasible_count,
                s.total,
                s.mean_power_dbm,
                s.std_power_dbm,
                s.mean_wall_clock_ms
            );
        }
        out
    }
}

// ── Execution ───────────────────────────────────────────────────────────────

fn qos_row(
    r: u64,
    algorithm: &'static str,
    sweep_value: Option<f64>,
    result: Result<QoSSolution, risbeam_core::penalty::SolveError>,
    elapsed_ms: f64,
) -> ResultRow {
    match result {
        Ok(sol) => ResultRow {
            realization: r,
            algorithm,
            sweep_value,
            power_dbm: sol.power_dbm,
            min_sinr_db: linear_to_db(
                sol.sinr.iter().cloned().fold(f64::INFINITY, f64::min),
            ),
            feasible: sol.feasible,
            converged: sol.converged,
            outer_iterations: sol.outer_iterations,
            inner_iterations: sol.inner_iterations,
            rcg_iterations: sol.rcg_iterations,
            wall_clock_ms: elapsed_ms,
        },
        Err(_) => ResultRow {
            realization: r,
            algorithm,
            sweep_value,
            power_dbm: f64::NAN,
            min_sinr_db: f64::NAN,
            feasible: false,
            converged: false,
            outer_iterations: 0,
            inner_iterations: 0,
            rcg_iterations: 0,
            wall_clock_ms: elapsed_ms,
        },
    }
}

fn run_algorithm(
    algorithm: Algorithm,
    channels: &ChannelSet,
    sys: &SystemConfig,
    scenario: &Scenario,
    seed: RngSeed,
    r: u64,
    sweep_value: Option<f64>,
) -> ResultRow {
    let solver = &scenario.solver;
    let start = Instant::now();
    let elapsed = |t: Instant| t.elapsed().as_secs_f64() * 1e3;
    match algorithm {
        Algorithm::PenaltyAlt | Algorithm::PenaltyJointRcg | Algorithm::PenaltyJointSca => {
            let method = match algorithm {
                Algorithm::PenaltyAlt => PhaseMethod::AlternatingRcg,
                Algorithm::PenaltyJointSca => PhaseMethod::JointSca,
                _ => PhaseMethod::JointRcg,
            };
            let res = run_qos_with(channels, sys, solver, method, QosOptions::new(seed));
            qos_row(r, algorithm.name(), sweep_value, res, elapsed(start))
        }
        Algorithm::RandomTheta => {
            let mut rng = RngSeed::for_purpose(seed.seed, streams::RANDOM_THETA, r).rng();
            let theta = RisResponse::random(sys.f, sys.q2, &mut rng);
            let mut opts = QosOptions::new(seed);
            opts.ris = RisMode::Fixed(theta);
            let res = run_qos_with(channels, sys, solver, PhaseMethod::JointRcg, opts);
            qos_row(r, algorithm.name(), sweep_value, res, elapsed(start))
        }
        Algorithm::SdrTheta => {
            let (theta, _) = ris_maxmin_design(channels, sys, solver, &seed);
            let mut opts = QosOptions::new(seed);
            opts.ris = RisMode::Fixed(theta);
            let res = run_qos_with(channels, sys, solver, PhaseMethod::JointRcg, opts);
            qos_row(r, algorithm.name(), sweep_value, res, elapsed(start))
        }
        Algorithm::FullyDigital => {
            let sys_fd = sys.fully_digital();
            let res =
                run_qos_with(channels, &sys_fd, solver, PhaseMethod::JointRcg, QosOptions::new(seed));
            qos_row(r, algorithm.name(), sweep_value, res, elapsed(start))
        }
        Algorithm::Sequential => {
            match run_sequential(channels, sys, solver, &scenario.channel, &seed) {
                Ok(sol) => ResultRow {
                    realization: r,
                    algorithm: algorithm.name(),
                    sweep_value,
                    power_dbm: sol.power_dbm,
                    min_sinr_db: linear_to_db(
                        sol.sinr.iter().cloned().fold(f64::INFINITY, f64::min),
                    ),
                    feasible: sol.feasible,
                    converged: true,
                    outer_iterations: 0,
                    inner_iterations: 0,
                    rcg_iterations: 0,
                    wall_clock_ms: elapsed(start),
                },
                Err(_) => ResultRow {
                    realization: r,
                    algorithm: algorithm.name(),
                    sweep_value,
                    power_dbm: f64::NAN,
                    min_sinr_db: f64::NAN,
                    feasible: false,
                    converged: false,
                    outer_iterations: 0,
                    inner_iterations: 0,
                    rcg_iterations: 0,
                    wall_clock_ms: elapsed(start),
                },
            }
        }
    }
}

/// Run an experiment: one row per (realization, sweep value, algorithm),
/// deterministic for a given spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome, CliError> {
    spec.validate()?;
    let values: Vec<Option<f64>> = match spec.axis {
        SweepAxis::None => vec![None],
        _ => spec.values.iter().map(|&v| Some(v)).collect(),
    };
    // Precompute per-value systems (errors surface before the parallel stage).
    let systems: Vec<SystemConfig> = values
        .iter()
        .map(|v| spec.system_for(v.unwrap_or(0.0)))
        .collect::<Result<_, _>>()?;

    let mut per_realization: Vec<(u64, Vec<ResultRow>)> = (0..spec.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = RngSeed::new(spec.seed, r);
            let channel_seed = RngSeed::for_purpose(spec.seed, streams::CHANNEL, r);
            let mut rows = Vec::with_capacity(values.len() * spec.algorithms.len());
            let mut shared: Option<ChannelSet> = None;
            for (value, sys) in values.iter().zip(&systems) {
                let channels = if spec.axis.resamples_channels() {
                    sample_channels(sys, &spec.scenario.channel, &channel_seed)
                } else {
                    shared
                        .get_or_insert_with(|| {
                            sample_channels(sys, &spec.scenario.channel, &channel_seed)
                        })
                        .clone()
                };
                for &algorithm in &spec.algorithms {
                    rows.push(run_algorithm(
                        algorithm,
                        &channels,
                        sys,
                        &spec.scenario,
                        seed,
                        r,
                        *value,
                    ));
                }
            }
            (r, rows)
        })
        .collect();
    per_realization.sort_by_key(|(r, _)| *r);
    let rows: Vec<ResultRow> = per_realization.into_iter().flat_map(|(_, v)| v).collect();

    let mut summaries = Vec::new();
    for value in &values {
        for &algorithm in &spec.algorithms {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|row| row.algorithm == algorithm.name() && row.sweep_value == *value)
                .collect();
            let feasible: Vec<f64> = group
                .iter()
                .filter(|row| row.feasible)
                .map(|row| row.power_dbm)
                .collect();
            let mean = if feasible.is_empty() {
                f64::NAN
            } else {
                feasible.iter().sum::<f64>() / feasible.len() as f64
            };
            let std = if feasible.len() < 2 {
                0.0
            } else {
                (feasible.iter().map(|p| (p - mean).powi(2)).sum::<f64>()
                    / (feasible.len() - 1) as f64)
                    .sqrt()
            };
            summaries.push(SummaryRow {
                algorithm: algorithm.name(),
                sweep_value: *value,
                feasible_count: feasible.len(),
                total: group.len(),
                mean_power_dbm: mean,
                std_power_dbm: std,
                mean_wall_clock_ms: group.iter().map(|r| r.wall_clock_ms).sum::<f64>()
                    / group.len().max(1) as f64,
            });
        }
    }
    let any_infeasible = rows.iter().any(|r| !r.feasible);
    Ok(ExperimentOutcome { rows, summaries, any_infeasible })
}

// ── Other harness entry points ──────────────────────────────────────────────

/// Dump the channel realization of one seed/realization pair as CSV.
pub fn dump_channels_csv(scenario: &Scenario, seed: u64, realization: u64) -> String {
    let channels = sample_channels(
        &scenario.system,
        &scenario.channel,
        &RngSeed::for_purpose(seed, streams::CHANNEL, realization),
    );
    let mut buf = Vec::new();
    dump_csv(&channels, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("ascii csv")
}

/// Penalty-solver convergence trace of one realization as CSV
/// (`outer_iter,inner_iter,rho,objective,xi`).
pub fn penalty_trace_csv(
    scenario: &Scenario,
    method: PhaseMethod,
    seed: u64,
    realization: u64,
) -> Result<String, CliError> {
    let channels = sample_channels(
        &scenario.system,
        &scenario.channel,
        &RngSeed::for_purpose(seed, streams::CHANNEL, realization),
    );
    let sol = run_qos_with(
        &channels,
        &scenario.system,
        &scenario.solver,
        method,
        QosOptions::new(RngSeed::new(seed, realization)),
    )
    .map_err(|e| CliError::BadSpec(e.to_string()))?;
    let mut out = String::from("outer_iter,inner_iter,rho,objective,xi\n");
    for rec in &sol.trace {
        let _ = writeln!(
            out,
            "{},{},{:.6e},{:.9e},{:.9e}",
            rec.outer, rec.inner, rec.rho, rec.objective, rec.xi
        );
    }
    Ok(out)
}

/// Fixed-penalty convergence curves of the three phase methods from one
/// common initialization (`method,iteration,objective,gradient_norm`).
pub fn method_trace_csv(
    scenario: &Scenario,
    seed: u64,
    realization: u64,
    rho: f64,
) -> Result<String, CliError> {
    let channels = sample_channels(
        &scenario.system,
        &scenario.channel,
        &RngSeed::for_purpose(seed, streams::CHANNEL, realization),
    );
    let mut out = String::from("method,iteration,objective,gradient_norm\n");
    for (name, method) in [
        ("alternating-rcg", PhaseMethod::AlternatingRcg),
        ("joint-rcg", PhaseMethod::JointRcg),
        ("joint-sca", PhaseMethod::JointSca),
    ] {
        let points = phase_method_trace(
            &channels,
            &scenario.system,
            &scenario.solver,
            method,
            &RngSeed::new(seed, realization),
            rho,
        )
        .map_err(|e| CliError::BadSpec(e.to_string()))?;
        for p in points {
            let grad = p.gradient_norm.map(|g| format!("{g:.9e}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{:.9e},{}", name, p.iteration, p.objective, grad);
        }
    }
    Ok(out)
}

/// Per-stage diagnostics of one sequential-design run as CSV
/// (`stage,metric,value`).
pub fn sequential_diagnostics_csv(
    scenario: &Scenario,
    seed: u64,
    realization: u64,
) -> Result<String, CliError> {
    let channels = sample_channels(
        &scenario.system,
        &scenario.channel,
        &RngSeed::for_purpose(seed, streams::CHANNEL, realization),
    );
    let sol = run_sequential(
        &channels,
        &scenario.system,
        &scenario.solver,
        &scenario.channel,
        &RngSeed::new(seed, realization),
    )
    .map_err(|e| CliError::BadSpec(e.to_string()))?;
    let d = &sol.diagnostics;
    let mut out = String::from("stage,metric,value\n");
    let _ = writeln!(out, "ris,worst_case_margin,{:.9e}", d.ris_margin);
    let _ = writeln!(out, "fully-digital,power_watts,{:.9e}", d.fully_digital_watts);
    for mu in &d.per_mu {
        let _ = writeln!(out, "analog-mu{},omp_residual,{:.9e}", mu.mu, mu.omp_residual);
        match mu.power_watts {
            Some(p) => {
                let _ = writeln!(out, "analog-mu{},power_watts,{:.9e}", mu.mu, p);
            }
            None => {
                let _ = writeln!(out, "analog-mu{},power_watts,infeasible", mu.mu);
            }
        }
    }
    let _ = writeln!(out, "digital,best_mu,{}", d.best_mu);
    let _ = writeln!(out, "digital,power_watts,{:.9e}", sol.power_watts);
    Ok(out)
}

/// Bisection trace of one max-min-fairness run as CSV
/// (`iter,varsigma,power_watts,within_budget`).
#[allow(clippy::too_many_arguments)]
pub fn mmf_bisection_trace_csv(
    scenario: &Scenario,
    budget_dbm: f64,
    mode: MmfProbeMode,
    method: PhaseMethod,
    seed: u64,
    realization: u64,
) -> Result<String, CliError> {
    let channels = sample_channels(
        &scenario.system,
        &scenario.channel,
        &RngSeed::for_purpose(seed, streams::CHANNEL, realization),
    );
    let run_seed = RngSeed::new(seed, realization);
    let mode = build_mmf_mode(&channels, scenario, mode, method, &run_seed)
        .ok_or_else(|| CliError::BadSpec("fixed-phase stages were infeasible".into()))?;
    let sol = solve_mmf(
        &channels,
        &scenario.system,
        &scenario.solver,
        dbm_to_watts(budget_dbm),
        &mode,
        &run_seed,
    )
    .map_err(|e| CliError::BadSpec(e.to_string()))?;
    let mut out = String::from("iter,varsigma,power_watts,within_budget\n");
    for (i, rec) in sol.trace.iter().enumerate() {
        let power = rec.power_watts.map(|p| format!("{p:.9e}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:.9e},{},{}", i, rec.varsigma, power, rec.within_budget);
    }
    Ok(out)
}

fn build_mmf_mode(
    channels: &ChannelSet,
    scenario: &Scenario,
    mode: MmfProbeMode,
    method: PhaseMethod,
    run_seed: &RngSeed,
) -> Option<MmfMode> {
    match mode {
        MmfProbeMode::Full => Some(MmfMode::FullJoint { method }),
        MmfProbeMode::Fixed => {
            let (ris, _) =
                ris_maxmin_design(channels, &scenario.system, &scenario.solver, run_seed);
            let reference = risbeam_core::sequential::fully_digital_reference(
                channels,
                &ris,
                &scenario.system,
                &scenario.solver,
            )
            .ok()?;
            let codebook = build_codebook(&scenario.system, &scenario.channel, 2);
            let omp = omp_analog(&reference.w, &codebook, &scenario.system);
            Some(MmfMode::FixedPhases { ris, v_blocks: omp.v_blocks })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmfProbeMode {
    Full,
    Fixed,
}

/// Max-min-fairness runs: one row per realization with the consumed power and
/// the achieved worst weighted SINR.
pub fn run_mmf_experiment(
    scenario: &Scenario,
    budget_dbm: f64,
    mode: MmfProbeMode,
    method: PhaseMethod,
    seed: u64,
    realizations: u64,
) -> Result<(String, String, bool), CliError> {
    let budget = dbm_to_watts(budget_dbm);
    let mut rows: Vec<(u64, Option<(f64, f64, f64)>)> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let channels = sample_channels(
                &scenario.system,
                &scenario.channel,
                &RngSeed::for_purpose(seed, streams::CHANNEL, r),
            );
            let run_seed = RngSeed::new(seed, r);
            let Some(mode) = build_mmf_mode(&channels, scenario, mode, method, &run_seed) else {
                return (r, None);
            };
            match solve_mmf(&channels, &scenario.system, &scenario.solver, budget, &mode, &run_seed)
            {
                Ok(sol) => (
                    r,
                    Some((sol.power_dbm, sol.min_weighted_ratio, linear_to_db(
                        sol.sinr.iter().cloned().fold(f64::INFINITY, f64::min),
                    ))),
                ),
                Err(_) => (r, None),
            }
        })
        .collect();
    rows.sort_by_key(|(r, _)| *r);

    let mut csv = String::from("realization,power_dbm,min_weighted_ratio,min_sinr_db,feasible\n");
    let mut ratios = Vec::new();
    let mut any_infeasible = false;
    for (r, outcome) in &rows {
        match outcome {
            Some((power, ratio, min_sinr)) => {
                let _ = writeln!(csv, "{r},{power:.6},{ratio:.6},{min_sinr:.6},true");
                ratios.push(*ratio);
            }
            None => {
                let _ = writeln!(csv, "{r},NaN,NaN,NaN,false");
                any_infeasible = true;
            }
        }
    }
    let mean = if ratios.is_empty() { f64::NAN } else { ratios.iter().sum::<f64>() / ratios.len() as f64 };
    let summary = format!(
        "mmf: {}/{} feasible, mean worst weighted SINR ratio {:.4} at budget {:.2} dBm\n",
        ratios.len(),
        realizations,
        mean,
        budget_dbm
    );
    Ok((csv, summary, any_infeasible))
}

/// Resolve a scenario argument: a path, one of the built-in profile names,
/// or (when absent) the environment variable, falling back to the desk
/// profile.
pub fn resolve_scenario(arg: Option<&str>) -> Result<Scenario, CliError> {
    let spec = match arg {
        Some(s) => s.to_string(),
        None => match std::env::var(SCENARIO_ENV) {
            Ok(path) => path,
            Err(_) => return Ok(Scenario::desk()),
        },
    };
    match spec.as_str() {
        "desk" => Ok(Scenario::desk()),
        "full" => Ok(Scenario::full_scale()),
        path => {
            let text = std::fs::read_to_string(path)?;
            Ok(load_scenario(&text)?)
        }
    }
}
