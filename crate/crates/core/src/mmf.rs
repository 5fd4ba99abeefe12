//! Max-min fairness under a transmit power budget, solved through its
//! power-minimization dual: the largest common scaling of the SINR targets
//! whose QoS solution fits the budget is found by bisection, each probe being
//! one QoS solve at scaled targets.
//!
//! Two probe modes exist. With fixed phases (RIS and analog given) each probe
//! is one exact convex solve, so the duality between the two problems holds
//! to solver precision. The full joint mode re-runs the penalty solver per
//! probe — a heuristic inner solver, so only the bracket invariant and
//! feasibility are guaranteed, not exact duality.

use thiserror::Error;

use crate::channel::ChannelSet;
use crate::conic::{solve_power_min, EffectiveChannels, PowerMinConfig};
use crate::penalty::{
    effective_rows, run_qos_with, HybridBeamformer, PenaltyWarmStart, PhaseMethod, QosOptions,
    RisMode, RisResponse,
};
use crate::scenario::{watts_to_dbm, RngSeed, SolverConfig, SystemConfig};
use crate::Cx;

#[derive(Debug, Error)]
pub enum MmfError {
    #[error("targets scaled by {varsigma:e} are already infeasible or over budget")]
    InfeasibleAtFloor { varsigma: f64 },
    #[error("probe failed: {0}")]
    Probe(String),
}

/// Probe strategy for each bisection step.
#[derive(Debug, Clone)]
pub enum MmfMode {
    /// Full joint redesign per probe (penalty solver, warm-started).
    FullJoint { method: PhaseMethod },
    /// Phases pinned; each probe is one exact digital power minimization.
    FixedPhases { ris: RisResponse, v_blocks: Vec<Vec<Cx>> },
}

#[derive(Debug, Clone)]
pub struct BisectionRecord {
    pub varsigma: f64,
    /// Power of the probe, watts; infeasible probes carry `None`.
    pub power_watts: Option<f64>,
    pub within_budget: bool,
}

#[derive(Debug, Clone)]
pub struct MmfSolution {
    pub beamformer: HybridBeamformer,
    pub ris: RisResponse,
    pub sinr: Vec<f64>,
    /// `min_k SINR_k / gamma_k` of the returned design.
    pub min_weighted_ratio: f64,
    pub power_watts: f64,
    pub power_dbm: f64,
    /// Scale factor of the accepted (within-budget) probe.
    pub varsigma: f64,
    pub trace: Vec<BisectionRecord>,
}

struct Probe {
    beamformer: HybridBeamformer,
    ris: RisResponse,
    sinr: Vec<f64>,
    power_watts: f64,
}

/// Maximize the minimum weighted SINR under the power budget (watts).
pub fn solve_mmf(
    channels: &ChannelSet,
    sys: &SystemConfig,
    solver: &SolverConfig,
    budget_watts: f64,
    mode: &MmfMode,
    seed: &RngSeed,
) -> Result<MmfSolution, MmfError> {
    assert!(budget_watts > 0.0, "budget must be positive");
    let mut trace = Vec::new();
    let mut warm: Option<PenaltyWarmStart> = None;

    let run_probe = |varsigma: f64,
                         warm: &mut Option<PenaltyWarmStart>,
                         trace: &mut Vec<BisectionRecord>|
     -> Option<Probe> {
        let scaled = {
            let mut s = sys.clone();
            for g in &mut s.gamma {
                *g *= varsigma;
            }
            s
        };
        let outcome = match mode {
            MmfMode::FixedPhases { ris, v_blocks } => {
                let rows = effective_rows(channels, ris, v_blocks);
                let ch = EffectiveChannels {
                    rows,
                    gamma: scaled.gamma.clone(),
                    sigma2: scaled.sigma2.clone(),
                    power_scale: scaled.d as f64,
                };
                solve_power_min(&ch, &PowerMinConfig::from_solver(solver)).ok().map(|sol| Probe {
                    beamformer: HybridBeamformer { v_blocks: v_blocks.clone(), w: sol.w },
                    ris: ris.clone(),
                    sinr: sol.sinr,
                    power_watts: sol.total_power,
                })
            }
            MmfMode::FullJoint { method } => {
                let mut opts = QosOptions::new(*seed);
                opts.ris = RisMode::Optimize;
                opts.warm = warm.clone();
                opts.keep_trace = false;
                run_qos_with(channels, &scaled, solver, *method, opts).ok().map(|sol| {
                    *warm = Some(sol.warm.clone());
                    Probe {
                        beamformer: sol.beamformer,
                        ris: sol.ris,
                        sinr: sol.sinr,
                        power_watts: sol.power_watts,
                    }
                })
            }
        };
        let within = outcome.as_ref().is_some_and(|p| p.power_watts <= budget_watts);
        trace.push(BisectionRecord {
            varsigma,
            power_watts: outcome.as_ref().map(|p| p.power_watts),
            within_budget: within,
        });
        outcome.filter(|p| p.power_watts <= budget_watts)
    };

    // Bracket: the floor must fit the budget; the ceiling doubles from 1
    // until it does not (or the cap is reached).
    let mut lo = 1e-3;
    let Some(mut accepted) = run_probe(lo, &mut warm, &mut trace) else {
        return Err(MmfError::InfeasibleAtFloor { varsigma: lo });
    };
    let mut hi = 1.0;
    let cap = (1u64 << 20) as f64;
    loop {
        match run_probe(hi, &mut warm, &mut trace) {
            Some(probe) => {
                lo = hi;
                accepted = probe;
                if hi >= cap {
                    break;
                }
                hi *= 2.0;
            }
            None => break,
        }
    }

    // Bisect to relative tolerance, keeping the within-budget endpoint.
    if lo < hi {
        while hi - lo > solver.bisection_tol * lo {
            let mid = 0.5 * (lo + hi);
            match run_probe(mid, &mut warm, &mut trace) {
                Some(probe) => {
                    lo = mid;
                    accepted = probe;
                }
                None => hi = mid,
            }
        }
    }

    let min_weighted_ratio = accepted
        .sinr
        .iter()
        .zip(&sys.gamma)
        .map(|(s, g)| s / g)
        .fold(f64::INFINITY, f64::min);
    Ok(MmfSolution {
        beamformer: accepted.beamformer,
        ris: accepted.ris,
        sinr: accepted.sinr,
        min_weighted_ratio,
        power_watts: accepted.power_watts,
        power_dbm: watts_to_dbm(accepted.power_watts),
        varsigma: lo,
        trace,
    })
}
