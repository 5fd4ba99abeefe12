//! Two-layer penalty solver for the QoS power-minimization problem.
//!
//! The SINR constraints couple the digital beamformer `W`, the analog
//! beamformer `V`, and the RIS response. Introducing one auxiliary complex
//! variable per (user, beam) pair for the effective-channel products and
//! penalizing the mismatch turns the problem into three blocks that are each
//! easy to update:
//!
//! 1. `W` — an unconstrained convex quadratic with a closed-form solution;
//! 2. the phases — a smooth objective over products of unit circles, handled
//!    by [`crate::manifold`] (alternating, joint, or phase-domain descent);
//! 3. the auxiliary products — independent per-user projections onto SINR
//!    cones, handled by [`crate::conic`].
//!
//! The inner loop cycles the blocks until the penalized objective stalls; the
//! outer loop raises the penalty factor until the largest squared mismatch
//! between the auxiliary products and the actual effective-channel products
//! drops below tolerance. A final projection onto the discrete phase sets and
//! one exact digital re-solve produce the returned design.
//!
//! Internally the solver works on noise-normalized, gain-rescaled channels
//! (unit noise, order-one effective gains). The rescaling is exact — SINRs
//! are unchanged and the beamformer is mapped back to physical units on exit
//! — and it keeps the penalty schedule and the stopping indicator on the
//! scales the algorithm is tuned for.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::channel::ChannelSet;
use crate::conic::{
    achieved_sinr, project_sinr_row, solve_power_min, EffectiveChannels, PowerMinConfig,
};
use crate::linalg::{dotu, norm, norm_sqr, CMat};
use crate::manifold::{
    rcg_minimize_structured, sca_phase_minimize, PhaseProblem, RcgConfig, ScaConfig, SmoothProblem,
    Structure,
};
use crate::scenario::{
    complex_normal, phase_project, random_phasor, streams, watts_to_dbm, PhaseBits, RngSeed,
    SolverConfig, SystemConfig,
};
use crate::Cx;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("QoS targets are infeasible: {0}")]
    Infeasible(String),
    #[error("channel dimensions do not match the system configuration")]
    DimensionMismatch,
}

/// Which method updates the phase blocks (RIS and analog) each inner pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMethod {
    /// Conjugate gradient on the RIS vector, then on the analog vector.
    AlternatingRcg,
    /// Conjugate gradient on the concatenated vector of both.
    JointRcg,
    /// Gradient descent on the stacked phase angles.
    JointSca,
}

/// Whether the RIS response is optimized or pinned to a given value.
#[derive(Debug, Clone)]
pub enum RisMode {
    Optimize,
    Fixed(RisResponse),
}

/// Unit-modulus RIS reflection coefficients (the diagonal of the response
/// matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct RisResponse {
    pub coefficients: Vec<Cx>,
}

impl RisResponse {
    /// Random feasible response: uniform grid element per entry for discrete
    /// sets, uniform phase for continuous.
    pub fn random<R: rand::Rng>(f: usize, bits: PhaseBits, rng: &mut R) -> Self {
        let coefficients = match bits.levels() {
            None => (0..f).map(|_| random_phasor(rng)).collect(),
            Some(levels) => (0..f)
                .map(|_| {
                    let q = rng.gen_range(0..levels);
                    Cx::from_polar(1.0, 2.0 * std::f64::consts::PI * q as f64 / levels as f64)
                })
                .collect(),
        };
        Self { coefficients }
    }

    pub fn project(&self, bits: PhaseBits) -> Self {
        Self {
            coefficients: self
                .coefficients
                .iter()
                .map(|&c| phase_project(c, bits).expect("nonzero coefficient"))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Sub-connected hybrid beamformer: one unit-modulus analog vector per RF
/// chain (the diagonal blocks of the analog matrix) plus the digital matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBeamformer {
    /// `n` blocks of length `d`.
    pub v_blocks: Vec<Vec<Cx>>,
    /// Digital beamformer, `n x k` (one column per user).
    pub w: CMat<f64>,
}

impl HybridBeamformer {
    /// `V w` for one digital column: block `n` of the output is
    /// `w[n] * v_blocks[n]`.
    pub fn apply_analog(&self, w_col: &[Cx]) -> Vec<Cx> {
        let d = self.v_blocks.first().map_or(0, Vec::len);
        let mut out = Vec::with_capacity(self.v_blocks.len() * d);
        for (block, &wn) in self.v_blocks.iter().zip(w_col) {
            for &v in block {
                out.push(v * wn);
            }
        }
        out
    }

    /// Stacked analog vector (concatenated blocks).
    pub fn analog_stack(&self) -> Vec<Cx> {
        self.v_blocks.iter().flatten().copied().collect()
    }

    /// `power_scale * sum_k ||w_k||^2`.
    pub fn transmit_power(&self, power_scale: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..self.w.cols {
            total += norm_sqr(&self.w.col(k));
        }
        power_scale * total
    }
}

/// One inner-iteration trace record. Objectives are in the solver's
/// normalized units; `objective` is the value after the full block cycle.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub outer: usize,
    pub inner: usize,
    pub rho: f64,
    pub objective_after_digital: f64,
    pub objective_after_phases: f64,
    pub objective: f64,
    pub xi: f64,
    /// False only on the first pass of a cold start, where the auxiliary
    /// block moves from its infeasible random initialization onto the cones
    /// and the objective may rise.
    pub aux_step_guaranteed: bool,
}

/// Continuous (pre-projection) state, reusable as a warm start.
#[derive(Debug, Clone)]
pub struct PenaltyWarmStart {
    pub ris_conj: Vec<Cx>,
    pub analog: Vec<Cx>,
    pub aux: CMat<f64>,
}

#[derive(Debug, Clone)]
pub struct QoSSolution {
    pub beamformer: HybridBeamformer,
    pub ris: RisResponse,
    /// Achieved SINRs (linear) of the returned design.
    pub sinr: Vec<f64>,
    pub power_watts: f64,
    pub power_dbm: f64,
    pub feasible: bool,
    /// Stopping indicator reached tolerance (otherwise the iteration cap hit).
    pub converged: bool,
    /// Discrete projection made the re-solve infeasible; the continuous
    /// design was returned instead.
    pub quantization_fallback: bool,
    pub final_xi: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub rcg_iterations: usize,
    pub wall_clock: Duration,
    pub trace: Vec<TraceRecord>,
    pub warm: PenaltyWarmStart,
}

#[derive(Debug, Clone)]
pub struct QosOptions {
    pub ris: RisMode,
    pub warm: Option<PenaltyWarmStart>,
    pub seed: RngSeed,
    /// Record the per-iteration trace.
    pub keep_trace: bool,
}

impl QosOptions {
    pub fn new(seed: RngSeed) -> Self {
        Self { ris: RisMode::Optimize, warm: None, seed, keep_trace: true }
    }
}

// ── Effective-channel helpers (physical units) ──────────────────────────────

/// Rows `h_k^H Theta G` (length M), in physical units.
pub fn effective_bs_rows(channels: &ChannelSet, ris: &RisResponse) -> Vec<Vec<Cx>> {
    channels
        .h
        .iter()
        .map(|hk| {
            let theta_row: Vec<Cx> = hk
                .iter()
                .zip(&ris.coefficients)
                .map(|(h, b)| h.conj() * b)
                .collect();
            channels.g.row_vec_mul(&theta_row)
        })
        .collect()
}

/// Rows `h_k^H Theta G V` (length N), in physical units.
pub fn effective_rows(
    channels: &ChannelSet,
    ris: &RisResponse,
    v_blocks: &[Vec<Cx>],
) -> Vec<Vec<Cx>> {
    let m_rows = effective_bs_rows(channels, ris);
    m_rows.iter().map(|row| contract_chains(row, v_blocks)).collect()
}

fn contract_chains(row_m: &[Cx], v_blocks: &[Vec<Cx>]) -> Vec<Cx> {
    let d = v_blocks.first().map_or(0, Vec::len);
    v_blocks
        .iter()
        .enumerate()
        .map(|(n, block)| dotu(&row_m[n * d..(n + 1) * d], block))
        .collect()
}

// ── Digital update ──────────────────────────────────────────────────────────

/// Closed-form minimizer of the penalized objective over the digital matrix:
/// column `k` solves
/// `(2 D I + rho * sum_j e_j^H e_j) w_k = rho * sum_j e_j^H t_{j,k}`
/// with `e_j` the effective rows.
pub fn update_digital(
    eff_rows: &[Vec<Cx>],
    aux: &CMat<f64>,
    rho: f64,
    power_scale: f64,
) -> CMat<f64> {
    let k_users = eff_rows.len();
    let n = eff_rows[0].len();
    let mut a1 = CMat::zeros(n, n);
    for i in 0..n {
        a1[(i, i)] = Cx::new(2.0 * power_scale, 0.0);
    }
    for row in eff_rows {
        for i in 0..n {
            let left = row[i].conj() * rho;
            for l in 0..n {
                a1[(i, l)] = a1[(i, l)] + left * row[l];
            }
        }
    }
    let lu = a1.lu().expect("regularized normal matrix is positive definite");
    let mut w = CMat::zeros(n, k_users);
    for k in 0..k_users {
        let mut rhs = vec![Cx::new(0.0, 0.0); n];
        for (j, row) in eff_rows.iter().enumerate() {
            let tjk = aux[(j, k)] * rho;
            for i in 0..n {
                rhs[i] += row[i].conj() * tjk;
            }
        }
        w.set_col(k, &lu.solve(&rhs));
    }
    w
}

// ── Phase objectives ────────────────────────────────────────────────────────

/// Shared data of the phase subproblem at fixed digital matrix and auxiliary
/// products. `row_h` holds the (already conjugated, noise- and gain-
/// normalized) user rows.
pub struct PhaseContext<'a> {
    pub row_h: &'a [Vec<Cx>],
    pub g: &'a CMat<f64>,
    pub w: &'a CMat<f64>,
    pub aux: &'a CMat<f64>,
    pub ris_len: usize,
    pub chain_size: usize,
}

impl PhaseContext<'_> {
    fn users(&self) -> usize {
        self.row_h.len()
    }

    /// `m_j = G Y_j x` for every beam `j` (`Y_j` scales block `n` by `w[n,j]`).
    fn beam_images(&self, x: &[Cx]) -> Vec<Vec<Cx>> {
        (0..self.w.cols)
            .map(|j| {
                let scaled: Vec<Cx> = x
                    .iter()
                    .enumerate()
                    .map(|(m, &xm)| xm * self.w[(m / self.chain_size, j)])
                    .collect();
                self.g.mul_vec(&scaled)
            })
            .collect()
    }

    /// Residuals `r_{k,j} = b^H c_{k,j} x - t_{k,j}` given the beam images.
    fn residuals(&self, b: &[Cx], images: &[Vec<Cx>]) -> CMat<f64> {
        CMat::from_fn(self.users(), self.w.cols, |k, j| {
            let mut acc = Cx::new(0.0, 0.0);
            for f in 0..self.ris_len {
                acc += b[f].conj() * self.row_h[k][f] * images[j][f];
            }
            acc - self.aux[(k, j)]
        })
    }

    /// Normalized rows `h_k^H Theta G` for the manifold variable `b`.
    fn surface_rows(&self, b: &[Cx]) -> Vec<Vec<Cx>> {
        self.row_h
            .iter()
            .map(|row| {
                let theta_row: Vec<Cx> =
                    row.iter().zip(b).map(|(h, bf)| h * bf.conj()).collect();
                self.g.row_vec_mul(&theta_row)
            })
            .collect()
    }
}

/// Objective over the RIS vector with the analog vector fixed.
struct RisOnlyObjective<'a> {
    ctx: &'a PhaseContext<'a>,
    /// `c_{k,j} x = diag(h_k^H) G Y_j x`, precomputed.
    cvec: Vec<Vec<Vec<Cx>>>,
}

impl<'a> RisOnlyObjective<'a> {
    fn new(ctx: &'a PhaseContext<'a>, x: &[Cx]) -> Self {
        let images = ctx.beam_images(x);
        let cvec = (0..ctx.users())
            .map(|k| {
                images
                    .iter()
                    .map(|mj| {
                        ctx.row_h[k]
                            .iter()
                            .zip(mj)
                            .map(|(h, m)| h * m)
                            .collect::<Vec<Cx>>()
                    })
                    .collect()
            })
            .collect();
        Self { ctx, cvec }
    }
}

impl SmoothProblem<f64> for RisOnlyObjective<'_> {
    fn value(&self, b: &[Cx]) -> f64 {
        let mut total = 0.0;
        for (k, per_k) in self.cvec.iter().enumerate() {
            for (j, c) in per_k.iter().enumerate() {
                let mut acc = Cx::new(0.0, 0.0);
                for f in 0..b.len() {
                    acc += b[f].conj() * c[f];
                }
                total += (acc - self.ctx.aux[(k, j)]).norm_sqr();
            }
        }
        total
    }

    fn euclidean_grad(&self, b: &[Cx]) -> Vec<Cx> {
        let mut grad = vec![Cx::new(0.0, 0.0); b.len()];
        for (k, per_k) in self.cvec.iter().enumerate() {
            for (j, c) in per_k.iter().enumerate() {
                let mut acc = Cx::new(0.0, 0.0);
                for f in 0..b.len() {
                    acc += b[f].conj() * c[f];
                }
                let r = (acc - self.ctx.aux[(k, j)]).conj() * 2.0;
                for f in 0..b.len() {
                    grad[f] += c[f] * r;
                }
            }
        }
        grad
    }
}

/// Objective over the analog vector with the RIS vector fixed.
struct AnalogOnlyObjective<'a> {
    ctx: &'a PhaseContext<'a>,
    /// Normalized rows `h_k^H Theta G`, precomputed.
    s_rows: Vec<Vec<Cx>>,
}

impl<'a> AnalogOnlyObjective<'a> {
    fn new(ctx: &'a PhaseContext<'a>, b: &[Cx]) -> Self {
        Self { ctx, s_rows: ctx.surface_rows(b) }
    }

    fn residuals(&self, x: &[Cx]) -> CMat<f64> {
        let d = self.ctx.chain_size;
        let n = x.len() / d;
        let k_users = self.ctx.users();
        let mut per_chain = vec![vec![Cx::new(0.0, 0.0); n]; k_users];
        for (k, s) in self.s_rows.iter().enumerate() {
            for chain in 0..n {
                per_chain[k][chain] =
                    dotu(&s[chain * d..(chain + 1) * d], &x[chain * d..(chain + 1) * d]);
            }
        }
        CMat::from_fn(k_users, self.ctx.w.cols, |k, j| {
            let mut acc = Cx::new(0.0, 0.0);
            for chain in 0..n {
                acc += per_chain[k][chain] * self.ctx.w[(chain, j)];
            }
            acc - self.ctx.aux[(k, j)]
        })
    }
}

impl SmoothProblem<f64> for AnalogOnlyObjective<'_> {
    fn value(&self, x: &[Cx]) -> f64 {
        norm_sqr(self.residuals(x).data())
    }

    fn euclidean_grad(&self, x: &[Cx]) -> Vec<Cx> {
        let res = self.residuals(x);
        let d = self.ctx.chain_size;
        let n = x.len() / d;
        let k_users = self.ctx.users();
        // coupling[k][chain] = sum_j r_{k,j} conj(w[chain, j])
        let mut coupling = vec![vec![Cx::new(0.0, 0.0); n]; k_users];
        for k in 0..k_users {
            for chain in 0..n {
                let mut acc = Cx::new(0.0, 0.0);
                for j in 0..self.ctx.w.cols {
                    acc += res[(k, j)] * self.ctx.w[(chain, j)].conj();
                }
                coupling[k][chain] = acc;
            }
        }
        let mut grad = vec![Cx::new(0.0, 0.0); x.len()];
        for (k, s) in self.s_rows.iter().enumerate() {
            for m in 0..x.len() {
                grad[m] += s[m].conj() * coupling[k][m / d] * 2.0;
            }
        }
        grad
    }
}

/// Objective over the concatenated vector `[b; x]`.
pub struct JointObjective<'a> {
    ctx: &'a PhaseContext<'a>,
}

impl<'a> JointObjective<'a> {
    pub fn new(ctx: &'a PhaseContext<'a>) -> Self {
        Self { ctx }
    }

    fn split<'z>(&self, z: &'z [Cx]) -> (&'z [Cx], &'z [Cx]) {
        z.split_at(self.ctx.ris_len)
    }
}

impl SmoothProblem<f64> for JointObjective<'_> {
    fn value(&self, z: &[Cx]) -> f64 {
        let (b, x) = self.split(z);
        let images = self.ctx.beam_images(x);
        norm_sqr(self.ctx.residuals(b, &images).data())
    }

    fn euclidean_grad(&self, z: &[Cx]) -> Vec<Cx> {
        let (b, x) = self.split(z);
        let ctx = self.ctx;
        let images = ctx.beam_images(x);
        let res = ctx.residuals(b, &images);
        let d = ctx.chain_size;

        let mut grad = vec![Cx::new(0.0, 0.0); z.len()];
        for k in 0..ctx.users() {
            for j in 0..ctx.w.cols {
                let rc = res[(k, j)].conj() * 2.0;
                for f in 0..ctx.ris_len {
                    grad[f] += ctx.row_h[k][f] * images[j][f] * rc;
                }
            }
        }
        let s_rows = ctx.surface_rows(b);
        for (k, s) in s_rows.iter().enumerate() {
            for m in 0..x.len() {
                let mut acc = Cx::new(0.0, 0.0);
                for j in 0..ctx.w.cols {
                    acc += res[(k, j)] * ctx.w[(m / d, j)].conj();
                }
                grad[ctx.ris_len + m] += s[m].conj() * acc * 2.0;
            }
        }
        grad
    }
}

/// Phase-angle view of a complex objective: `value(phi) = f(e^{j phi})`,
/// gradient `Im(egrad ⊙ conj(z))`.
pub struct PhaseAngleView<'p, P> {
    pub inner: &'p P,
}

impl<P: SmoothProblem<f64>> PhaseProblem for PhaseAngleView<'_, P> {
    fn value(&self, phases: &[f64]) -> f64 {
        let z: Vec<Cx> = phases.iter().map(|&p| Cx::from_polar(1.0, p)).collect();
        self.inner.value(&z)
    }

    fn grad(&self, phases: &[f64]) -> Vec<f64> {
        let z: Vec<Cx> = phases.iter().map(|&p| Cx::from_polar(1.0, p)).collect();
        self.inner
            .euclidean_grad(&z)
            .iter()
            .zip(&z)
            .map(|(g, zi)| (g * zi.conj()).im)
            .collect()
    }
}

/// Naive reference evaluation of the phase objective, materializing the
/// coupling matrices entry by entry. Test oracle; quadratic cost.
pub fn phase_objective_naive(ctx: &PhaseContext<'_>, b: &[Cx], x: &[Cx]) -> f64 {
    let mut total = 0.0;
    for k in 0..ctx.users() {
        for j in 0..ctx.w.cols {
            let mut acc = Cx::new(0.0, 0.0);
            for f in 0..ctx.ris_len {
                for m in 0..x.len() {
                    let c_fm = ctx.row_h[k][f] * ctx.g[(f, m)] * ctx.w[(m / ctx.chain_size, j)];
                    acc += b[f].conj() * c_fm * x[m];
                }
            }
            total += (acc - ctx.aux[(k, j)]).norm_sqr();
        }
    }
    total
}

// ── Auxiliary (cone) update ─────────────────────────────────────────────────

/// Project each row of the product matrix onto its user's SINR cone
/// (unit noise in normalized units).
pub fn update_aux(products: &CMat<f64>, gamma: &[f64]) -> CMat<f64> {
    let mut out = CMat::zeros(products.rows, products.cols);
    for k in 0..products.rows {
        let row = project_sinr_row(products.row(k), k, gamma[k], 1.0);
        out.row_mut(k).copy_from_slice(&row);
    }
    out
}

// ── The solver ──────────────────────────────────────────────────────────────

struct Normalized {
    /// `s * conj(h_k) / sigma_k` per user (length F).
    row_h: Vec<Vec<Cx>>,
    /// Maps internal beamformer amplitudes back to physical units.
    scale: f64,
}

fn normalize(channels: &ChannelSet, sys: &SystemConfig) -> Normalized {
    let g_fro = channels.g.frobenius_norm();
    let raw: Vec<Vec<Cx>> = channels
        .h
        .iter()
        .zip(&sys.sigma2)
        .map(|(hk, &s2)| {
            let inv = s2.sqrt().recip();
            hk.iter().map(|h| h.conj() * inv).collect::<Vec<Cx>>()
        })
        .collect();
    let mut gain = 0.0;
    for row in &raw {
        gain += norm(row) * g_fro * (sys.d as f64 / sys.f as f64).sqrt();
    }
    gain /= sys.k as f64;
    let scale = if gain > 0.0 && gain.is_finite() { 1.0 / gain } else { 1.0 };
    let row_h = raw
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * scale).collect())
        .collect();
    Normalized { row_h, scale }
}

fn normalized_eff_rows(
    norm_ch: &Normalized,
    g: &CMat<f64>,
    b_conj: &[Cx],
    x: &[Cx],
    d: usize,
) -> Vec<Vec<Cx>> {
    norm_ch
        .row_h
        .iter()
        .map(|row| {
            let theta_row: Vec<Cx> =
                row.iter().zip(b_conj).map(|(h, bf)| h * bf.conj()).collect();
            let row_m = g.row_vec_mul(&theta_row);
            (0..x.len() / d)
                .map(|n| dotu(&row_m[n * d..(n + 1) * d], &x[n * d..(n + 1) * d]))
                .collect()
        })
        .collect()
}

fn products(eff_rows: &[Vec<Cx>], w: &CMat<f64>) -> CMat<f64> {
    CMat::from_fn(eff_rows.len(), w.cols, |k, j| dotu(&eff_rows[k], &w.col(j)))
}

fn penalized_objective(
    w: &CMat<f64>,
    prods: &CMat<f64>,
    aux: &CMat<f64>,
    rho: f64,
    power_scale: f64,
) -> f64 {
    let mut power = 0.0;
    for k in 0..w.cols {
        power += norm_sqr(&w.col(k));
    }
    let mut penalty = 0.0;
    for (p, t) in prods.data().iter().zip(aux.data()) {
        penalty += (p - t).norm_sqr();
    }
    power_scale * power + 0.5 * rho * penalty
}

fn stopping_indicator(prods: &CMat<f64>, aux: &CMat<f64>) -> f64 {
    prods
        .data()
        .iter()
        .zip(aux.data())
        .map(|(p, t)| (p - t).norm_sqr())
        .fold(0.0, f64::max)
}

/// Run the penalty solver with default options (RIS optimized, cold start).
pub fn run_qos(
    channels: &ChannelSet,
    sys: &SystemConfig,
    solver: &SolverConfig,
    method: PhaseMethod,
    seed: &RngSeed,
) -> Result<QoSSolution, SolveError> {
    run_qos_with(channels, sys, solver, method, QosOptions::new(*seed))
}

pub fn run_qos_with(
    channels: &ChannelSet,
    sys: &SystemConfig,
    solver: &SolverConfig,
    method: PhaseMethod,
    options: QosOptions,
) -> Result<QoSSolution, SolveError> {
    let start = Instant::now();
    if channels.g.rows != sys.f || channels.g.cols != sys.m || channels.h.len() != sys.k {
        return Err(SolveError::DimensionMismatch);
    }
    let norm_ch = normalize(channels, sys);
    let d_scale = sys.d as f64;
    let rcg_cfg = RcgConfig::from_solver(solver);
    let sca_cfg = ScaConfig::from_solver(solver);

    let mut rng =
        RngSeed::for_purpose(options.seed.seed, streams::PENALTY_INIT, options.seed.stream).rng();

    let ris_fixed = match &options.ris {
        RisMode::Optimize => None,
        RisMode::Fixed(r) => {
            if r.len() != sys.f {
                return Err(SolveError::DimensionMismatch);
            }
            Some(r.clone())
        }
    };

    // Initialization: uniform random phases for both phase blocks, standard
    // complex normal for the auxiliary products, digital matrix from its
    // closed-form update. A warm start replaces all three.
    let (mut b_conj, mut x, mut aux) = match options.warm {
        Some(ws) => (ws.ris_conj, ws.analog, ws.aux),
        None => {
            let b_conj: Vec<Cx> = match &ris_fixed {
                Some(r) => r.coefficients.iter().map(|c| c.conj()).collect(),
                None => (0..sys.f).map(|_| random_phasor(&mut rng)).collect(),
            };
            let x: Vec<Cx> = (0..sys.m).map(|_| random_phasor(&mut rng)).collect();
            let aux = CMat::from_fn(sys.k, sys.k, |_, _| complex_normal(&mut rng));
            (b_conj, x, aux)
        }
    };
    let mut rho = solver.rho0;
    let mut eff = normalized_eff_rows(&norm_ch, &channels.g, &b_conj, &x, sys.d);

    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut aux_feasible = false;
    let mut converged = false;
    let mut outer_iterations = 0;
    let mut inner_iterations = 0;
    let mut rcg_iterations = 0;
    let mut xi = f64::INFINITY;

    'outer: for outer in 0..solver.max_outer {
        outer_iterations = outer + 1;
        let mut previous = f64::INFINITY;
        for inner in 0..solver.max_inner {
            inner_iterations += 1;

            // Block 1: digital beamformer (exact minimizer). On the first
            // pass this doubles as the digital initialization from the
            // initial auxiliary draw.
            let w = update_digital(&eff, &aux, rho, d_scale);
            let mut prods = products(&eff, &w);
            let after_digital = penalized_objective(&w, &prods, &aux, rho, d_scale);

            // Block 2: phase blocks.
            let ctx = PhaseContext {
                row_h: &norm_ch.row_h,
                g: &channels.g,
                w: &w,
                aux: &aux,
                ris_len: sys.f,
                chain_size: sys.d,
            };
            match (method, ris_fixed.is_some()) {
                (PhaseMethod::AlternatingRcg, false) => {
                    let ris_problem = RisOnlyObjective::new(&ctx, &x);
                    let out = rcg_minimize_structured(
                        &ris_problem,
                        &b_conj,
                        Structure::UnitModulus,
                        &rcg_cfg,
                    );
                    rcg_iterations += out.iterations;
                    b_conj = out.point;
                    let analog_problem = AnalogOnlyObjective::new(&ctx, &b_conj);
                    let out = rcg_minimize_structured(
                        &analog_problem,
                        &x,
                        Structure::UnitModulus,
                        &rcg_cfg,
                    );
                    rcg_iterations += out.iterations;
                    x = out.point;
                }
                (PhaseMethod::JointRcg, false) => {
                    let joint = JointObjective::new(&ctx);
                    let z: Vec<Cx> = b_conj.iter().chain(x.iter()).copied().collect();
                    let out = rcg_minimize_structured(&joint, &z, Structure::UnitModulus, &rcg_cfg);
                    rcg_iterations += out.iterations;
                    b_conj = out.point[..sys.f].to_vec();
                    x = out.point[sys.f..].to_vec();
                }
                (PhaseMethod::JointSca, false) => {
                    let joint = JointObjective::new(&ctx);
                    let view = PhaseAngleView { inner: &joint };
                    let phases: Vec<f64> =
                        b_conj.iter().chain(x.iter()).map(|v| v.arg()).collect();
                    let out = sca_phase_minimize(&view, &phases, &sca_cfg);
                    rcg_iterations += out.iterations;
                    let z: Vec<Cx> =
                        out.phases.iter().map(|&p| Cx::from_polar(1.0, p)).collect();
                    b_conj = z[..sys.f].to_vec();
                    x = z[sys.f..].to_vec();
                }
                // RIS pinned: only the analog vector moves.
                (PhaseMethod::AlternatingRcg | PhaseMethod::JointRcg, true) => {
                    let analog_problem = AnalogOnlyObjective::new(&ctx, &b_conj);
                    let out = rcg_minimize_structured(
                        &analog_problem,
                        &x,
                        Structure::UnitModulus,
                        &rcg_cfg,
                    );
                    rcg_iterations += out.iterations;
                    x = out.point;
                }
                (PhaseMethod::JointSca, true) => {
                    let analog_problem = AnalogOnlyObjective::new(&ctx, &b_conj);
                    let view = PhaseAngleView { inner: &analog_problem };
                    let phases: Vec<f64> = x.iter().map(|v| v.arg()).collect();
                    let out = sca_phase_minimize(&view, &phases, &sca_cfg);
                    rcg_iterations += out.iterations;
                    x = out.phases.iter().map(|&p| Cx::from_polar(1.0, p)).collect();
                }
            }
            debug_assert!(b_conj
                .iter()
                .chain(x.iter())
                .all(|v| (v.norm() - 1.0).abs() < 1e-9));

            eff = normalized_eff_rows(&norm_ch, &channels.g, &b_conj, &x, sys.d);
            prods = products(&eff, &w);
            let after_phases = penalized_objective(&w, &prods, &aux, rho, d_scale);
            debug_assert!(
                after_phases <= after_digital + 1e-9 * after_digital.abs().max(1.0),
                "phase update increased the objective: {after_digital} -> {after_phases}"
            );

            // Block 3: auxiliary products (exact projection). Non-increase
            // holds once the incoming matrix is itself feasible, which is the
            // case everywhere except the first pass of a cold start.
            aux = update_aux(&prods, &sys.gamma);
            let objective = penalized_objective(&w, &prods, &aux, rho, d_scale);
            debug_assert!(
                !aux_feasible || objective <= after_phases + 1e-9 * after_phases.abs().max(1.0),
                "aux update increased the objective: {after_phases} -> {objective}"
            );

            xi = stopping_indicator(&prods, &aux);
            if options.keep_trace {
                trace.push(TraceRecord {
                    outer,
                    inner,
                    rho,
                    objective_after_digital: after_digital,
                    objective_after_phases: after_phases,
                    objective,
                    xi,
                    aux_step_guaranteed: aux_feasible,
                });
            }
            aux_feasible = true;
            if previous - objective < solver.eps2 {
                break;
            }
            previous = objective;
        }

        if xi < solver.eps3 {
            converged = true;
            break 'outer;
        }
        rho /= solver.penalty_scale;
    }

    // Discrete projection and exact digital re-solve.
    let ris_cont = RisResponse {
        coefficients: b_conj.iter().map(|v| v.conj() / v.norm()).collect(),
    };
    let x_cont: Vec<Cx> = x.iter().map(|v| v / v.norm()).collect();
    let ris_proj = ris_cont.project(sys.q2);
    let x_proj: Vec<Cx> = x_cont
        .iter()
        .map(|&v| phase_project(v, sys.q1).expect("unit-modulus entry"))
        .collect();

    let pm_cfg = PowerMinConfig::from_solver(solver);
    let resolve = |ris: &RisResponse, stack: &[Cx]| {
        let b = conj_all(&ris.coefficients);
        let eff = normalized_eff_rows(&norm_ch, &channels.g, &b, stack, sys.d);
        let ch = EffectiveChannels {
            rows: eff,
            gamma: sys.gamma.clone(),
            sigma2: vec![1.0; sys.k],
            power_scale: d_scale,
        };
        solve_power_min(&ch, &pm_cfg)
    };

    let warm = PenaltyWarmStart {
        ris_conj: b_conj.clone(),
        analog: x_cont.clone(),
        aux: aux.clone(),
    };
    let blocks = |stack: &[Cx]| -> Vec<Vec<Cx>> {
        stack.chunks(sys.d).map(|c| c.to_vec()).collect()
    };
    let finish = |ris: RisResponse,
                  stack: Vec<Cx>,
                  sol: crate::conic::PowerMinSolution<f64>,
                  quantization_fallback: bool| {
        let w_real = CMat::from_fn(sys.n, sys.k, |i, j| sol.w[(i, j)] * norm_ch.scale);
        let power_watts = sol.total_power * norm_ch.scale * norm_ch.scale;
        let beamformer = HybridBeamformer { v_blocks: blocks(&stack), w: w_real };
        QoSSolution {
            beamformer,
            ris,
            sinr: sol.sinr,
            power_watts,
            power_dbm: watts_to_dbm(power_watts),
            feasible: true,
            converged,
            quantization_fallback,
            final_xi: xi,
            outer_iterations,
            inner_iterations,
            rcg_iterations,
            wall_clock: start.elapsed(),
            trace,
            warm,
        }
    };

    match resolve(&ris_proj, &x_proj) {
        Ok(sol) => Ok(finish(ris_proj, x_proj, sol, false)),
        Err(_) => match resolve(&ris_cont, &x_cont) {
            Ok(sol) => Ok(finish(ris_cont, x_cont, sol, true)),
            Err(e) => Err(SolveError::Infeasible(e.to_string())),
        },
    }
}

fn conj_all(v: &[Cx]) -> Vec<Cx> {
    v.iter().map(|c| c.conj()).collect()
}

/// One point of a fixed-penalty method comparison trace.
#[derive(Debug, Clone)]
pub struct MethodTracePoint {
    pub iteration: usize,
    /// Phase-subproblem objective (normalized units).
    pub objective: f64,
    /// Riemannian gradient norm where the method computes one.
    pub gradient_norm: Option<f64>,
}

/// Run one phase-block optimization at a fixed penalty factor from the seeded
/// initialization and record its convergence curve. All methods start from
/// the same point, so the curves are directly comparable.
pub fn phase_method_trace(
    channels: &ChannelSet,
    sys: &SystemConfig,
    solver: &SolverConfig,
    method: PhaseMethod,
    seed: &RngSeed,
    rho: f64,
) -> Result<Vec<MethodTracePoint>, SolveError> {
    if channels.g.rows != sys.f || channels.g.cols != sys.m || channels.h.len() != sys.k {
        return Err(SolveError::DimensionMismatch);
    }
    let norm_ch = normalize(channels, sys);
    let d_scale = sys.d as f64;
    let mut rng =
        RngSeed::for_purpose(seed.seed, streams::PENALTY_INIT, seed.stream).rng();
    let b_conj: Vec<Cx> = (0..sys.f).map(|_| random_phasor(&mut rng)).collect();
    let x: Vec<Cx> = (0..sys.m).map(|_| random_phasor(&mut rng)).collect();
    let aux = CMat::from_fn(sys.k, sys.k, |_, _| complex_normal(&mut rng));
    let eff = normalized_eff_rows(&norm_ch, &channels.g, &b_conj, &x, sys.d);
    let w = update_digital(&eff, &aux, rho, d_scale);
    let ctx = PhaseContext {
        row_h: &norm_ch.row_h,
        g: &channels.g,
        w: &w,
        aux: &aux,
        ris_len: sys.f,
        chain_size: sys.d,
    };
    let rcg_cfg = RcgConfig::from_solver(solver);
    let mut points = Vec::new();
    match method {
        PhaseMethod::JointRcg => {
            let joint = JointObjective::new(&ctx);
            let z: Vec<Cx> = b_conj.iter().chain(x.iter()).copied().collect();
            let out = rcg_minimize_structured(&joint, &z, Structure::UnitModulus, &rcg_cfg);
            for (i, (f, g)) in out.objective_trace.iter().zip(&out.gradient_norms).enumerate() {
                points.push(MethodTracePoint { iteration: i, objective: *f, gradient_norm: Some(*g) });
            }
        }
        PhaseMethod::AlternatingRcg => {
            let ris_problem = RisOnlyObjective::new(&ctx, &x);
            let pass1 =
                rcg_minimize_structured(&ris_problem, &b_conj, Structure::UnitModulus, &rcg_cfg);
            let analog_problem = AnalogOnlyObjective::new(&ctx, &pass1.point);
            let pass2 =
                rcg_minimize_structured(&analog_problem, &x, Structure::UnitModulus, &rcg_cfg);
            let mut i = 0;
            for (f, g) in pass1.objective_trace.iter().zip(&pass1.gradient_norms) {
                points.push(MethodTracePoint { iteration: i, objective: *f, gradient_norm: Some(*g) });
                i += 1;
            }
            for (f, g) in pass2.objective_trace.iter().zip(&pass2.gradient_norms).skip(1) {
                points.push(MethodTracePoint { iteration: i, objective: *f, gradient_norm: Some(*g) });
                i += 1;
            }
        }
        PhaseMethod::JointSca => {
            let joint = JointObjective::new(&ctx);
            let view = PhaseAngleView { inner: &joint };
            let phases: Vec<f64> = b_conj.iter().chain(x.iter()).map(|v| v.arg()).collect();
            let cfg = ScaConfig { decrease_tol: 0.0, ..ScaConfig::from_solver(solver) };
            let out = sca_phase_minimize(&view, &phases, &cfg);
            for (i, f) in out.objective_trace.iter().enumerate() {
                points.push(MethodTracePoint { iteration: i, objective: *f, gradient_norm: None });
            }
        }
    }
    Ok(points)
}

/// Minimal power of the exact digital stage for a fixed RIS/analog design,
/// in physical units. Self-consistency oracle for returned solutions.
pub fn fixed_phase_power(
    channels: &ChannelSet,
    sys: &SystemConfig,
    solver: &SolverConfig,
    ris: &RisResponse,
    v_blocks: &[Vec<Cx>],
) -> Result<f64, crate::conic::ConicError> {
    let rows = effective_rows(channels, ris, v_blocks);
    let ch = EffectiveChannels {
        rows,
        gamma: sys.gamma.clone(),
        sigma2: sys.sigma2.clone(),
        power_scale: sys.d as f64,
    };
    Ok(solve_power_min(&ch, &PowerMinConfig::from_solver(solver))?.total_power)
}

/// Achieved physical SINRs for a full design.
pub fn design_sinr(
    channels: &ChannelSet,
    sys: &SystemConfig,
    ris: &RisResponse,
    beamformer: &HybridBeamformer,
) -> Vec<f64> {
    let rows = effective_rows(channels, ris, &beamformer.v_blocks);
    let ch = EffectiveChannels {
        rows,
        gamma: sys.gamma.clone(),
        sigma2: sys.sigma2.clone(),
        power_scale: sys.d as f64,
    };
    achieved_sinr(&ch, &beamformer.w)
}
