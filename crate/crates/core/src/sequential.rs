//! Low-complexity sequential design: RIS reflection first, analog beamformer
//! second, digital beamformer last — no outer iteration.
//!
//! The RIS stage maximizes the worst user's margin between coherent channel
//! gain and weighted cross-user leakage, with matched-filter transmit vectors
//! standing in for the beamformers that are designed afterwards. Its lifted
//! formulation (a positive-semidefinite matrix with unit diagonal) is solved
//! by a low-rank factorization with unit-norm rows — optimized by the shared
//! manifold conjugate gradient over a softmin smoothing of the worst-case
//! objective — followed by Gaussian randomization and entrywise projection
//! onto the discrete phase set.
//!
//! The analog stage approximates the optimal fully digital beamformer by
//! orthogonal matching pursuit over an oversampled steering-vector codebook,
//! masked per RF chain to respect the sub-connected support. The digital
//! stage is one exact power-minimization solve.

use std::time::{Duration, Instant};

use crate::channel::{upa_response, ArrayGeometry, ChannelSet};
use crate::conic::{
    solve_power_min, ConicError, EffectiveChannels, PowerMinConfig, PowerMinSolution,
};
use crate::linalg::{cdot, CMat};
use crate::manifold::{rcg_minimize_structured, RcgConfig, SmoothProblem, Structure};
use crate::penalty::{effective_bs_rows, effective_rows, HybridBeamformer, RisResponse, SolveError};
use rand::Rng;

use crate::scenario::{
    complex_normal, phase_project, streams, watts_to_dbm, ClusterParams, RngSeed, SolverConfig,
    SystemConfig,
};
use crate::Cx;

// ── RIS max-min design ──────────────────────────────────────────────────────

/// Data of the worst-case reflection design: per-user cascades
/// `eta_k = diag(h_k^H) G` and the pairwise coupling matrices
/// `zeta_{k,j} = eta_k eta_j^H`.
pub struct RisDesignProblem {
    pub eta: Vec<CMat<f64>>,
    /// `zeta[k][j]`, with `zeta[k][j]^H == zeta[j][k]`.
    pub zeta: Vec<Vec<CMat<f64>>>,
    pub gamma: Vec<f64>,
}

impl RisDesignProblem {
    pub fn new(channels: &ChannelSet, sys: &SystemConfig) -> Self {
        let eta: Vec<CMat<f64>> = channels
            .h
            .iter()
            .map(|hk| CMat::from_fn(sys.f, sys.m, |f, m| hk[f].conj() * channels.g[(f, m)]))
            .collect();
        let zeta = (0..sys.k)
            .map(|k| {
                (0..sys.k)
                    .map(|j| eta[k].mat_mul(&eta[j].conj_transpose()))
                    .collect()
            })
            .collect();
        Self { eta, zeta, gamma: sys.gamma.clone() }
    }

    /// Worst-case margin of a unit-modulus reflection vector `b` (conjugate
    /// convention): `min_k b^H zeta_kk b - gamma_k sum_{j != k} |b^H zeta_kj b|`.
    pub fn objective(&self, b: &[Cx]) -> f64 {
        let k_users = self.gamma.len();
        let mut worst = f64::INFINITY;
        for k in 0..k_users {
            let mut margin = cdot(b, &self.zeta[k][k].mul_vec(b)).re;
            for j in 0..k_users {
                if j != k {
                    margin -= self.gamma[k] * cdot(b, &self.zeta[k][j].mul_vec(b)).norm();
                }
            }
            worst = worst.min(margin);
        }
        worst
    }
}

/// Softmin smoothing of the lifted worst-case objective over a low-rank
/// factor with unit-norm rows. Minimizing this maximizes the smoothed margin.
struct SoftminLifted<'a> {
    problem: &'a RisDesignProblem,
    rank: usize,
    /// Common margin scaling so softmin temperatures stay dimensionless.
    scale: f64,
    temperature: f64,
}

impl SoftminLifted<'_> {
    /// Scaled margins `v_k(R)` and the traces `s_{k,j} = Tr(zeta_kj R R^H)`.
    fn margins(&self, r_flat: &[Cx]) -> (Vec<f64>, Vec<Vec<Cx>>) {
        let k_users = self.problem.gamma.len();
        let f = self.problem.zeta[0][0].rows;
        let r_mat = flat_to_mat(r_flat, f, self.rank);
        let mut traces = vec![vec![Cx::new(0.0, 0.0); k_users]; k_users];
        for k in 0..k_users {
            for j in 0..k_users {
                let zr = self.problem.zeta[k][j].mat_mul(&r_mat);
                traces[k][j] = cdot(r_flat, zr.data());
            }
        }
        let margins = (0..k_users)
            .map(|k| {
                let mut m = traces[k][k].re;
                for j in 0..k_users {
                    if j != k {
                        m -= self.problem.gamma[k] * traces[k][j].norm();
                    }
                }
                m * self.scale
            })
            .collect();
        (margins, traces)
    }

    fn weights(&self, margins: &[f64]) -> Vec<f64> {
        let m0 = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let exps: Vec<f64> = margins
            .iter()
            .map(|&v| (-(v - m0) / self.temperature).exp())
            .collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }
}

impl SmoothProblem<f64> for SoftminLifted<'_> {
    fn value(&self, r_flat: &[Cx]) -> f64 {
        let (margins, _) = self.margins(r_flat);
        let m0 = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let total: f64 = margins
            .iter()
            .map(|&v| (-(v - m0) / self.temperature).exp())
            .sum();
        // -softmin(v): minimizing this maximizes the smoothed worst case.
        -(m0 - self.temperature * total.ln())
    }

    fn euclidean_grad(&self, r_flat: &[Cx]) -> Vec<Cx> {
        let k_users = self.problem.gamma.len();
        let f = self.problem.zeta[0][0].rows;
        let r_mat = flat_to_mat(r_flat, f, self.rank);
        let (margins, traces) = self.margins(r_flat);
        let weights = self.weights(&margins);

        let mut grad = vec![Cx::new(0.0, 0.0); r_flat.len()];
        for k in 0..k_users {
            let wk = weights[k] * self.scale;
            if wk == 0.0 {
                continue;
            }
            // d v_k / dR = 2 zeta_kk R
            //   - gamma_k sum_{j!=k} (s_kj zeta_jk + conj(s_kj) zeta_kj) R / |s_kj|
            let zr = self.problem.zeta[k][k].mat_mul(&r_mat);
            for (g, z) in grad.iter_mut().zip(zr.data()) {
                *g -= z * (2.0 * wk);
            }
            for j in 0..k_users {
                if j == k {
                    continue;
                }
                let s = traces[k][j];
                let mag = s.norm();
                if mag < 1e-300 {
                    continue;
                }
                let coeff = self.problem.gamma[k] * wk / mag;
                let zjk_r = self.problem.zeta[j][k].mat_mul(&r_mat);
                let zkj_r = self.problem.zeta[k][j].mat_mul(&r_mat);
                for ((g, a), b) in grad.iter_mut().zip(zjk_r.data()).zip(zkj_r.data()) {
                    *g += (a * s + b * s.conj()) * coeff;
                }
            }
        }
        grad
    }
}

fn flat_to_mat(flat: &[Cx], rows: usize, cols: usize) -> CMat<f64> {
    CMat::from_fn(rows, cols, |i, j| flat[i * cols + j])
}

/// Design the RIS reflection by worst-case margin maximization: low-rank
/// lifted solve with annealed softmin smoothing, then Gaussian randomization
/// projected onto the phase set. Returns the response and the worst-case
/// margin achieved by the returned (projected) vector.
pub fn ris_maxmin_design(
    channels: &ChannelSet,
    sys: &SystemConfig,
    solver: &SolverConfig,
    seed: &RngSeed,
) -> (RisResponse, f64) {
    let problem = RisDesignProblem::new(channels, sys);
    let rank = sys.f.min(8);
    let mut rng = RngSeed::for_purpose(seed.seed, streams::RIS_RANDOMIZATION, seed.stream).rng();

    // Objective scale: mean coherent gain, so margins are order one.
    let mut scale = 0.0;
    for k in 0..sys.k {
        scale += problem.zeta[k][k].frobenius_norm();
    }
    scale /= sys.k as f64;
    let scale = if scale > 0.0 && scale.is_finite() { 1.0 / scale } else { 1.0 };

    // Unit-norm-row initialization of the factor.
    let mut r_flat: Vec<Cx> = (0..sys.f * rank).map(|_| complex_normal(&mut rng)).collect();
    for row in r_flat.chunks_mut(rank) {
        let n = crate::linalg::norm(row);
        for v in row.iter_mut() {
            *v = *v / n;
        }
    }

    let cfg = RcgConfig { grad_tol: 1e-6, max_iters: 150, ..RcgConfig::from_solver(solver) };
    for temperature in [1.0, 0.32, 0.1, 0.032, 0.01] {
        let smooth = SoftminLifted { problem: &problem, rank, scale, temperature };
        let out =
            rcg_minimize_structured(&smooth, &r_flat, Structure::UnitRows { cols: rank }, &cfg);
        r_flat = out.point;
    }
    let r_mat = flat_to_mat(&r_flat, sys.f, rank);

    // Rank-one recovery candidates: the dominant eigenvector of the lifted
    // matrix plus Gaussian randomizations R r with r ~ CN(0, I).
    let normalize_entries = |raw: &[Cx]| -> Vec<Cx> {
        raw.iter()
            .map(|&v| {
                let n = v.norm();
                if n > 0.0 {
                    v / n
                } else {
                    Cx::new(1.0, 0.0)
                }
            })
            .collect()
    };
    let mut candidates: Vec<Vec<Cx>> = Vec::with_capacity(solver.randomization_count + 2);
    candidates.push(normalize_entries(&dominant_column(&r_mat)));
    for _ in 0..solver.randomization_count.max(1) {
        let probe: Vec<Cx> = (0..rank).map(|_| complex_normal(&mut rng)).collect();
        candidates.push(normalize_entries(&r_mat.mul_vec(&probe)));
    }

    // Polish the best unit-modulus candidate on the circle manifold: the same
    // softmin objective at rank one, re-annealed from that point.
    let score = |b: &[Cx]| problem.objective(b);
    let mut best_cont = candidates
        .iter()
        .map(|b| (b.clone(), score(b)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one recovery candidate");
    let mut polished = best_cont.0.clone();
    for temperature in [0.1, 0.01] {
        let smooth = SoftminLifted { problem: &problem, rank: 1, scale, temperature };
        let out = rcg_minimize_structured(&smooth, &polished, Structure::UnitModulus, &cfg);
        polished = out.point;
    }
    let polished = normalize_entries(&polished);
    let polished_value = score(&polished);
    if polished_value > best_cont.1 {
        best_cont = (polished.clone(), polished_value);
    }

    match sys.q2.elements() {
        None => {
            let (b_vec, value) = best_cont;
            (RisResponse { coefficients: conj_coefficients(&b_vec) }, value)
        }
        Some(elements) => {
            // Entrywise projection is lossy on coarse grids, so every
            // candidate seeds a discrete coordinate ascent and the best
            // polished point wins. The lifted candidates are correlated, so
            // uniform grid draws diversify the ascent starts.
            candidates.push(polished);
            for _ in 0..solver.randomization_count.max(1).div_ceil(2) {
                candidates.push(
                    (0..sys.f)
                        .map(|_| elements[rng.gen_range(0..elements.len())])
                        .collect(),
                );
            }
            let mut best: Option<(Vec<Cx>, f64)> = None;
            for cand in &candidates {
                let mut b_vec: Vec<Cx> = cand
                    .iter()
                    .map(|&v| phase_project(v, sys.q2).unwrap_or(Cx::new(1.0, 0.0)))
                    .collect();
                let value = discrete_coordinate_ascent(&problem, &mut b_vec, &elements);
                if best.as_ref().is_none_or(|(_, v)| value > *v) {
                    best = Some((b_vec, value));
                }
            }
            let (b_vec, value) = best.expect("at least one discrete candidate");
            // Canonical grid representation for the returned coefficients.
            let coefficients = b_vec
                .iter()
                .map(|v| phase_project(v.conj(), sys.q2).expect("unit-modulus entry"))
                .collect();
            (RisResponse { coefficients }, value)
        }
    }
}

/// Greedy element swaps until no single-coordinate change improves the
/// worst-case margin. Returns the final margin.
fn discrete_coordinate_ascent(
    problem: &RisDesignProblem,
    b_vec: &mut [Cx],
    elements: &[Cx],
) -> f64 {
    let mut value = problem.objective(b_vec);
    for _ in 0..20 {
        let mut improved = false;
        for f in 0..b_vec.len() {
            let current = b_vec[f];
            let mut keep = current;
            for &e in elements {
                if e == keep {
                    continue;
                }
                b_vec[f] = e;
                let v = problem.objective(b_vec);
                if v > value {
                    value = v;
                    keep = e;
                    improved = true;
                }
            }
            b_vec[f] = keep;
        }
        if !improved {
            break;
        }
    }
    value
}

fn conj_coefficients(coefficients: &[Cx]) -> Vec<Cx> {
    coefficients.iter().map(|c| c.conj()).collect()
}

/// Dominant eigenvector of `R R^H` by power iteration on the factor.
fn dominant_column(r_mat: &CMat<f64>) -> Vec<Cx> {
    let mut y: Vec<Cx> = r_mat.col(0);
    if crate::linalg::norm(&y) == 0.0 {
        y = vec![Cx::new(1.0, 0.0); r_mat.rows];
    }
    for _ in 0..40 {
        let z = r_mat.herm_mul_vec(&y);
        y = r_mat.mul_vec(&z);
        let n = crate::linalg::norm(&y);
        if n == 0.0 {
            break;
        }
        for v in y.iter_mut() {
            *v = *v / n;
        }
    }
    y
}

// ── Fully digital reference ─────────────────────────────────────────────────

/// Optimal fully digital beamformer for a fixed reflection: exact power
/// minimization on the rows `h_k^H Theta G` with unit power scaling.
pub fn fully_digital_reference(
    channels: &ChannelSet,
    ris: &RisResponse,
    sys: &SystemConfig,
    solver: &SolverConfig,
) -> Result<PowerMinSolution<f64>, ConicError> {
    let rows = effective_bs_rows(channels, ris);
    let ch = EffectiveChannels {
        rows,
        gamma: sys.gamma.clone(),
        sigma2: sys.sigma2.clone(),
        power_scale: 1.0,
    };
    solve_power_min(&ch, &PowerMinConfig::from_solver(solver))
}

// ── Codebook and matching pursuit ───────────────────────────────────────────

/// Oversampled steering-vector codebook for the BS array; per-chain masking
/// is applied at selection time.
pub struct Codebook {
    /// Oversampling factor (1 selects the plain angular grid).
    pub mu: usize,
    /// Full-array columns, one per (azimuth, elevation) grid point.
    pub columns: Vec<Vec<Cx>>,
}

/// Codebook columns are steering vectors on the `mu`-times oversampled angle
/// grid; the azimuth count follows the array rows and the elevation count the
/// array columns.
pub fn build_codebook(sys: &SystemConfig, params: &ClusterParams, mu: usize) -> Codebook {
    let geo = ArrayGeometry::new(sys.bs_rows, sys.bs_cols, params.element_spacing);
    let n_az = mu * sys.bs_rows;
    let n_el = mu * sys.bs_cols;
    let mut columns = Vec::with_capacity(n_az * n_el);
    for i in 0..n_az {
        let az = 2.0 * std::f64::consts::PI * i as f64 / n_az as f64;
        for j in 0..n_el {
            let el = 2.0 * std::f64::consts::PI * j as f64 / n_el as f64;
            columns.push(upa_response(az, el, geo));
        }
    }
    Codebook { mu, columns }
}

#[derive(Debug, Clone)]
pub struct OmpOutcome {
    pub v_blocks: Vec<Vec<Cx>>,
    /// `||W_opt - A_sel F_BB||_F` after the last least-squares refit, before
    /// phase quantization.
    pub residual: f64,
    /// Residual norm after each chain's selection and refit (non-increasing).
    pub residual_per_chain: Vec<f64>,
    /// Selected codebook column per chain.
    pub selected: Vec<usize>,
}

/// Greedy per-chain column selection: chain `t` picks the masked codebook
/// column best correlated with the current residual, then the baseband
/// combiner is refit by least squares over all selected columns and the
/// residual is updated.
pub fn omp_analog(w_opt: &CMat<f64>, codebook: &Codebook, sys: &SystemConfig) -> OmpOutcome {
    let d = sys.d;
    let k_users = w_opt.cols;
    assert_eq!(w_opt.rows, sys.m, "reference beamformer must span the array");

    let mut residual = w_opt.clone();
    let mut selected: Vec<usize> = Vec::with_capacity(sys.n);
    let mut masked_cols: Vec<Vec<Cx>> = Vec::with_capacity(sys.n);
    let mut residual_per_chain = Vec::with_capacity(sys.n);

    for chain in 0..sys.n {
        let lo = chain * d;
        let hi = lo + d;
        // Masked columns within one pool share a norm, so raw correlation
        // energy is the selection metric.
        let mut best_idx = 0;
        let mut best_metric = -1.0;
        for (idx, col) in codebook.columns.iter().enumerate() {
            let support = &col[lo..hi];
            let mut metric = 0.0;
            for k in 0..k_users {
                let mut acc = Cx::new(0.0, 0.0);
                for (row, s) in (lo..hi).zip(support) {
                    acc += s.conj() * residual[(row, k)];
                }
                metric += acc.norm_sqr();
            }
            if metric > best_metric {
                best_metric = metric;
                best_idx = idx;
            }
        }
        selected.push(best_idx);
        let mut masked = vec![Cx::new(0.0, 0.0); sys.m];
        masked[lo..hi].copy_from_slice(&codebook.columns[best_idx][lo..hi]);
        masked_cols.push(masked);

        // Least-squares refit of the baseband combiner over the selection.
        let t = masked_cols.len();
        let mut gram = CMat::zeros(t, t);
        for a in 0..t {
            for b in 0..t {
                gram[(a, b)] = cdot(&masked_cols[a], &masked_cols[b]);
            }
            gram[(a, a)] += Cx::new(1e-10, 0.0);
        }
        let lu = gram.lu().expect("ridge keeps the Gram matrix invertible");
        let mut combiner = CMat::zeros(t, k_users);
        for k in 0..k_users {
            let col = w_opt.col(k);
            let rhs: Vec<Cx> = masked_cols.iter().map(|a| cdot(a, &col)).collect();
            combiner.set_col(k, &lu.solve(&rhs));
        }
        for k in 0..k_users {
            for row in 0..sys.m {
                let mut v = w_opt[(row, k)];
                for (a, col) in masked_cols.iter().enumerate() {
                    v -= col[row] * combiner[(a, k)];
                }
                residual[(row, k)] = v;
            }
        }
        residual_per_chain.push(residual.frobenius_norm());
    }

    let v_blocks = masked_cols
        .iter()
        .enumerate()
        .map(|(chain, col)| {
            col[chain * d..(chain + 1) * d]
                .iter()
                .map(|&v| phase_project(v, sys.q1).expect("steering entries are nonzero"))
                .collect()
        })
        .collect();

    OmpOutcome { v_blocks, residual: residual.frobenius_norm(), residual_per_chain, selected }
}

// ── The sequential pipeline ─────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct MuDiagnostic {
    pub mu: usize,
    pub omp_residual: f64,
    /// Final transmit power for this oversampling, watts; infeasible branches
    /// carry `None`.
    pub power_watts: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SequentialDiagnostics {
    /// Worst-case margin achieved by the reflection design.
    pub ris_margin: f64,
    /// Power of the fully digital reference, watts.
    pub fully_digital_watts: f64,
    pub per_mu: Vec<MuDiagnostic>,
    pub best_mu: usize,
}

#[derive(Debug, Clone)]
pub struct SequentialSolution {
    pub beamformer: HybridBeamformer,
    pub ris: RisResponse,
    pub sinr: Vec<f64>,
    pub power_watts: f64,
    pub power_dbm: f64,
    pub feasible: bool,
    pub diagnostics: SequentialDiagnostics,
    pub wall_clock: Duration,
}

/// Chain the three stages, trying every oversampling factor from 1 to 4 and
/// keeping the lowest-power feasible branch.
pub fn run_sequential(
    channels: &ChannelSet,
    sys: &SystemConfig,
    solver: &SolverConfig,
    params: &ClusterParams,
    seed: &RngSeed,
) -> Result<SequentialSolution, SolveError> {
    let start = Instant::now();
    let (ris, margin) = ris_maxmin_design(channels, sys, solver, seed);
    let fd = fully_digital_reference(channels, &ris, sys, solver)
        .map_err(|e| SolveError::Infeasible(format!("fully digital stage: {e}")))?;

    let pm_cfg = PowerMinConfig::from_solver(solver);
    let mut per_mu = Vec::with_capacity(4);
    let mut best: Option<(usize, OmpOutcome, PowerMinSolution<f64>)> = None;
    for mu in 1..=4 {
        let codebook = build_codebook(sys, params, mu);
        let omp = omp_analog(&fd.w, &codebook, sys);
        let rows = effective_rows(channels, &ris, &omp.v_blocks);
        let ch = EffectiveChannels {
            rows,
            gamma: sys.gamma.clone(),
            sigma2: sys.sigma2.clone(),
            power_scale: sys.d as f64,
        };
        match solve_power_min(&ch, &pm_cfg) {
            Ok(sol) => {
                per_mu.push(MuDiagnostic {
                    mu,
                    omp_residual: omp.residual,
                    power_watts: Some(sol.total_power),
                });
                if best.as_ref().is_none_or(|(_, _, b)| sol.total_power < b.total_power) {
                    best = Some((mu, omp, sol));
                }
            }
            Err(_) => {
                per_mu.push(MuDiagnostic { mu, omp_residual: omp.residual, power_watts: None });
            }
        }
    }

    let Some((best_mu, omp, sol)) = best else {
        return Err(SolveError::Infeasible(
            "every analog oversampling produced infeasible effective channels".into(),
        ));
    };
    let power_watts = sol.total_power;
    Ok(SequentialSolution {
        beamformer: HybridBeamformer { v_blocks: omp.v_blocks, w: sol.w },
        ris,
        sinr: sol.sinr,
        power_watts,
        power_dbm: watts_to_dbm(power_watts),
        feasible: true,
        diagnostics: SequentialDiagnostics {
            ris_margin: margin,
            fully_digital_watts: fd.total_power,
            per_mu,
            best_mu,
        },
        wall_clock: start.elapsed(),
    })
}
