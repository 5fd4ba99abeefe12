//! Convex subproblems: multiuser power-minimization beamforming under SINR
//! constraints, and the per-user second-order-cone projection used by the
//! penalty solver's auxiliary-variable update.
//!
//! The power minimization is solved through uplink-downlink duality: a
//! fixed-point iteration on dual uplink powers, MMSE beam directions from the
//! dual covariance, and a final linear solve that makes every SINR constraint
//! tight. For feasible targets this attains the same optimum as a generic
//! second-order-cone solver; infeasible targets make the fixed point diverge,
//! which is detected against a scale-aware power cap.

use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{dotu, norm, norm_sqr, solve_real, CMat, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("SINR targets are infeasible: {reason}")]
    Infeasible { reason: String },
    #[error("a user's effective channel is identically zero")]
    ZeroChannel,
}

/// Effective per-user channel rows for a power-minimization solve.
///
/// `rows[k]` holds the entries of the row vector mapping a beamformer column
/// to user `k`'s received amplitude; `power_scale` multiplies the summed
/// squared beamformer norms in the reported power (the per-chain antenna
/// count for the sub-connected array, 1 for fully digital).
#[derive(Debug, Clone)]
pub struct EffectiveChannels<T: Real> {
    pub rows: Vec<Vec<Complex<T>>>,
    pub gamma: Vec<T>,
    pub sigma2: Vec<T>,
    pub power_scale: T,
}

impl<T: Real> EffectiveChannels<T> {
    pub fn users(&self) -> usize {
        self.rows.len()
    }

    pub fn chains(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone)]
pub struct PowerMinSolution<T: Real> {
    /// Beamformer columns, one per user (`chains x users`).
    pub w: CMat<T>,
    /// `power_scale * sum_k ||w_k||^2`.
    pub total_power: T,
    /// Achieved SINRs, computed from the returned beamformers.
    pub sinr: Vec<T>,
    pub fixed_point_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct PowerMinConfig {
    /// Relative tolerance of the dual fixed point.
    pub tol: f64,
    pub max_iters: usize,
    /// Infeasibility cap: dual power may not exceed this multiple of the
    /// interference-free dual power.
    pub cap_factor: f64,
}

impl Default for PowerMinConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 10_000, cap_factor: 1e6 }
    }
}

impl PowerMinConfig {
    pub fn from_solver(s: &crate::scenario::SolverConfig) -> Self {
        Self { tol: s.duality_tol, max_iters: s.duality_max_iters, cap_factor: s.power_cap_factor }
    }
}

/// Minimize `power_scale * sum ||w_k||^2` subject to `SINR_k >= gamma_k`.
///
/// All SINR constraints are tight at the optimum; the achieved SINRs in the
/// result equal the targets up to the fixed-point tolerance.
pub fn solve_power_min<T: Real>(
    channels: &EffectiveChannels<T>,
    cfg: &PowerMinConfig,
) -> Result<PowerMinSolution<T>, ConicError> {
    let k_users = channels.users();
    assert!(k_users >= 1, "at least one user required");
    let n = channels.chains();
    for row in &channels.rows {
        assert_eq!(row.len(), n, "ragged channel rows");
    }
    let tol = T::from_f64(cfg.tol).unwrap();

    // Noise-normalized rows: unit noise for every user, identical SINRs.
    let mut rows: Vec<Vec<Complex<T>>> = Vec::with_capacity(k_users);
    for (row, &s2) in channels.rows.iter().zip(&channels.sigma2) {
        let inv_sigma = s2.sqrt().recip();
        rows.push(row.iter().map(|&v| v * inv_sigma).collect());
    }

    let gains: Vec<T> = rows.iter().map(|r| norm_sqr(r)).collect();
    if gains.iter().any(|&g| g <= T::zero() || !g.is_finite()) {
        return Err(ConicError::ZeroChannel);
    }

    // Interference-free dual powers are a lower bound and set the cap scale.
    let mut lambda: Vec<T> = channels
        .gamma
        .iter()
        .zip(&gains)
        .map(|(&g, &gn)| g / gn)
        .collect();
    let floor_sum: T = lambda.iter().copied().sum();
    let cap = T::from_f64(cfg.cap_factor).unwrap() * floor_sum;

    let build_phi = |lambda: &[T]| {
        let mut phi = CMat::identity(n);
        for (lam, row) in lambda.iter().zip(&rows) {
            for i in 0..n {
                let left = row[i].conj() * *lam;
                for j in 0..n {
                    phi[(i, j)] = phi[(i, j)] + left * row[j];
                }
            }
        }
        phi
    };

    let mut iterations = 0;
    loop {
        if iterations >= cfg.max_iters {
            return Err(ConicError::Infeasible {
                reason: format!("dual fixed point did not converge in {} iterations", cfg.max_iters),
            });
        }
        iterations += 1;
        let phi = build_phi(&lambda);
        let lu = phi.lu().expect("dual covariance is positive definite");
        let mut next = Vec::with_capacity(k_users);
        let mut max_rel = T::zero();
        for k in 0..k_users {
            let rhs: Vec<Complex<T>> = rows[k].iter().map(|v| v.conj()).collect();
            let sol = lu.solve(&rhs);
            let q_full = dotu(&rows[k], &sol).re;
            // Leave-one-out quadratic form via the rank-one update identity.
            let denom = T::one() - lambda[k] * q_full;
            if denom <= T::zero() || q_full <= T::zero() {
                return Err(ConicError::Infeasible {
                    reason: "dual covariance update lost positivity".into(),
                });
            }
            let q_loo = q_full / denom;
            let lam_next = channels.gamma[k] / q_loo;
            let rel = (lam_next - lambda[k]).abs() / lam_next.max(T::min_positive_value());
            max_rel = max_rel.max(rel);
            next.push(lam_next);
        }
        let total: T = next.iter().copied().sum();
        lambda = next;
        if total > cap {
            return Err(ConicError::Infeasible {
                reason: format!("dual power exceeded {:e} x the interference-free level", cfg.cap_factor),
            });
        }
        if max_rel < tol {
            break;
        }
    }

    // MMSE directions from the converged dual covariance.
    let phi = build_phi(&lambda);
    let lu = phi.lu().expect("dual covariance is positive definite");
    let mut directions: Vec<Vec<Complex<T>>> = Vec::with_capacity(k_users);
    for row in &rows {
        let rhs: Vec<Complex<T>> = row.iter().map(|v| v.conj()).collect();
        let mut dir = lu.solve(&rhs);
        let nrm = norm(&dir);
        for v in dir.iter_mut() {
            *v = *v / nrm;
        }
        directions.push(dir);
    }

    // Downlink powers from the tight-SINR linear system (unit noise).
    let cross: Vec<Vec<T>> = (0..k_users)
        .map(|k| {
            (0..k_users)
                .map(|j| dotu(&rows[k], &directions[j]).norm_sqr())
                .collect()
        })
        .collect();
    let mut system = vec![vec![T::zero(); k_users]; k_users];
    for k in 0..k_users {
        for j in 0..k_users {
            system[k][j] = if j == k { cross[k][k] / channels.gamma[k] } else { -cross[k][j] };
        }
    }
    let powers = solve_real(&system, &vec![T::one(); k_users]).ok_or_else(|| ConicError::Infeasible {
        reason: "tight-SINR system is singular".into(),
    })?;
    if powers.iter().any(|&p| !(p > T::zero()) || !p.is_finite()) {
        return Err(ConicError::Infeasible { reason: "tight-SINR powers are not positive".into() });
    }

    let mut w = CMat::zeros(n, k_users);
    for (k, (dir, &p)) in directions.iter().zip(&powers).enumerate() {
        let amp = p.sqrt();
        let col: Vec<Complex<T>> = dir.iter().map(|&v| v * amp).collect();
        w.set_col(k, &col);
    }
    let total_power = channels.power_scale * powers.iter().copied().sum();
    let sinr = achieved_sinr(channels, &w);
    Ok(PowerMinSolution { w, total_power, sinr, fixed_point_iterations: iterations })
}

/// SINRs achieved by beamformer columns `w` on the given channels.
pub fn achieved_sinr<T: Real>(channels: &EffectiveChannels<T>, w: &CMat<T>) -> Vec<T> {
    let k_users = channels.users();
    let mut out = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let mut signal = T::zero();
        let mut interference = T::zero();
        for j in 0..k_users {
            let col = w.col(j);
            let amp = dotu(&channels.rows[k], &col).norm_sqr();
            if j == k {
                signal = amp;
            } else {
                interference = interference + amp;
            }
        }
        out.push(signal / (interference + channels.sigma2[k]));
    }
    out
}

// ── Second-order-cone row projection ────────────────────────────────────────

/// Project `a` onto the SINR cone of user `k`:
/// `|t_k|^2 >= gamma * (sum_{j != k} |t_j|^2 + sigma^2)`,
/// minimizing `||t - a||`. The projected `t_k` keeps the phase of `a_k`; the
/// other entries keep their phases and shrink by a common factor.
pub fn project_sinr_row<T: Real>(
    a: &[Complex<T>],
    k: usize,
    gamma: T,
    sigma: T,
) -> Vec<Complex<T>> {
    assert!(gamma > T::zero(), "SINR target must be positive");
    assert!(k < a.len(), "user index out of range");
    let slope = gamma.sqrt().recip();

    let off_norm2: T = a
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    let need = (off_norm2 + sigma * sigma).sqrt();
    let x = a[k].norm();
    if slope * x >= need {
        return a.to_vec();
    }

    let phase = if x > T::zero() {
        a[k] / x
    } else {
        Complex::new(T::one(), T::zero())
    };
    let y_norm = off_norm2.sqrt();

    let (tau, shrink) = project_tau_shrink(x, y_norm, sigma, slope);

    let mut out = Vec::with_capacity(a.len());
    for (j, &v) in a.iter().enumerate() {
        if j == k {
            out.push(phase * tau);
        } else {
            out.push(v * shrink);
        }
    }
    out
}

/// Solve the scalar KKT system of the cone projection. Returns the projected
/// `|t_k|` and the common shrink factor `1/(1+nu)` applied to the off entries.
fn project_tau_shrink<T: Real>(x: T, y_norm: T, sigma: T, slope: T) -> (T, T) {
    let one = T::one();
    let s2 = slope * slope;

    if y_norm == T::zero() {
        // No interference entries: the active constraint is slope*tau = sigma.
        return ((sigma / slope).max(x), one);
    }
    if x == T::zero() {
        // Degenerate branch: tau is free on the boundary; minimizing tau^2 +
        // ||u - y||^2 on the active cone gives u = y / (1 + 1/slope^2).
        let shrink = one / (one + s2.recip());
        let u = y_norm * shrink;
        let tau = (u * u + sigma * sigma).sqrt() / slope;
        return (tau, shrink);
    }

    // Root of psi(nu) = ||y||^2/(1+nu)^2 + sigma^2 - slope^2 x^2/(1-nu slope^2)^2
    // on (0, 1/slope^2); psi is strictly decreasing with psi(0) > 0.
    let y2 = y_norm * y_norm;
    let sx2 = s2 * x * x;
    let nu_max = s2.recip();
    let psi = |nu: T| {
        let a = one + nu;
        let b = one - nu * s2;
        y2 / (a * a) + sigma * sigma - sx2 / (b * b)
    };
    let dpsi = |nu: T| {
        let a = one + nu;
        let b = one - nu * s2;
        let two = T::from_f64(2.0).unwrap();
        -two * y2 / (a * a * a) - two * s2 * sx2 / (b * b * b)
    };

    let mut lo = T::zero();
    let mut hi = nu_max;
    // Find an upper endpoint with psi < 0 strictly inside the interval.
    let mut frac = T::from_f64(0.5).unwrap();
    for _ in 0..120 {
        let cand = nu_max * (one - frac);
        if psi(cand) < T::zero() {
            hi = cand;
            break;
        }
        lo = cand;
        frac = frac * T::from_f64(0.5).unwrap();
    }

    let mut nu = (lo + hi) * T::from_f64(0.5).unwrap();
    let width_tol = T::from_f64(1e-15).unwrap() * (one + nu_max);
    for _ in 0..200 {
        let val = psi(nu);
        if val > T::zero() {
            lo = nu;
        } else {
            hi = nu;
        }
        if hi - lo <= width_tol {
            break;
        }
        let newton = nu - val / dpsi(nu);
        nu = if newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * T::from_f64(0.5).unwrap()
        };
    }

    let shrink = one / (one + nu);
    let tau = x / (one - nu * s2);
    (tau, shrink)
}

/// True when row `t` satisfies user `k`'s SINR cone within `tol`.
pub fn row_satisfies_cone<T: Real>(t: &[Complex<T>], k: usize, gamma: T, sigma: T, tol: T) -> bool {
    let off: T = t
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    t[k].norm_sqr() + tol >= gamma * (off + sigma * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cx;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Cx {
        Complex64::new(re, im)
    }

    fn random_row(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<Cx> {
        (0..n)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * scale)
            .collect()
    }

    // ---- power minimization ----

    #[test]
    fn single_user_matched_filter_closed_form() {
        let ch = EffectiveChannels {
            rows: vec![vec![c(1.0, 0.0), c(0.0, 0.0)]],
            gamma: vec![10.0],
            sigma2: vec![1.0],
            power_scale: 6.0,
        };
        let sol = solve_power_min(&ch, &PowerMinConfig::default()).unwrap();
        assert!((sol.total_power - 60.0).abs() < 1e-9, "power {}", sol.total_power);
        assert!((sol.sinr[0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_users_decouple() {
        let ch = EffectiveChannels {
            rows: vec![
                vec![c(2.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 1.5)],
            ],
            gamma: vec![4.0, 9.0],
            sigma2: vec![0.5, 2.0],
            power_scale: 3.0,
        };
        let sol = solve_power_min(&ch, &PowerMinConfig::default()).unwrap();
        let expected = 3.0 * (4.0 * 0.5 / 4.0 + 9.0 * 2.0 / 2.25);
        assert!(
            (sol.total_power - expected).abs() / expected < 1e-9,
            "power {} vs {}",
            sol.total_power,
            expected
        );
    }

    #[test]
    fn sinr_constraints_are_tight() {
        let mut rng = crate::scenario::RngSeed::new(21, 0).rng();
        for trial in 0..20 {
            let k = 2 + trial % 2;
            let n = k + 1;
            let ch = EffectiveChannels {
                rows: (0..k).map(|_| random_row(&mut rng, n, 2.0)).collect(),
                gamma: (0..k).map(|_| 1.0 + 4.0 * rng.gen::<f64>()).collect(),
                sigma2: (0..k).map(|_| 0.5 + rng.gen::<f64>()).collect(),
                power_scale: 4.0,
            };
            let sol = solve_power_min(&ch, &PowerMinConfig::default()).unwrap();
            for (s, g) in sol.sinr.iter().zip(&ch.gamma) {
                assert!((s - g).abs() < 1e-6, "sinr {s} vs target {g}");
            }
        }
    }

    /// Matched-filter directions with tight powers; feasible for mild targets.
    fn mrt_power(ch: &EffectiveChannels<f64>) -> Option<f64> {
        let k_users = ch.users();
        let dirs: Vec<Vec<Cx>> = ch
            .rows
            .iter()
            .map(|r| {
                let n = norm(r);
                r.iter().map(|v| v.conj() / n).collect()
            })
            .collect();
        let mut sys = vec![vec![0.0; k_users]; k_users];
        for k in 0..k_users {
            for j in 0..k_users {
                let g = dotu(&ch.rows[k], &dirs[j]).norm_sqr();
                sys[k][j] = if j == k { g / ch.gamma[k] } else { -g };
            }
        }
        let p = solve_real(&sys, &ch.sigma2)?;
        if p.iter().all(|&v| v > 0.0) {
            Some(ch.power_scale * p.iter().sum::<f64>())
        } else {
            None
        }
    }

    #[test]
    fn never_worse_than_matched_filter_heuristic() {
        let mut rng = crate::scenario::RngSeed::new(22, 0).rng();
        let mut compared = 0;
        for _ in 0..40 {
            let ch = EffectiveChannels {
                rows: (0..2).map(|_| random_row(&mut rng, 3, 1.0)).collect(),
                gamma: vec![2.0, 3.0],
                sigma2: vec![1.0, 1.0],
                power_scale: 1.0,
            };
            if let Some(heuristic) = mrt_power(&ch) {
                let sol = solve_power_min(&ch, &PowerMinConfig::default()).unwrap();
                assert!(sol.total_power <= heuristic * (1.0 + 1e-9));
                compared += 1;
            }
        }
        assert!(compared > 10, "heuristic was almost never feasible");
    }

    #[test]
    fn parallel_channels_with_high_targets_are_infeasible() {
        let row = vec![c(1.0, 0.3), c(-0.2, 0.8)];
        let ch = EffectiveChannels {
            rows: vec![row.clone(), row],
            gamma: vec![10.0, 10.0],
            sigma2: vec![1.0, 1.0],
            power_scale: 1.0,
        };
        assert!(matches!(
            solve_power_min(&ch, &PowerMinConfig::default()),
            Err(ConicError::Infeasible { .. })
        ));
    }

    #[test]
    fn zero_channel_is_rejected() {
        let ch = EffectiveChannels {
            rows: vec![vec![c(0.0, 0.0), c(0.0, 0.0)]],
            gamma: vec![1.0],
            sigma2: vec![1.0],
            power_scale: 1.0,
        };
        assert!(matches!(solve_power_min(&ch, &PowerMinConfig::default()), Err(ConicError::ZeroChannel)));
    }

    // ---- cone projection ----

    #[test]
    fn feasible_input_is_unchanged() {
        let a = vec![c(3.0, 0.0), c(0.1, 0.0)];
        let t = project_sinr_row(&a, 0, 1.0, 1.0);
        assert_eq!(t, a);
    }

    #[test]
    fn single_user_boundary_closed_form() {
        // Infeasible scalar case: |t| must rise to sigma * sqrt(gamma).
        let t = project_sinr_row(&[c(0.5, 0.0)], 0, 1.0, 1.0);
        assert!((t[0] - c(1.0, 0.0)).norm() < 1e-12, "got {}", t[0]);
        let t = project_sinr_row(&[c(0.5, 0.0)], 0, 4.0, 1.0);
        assert!((t[0] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn projection_keeps_phases() {
        let a = vec![c(0.3, 0.4), c(-0.6, 0.8)];
        let t = project_sinr_row(&a, 0, 2.0, 1.0);
        let phase_in = a[0] / a[0].norm();
        let phase_out = t[0] / t[0].norm();
        assert!((phase_in - phase_out).norm() < 1e-12);
        let ratio = t[1] / a[1];
        assert!(ratio.im.abs() < 1e-12 && ratio.re > 0.0 && ratio.re <= 1.0);
    }

    #[test]
    fn projection_satisfies_cone_exactly_on_boundary() {
        let mut rng = crate::scenario::RngSeed::new(23, 0).rng();
        for _ in 0..200 {
            let kk = 3;
            let a = random_row(&mut rng, kk, 1.5);
            let gamma = 0.5 + 4.0 * rng.gen::<f64>();
            let sigma = 0.2 + rng.gen::<f64>();
            let t = project_sinr_row(&a, 1, gamma, sigma);
            assert!(row_satisfies_cone(&t, 1, gamma, sigma, 1e-9));
        }
    }

    #[test]
    fn projection_beats_random_feasible_points() {
        let mut rng = crate::scenario::RngSeed::new(24, 0).rng();
        let a = vec![c(0.4, -0.1), c(0.9, 0.4), c(-0.3, 0.6)];
        let (gamma, sigma) = (3.0, 0.7);
        let t = project_sinr_row(&a, 0, gamma, sigma);
        let d_opt: f64 = t.iter().zip(&a).map(|(x, y)| (x - y).norm_sqr()).sum();
        for _ in 0..10_000 {
            // Random feasible candidate: random off entries, amplitude on or
            // above the cone boundary.
            let off: Vec<Cx> = (0..2).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0).collect();
            let need = (gamma * (norm_sqr(&off) + sigma * sigma)).sqrt();
            let amp = need * (1.0 + rng.gen::<f64>());
            let cand = vec![
                Complex64::from_polar(amp, rng.gen::<f64>() * std::f64::consts::TAU),
                off[0],
                off[1],
            ];
            let d: f64 = cand.iter().zip(&a).map(|(x, y)| (x - y).norm_sqr()).sum();
            assert!(d >= d_opt - 1e-9, "random feasible point beat the projection");
        }
    }

    #[test]
    fn degenerate_zero_anchor_entry() {
        // a_k = 0: the projected t_k is real positive on the cone boundary.
        let a = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let gamma = 1.0;
        let t = project_sinr_row(&a, 0, gamma, 1.0);
        assert!(t[0].im.abs() < 1e-14 && t[0].re > 0.0);
        assert!(row_satisfies_cone(&t, 0, gamma, 1.0, 1e-9));
        // Direct check of the degenerate closed form: u = y/2, tau = sqrt(u^2+1).
        assert!((t[1].re - 0.5).abs() < 1e-12);
        assert!((t[0].re - (0.25f64 + 1.0).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn projection_invariants(seed in 0u64..300) {
            let mut rng = crate::scenario::RngSeed::new(seed, 31).rng();
            let kk = 1 + (seed as usize % 3);
            let a = random_row(&mut rng, kk, 2.0);
            let k = seed as usize % kk;
            let gamma = 0.3 + 3.0 * rng.gen::<f64>();
            let sigma = 0.1 + rng.gen::<f64>();
            let t = project_sinr_row(&a, k, gamma, sigma);
            // feasibility
            prop_assert!(row_satisfies_cone(&t, k, gamma, sigma, 1e-9));
            // idempotency
            let tt = project_sinr_row(&t, k, gamma, sigma);
            for (u, v) in tt.iter().zip(&t) {
                prop_assert!((u - v).norm() < 1e-9);
            }
            // scaling covariance: scaling (a, sigma) by s scales the projection by s
            let s = 0.25 + 2.0 * rng.gen::<f64>();
            let scaled: Vec<Cx> = a.iter().map(|&v| v * s).collect();
            let ts = project_sinr_row(&scaled, k, gamma, sigma * s);
            for (u, v) in ts.iter().zip(&t) {
                prop_assert!((u - v * s).norm() < 1e-8 * (1.0 + s));
            }
        }
    }

    #[test]
    fn projection_matches_fine_grid_search() {
        // Independent oracle: grid over (tau, shrink c) with phases fixed by
        // alignment, which is optimal for this cone.
        let mut rng = crate::scenario::RngSeed::new(25, 0).rng();
        for _ in 0..5 {
            let a = random_row(&mut rng, 2, 1.0);
            let gamma = 1.0 + rng.gen::<f64>();
            let sigma = 0.5 + rng.gen::<f64>();
            let t = project_sinr_row(&a, 0, gamma, sigma);
            let d_kkt: f64 = t.iter().zip(&a).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();

            let y_norm = a[1].norm();
            let tau_max = a[0].norm() + (gamma.sqrt()) * (y_norm + sigma) + 1.0;
            let mut best = f64::INFINITY;
            let steps = 2000;
            for i in 0..=steps {
                let tau = tau_max * i as f64 / steps as f64;
                for j in 0..=1000 {
                    let cfac = j as f64 / 1000.0;
                    let u = cfac * y_norm;
                    if tau * tau >= gamma * (u * u + sigma * sigma) {
                        let d2 = (tau - a[0].norm()).powi(2) + (u - y_norm).powi(2);
                        if d2 < best {
                            best = d2;
                        }
                    }
                }
            }
            let d_grid = best.sqrt();
            assert!(
                (d_kkt - d_grid).abs() < 2e-3,
                "kkt distance {d_kkt} vs grid {d_grid}"
            );
            assert!(d_kkt <= d_grid + 1e-9, "projection must not lose to the grid");
        }
    }

    #[test]
    fn kernels_work_at_f32() {
        let ch = EffectiveChannels::<f32> {
            rows: vec![vec![Complex::new(1.0f32, 0.0), Complex::new(0.0, 0.0)]],
            gamma: vec![10.0],
            sigma2: vec![1.0],
            power_scale: 6.0,
        };
        let cfg = PowerMinConfig { tol: 1e-6, ..Default::default() };
        let sol = solve_power_min(&ch, &cfg).unwrap();
        assert!((sol.total_power - 60.0).abs() < 1e-3);
        let t = project_sinr_row(&[Complex::new(0.5f32, 0.0)], 0, 1.0, 1.0);
        assert!((t[0].re - 1.0).abs() < 1e-5);
    }
}
