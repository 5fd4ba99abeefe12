//! Riemannian optimization on products of complex circles.
//!
//! The feasible sets for both the RIS reflection vector and the analog
//! beamformer are products of unit circles in the complex plane: every entry
//! has unit modulus. This module provides the four primitives a conjugate
//! gradient method needs on that manifold — tangent projection, vector
//! transport, retraction, and a Polak-Ribiere direction update with Armijo
//! backtracking — plus a phase-domain gradient method that works on the
//! angles directly and therefore needs no projection.
//!
//! A second structure, unit-norm rows of a tall matrix, shares the same
//! projection/retraction skeleton and drives the low-rank reflection design
//! in [`crate::sequential`]. Both are instances of [`Structure`].

use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{norm, real_inner, Real};

#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error("point has a zero entry; it does not lie near the manifold")]
    ZeroEntry,
    #[error("retraction degenerated: an entry of point + step * direction vanished")]
    DegenerateRetraction,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

// ── Points and tangent vectors ──────────────────────────────────────────────

/// A point on the product of complex circles: every entry has unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePoint<T: Real> {
    values: Vec<Complex<T>>,
}

impl<T: Real> CirclePoint<T> {
    /// Accepts entries within 1e-9 of unit modulus (or a few epsilon at lower
    /// precision) and renormalizes exactly.
    pub fn new(values: Vec<Complex<T>>) -> Result<Self, ManifoldError> {
        let tol = T::from_f64(1e-9).unwrap().max(T::epsilon() * T::from_f64(32.0).unwrap());
        let one = T::one();
        let mut out = values;
        for v in &mut out {
            let n = v.norm();
            if n == T::zero() {
                return Err(ManifoldError::ZeroEntry);
            }
            debug_assert!(
                (n - one).abs() <= tol,
                "entry modulus {:?} outside 1e-9 of unit",
                n
            );
            *v = *v / n;
        }
        Ok(Self { values: out })
    }

    pub fn from_phases(phases: &[T]) -> Self {
        Self {
            values: phases
                .iter()
                .map(|&p| Complex::from_polar(T::one(), p))
                .collect(),
        }
    }

    pub fn phases(&self) -> Vec<T> {
        self.values.iter().map(|v| v.arg()).collect()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A tangent vector at some circle-product point: `Re(v_i * conj(p_i)) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Real> {
    pub values: Vec<Complex<T>>,
}

impl<T: Real> TangentVector<T> {
    pub fn norm(&self) -> T {
        norm(&self.values)
    }

    /// Largest radial component relative to `base`; zero for an exact tangent.
    pub fn tangency_residual(&self, base: &CirclePoint<T>) -> T {
        self.values
            .iter()
            .zip(base.values())
            .map(|(v, p)| (*v * p.conj()).re.abs())
            .fold(T::zero(), T::max)
    }
}

// ── Spec surface: the three pointwise operations ────────────────────────────

/// Project a Euclidean gradient onto the tangent space at `point`:
/// `egrad - Re(egrad ⊙ conj(point)) ⊙ point`.
pub fn riemannian_grad<T: Real>(
    egrad: &[Complex<T>],
    point: &CirclePoint<T>,
) -> Result<TangentVector<T>, ManifoldError> {
    if egrad.len() != point.len() {
        return Err(ManifoldError::LengthMismatch { left: egrad.len(), right: point.len() });
    }
    let mut values = egrad.to_vec();
    project_entrywise(point.values(), &mut values);
    Ok(TangentVector { values })
}

/// Transport a tangent vector into the tangent space at `new_point` by
/// re-projection.
pub fn transport<T: Real>(
    tangent: &TangentVector<T>,
    new_point: &CirclePoint<T>,
) -> Result<TangentVector<T>, ManifoldError> {
    if tangent.values.len() != new_point.len() {
        return Err(ManifoldError::LengthMismatch {
            left: tangent.values.len(),
            right: new_point.len(),
        });
    }
    let mut values = tangent.values.clone();
    project_entrywise(new_point.values(), &mut values);
    Ok(TangentVector { values })
}

/// Retract `point + step * direction` back onto the manifold by entrywise
/// normalization.
pub fn retract<T: Real>(
    point: &CirclePoint<T>,
    direction: &TangentVector<T>,
    step: T,
) -> Result<CirclePoint<T>, ManifoldError> {
    if direction.values.len() != point.len() {
        return Err(ManifoldError::LengthMismatch {
            left: direction.values.len(),
            right: point.len(),
        });
    }
    let mut out = vec![Complex::new(T::zero(), T::zero()); point.len()];
    if !retract_entrywise(point.values(), &direction.values, step, &mut out) {
        return Err(ManifoldError::DegenerateRetraction);
    }
    Ok(CirclePoint { values: out })
}

fn project_entrywise<T: Real>(point: &[Complex<T>], v: &mut [Complex<T>]) {
    for (vi, pi) in v.iter_mut().zip(point) {
        let radial = (*vi * pi.conj()).re;
        *vi = *vi - *pi * radial;
    }
}

fn retract_entrywise<T: Real>(
    point: &[Complex<T>],
    dir: &[Complex<T>],
    step: T,
    out: &mut [Complex<T>],
) -> bool {
    for ((o, p), d) in out.iter_mut().zip(point).zip(dir) {
        let moved = *p + *d * step;
        let n = moved.norm();
        if n == T::zero() {
            return false;
        }
        *o = moved / n;
    }
    true
}

// ── Manifold structures driving the shared CG loop ──────────────────────────

/// Normalization structure of the ambient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// Every complex entry has unit modulus (product of circles).
    UnitModulus,
    /// The vector is a row-major `rows x cols` matrix with unit-norm rows.
    UnitRows { cols: usize },
}

impl Structure {
    fn project<T: Real>(&self, point: &[Complex<T>], v: &mut [Complex<T>]) {
        match self {
            Structure::UnitModulus => project_entrywise(point, v),
            Structure::UnitRows { cols } => {
                for (pr, vr) in point.chunks(*cols).zip(v.chunks_mut(*cols)) {
                    let radial = real_inner(pr, vr);
                    for (vi, pi) in vr.iter_mut().zip(pr) {
                        *vi = *vi - *pi * radial;
                    }
                }
            }
        }
    }

    fn retract<T: Real>(
        &self,
        point: &[Complex<T>],
        dir: &[Complex<T>],
        step: T,
        out: &mut [Complex<T>],
    ) -> bool {
        match self {
            Structure::UnitModulus => retract_entrywise(point, dir, step, out),
            Structure::UnitRows { cols } => {
                for ((or, pr), dr) in out
                    .chunks_mut(*cols)
                    .zip(point.chunks(*cols))
                    .zip(dir.chunks(*cols))
                {
                    for ((o, p), d) in or.iter_mut().zip(pr).zip(dr) {
                        *o = *p + *d * step;
                    }
                    let n = norm(or);
                    if n == T::zero() {
                        return false;
                    }
                    for o in or.iter_mut() {
                        *o = *o / n;
                    }
                }
                true
            }
        }
    }
}

/// A smooth objective with its Euclidean gradient.
pub trait SmoothProblem<T: Real> {
    fn value(&self, point: &[Complex<T>]) -> T;
    fn euclidean_grad(&self, point: &[Complex<T>]) -> Vec<Complex<T>>;
}

/// Build a problem from closures.
pub struct FnProblem<F, G> {
    pub value: F,
    pub grad: G,
}

impl<T: Real, F, G> SmoothProblem<T> for FnProblem<F, G>
where
    F: Fn(&[Complex<T>]) -> T,
    G: Fn(&[Complex<T>]) -> Vec<Complex<T>>,
{
    fn value(&self, point: &[Complex<T>]) -> T {
        (self.value)(point)
    }
    fn euclidean_grad(&self, point: &[Complex<T>]) -> Vec<Complex<T>> {
        (self.grad)(point)
    }
}

/// Central finite differences of a [`SmoothProblem`], perturbing real and
/// imaginary parts independently. Used by tests to validate analytic gradients.
pub fn fd_gradient<T: Real>(
    problem: &impl SmoothProblem<T>,
    point: &[Complex<T>],
    h: T,
) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(point.len());
    let mut p = point.to_vec();
    let two_h = h + h;
    for i in 0..point.len() {
        let base = p[i];
        p[i] = base + Complex::new(h, T::zero());
        let fp = problem.value(&p);
        p[i] = base - Complex::new(h, T::zero());
        let fm = problem.value(&p);
        let dre = (fp - fm) / two_h;
        p[i] = base + Complex::new(T::zero(), h);
        let fp = problem.value(&p);
        p[i] = base - Complex::new(T::zero(), h);
        let fm = problem.value(&p);
        let dim = (fp - fm) / two_h;
        p[i] = base;
        out.push(Complex::new(dre, dim));
    }
    out
}

// ── Conjugate gradient driver ────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct RcgConfig {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub armijo_c1: f64,
    pub armijo_contraction: f64,
    pub armijo_initial: f64,
    pub armijo_max_trials: usize,
    /// Degenerate-retraction retries (step halvings) before declaring a stall.
    pub degenerate_retries: usize,
}

impl Default for RcgConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-7,
            max_iters: 200,
            armijo_c1: 1e-4,
            armijo_contraction: 0.5,
            armijo_initial: 1.0,
            armijo_max_trials: 50,
            degenerate_retries: 30,
        }
    }
}

impl RcgConfig {
    pub fn from_solver(s: &crate::scenario::SolverConfig) -> Self {
        Self {
            grad_tol: s.eps1,
            max_iters: s.max_rcg_iters,
            armijo_c1: s.armijo_c1,
            armijo_contraction: s.armijo_contraction,
            armijo_initial: s.armijo_initial,
            armijo_max_trials: s.armijo_max_trials,
            degenerate_retries: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RcgResult<T: Real> {
    pub point: Vec<Complex<T>>,
    /// Objective before the first step and after every accepted step.
    pub objective_trace: Vec<T>,
    pub gradient_norms: Vec<T>,
    pub iterations: usize,
    pub stalled: bool,
}

/// Minimize over the product of circles. `init` must lie on the manifold.
pub fn rcg_minimize<T: Real>(
    problem: &impl SmoothProblem<T>,
    init: &CirclePoint<T>,
    cfg: &RcgConfig,
) -> RcgResult<T> {
    rcg_minimize_structured(problem, init.values(), Structure::UnitModulus, cfg)
}

/// Minimize over an arbitrary [`Structure`].
///
/// Descent is guaranteed: a Polak-Ribiere+ direction that fails the descent
/// test or the line search is replaced by steepest descent, and the direction
/// resets to steepest descent every `dim` iterations.
pub fn rcg_minimize_structured<T: Real>(
    problem: &impl SmoothProblem<T>,
    init: &[Complex<T>],
    structure: Structure,
    cfg: &RcgConfig,
) -> RcgResult<T> {
    let dim = init.len();
    let reset_every = dim.max(1);
    let grad_tol = T::from_f64(cfg.grad_tol).unwrap();
    let c1 = T::from_f64(cfg.armijo_c1).unwrap();
    let contraction = T::from_f64(cfg.armijo_contraction).unwrap();
    let initial_step = T::from_f64(cfg.armijo_initial).unwrap();
    let half = T::from_f64(0.5).unwrap();

    let mut x = init.to_vec();
    let mut f = problem.value(&x);
    let mut grad = problem.euclidean_grad(&x);
    structure.project(&x, &mut grad);
    let mut eta: Vec<Complex<T>> = grad.iter().map(|g| -g).collect();
    let mut trace = vec![f];
    let mut grad_norms = vec![norm(&grad)];
    let mut stalled = false;
    let mut iterations = 0;
    let mut candidate = vec![Complex::new(T::zero(), T::zero()); dim];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); dim];
    let mut last_step = initial_step;

    while iterations < cfg.max_iters {
        let gnorm = norm(&grad);
        if gnorm <= grad_tol {
            break;
        }
        let mut slope = real_inner(&grad, &eta);
        if slope >= T::zero() {
            eta = grad.iter().map(|g| -g).collect();
            slope = -gnorm * gnorm;
        }

        let mut accepted = false;
        let mut tried_steepest = false;
        'search: loop {
            // Warm-start from the last accepted step; the configured initial
            // step is the first trial and the cap.
            let mut step = (last_step + last_step).min(initial_step);
            let mut degenerate_left = cfg.degenerate_retries;
            let mut trials = 0;
            while trials < cfg.armijo_max_trials {
                if !structure.retract(&x, &eta, step, &mut candidate) {
                    if degenerate_left == 0 {
                        break;
                    }
                    degenerate_left -= 1;
                    step = step * half;
                    continue;
                }
                trials += 1;
                let fc = problem.value(&candidate);
                if fc <= f + c1 * step * slope {
                    // Keep contracting while it strictly improves; every such
                    // point still satisfies the sufficient-decrease bound.
                    let mut best = fc;
                    while trials < cfg.armijo_max_trials {
                        let shorter = step * contraction;
                        if !structure.retract(&x, &eta, shorter, &mut scratch) {
                            break;
                        }
                        trials += 1;
                        let fs = problem.value(&scratch);
                        if fs < best {
                            best = fs;
                            step = shorter;
                            std::mem::swap(&mut candidate, &mut scratch);
                        } else {
                            break;
                        }
                    }
                    f = best;
                    last_step = step;
                    std::mem::swap(&mut x, &mut candidate);
                    accepted = true;
                    break 'search;
                }
                step = step * contraction;
            }
            if tried_steepest {
                break;
            }
            tried_steepest = true;
            eta = grad.iter().map(|g| -g).collect();
            slope = -gnorm * gnorm;
            last_step = initial_step * half;
        }
        if !accepted {
            stalled = true;
            break;
        }
        iterations += 1;

        let mut new_grad = problem.euclidean_grad(&x);
        structure.project(&x, &mut new_grad);

        if iterations % reset_every == 0 {
            eta = new_grad.iter().map(|g| -g).collect();
        } else {
            // Polak-Ribiere+ with the previous gradient and direction
            // transported (re-projected) to the new point.
            let mut old_grad_t = grad.clone();
            structure.project(&x, &mut old_grad_t);
            let denom = real_inner(&grad, &grad);
            let mut beta = T::zero();
            if denom > T::zero() {
                let diff: Vec<Complex<T>> = new_grad
                    .iter()
                    .zip(&old_grad_t)
                    .map(|(n, o)| n - o)
                    .collect();
                beta = (real_inner(&new_grad, &diff) / denom).max(T::zero());
            }
            structure.project(&x, &mut eta);
            for (e, g) in eta.iter_mut().zip(&new_grad) {
                *e = *e * beta - *g;
            }
        }
        grad = new_grad;
        trace.push(f);
        grad_norms.push(norm(&grad));
    }

    RcgResult { point: x, objective_trace: trace, gradient_norms: grad_norms, iterations, stalled }
}

// ── Phase-domain descent (no projection) ────────────────────────────────────

/// A smooth objective over a real phase vector.
pub trait PhaseProblem {
    fn value(&self, phases: &[f64]) -> f64;
    fn grad(&self, phases: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone)]
pub struct ScaConfig {
    /// Sufficient-decrease constant, in (0, 0.5).
    pub zeta: f64,
    /// Initial step scale, > 0.
    pub beta: f64,
    /// Step contraction, in (0, 1).
    pub kappa0: f64,
    pub max_step_trials: usize,
    /// Terminate once one step decreases the objective by less than this.
    pub decrease_tol: f64,
    pub max_iters: usize,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            zeta: 0.3,
            beta: 1.0,
            kappa0: 0.5,
            max_step_trials: 60,
            decrease_tol: 1e-4,
            max_iters: 200,
        }
    }
}

impl ScaConfig {
    pub fn from_solver(s: &crate::scenario::SolverConfig) -> Self {
        Self {
            zeta: s.sca_zeta,
            beta: s.sca_beta,
            kappa0: s.sca_kappa0,
            max_step_trials: 60,
            decrease_tol: s.eps2,
            max_iters: s.max_rcg_iters,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScaResult {
    pub phases: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub stalled: bool,
}

/// Minimize over the phases by successive quadratic surrogates: each step
/// moves along the negative gradient with the largest step in
/// `{beta * kappa0^i}` satisfying `f(old) - f(new) >= zeta * step * ||grad||^2`.
pub fn sca_phase_minimize(
    problem: &impl PhaseProblem,
    init: &[f64],
    cfg: &ScaConfig,
) -> ScaResult {
    let mut phi = init.to_vec();
    let mut f = problem.value(&phi);
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut stalled = false;

    while iterations < cfg.max_iters {
        let g = problem.grad(&phi);
        let gn2: f64 = g.iter().map(|v| v * v).sum();
        if gn2 == 0.0 || !gn2.is_finite() {
            break;
        }
        let mut kappa = cfg.beta;
        let mut accepted = None;
        for _ in 0..cfg.max_step_trials {
            let cand: Vec<f64> = phi.iter().zip(&g).map(|(p, gi)| p - kappa * gi).collect();
            let fc = problem.value(&cand);
            if f - fc >= cfg.zeta * kappa * gn2 {
                accepted = Some((cand, fc));
                break;
            }
            kappa *= cfg.kappa0;
        }
        let Some((cand, fc)) = accepted else {
            stalled = true;
            break;
        };
        let decrease = f - fc;
        phi = cand;
        f = fc;
        iterations += 1;
        trace.push(f);
        if decrease < cfg.decrease_tol {
            break;
        }
    }

    ScaResult { phases: phi, objective_trace: trace, iterations, stalled }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_sqr;
    use crate::scenario::random_phasor;
    use crate::Cx;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_point(rng: &mut impl Rng, len: usize) -> CirclePoint<f64> {
        CirclePoint::new((0..len).map(|_| random_phasor(rng)).collect()).unwrap()
    }

    fn random_cvec(rng: &mut impl Rng, len: usize) -> Vec<Cx> {
        (0..len)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 4.0)
            .collect()
    }

    #[test]
    fn grad_of_radial_field_is_zero() {
        let mut rng = crate::scenario::RngSeed::new(1, 0).rng();
        let p = random_point(&mut rng, 6);
        let g = riemannian_grad(p.values(), &p).unwrap();
        assert!(g.norm() < 1e-15);
    }

    #[test]
    fn grad_of_tangent_field_is_identity() {
        let mut rng = crate::scenario::RngSeed::new(2, 0).rng();
        let p = random_point(&mut rng, 5);
        let egrad: Vec<Cx> = p.values().iter().map(|v| v * Complex64::new(0.0, 1.0)).collect();
        let g = riemannian_grad(&egrad, &p).unwrap();
        for (a, b) in g.values.iter().zip(&egrad) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn transport_scalar_case_drops_real_part() {
        let base = CirclePoint::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let t = TangentVector { values: vec![Complex64::new(2.0, 3.0)] };
        let out = transport(&t, &base).unwrap();
        assert!((out.values[0] - Complex64::new(0.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn transport_to_own_base_is_identity_on_tangents() {
        let mut rng = crate::scenario::RngSeed::new(3, 0).rng();
        let p = random_point(&mut rng, 7);
        let g = riemannian_grad(&random_cvec(&mut rng, 7), &p).unwrap();
        let t = transport(&g, &p).unwrap();
        for (a, b) in t.values.iter().zip(&g.values) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn retract_scalar_bisects_the_quarter_turn() {
        let p = CirclePoint::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let d = TangentVector { values: vec![Complex64::new(0.0, 1.0)] };
        let out = retract(&p, &d, 1.0).unwrap();
        let want = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!((out.values()[0] - want).norm() < 1e-15);
    }

    #[test]
    fn retract_zero_step_is_identity() {
        let mut rng = crate::scenario::RngSeed::new(4, 0).rng();
        let p = random_point(&mut rng, 4);
        let g = riemannian_grad(&random_cvec(&mut rng, 4), &p).unwrap();
        let out = retract(&p, &g, 1e-300).unwrap();
        for (a, b) in out.values().iter().zip(p.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn retract_degenerate_is_detected() {
        let p = CirclePoint::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let d = TangentVector { values: vec![Complex64::new(-1.0, 0.0)] };
        assert!(matches!(retract(&p, &d, 1.0), Err(ManifoldError::DegenerateRetraction)));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let p = CirclePoint::new(vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        assert!(riemannian_grad(&[Complex64::new(1.0, 0.0); 2], &p).is_err());
    }

    proptest! {
        #[test]
        fn tangency_and_modulus_invariants(seed in 0u64..300) {
            let mut rng = crate::scenario::RngSeed::new(seed, 9).rng();
            let len = 1 + (seed as usize % 12);
            let p = random_point(&mut rng, len);
            let e = random_cvec(&mut rng, len);
            let g = riemannian_grad(&e, &p).unwrap();
            prop_assert!(g.tangency_residual(&p) < 1e-12);
            let q = random_point(&mut rng, len);
            let t = transport(&g, &q).unwrap();
            prop_assert!(t.tangency_residual(&q) < 1e-12);
            let r = retract(&p, &g, 0.37).unwrap();
            for v in r.values() {
                prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    /// Least-squares restriction to the manifold: f(z) = ||A z - y||^2.
    struct Quadratic {
        a: crate::linalg::CMat<f64>,
        y: Vec<Cx>,
    }

    impl Quadratic {
        fn residual(&self, z: &[Cx]) -> Vec<Cx> {
            self.a.mul_vec(z).iter().zip(&self.y).map(|(az, yi)| az - yi).collect()
        }
    }

    impl SmoothProblem<f64> for Quadratic {
        fn value(&self, z: &[Cx]) -> f64 {
            norm_sqr(&self.residual(z))
        }
        fn euclidean_grad(&self, z: &[Cx]) -> Vec<Cx> {
            self.a
                .herm_mul_vec(&self.residual(z))
                .iter()
                .map(|v| v * 2.0)
                .collect()
        }
    }

    fn random_quadratic(rng: &mut impl Rng, rows: usize, cols: usize) -> Quadratic {
        let a = crate::linalg::CMat::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let y = random_cvec(rng, rows);
        Quadratic { a, y }
    }

    #[test]
    fn quadratic_gradient_matches_finite_differences() {
        let mut rng = crate::scenario::RngSeed::new(5, 0).rng();
        let q = random_quadratic(&mut rng, 6, 4);
        let p = random_point(&mut rng, 4);
        let g = q.euclidean_grad(p.values());
        let fd = fd_gradient(&q, p.values(), 1e-6);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).norm() / (1.0 + b.norm()) < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn rcg_terminates_immediately_at_minimizer() {
        let mut rng = crate::scenario::RngSeed::new(6, 0).rng();
        let target = random_point(&mut rng, 5);
        let t1 = target.clone();
        let t2 = target.clone();
        let problem = FnProblem {
            value: move |z: &[Cx]| {
                z.iter().zip(t1.values()).map(|(a, b)| (a - b).norm_sqr()).sum()
            },
            grad: move |z: &[Cx]| {
                z.iter().zip(t2.values()).map(|(a, b)| (a - b) * 2.0).collect()
            },
        };
        let out = rcg_minimize(&problem, &target, &RcgConfig::default());
        assert_eq!(out.iterations, 0);
        assert!(out.gradient_norms[0] < 1e-12);
    }

    #[test]
    fn rcg_scalar_converges_to_unique_minimizer() {
        let problem = FnProblem {
            value: |z: &[Cx]| (z[0] - Complex64::new(1.0, 0.0)).norm_sqr(),
            grad: |z: &[Cx]| vec![(z[0] - Complex64::new(1.0, 0.0)) * 2.0],
        };
        let init = CirclePoint::new(vec![Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3)])
            .unwrap();
        let out = rcg_minimize(&problem, &init, &RcgConfig { max_iters: 500, ..Default::default() });
        assert!((out.point[0] - Complex64::new(1.0, 0.0)).norm() < 1e-6, "got {}", out.point[0]);
    }

    #[test]
    fn rcg_beats_random_sampling_on_quadratics() {
        let mut rng = crate::scenario::RngSeed::new(7, 0).rng();
        for _ in 0..5 {
            let q = random_quadratic(&mut rng, 8, 6);
            let init = random_point(&mut rng, 6);
            let out = rcg_minimize(&q, &init, &RcgConfig { max_iters: 400, ..Default::default() });
            let best_sample = (0..1000)
                .map(|_| q.value(random_point(&mut rng, 6).values()))
                .fold(f64::INFINITY, f64::min);
            assert!(
                out.objective_trace.last().unwrap() <= &best_sample,
                "rcg {} vs best of 1000 samples {}",
                out.objective_trace.last().unwrap(),
                best_sample
            );
        }
    }

    #[test]
    fn rcg_trace_is_monotone() {
        let mut rng = crate::scenario::RngSeed::new(8, 0).rng();
        for _ in 0..10 {
            let q = random_quadratic(&mut rng, 7, 5);
            let init = random_point(&mut rng, 5);
            let out = rcg_minimize(&q, &init, &RcgConfig::default());
            for w in out.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "trace must not increase: {w:?}");
            }
        }
    }

    #[test]
    fn rcg_on_unit_rows_keeps_rows_normalized() {
        let mut rng = crate::scenario::RngSeed::new(12, 0).rng();
        let cols = 3;
        let rows = 4;
        let mut init = random_cvec(&mut rng, rows * cols);
        for r in init.chunks_mut(cols) {
            let n = norm(r);
            for v in r.iter_mut() {
                *v = *v / n;
            }
        }
        let target = random_cvec(&mut rng, rows * cols);
        let t2 = target.clone();
        let problem = FnProblem {
            value: move |z: &[Cx]| z.iter().zip(&target).map(|(a, b)| (a - b).norm_sqr()).sum(),
            grad: move |z: &[Cx]| z.iter().zip(&t2).map(|(a, b)| (a - b) * 2.0).collect(),
        };
        let out =
            rcg_minimize_structured(&problem, &init, Structure::UnitRows { cols }, &RcgConfig::default());
        for r in out.point.chunks(cols) {
            assert!((norm(r) - 1.0).abs() < 1e-12);
        }
        assert!(out.objective_trace.last().unwrap() < &out.objective_trace[0]);
    }

    #[test]
    fn rcg_works_at_f32() {
        let problem = FnProblem {
            value: |z: &[Complex<f32>]| (z[0] - Complex::new(1.0f32, 0.0)).norm_sqr(),
            grad: |z: &[Complex<f32>]| vec![(z[0] - Complex::new(1.0f32, 0.0)) * 2.0],
        };
        let init = CirclePoint::new(vec![Complex::from_polar(1.0f32, 1.0)]).unwrap();
        let cfg = RcgConfig { grad_tol: 1e-4, max_iters: 200, ..Default::default() };
        let out = rcg_minimize(&problem, &init, &cfg);
        assert!((out.point[0] - Complex::new(1.0f32, 0.0)).norm() < 1e-3);
    }

    struct CosineValley;
    impl PhaseProblem for CosineValley {
        fn value(&self, p: &[f64]) -> f64 {
            1.0 - p[0].cos()
        }
        fn grad(&self, p: &[f64]) -> Vec<f64> {
            vec![p[0].sin()]
        }
    }

    #[test]
    fn sca_converges_on_convex_basin() {
        let out = sca_phase_minimize(
            &CosineValley,
            &[0.5],
            &ScaConfig { decrease_tol: 1e-14, max_iters: 500, ..Default::default() },
        );
        assert!(out.phases[0].abs() < 1e-6, "got {}", out.phases[0]);
    }

    #[test]
    fn sca_returns_stationary_init_unchanged() {
        let out = sca_phase_minimize(&CosineValley, &[0.0], &ScaConfig::default());
        assert_eq!(out.iterations, 0);
        assert_eq!(out.phases, vec![0.0]);
    }

    #[test]
    fn sca_matches_rcg_on_shared_quadratic() {
        // Same least-squares objective expressed over phases; the phase method
        // should not end meaningfully below the CG stationary value.
        let mut rng = crate::scenario::RngSeed::new(10, 0).rng();
        let q = random_quadratic(&mut rng, 8, 5);
        let init = random_point(&mut rng, 5);

        struct PhaseView<'a>(&'a Quadratic);
        impl PhaseProblem for PhaseView<'_> {
            fn value(&self, phases: &[f64]) -> f64 {
                let z: Vec<Cx> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
                self.0.value(&z)
            }
            fn grad(&self, phases: &[f64]) -> Vec<f64> {
                let z: Vec<Cx> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
                let g = self.0.euclidean_grad(&z);
                g.iter().zip(&z).map(|(gi, zi)| (gi * zi.conj()).im).collect()
            }
        }

        let rcg = rcg_minimize(&q, &init, &RcgConfig { max_iters: 500, ..Default::default() });
        let sca = sca_phase_minimize(
            &PhaseView(&q),
            &init.phases(),
            &ScaConfig { decrease_tol: 1e-12, max_iters: 2000, ..Default::default() },
        );
        let f_rcg = *rcg.objective_trace.last().unwrap();
        let f_sca = *sca.objective_trace.last().unwrap();
        assert!(
            f_sca >= f_rcg - 0.05 * f_rcg.abs().max(1e-9),
            "phase descent ended below the CG stationary value: {f_sca} < {f_rcg}"
        );
        for w in sca.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn phase_gradient_identity_matches_finite_differences() {
        // d/dphi f(e^{j phi}) = Im(egrad ⊙ conj(z)) under the 2 dF/dz-bar convention.
        let mut rng = crate::scenario::RngSeed::new(11, 0).rng();
        let q = random_quadratic(&mut rng, 6, 4);
        let phases: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
        let z: Vec<Cx> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        let g = q.euclidean_grad(&z);
        let analytic: Vec<f64> = g.iter().zip(&z).map(|(gi, zi)| (gi * zi.conj()).im).collect();
        let h = 1e-6;
        for i in 0..phases.len() {
            let mut pp = phases.clone();
            pp[i] += h;
            let zp: Vec<Cx> = pp.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
            pp[i] -= 2.0 * h;
            let zm: Vec<Cx> = pp.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
            let fd = (q.value(&zp) - q.value(&zm)) / (2.0 * h);
            assert!((fd - analytic[i]).abs() < 1e-5 * (1.0 + fd.abs()), "{fd} vs {}", analytic[i]);
        }
    }
}
