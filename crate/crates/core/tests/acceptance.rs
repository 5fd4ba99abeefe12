//! Acceptance suite: every release-gating property of the solver stack, one
//! test per criterion, each printing a PASS line with its measured margins.
//!
//! The comparative criteria share one batch of desk-scale runs (4x4 BS array
//! with 4 chains, 4x4 RIS, 2 users, 10 dB targets, 20 paired channel
//! realizations) built once and reused across tests.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use risbeam_core::channel::{sample_channels, ChannelSet};
use risbeam_core::conic::{
    project_sinr_row, row_satisfies_cone, solve_power_min, EffectiveChannels, PowerMinConfig,
};
use risbeam_core::linalg::{dotu, norm_sqr, solve_real, CMat};
use risbeam_core::manifold::{
    fd_gradient, rcg_minimize, retract, riemannian_grad, transport, CirclePoint, FnProblem,
    PhaseProblem, RcgConfig, SmoothProblem, TangentVector,
};
use risbeam_core::mmf::{solve_mmf, MmfMode};
use risbeam_core::penalty::{
    fixed_phase_power, run_qos, run_qos_with, JointObjective, PhaseAngleView, PhaseContext,
    PhaseMethod, QoSSolution, QosOptions, RisMode, RisResponse,
};
use risbeam_core::scenario::{
    complex_normal, random_phasor, streams, PhaseBits, RngSeed, Scenario, SystemConfig,
};
use risbeam_core::sequential::{run_sequential, ris_maxmin_design, RisDesignProblem, SequentialSolution};
use risbeam_core::Cx;

const SEEDS: u64 = 20;
const BASE_SEED: u64 = 7_2026;

fn desk() -> Scenario {
    Scenario::desk()
}

fn channels_for(sys: &SystemConfig, params: &risbeam_core::scenario::ClusterParams, r: u64) -> ChannelSet {
    sample_channels(sys, params, &RngSeed::for_purpose(BASE_SEED, streams::CHANNEL, r))
}

struct DeskRuns {
    joint: Vec<QoSSolution>,
    alt: Vec<QoSSolution>,
    sca: Vec<QoSSolution>,
    random_theta: Vec<QoSSolution>,
    fully_digital: Vec<QoSSolution>,
    sequential: Vec<SequentialSolution>,
    /// Penalty joint runs with the reflection pinned to the sequential
    /// design's output (the fixed-reflection baseline of the comparisons).
    sdr_theta: Vec<QoSSolution>,
    /// Quantized joint runs for q = 1, 2, 3 bits on both banks.
    quantized: Vec<Vec<QoSSolution>>,
    /// Joint runs at 8 and 32 RIS elements (16 is the `joint` baseline).
    f8: Vec<QoSSolution>,
    f32: Vec<QoSSolution>,
}

fn desk_runs() -> &'static DeskRuns {
    static CELL: OnceLock<DeskRuns> = OnceLock::new();
    CELL.get_or_init(|| {
        let sc = desk();
        let per_seed: Vec<_> = (0..SEEDS)
            .into_par_iter()
            .map(|r| {
                let seed = RngSeed::new(BASE_SEED, r);
                let ch = channels_for(&sc.system, &sc.channel, r);
                let joint = run_qos(&ch, &sc.system, &sc.solver, PhaseMethod::JointRcg, &seed)
                    .expect("desk QoS feasible");
                let alt = run_qos(&ch, &sc.system, &sc.solver, PhaseMethod::AlternatingRcg, &seed)
                    .expect("desk QoS feasible");
                let sca = run_qos(&ch, &sc.system, &sc.solver, PhaseMethod::JointSca, &seed)
                    .expect("desk QoS feasible");

                let mut rng = RngSeed::for_purpose(BASE_SEED, streams::RANDOM_THETA, r).rng();
                let theta = RisResponse::random(sc.system.f, sc.system.q2, &mut rng);
                let mut opts = QosOptions::new(seed);
                opts.ris = RisMode::Fixed(theta);
                let random_theta =
                    run_qos_with(&ch, &sc.system, &sc.solver, PhaseMethod::JointRcg, opts)
                        .expect("desk QoS feasible");

                let sys_fd = sc.system.fully_digital();
                let fully_digital =
                    run_qos(&ch, &sys_fd, &sc.solver, PhaseMethod::JointRcg, &seed)
                        .expect("desk QoS feasible");

                let sequential =
                    run_sequential(&ch, &sc.system, &sc.solver, &sc.channel, &seed)
                        .expect("sequential feasible");
                let mut opts = QosOptions::new(seed);
                opts.ris = RisMode::Fixed(sequential.ris.clone());
                let sdr_theta =
                    run_qos_with(&ch, &sc.system, &sc.solver, PhaseMethod::JointRcg, opts)
                        .expect("desk QoS feasible");

                let quantized: Vec<QoSSolution> = (1..=3)
                    .map(|q| {
                        let sys_q =
                            sc.system.with_phase_bits(PhaseBits::Bits(q), PhaseBits::Bits(q));
                        run_qos(&ch, &sys_q, &sc.solver, PhaseMethod::JointRcg, &seed)
                            .expect("desk QoS feasible")
                    })
                    .collect();

                let mut by_f = Vec::new();
                for f in [8usize, 32] {
                    let sys_f = sc.system.with_ris_elements(f).unwrap();
                    let ch_f = channels_for(&sys_f, &sc.channel, r);
                    by_f.push(
                        run_qos(&ch_f, &sys_f, &sc.solver, PhaseMethod::JointRcg, &seed)
                            .expect("desk QoS feasible"),
                    );
                }
                let f32_run = by_f.pop().unwrap();
                let f8_run = by_f.pop().unwrap();

                (
                    joint,
                    alt,
                    sca,
                    random_theta,
                    fully_digital,
                    sequential,
                    sdr_theta,
                    quantized,
                    f8_run,
                    f32_run,
                )
            })
            .collect();

        let mut runs = DeskRuns {
            joint: Vec::new(),
            alt: Vec::new(),
            sca: Vec::new(),
            random_theta: Vec::new(),
            fully_digital: Vec::new(),
            sequential: Vec::new(),
            sdr_theta: Vec::new(),
            quantized: vec![Vec::new(), Vec::new(), Vec::new()],
            f8: Vec::new(),
            f32: Vec::new(),
        };
        for (joint, alt, sca, random_theta, fd, seq, sdr, quantized, f8, f32_run) in per_seed {
            runs.joint.push(joint);
            runs.alt.push(alt);
            runs.sca.push(sca);
            runs.random_theta.push(random_theta);
            runs.fully_digital.push(fd);
            runs.sequential.push(seq);
            runs.sdr_theta.push(sdr);
            for (slot, q) in runs.quantized.iter_mut().zip(quantized) {
                slot.push(q);
            }
            runs.f8.push(f8);
            runs.f32.push(f32_run);
        }
        runs
    })
}

fn mean_dbm(powers: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = powers.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

// ── Criterion 1: manifold invariant suite ────────────────────────────────────

#[test]
fn criterion_01_manifold_invariants() {
    let start = Instant::now();
    let mut rng = RngSeed::new(101, 0).rng();
    use rand::Rng;

    for case in 0..10_000 {
        let len = 1 + case % 32;
        let point = CirclePoint::new((0..len).map(|_| random_phasor(&mut rng)).collect()).unwrap();
        let egrad: Vec<Cx> = (0..len)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 4.0)
            .collect();
        let grad = riemannian_grad(&egrad, &point).unwrap();
        assert!(grad.tangency_residual(&point) < 1e-9, "tangency residual too large");

        let other = CirclePoint::new((0..len).map(|_| random_phasor(&mut rng)).collect()).unwrap();
        let moved = transport(&grad, &other).unwrap();
        assert!(moved.tangency_residual(&other) < 1e-9);

        let stepped = retract(&point, &grad, 0.1 + rng.gen::<f64>()).unwrap();
        for v in stepped.values() {
            assert!((v.norm() - 1.0).abs() < 1e-12, "retraction modulus error");
        }
        let _ = TangentVector { values: moved.values };
    }

    // Monotone conjugate-gradient traces on random restricted least squares.
    for trial in 0..50 {
        let rows = 6 + trial % 4;
        let cols = 3 + trial % 5;
        let a = CMat::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let y: Vec<Cx> = (0..rows)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0)
            .collect();
        let a2 = a.clone();
        let y2 = y.clone();
        let problem = FnProblem {
            value: move |z: &[Cx]| {
                let r: Vec<Cx> =
                    a.mul_vec(z).iter().zip(&y).map(|(az, yi)| az - yi).collect();
                norm_sqr(&r)
            },
            grad: move |z: &[Cx]| {
                let r: Vec<Cx> =
                    a2.mul_vec(z).iter().zip(&y2).map(|(az, yi)| az - yi).collect();
                a2.herm_mul_vec(&r).iter().map(|v| v * 2.0).collect()
            },
        };
        let init = CirclePoint::new((0..cols).map(|_| random_phasor(&mut rng)).collect()).unwrap();
        let out = rcg_minimize(&problem, &init, &RcgConfig::default());
        for w in out.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "conjugate-gradient trace increased");
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "criterion 1 exceeded 10 s: {elapsed:?}");
    println!("criterion 01 PASS: 10^4 invariant cases + 50 monotone traces in {elapsed:.2?}");
}

// ── Criterion 2: gradient oracle ─────────────────────────────────────────────

#[test]
fn criterion_02_gradient_oracle() {
    let start = Instant::now();
    let mut rng = RngSeed::new(102, 0).rng();
    let (k, f, m, d) = (2usize, 4usize, 4usize, 2usize);

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let row_h: Vec<Vec<Cx>> = (0..k)
            .map(|_| (0..f).map(|_| complex_normal(&mut rng)).collect())
            .collect();
        let g = CMat::from_fn(f, m, |_, _| complex_normal(&mut rng));
        let w = CMat::from_fn(m / d, k, |_, _| complex_normal(&mut rng));
        let aux = CMat::from_fn(k, k, |_, _| complex_normal(&mut rng));
        let ctx = PhaseContext { row_h: &row_h, g: &g, w: &w, aux: &aux, ris_len: f, chain_size: d };
        let b: Vec<Cx> = (0..f).map(|_| random_phasor(&mut rng)).collect();
        let x: Vec<Cx> = (0..m).map(|_| random_phasor(&mut rng)).collect();
        let z: Vec<Cx> = b.iter().chain(x.iter()).copied().collect();

        // f(z) over the concatenated vector, which also carries the separate
        // d/db and d/dx blocks of f(b, x).
        let joint = JointObjective::new(&ctx);
        let analytic = joint.euclidean_grad(&z);
        let numeric = fd_gradient(&joint, &z, 1e-6);
        for (a, n) in analytic.iter().zip(&numeric) {
            let rel = (a - n).norm() / (1.0 + n.norm());
            worst = worst.max(rel);
            assert!(rel < 1e-5, "joint gradient relative error {rel:e}");
        }

        // f(phi) over the stacked phases.
        let view = PhaseAngleView { inner: &joint };
        let phases: Vec<f64> = z.iter().map(|v| v.arg()).collect();
        let analytic = view.grad(&phases);
        let h = 1e-6;
        for i in 0..phases.len() {
            let mut pp = phases.clone();
            pp[i] += h;
            let up = view.value(&pp);
            pp[i] -= 2.0 * h;
            let dn = view.value(&pp);
            let numeric = (up - dn) / (2.0 * h);
            let rel = (analytic[i] - numeric).abs() / (1.0 + numeric.abs());
            worst = worst.max(rel);
            assert!(rel < 1e-5, "phase gradient relative error {rel:e}");
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 2 exceeded 30 s: {elapsed:?}");
    println!("criterion 02 PASS: 100 instances, worst relative error {worst:.2e} in {elapsed:.2?}");
}

// ── Criterion 3: conic oracles ───────────────────────────────────────────────

/// Grid oracle for the cone projection: alignment fixes the phases, so the
/// search is over the anchor amplitude and the interference norm. A coarse
/// pass locates the basin, a fine pass resolves it to a 2.5e-4 step.
fn grid_projection_distance(a: &[Cx], k: usize, gamma: f64, sigma: f64) -> f64 {
    let x = a[k].norm();
    let y_norm: f64 = a
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let tau_max = x + gamma.sqrt() * (y_norm + sigma) + 1.0;

    let sweep = |tau_lo: f64, tau_hi: f64, u_lo: f64, u_hi: f64, step: f64| {
        let mut best = f64::INFINITY;
        let mut at = (0.0, 0.0);
        let nt = ((tau_hi - tau_lo) / step).ceil() as usize;
        let nu = ((u_hi - u_lo) / step).ceil() as usize;
        for i in 0..=nt {
            let tau = tau_lo + (tau_hi - tau_lo) * i as f64 / nt.max(1) as f64;
            for j in 0..=nu {
                let u = u_lo + (u_hi - u_lo) * j as f64 / nu.max(1) as f64;
                if tau * tau >= gamma * (u * u + sigma * sigma) {
                    let d2 = (tau - x).powi(2) + (u - y_norm).powi(2);
                    if d2 < best {
                        best = d2;
                        at = (tau, u);
                    }
                }
            }
        }
        (best, at)
    };

    let coarse_step = 5e-3 * (1.0 + tau_max);
    let (_, (t0, u0)) = sweep(0.0, tau_max, 0.0, y_norm, coarse_step);
    let pad = 3.0 * coarse_step;
    let (best, _) = sweep(
        (t0 - pad).max(0.0),
        (t0 + pad).min(tau_max),
        (u0 - pad).max(0.0),
        (u0 + pad).min(y_norm.max(1e-12)),
        2.5e-4,
    );
    best.sqrt()
}

/// Brute-force two-user power minimization: zoomed grid over both beam
/// directions with tight powers solved per grid point.
fn brute_force_two_user_power(ch: &EffectiveChannels<f64>) -> f64 {
    let rows: Vec<Vec<Cx>> = ch
        .rows
        .iter()
        .zip(&ch.sigma2)
        .map(|(r, &s2)| {
            let inv = s2.sqrt().recip();
            r.iter().map(|&v| v * inv).collect()
        })
        .collect();
    let beam = |a: f64, phi: f64| -> Vec<Cx> {
        vec![
            Complex64::new(a.cos(), 0.0),
            Complex64::from_polar(a.sin(), phi),
        ]
    };
    let power_for = |u1: &[Cx], u2: &[Cx]| -> Option<f64> {
        let g11 = dotu(&rows[0], u1).norm_sqr();
        let g12 = dotu(&rows[0], u2).norm_sqr();
        let g21 = dotu(&rows[1], u1).norm_sqr();
        let g22 = dotu(&rows[1], u2).norm_sqr();
        let sys = vec![
            vec![g11 / ch.gamma[0], -g12],
            vec![-g21, g22 / ch.gamma[1]],
        ];
        let p = solve_real(&sys, &[1.0, 1.0])?;
        if p.iter().all(|&v| v > 0.0) {
            Some(ch.power_scale * (p[0] + p[1]))
        } else {
            None
        }
    };

    let mut centers = [
        (std::f64::consts::FRAC_PI_4, std::f64::consts::PI),
        (std::f64::consts::FRAC_PI_4, std::f64::consts::PI),
    ];
    let mut spans = [
        (std::f64::consts::FRAC_PI_2, 2.0 * std::f64::consts::PI),
        (std::f64::consts::FRAC_PI_2, 2.0 * std::f64::consts::PI),
    ];
    let mut best = f64::INFINITY;
    for _zoom in 0..9 {
        let steps = 10usize;
        let mut best_pt = centers;
        for i1 in 0..=steps {
            for j1 in 0..=steps {
                let a1 = centers[0].0 - spans[0].0 / 2.0
                    + spans[0].0 * i1 as f64 / steps as f64;
                let p1 = centers[0].1 - spans[0].1 / 2.0
                    + spans[0].1 * j1 as f64 / steps as f64;
                if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&a1) {
                    continue;
                }
                let u1 = beam(a1, p1);
                for i2 in 0..=steps {
                    for j2 in 0..=steps {
                        let a2 = centers[1].0 - spans[1].0 / 2.0
                            + spans[1].0 * i2 as f64 / steps as f64;
                        let p2 = centers[1].1 - spans[1].1 / 2.0
                            + spans[1].1 * j2 as f64 / steps as f64;
                        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&a2) {
                            continue;
                        }
                        let u2 = beam(a2, p2);
                        if let Some(p) = power_for(&u1, &u2) {
                            if p < best {
                                best = p;
                                best_pt = [(a1, p1), (a2, p2)];
                            }
                        }
                    }
                }
            }
        }
        centers = best_pt;
        for s in &mut spans {
            s.0 *= 0.35;
            s.1 *= 0.35;
        }
    }
    best
}

#[test]
fn criterion_03_conic_oracles() {
    let start = Instant::now();
    let mut rng = RngSeed::new(103, 0).rng();
    use rand::Rng;

    // Cone projection vs grid brute force, 100 instances, K <= 3.
    let mut worst_gap: f64 = 0.0;
    for case in 0..100 {
        let kk = 1 + case % 3;
        let idx = case % kk;
        let a: Vec<Cx> = (0..kk)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0)
            .collect();
        let gamma = 0.5 + 3.0 * rng.gen::<f64>();
        let sigma = 0.3 + rng.gen::<f64>();
        let t = project_sinr_row(&a, idx, gamma, sigma);
        assert!(row_satisfies_cone(&t, idx, gamma, sigma, 1e-9));
        let d_kkt: f64 = t
            .iter()
            .zip(&a)
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let d_grid = grid_projection_distance(&a, idx, gamma, sigma);
        let gap = (d_kkt - d_grid).abs();
        worst_gap = worst_gap.max(gap);
        assert!(gap < 1e-3, "projection distance {d_kkt} vs grid {d_grid}");
        assert!(d_kkt <= d_grid + 1e-9);
    }

    // Exact closed forms.
    let ch = EffectiveChannels {
        rows: vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]],
        gamma: vec![10.0],
        sigma2: vec![1.0],
        power_scale: 6.0,
    };
    let sol = solve_power_min(&ch, &PowerMinConfig::default()).unwrap();
    assert!((sol.total_power - 60.0).abs() < 1e-9);

    let ch = EffectiveChannels {
        rows: vec![
            vec![Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0)],
        ],
        gamma: vec![4.0, 2.0],
        sigma2: vec![1.0, 0.5],
        power_scale: 2.0,
    };
    let sol = solve_power_min(&ch, &PowerMinConfig::default()).unwrap();
    let expected = 2.0 * (4.0 * 1.0 / 2.25 + 2.0 * 0.5 / 4.0);
    assert!((sol.total_power - expected).abs() / expected < 1e-12);

    // Tight SINRs plus the two-user brute-force oracle.
    let mut worst_rel: f64 = 0.0;
    for _ in 0..10 {
        let ch = EffectiveChannels {
            rows: (0..2)
                .map(|_| (0..2).map(|_| complex_normal(&mut rng) * 1.5).collect())
                .collect(),
            gamma: vec![1.0 + 2.0 * rng.gen::<f64>(), 1.0 + 2.0 * rng.gen::<f64>()],
            sigma2: vec![0.8, 1.2],
            power_scale: 3.0,
        };
        let Ok(sol) = solve_power_min(&ch, &PowerMinConfig::default()) else {
            continue;
        };
        for (s, g) in sol.sinr.iter().zip(&ch.gamma) {
            assert!((s - g).abs() < 1e-6, "loose SINR: {s} vs {g}");
        }
        let brute = brute_force_two_user_power(&ch);
        let rel = (sol.total_power - brute).abs() / brute;
        worst_rel = worst_rel.max(rel);
        assert!(rel < 1e-3, "duality power {} vs brute force {brute} (rel {rel:e})", sol.total_power);
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 3 exceeded 60 s: {elapsed:?}");
    println!(
        "criterion 03 PASS: projection gap <= {worst_gap:.1e}, power-min vs brute force rel <= {worst_rel:.1e}, in {elapsed:.2?}"
    );
}

// ── Criterion 4: penalty convergence ─────────────────────────────────────────

#[test]
fn criterion_04_penalty_convergence() {
    let sc = desk();
    let runs = desk_runs();
    let mut convergent = 0;
    for sol in &runs.joint {
        if sol.converged {
            convergent += 1;
            assert!(sol.final_xi < 1e-7, "converged run with xi {:e}", sol.final_xi);
            for (s, g) in sol.sinr.iter().zip(&sc.system.gamma) {
                assert!(s >= &(g - 1e-6), "SINR {s} below target {g}");
            }
        }
        for rec in &sol.trace {
            let tol = 1e-9 * rec.objective_after_digital.abs().max(1.0);
            assert!(
                rec.objective_after_phases <= rec.objective_after_digital + tol,
                "phase block increased the objective"
            );
            if rec.aux_step_guaranteed {
                assert!(
                    rec.objective <= rec.objective_after_phases + tol,
                    "auxiliary block increased the objective"
                );
            }
        }
    }
    assert!(convergent > 0, "no run reached the stopping indicator");
    println!(
        "criterion 04 PASS: {convergent}/{} runs converged with xi < 1e-7, targets met, blocks monotone",
        runs.joint.len()
    );
}

// ── Criterion 5: phase-method ordering ───────────────────────────────────────

#[test]
fn criterion_05_method_ordering() {
    let runs = desk_runs();
    let joint = mean_dbm(runs.joint.iter().map(|s| s.power_dbm));
    let alt = mean_dbm(runs.alt.iter().map(|s| s.power_dbm));
    let sca = mean_dbm(runs.sca.iter().map(|s| s.power_dbm));
    assert!(joint <= alt + 1e-9, "joint mean {joint:.3} dBm above alternating {alt:.3} dBm");
    assert!(joint <= sca + 1e-9, "joint mean {joint:.3} dBm above phase-descent {sca:.3} dBm");

    let wins = |other: &[QoSSolution]| {
        runs.joint
            .iter()
            .zip(other)
            .filter(|(j, o)| j.power_watts <= o.power_watts * (1.0 + 1e-9))
            .count()
    };
    let vs_alt = wins(&runs.alt);
    let vs_sca = wins(&runs.sca);
    let need = (SEEDS as usize * 60).div_ceil(100);
    assert!(vs_alt >= need, "joint wins {vs_alt}/{SEEDS} vs alternating, need {need}");
    assert!(vs_sca >= need, "joint wins {vs_sca}/{SEEDS} vs phase descent, need {need}");
    println!(
        "criterion 05 PASS: means {joint:.2} <= {alt:.2} (alt), {sca:.2} (sca) dBm; wins {vs_alt}/{SEEDS} and {vs_sca}/{SEEDS}"
    );
}

// ── Criterion 6: optimized vs random reflection ──────────────────────────────

#[test]
fn criterion_06_ris_gain_over_random() {
    let runs = desk_runs();
    let joint = mean_dbm(runs.joint.iter().map(|s| s.power_dbm));
    let random = mean_dbm(runs.random_theta.iter().map(|s| s.power_dbm));
    let gap = random - joint;
    assert!(gap >= 3.0, "optimized reflection saves only {gap:.2} dB over random");
    println!("criterion 06 PASS: optimized reflection saves {gap:.2} dB over random (need >= 3)");
}

// ── Criterion 7: element scaling ─────────────────────────────────────────────

#[test]
fn criterion_07_element_scaling() {
    let runs = desk_runs();
    let p8 = mean_dbm(runs.f8.iter().map(|s| s.power_dbm));
    let p16 = mean_dbm(runs.joint.iter().map(|s| s.power_dbm));
    let p32 = mean_dbm(runs.f32.iter().map(|s| s.power_dbm));
    let total = p8 - p32;
    assert!(total >= 4.0, "8 -> 32 elements saves only {total:.2} dB");
    let slack = 0.5;
    assert!(p8 >= p16 - slack, "non-monotone: F=8 {p8:.2} vs F=16 {p16:.2} dBm");
    assert!(p16 >= p32 - slack, "non-monotone: F=16 {p16:.2} vs F=32 {p32:.2} dBm");
    println!(
        "criterion 07 PASS: mean power {p8:.2} (F=8) -> {p16:.2} (F=16) -> {p32:.2} (F=32) dBm, total gain {total:.2} dB"
    );
}

// ── Criterion 8: phase quantization ──────────────────────────────────────────

#[test]
fn criterion_08_quantization() {
    let runs = desk_runs();
    let continuous = mean_dbm(runs.joint.iter().map(|s| s.power_dbm));
    let gaps: Vec<f64> = runs
        .quantized
        .iter()
        .map(|q| mean_dbm(q.iter().map(|s| s.power_dbm)) - continuous)
        .collect();
    assert!(gaps[2] <= 1.0, "3-bit gap {:.2} dB above continuous (need <= 1.0)", gaps[2]);
    assert!(gaps[0] >= gaps[1] && gaps[1] >= gaps[2], "gaps not monotone in bits: {gaps:?}");
    println!(
        "criterion 08 PASS: quantization gaps {:.2} / {:.2} / {:.2} dB for 1 / 2 / 3 bits",
        gaps[0], gaps[1], gaps[2]
    );
}

// ── Criterion 9: sequential vs joint ─────────────────────────────────────────

#[test]
fn criterion_09_sequential_vs_joint() {
    // The reference curve for the sequential design is the penalty joint
    // method run with the same (sequentially designed) reflection pinned;
    // against the fully joint design the expected ladder is several dB wider.
    let runs = desk_runs();
    let joint = mean_dbm(runs.joint.iter().map(|s| s.power_dbm));
    let fixed_theta = mean_dbm(runs.sdr_theta.iter().map(|s| s.power_dbm));
    let seq = mean_dbm(runs.sequential.iter().map(|s| s.power_dbm));
    let gap = seq - fixed_theta;
    assert!((0.0..=4.0).contains(&gap), "sequential gap {gap:.2} dB outside [0, 4]");
    for (i, s) in runs.sequential.iter().enumerate() {
        assert!(
            s.power_watts >= s.diagnostics.fully_digital_watts * (1.0 - 1e-9),
            "seed {i}: hybrid beat its fully digital bound"
        );
    }
    println!(
        "criterion 09 PASS: sequential is {gap:.2} dB above the fixed-reflection joint baseline \
         ({:.2} dB above the fully joint design), never below its digital bound",
        seq - joint
    );
}

// ── Criterion 10: QoS/MMF duality at fixed phases ────────────────────────────

#[test]
fn criterion_10_duality_roundtrip() {
    let start = Instant::now();
    let sc = desk();
    let failures: Vec<String> = (0..50u64)
        .into_par_iter()
        .filter_map(|r| {
            let ch = channels_for(&sc.system, &sc.channel, 1000 + r);
            let mut rng = RngSeed::for_purpose(BASE_SEED, streams::RANDOM_THETA, 1000 + r).rng();
            let ris = RisResponse::random(sc.system.f, PhaseBits::Continuous, &mut rng);
            let v_blocks: Vec<Vec<Cx>> = (0..sc.system.n)
                .map(|_| (0..sc.system.d).map(|_| random_phasor(&mut rng)).collect())
                .collect();
            let power = match fixed_phase_power(&ch, &sc.system, &sc.solver, &ris, &v_blocks) {
                Ok(p) => p,
                Err(e) => return Some(format!("instance {r}: QoS infeasible ({e})")),
            };
            let mode = MmfMode::FixedPhases { ris, v_blocks };
            let sol = match solve_mmf(&ch, &sc.system, &sc.solver, power, &mode, &RngSeed::new(r, 0)) {
                Ok(s) => s,
                Err(e) => return Some(format!("instance {r}: MMF failed ({e})")),
            };
            let err = (sol.min_weighted_ratio - 1.0).abs();
            (err > 1e-3).then(|| format!("instance {r}: ratio error {err:e}"))
        })
        .collect();
    assert!(failures.is_empty(), "duality violations: {failures:?}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 10 exceeded 60 s: {elapsed:?}");
    println!("criterion 10 PASS: 50 round trips with ratio = 1 within 1e-3 in {elapsed:.2?}");
}

// ── Criterion 11: reflection design vs exhaustive search ─────────────────────

#[test]
fn criterion_11_reflection_exhaustive_oracle() {
    let sc = risbeam_core::scenario::load_scenario(
        "[system]\nbs_rows = 2\nbs_cols = 2\nrf_chains = 2\nusers = 2\nris_rows = 2\nris_cols = 4\nris_bits = 1\nsinr_target_db = 0.0\n",
    )
    .unwrap();
    let results: Vec<(f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|r| {
            let ch = channels_for(&sc.system, &sc.channel, 2000 + r);
            let problem = RisDesignProblem::new(&ch, &sc.system);
            let (_, achieved) =
                ris_maxmin_design(&ch, &sc.system, &sc.solver, &RngSeed::new(BASE_SEED, r));
            let mut exhaustive = f64::NEG_INFINITY;
            for mask in 0..(1u32 << 8) {
                let b: Vec<Cx> = (0..8)
                    .map(|f| {
                        if mask >> f & 1 == 1 {
                            Complex64::new(-1.0, 0.0)
                        } else {
                            Complex64::new(1.0, 0.0)
                        }
                    })
                    .collect();
                exhaustive = exhaustive.max(problem.objective(&b));
            }
            (achieved, exhaustive)
        })
        .collect();
    let mut worst_ratio = f64::INFINITY;
    for (i, (achieved, exhaustive)) in results.iter().enumerate() {
        assert!(
            achieved >= &(exhaustive - 0.05 * exhaustive.abs()),
            "instance {i}: achieved {achieved:e} below 0.95 x exhaustive {exhaustive:e}"
        );
        if *exhaustive > 0.0 {
            worst_ratio = worst_ratio.min(achieved / exhaustive);
        }
    }
    println!("criterion 11 PASS: 20 instances within 5% of the exhaustive optimum (worst ratio {worst_ratio:.3})");
}

// ── Criterion 12: hybrid vs fully digital ────────────────────────────────────

#[test]
fn criterion_12_hybrid_vs_fully_digital() {
    let runs = desk_runs();
    let hybrid = mean_dbm(runs.joint.iter().map(|s| s.power_dbm));
    let digital = mean_dbm(runs.fully_digital.iter().map(|s| s.power_dbm));
    let gap = hybrid - digital;
    assert!(gap > 0.0, "hybrid mean {hybrid:.2} dBm not above fully digital {digital:.2} dBm");
    assert!(gap <= 6.0, "hybrid gap {gap:.2} dB exceeds 6 dB");
    println!("criterion 12 PASS: sub-connected hybrid costs {gap:.2} dB over fully digital (0 < gap <= 6)");
}
