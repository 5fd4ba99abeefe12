//! Clustered mmWave channel generation.
//!
//! One realization consists of the BS-to-RIS matrix `G` (F x M) and one
//! RIS-to-user vector `h_k` (length F) per user. Both follow the narrowband
//! clustered model: a handful of scattering clusters, each bundling several
//! rays with Laplacian-spread angle offsets around the cluster center, with
//! complex ray gains whose variance follows a distance path-loss law plus
//! lognormal shadowing (one shadowing draw per link).
//!
//! Sampling draws all scalar randomness (positions, shadowing, angles, gains)
//! before materializing any steering vector, so two realizations with the same
//! `(seed, stream)` describe the same physical scattering environment even
//! when the array sizes differ. That is what makes paired sweeps over RIS
//! element counts meaningful.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

use crate::linalg::CMat;
use crate::scenario::{complex_normal, ClusterParams, RngSeed, SystemConfig};
use crate::Cx;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("distance must be positive (got {0})")]
    BadDistance(f64),
    #[error("array geometry {rows}x{cols} does not match element count {expected}")]
    GeometryMismatch { rows: usize, cols: usize, expected: usize },
}

/// Uniform planar array layout: `rows x cols` elements indexed row-major,
/// spaced `spacing` wavelengths apart on both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn new(rows: usize, cols: usize, spacing: f64) -> Self {
        Self { rows, cols, spacing }
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }
}

/// One channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS-to-RIS matrix, F x M.
    pub g: CMat<f64>,
    /// RIS-to-user vectors, one length-F vector per user.
    pub h: Vec<Vec<Cx>>,
    /// Sampled user positions (diagnostic; not consumed by the solvers).
    pub user_positions: Vec<[f64; 2]>,
}

/// UPA steering vector for the given azimuth/elevation, unit Euclidean norm.
///
/// Element `(o, p)` (row `o`, column `p`, row-major) carries the phase
/// `2 pi d (o sin(az) sin(el) + p cos(el))` with `d` in wavelengths.
pub fn upa_response(azimuth: f64, elevation: f64, geometry: ArrayGeometry) -> Vec<Cx> {
    let scale = 1.0 / (geometry.elements() as f64).sqrt();
    let (sa, se) = (azimuth.sin(), elevation.sin());
    let ce = elevation.cos();
    let two_pi_d = 2.0 * PI * geometry.spacing;
    let mut out = Vec::with_capacity(geometry.elements());
    for o in 0..geometry.rows {
        for p in 0..geometry.cols {
            let phase = two_pi_d * (o as f64 * sa * se + p as f64 * ce);
            out.push(Cx::from_polar(scale, phase));
        }
    }
    out
}

/// Deterministic part of the path loss in dB: `a + 10 b log10(d)`.
/// Shadowing is sampled separately, per link, by [`sample_channels`].
pub fn path_loss_db(distance: f64, params: &ClusterParams) -> Result<f64, ChannelError> {
    if distance <= 0.0 || !distance.is_finite() {
        return Err(ChannelError::BadDistance(distance));
    }
    Ok(params.pathloss_a + 10.0 * params.pathloss_b * distance.log10())
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Laplacian draw with standard deviation `spread` via inverse CDF.
fn laplacian(rng: &mut ChaCha8Rng, spread: f64) -> f64 {
    let scale = spread / std::f64::consts::SQRT_2;
    let p: f64 = rng.gen::<f64>() - 0.5;
    -scale * p.signum() * (1.0 - 2.0 * p.abs()).max(f64::MIN_POSITIVE).ln()
}

struct RayAngles {
    az_arr: f64,
    el_arr: f64,
    az_dep: f64,
    el_dep: f64,
}

/// Cluster centers are uniform (azimuth over `[0, 2 pi)`, elevation over
/// `(0, pi)`); rays add independent Laplacian offsets on every angle.
fn draw_rays(
    rng: &mut ChaCha8Rng,
    clusters: usize,
    rays: usize,
    spread_rad: f64,
    gain_std: f64,
) -> (Vec<RayAngles>, Vec<Cx>) {
    let mut angles = Vec::with_capacity(clusters * rays);
    let mut gains = Vec::with_capacity(clusters * rays);
    for _ in 0..clusters {
        let az_arr0 = rng.gen::<f64>() * 2.0 * PI;
        let el_arr0 = rng.gen::<f64>() * PI;
        let az_dep0 = rng.gen::<f64>() * 2.0 * PI;
        let el_dep0 = rng.gen::<f64>() * PI;
        for _ in 0..rays {
            angles.push(RayAngles {
                az_arr: az_arr0 + laplacian(rng, spread_rad),
                el_arr: el_arr0 + laplacian(rng, spread_rad),
                az_dep: az_dep0 + laplacian(rng, spread_rad),
                el_dep: el_dep0 + laplacian(rng, spread_rad),
            });
            gains.push(complex_normal(rng) * gain_std);
        }
    }
    (angles, gains)
}

/// Sample one channel realization for the given scenario and seed.
pub fn sample_channels(
    sys: &SystemConfig,
    params: &ClusterParams,
    seed: &RngSeed,
) -> ChannelSet {
    let mut rng = seed.rng();
    let spread_rad = params.angle_spread_deg.to_radians();

    // 1. user positions, area-uniform in the disc
    let mut user_positions = Vec::with_capacity(sys.k);
    for _ in 0..sys.k {
        let r = sys.user_radius * rng.gen::<f64>().sqrt();
        let psi = rng.gen::<f64>() * 2.0 * PI;
        user_positions.push([
            sys.user_center[0] + r * psi.cos(),
            sys.user_center[1] + r * psi.sin(),
        ]);
    }

    // 2. per-link shadowing (BS-RIS first, then each RIS-user link)
    let shadow_bs_ris: f64 =
        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng) * params.shadowing_db;
    let shadow_users: Vec<f64> = (0..sys.k)
        .map(|_| {
            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                * params.shadowing_db
        })
        .collect();

    // 3. scattering geometry and ray gains, all array-size independent
    let d1 = dist(sys.bs_position, sys.ris_position);
    let pl1 = path_loss_db(d1, params).expect("BS and RIS positions coincide") + shadow_bs_ris;
    let gain_std1 = 10f64.powf(-0.05 * pl1);
    let (rays_g, gains_g) = draw_rays(
        &mut rng,
        params.clusters_bs_ris,
        params.rays_bs_ris,
        spread_rad,
        gain_std1,
    );

    let mut rays_h = Vec::with_capacity(sys.k);
    for k in 0..sys.k {
        let d2 = dist(sys.ris_position, user_positions[k]);
        let pl2 = path_loss_db(d2, params).expect("user sits on the RIS") + shadow_users[k];
        let gain_std2 = 10f64.powf(-0.05 * pl2);
        let mut angles = Vec::with_capacity(params.clusters_ris_user * params.rays_ris_user);
        let mut gains = Vec::with_capacity(angles.capacity());
        for _ in 0..params.clusters_ris_user {
            let az0 = rng.gen::<f64>() * 2.0 * PI;
            let el0 = rng.gen::<f64>() * PI;
            for _ in 0..params.rays_ris_user {
                angles.push((az0 + laplacian(&mut rng, spread_rad), el0 + laplacian(&mut rng, spread_rad)));
                gains.push(complex_normal(&mut rng) * gain_std2);
            }
        }
        rays_h.push((angles, gains));
    }

    // 4. materialize steering vectors and assemble
    let bs_geo = ArrayGeometry::new(sys.bs_rows, sys.bs_cols, params.element_spacing);
    let ris_geo = ArrayGeometry::new(sys.ris_rows, sys.ris_cols, params.element_spacing);

    let scale_g = ((sys.m * sys.f) as f64
        / (params.clusters_bs_ris * params.rays_bs_ris) as f64)
        .sqrt();
    let mut g = CMat::zeros(sys.f, sys.m);
    for (ray, gain) in rays_g.iter().zip(&gains_g) {
        let a_r = upa_response(ray.az_arr, ray.el_arr, ris_geo);
        let a_b = upa_response(ray.az_dep, ray.el_dep, bs_geo);
        let w = gain * scale_g;
        for f in 0..sys.f {
            let left = w * a_r[f];
            let row = g.row_mut(f);
            for (entry, b) in row.iter_mut().zip(&a_b) {
                *entry += left * b.conj();
            }
        }
    }

    let scale_h = (sys.f as f64 / (params.clusters_ris_user * params.rays_ris_user) as f64).sqrt();
    let h = rays_h
        .into_iter()
        .map(|(angles, gains)| {
            let mut hk = vec![Complex::new(0.0, 0.0); sys.f];
            for ((az, el), gain) in angles.iter().zip(&gains) {
                let a_r = upa_response(*az, *el, ris_geo);
                let w = gain * scale_h;
                for (acc, a) in hk.iter_mut().zip(&a_r) {
                    *acc += w * a;
                }
            }
            hk
        })
        .collect();

    ChannelSet { g, h, user_positions }
}

/// Dump a realization as CSV (`entity,user,row,col,re,im`) for
/// cross-implementation fixtures.
pub fn dump_csv<W: Write>(set: &ChannelSet, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "entity,user,row,col,re,im")?;
    for f in 0..set.g.rows {
        for m in 0..set.g.cols {
            let v = set.g[(f, m)];
            writeln!(out, "G,,{f},{m},{:.17e},{:.17e}", v.re, v.im)?;
        }
    }
    for (k, hk) in set.h.iter().enumerate() {
        for (f, v) in hk.iter().enumerate() {
            writeln!(out, "h,{k},{f},0,{:.17e},{:.17e}", v.re, v.im)?;
        }
    }
    Ok(())
}
