//! Scenario configuration: system geometry, discrete phase sets, solver
//! parameters, and deterministic seeding.
//!
//! A scenario file is a TOML document with three sections, all optional:
//!
//! ```toml
//! [system]
//! bs_rows = 4
//! bs_cols = 4
//! rf_chains = 4
//! users = 2
//! ris_rows = 4
//! ris_cols = 4
//! analog_bits = "continuous"   # or 1, 2, 3, ...
//! ris_bits = "continuous"
//! sinr_target_db = 10.0        # scalar or one entry per user
//! bandwidth_mhz = 251.1886     # sets noise to -174 + 10 log10(B) dBm
//! ris_position = [50.0, 10.0]
//!
//! [channel]
//! clusters_bs_ris = 5
//! rays_bs_ris = 10
//! angle_spread_deg = 10.0
//!
//! [solver]
//! rho0 = 1e-3
//! penalty_scale = 0.9
//! ```
//!
//! Powers are accepted in dBm and stored in watts; SINR targets are accepted
//! in dB and stored on the linear scale. Missing fields fall back to the
//! full-scale defaults (36-antenna BS, 36-element RIS, 3 users).

use num_complex::Complex;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::Cx;

/// Environment variable consulted by the CLI for a default scenario path.
pub const SCENARIO_ENV: &str = "RISBEAM_SCENARIO";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to parse scenario document: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("antenna count {m} is not divisible by RF-chain count {n}")]
    BadChainSplit { m: usize, n: usize },
    #[error("{what} must be positive (got {value})")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{what} must be a positive integer")]
    ZeroCount { what: &'static str },
    #[error("per-user list for {what} has {got} entries, expected {want}")]
    BadUserList { what: &'static str, got: usize, want: usize },
    #[error("cannot project a zero phasor (undefined angle)")]
    ZeroPhasor,
}

// ── Unit conversions ─────────────────────────────────────────────────────────

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Thermal noise power in dBm for a bandwidth in Hz: -174 + 10 log10(B).
pub fn noise_dbm_for_bandwidth(bandwidth_hz: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10()
}

// ── Phase sets ───────────────────────────────────────────────────────────────

/// Resolution of a bank of phase shifters: a `Q`-bit uniform grid on the unit
/// circle, or continuous (unit modulus only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PhaseBitsRepr", into = "PhaseBitsRepr")]
pub enum PhaseBits {
    Continuous,
    Bits(u32),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PhaseBitsRepr {
    Num(u32),
    Name(String),
}

impl TryFrom<PhaseBitsRepr> for PhaseBits {
    type Error = String;
    fn try_from(r: PhaseBitsRepr) -> Result<Self, String> {
        match r {
            PhaseBitsRepr::Num(0) => Err("phase bits must be >= 1".into()),
            PhaseBitsRepr::Num(q) => Ok(PhaseBits::Bits(q)),
            PhaseBitsRepr::Name(s) if s.eq_ignore_ascii_case("continuous") => {
                Ok(PhaseBits::Continuous)
            }
            PhaseBitsRepr::Name(s) => Err(format!("unknown phase-bit spec {s:?}")),
        }
    }
}

impl From<PhaseBits> for PhaseBitsRepr {
    fn from(p: PhaseBits) -> Self {
        match p {
            PhaseBits::Continuous => PhaseBitsRepr::Name("continuous".into()),
            PhaseBits::Bits(q) => PhaseBitsRepr::Num(q),
        }
    }
}

impl PhaseBits {
    /// Number of grid points, or `None` for continuous phases.
    pub fn levels(&self) -> Option<u64> {
        match self {
            PhaseBits::Continuous => None,
            PhaseBits::Bits(q) => Some(1u64 << q),
        }
    }

    /// All elements of the discrete set, in canonical `(cos, sin)` form.
    pub fn elements(&self) -> Option<Vec<Cx>> {
        self.levels().map(|n| {
            (0..n)
                .map(|q| Cx::from_polar(1.0, 2.0 * PI * q as f64 / n as f64))
                .collect()
        })
    }
}

/// Project a nonzero phasor onto the nearest element of the phase set under
/// circular angular distance. Exact midpoints resolve to the smaller angle in
/// `[0, 2pi)`. Continuous sets only normalize the modulus.
pub fn phase_project(value: Cx, set: PhaseBits) -> Result<Cx, ScenarioError> {
    if value.norm_sqr() == 0.0 {
        return Err(ScenarioError::ZeroPhasor);
    }
    let levels = match set {
        PhaseBits::Continuous => return Ok(value / value.norm()),
        PhaseBits::Bits(q) => 1u64 << q,
    };
    let step = 2.0 * PI / levels as f64;
    let mut theta = value.arg();
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    let lo = (theta / step).floor() as u64 % levels;
    let hi = (lo + 1) % levels;
    let dist = |q: u64| {
        let mut d = (theta - q as f64 * step).abs();
        if d > PI {
            d = 2.0 * PI - d;
        }
        d
    };
    let (d_lo, d_hi) = (dist(lo), dist(hi));
    let q = if d_lo < d_hi {
        lo
    } else if d_hi < d_lo {
        hi
    } else {
        // Tie: smaller angle wins (hi may have wrapped to 0).
        lo.min(hi)
    };
    Ok(Cx::from_polar(1.0, q as f64 * step))
}

// ── System configuration ─────────────────────────────────────────────────────

/// Validated system-level constants. Immutable after load; shared read-only
/// across parallel realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS uniform planar array rows/columns; `m = bs_rows * bs_cols`.
    pub bs_rows: usize,
    pub bs_cols: usize,
    /// Total BS antennas.
    pub m: usize,
    /// RF chains.
    pub n: usize,
    /// Antennas per RF chain, `m / n`.
    pub d: usize,
    /// Users.
    pub k: usize,
    /// RIS rows/columns; `f = ris_rows * ris_cols`.
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub f: usize,
    /// Analog phase-shifter resolution.
    pub q1: PhaseBits,
    /// RIS phase-shifter resolution.
    pub q2: PhaseBits,
    /// Per-user SINR targets, linear scale.
    pub gamma: Vec<f64>,
    /// Per-user noise powers, watts.
    pub sigma2: Vec<f64>,
    pub bs_position: [f64; 2],
    pub ris_position: [f64; 2],
    pub user_center: [f64; 2],
    pub user_radius: f64,
    pub carrier_ghz: f64,
    pub bandwidth_mhz: f64,
}

impl SystemConfig {
    /// Full-scale defaults: 6x6 BS array with 6 RF chains, 6x6 RIS, 3 users,
    /// 10 dB targets, noise from 251.1886 MHz bandwidth (-90 dBm).
    pub fn full_scale_default() -> Self {
        SystemDoc::default_doc().validate().expect("defaults are valid").0
    }

    /// Desk-scale profile: 4x4 BS with 4 chains, 4x4 RIS, 2 users. Keeps full
    /// experiment suites fast while preserving every qualitative trend.
    pub fn desk_default() -> Self {
        let mut doc = SystemDoc::default_doc();
        doc.bs_rows = Some(4);
        doc.bs_cols = Some(4);
        doc.rf_chains = Some(4);
        doc.users = Some(2);
        doc.ris_rows = Some(4);
        doc.ris_cols = Some(4);
        doc.validate().expect("desk profile is valid").0
    }

    /// Replace the RIS element count, keeping `ris_rows` fixed.
    pub fn with_ris_elements(&self, f: usize) -> Result<Self, ScenarioError> {
        if f == 0 || f % self.ris_rows != 0 {
            return Err(ScenarioError::ZeroCount { what: "ris elements (must be a multiple of ris_rows)" });
        }
        let mut c = self.clone();
        c.ris_cols = f / c.ris_rows;
        c.f = f;
        Ok(c)
    }

    /// Fully-digital variant: one antenna per chain (`n = m`, `d = 1`).
    pub fn fully_digital(&self) -> Self {
        let mut c = self.clone();
        c.n = c.m;
        c.d = 1;
        c
    }

    pub fn with_sinr_target_db(&self, db: f64) -> Self {
        let mut c = self.clone();
        c.gamma = vec![db_to_linear(db); c.k];
        c
    }

    pub fn with_phase_bits(&self, q1: PhaseBits, q2: PhaseBits) -> Self {
        let mut c = self.clone();
        c.q1 = q1;
        c.q2 = q2;
        c
    }

    pub fn with_ris_distance(&self, d_ris: f64) -> Self {
        let mut c = self.clone();
        c.ris_position[0] = d_ris;
        c
    }
}

// ── Channel parameters ───────────────────────────────────────────────────────

/// Clustered-channel statistics and the distance path-loss model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    pub clusters_bs_ris: usize,
    pub rays_bs_ris: usize,
    pub clusters_ris_user: usize,
    pub rays_ris_user: usize,
    /// Laplacian angle spread, degrees (standard deviation of ray offsets).
    pub angle_spread_deg: f64,
    /// Path loss intercept at 1 m, dB.
    pub pathloss_a: f64,
    /// Path loss distance exponent (applied as `10 * b * log10(d)`).
    pub pathloss_b: f64,
    /// Lognormal shadowing standard deviation, dB. One draw per link.
    pub shadowing_db: f64,
    /// Element spacing in wavelengths for both arrays.
    pub element_spacing: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            clusters_bs_ris: 5,
            rays_bs_ris: 10,
            clusters_ris_user: 5,
            rays_ris_user: 10,
            angle_spread_deg: 10.0,
            pathloss_a: 72.0,
            pathloss_b: 2.92,
            shadowing_db: 8.7,
            element_spacing: 0.5,
        }
    }
}

impl ClusterParams {
    fn validated(self) -> Result<Self, ScenarioError> {
        for (what, v) in [
            ("clusters_bs_ris", self.clusters_bs_ris),
            ("rays_bs_ris", self.rays_bs_ris),
            ("clusters_ris_user", self.clusters_ris_user),
            ("rays_ris_user", self.rays_ris_user),
        ] {
            if v == 0 {
                return Err(ScenarioError::ZeroCount { what });
            }
        }
        if self.angle_spread_deg < 0.0 {
            return Err(ScenarioError::NonPositive { what: "angle_spread_deg", value: self.angle_spread_deg });
        }
        if self.element_spacing <= 0.0 {
            return Err(ScenarioError::NonPositive { what: "element_spacing", value: self.element_spacing });
        }
        Ok(self)
    }
}

// ── Solver configuration ─────────────────────────────────────────────────────

/// Tolerances and iteration budgets for every solver in the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Initial penalty factor.
    pub rho0: f64,
    /// Penalty scaling `c` in (0,1); each outer iteration sets `rho <- rho / c`.
    pub penalty_scale: f64,
    /// Gradient-norm tolerance for the Riemannian conjugate gradient.
    pub eps1: f64,
    /// Inner-loop objective-decrease tolerance.
    pub eps2: f64,
    /// Stopping-indicator tolerance for the outer loop.
    pub eps3: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub max_rcg_iters: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Armijo step contraction factor.
    pub armijo_contraction: f64,
    /// Armijo initial step.
    pub armijo_initial: f64,
    /// Maximum Armijo halvings per line search.
    pub armijo_max_trials: usize,
    /// Phase-descent sufficient-decrease constant, in (0, 0.5).
    pub sca_zeta: f64,
    /// Phase-descent initial step scale, > 0.
    pub sca_beta: f64,
    /// Phase-descent step contraction, in (0, 1).
    pub sca_kappa0: f64,
    /// Gaussian randomization candidates for the RIS max-min design.
    pub randomization_count: usize,
    /// Relative bisection tolerance on the max-min fairness scale factor.
    pub bisection_tol: f64,
    /// Declare infeasibility when dual uplink power exceeds this multiple of
    /// the interference-free uplink power.
    pub power_cap_factor: f64,
    /// Relative tolerance of the dual fixed-point iteration.
    pub duality_tol: f64,
    pub duality_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho0: 1e-3,
            penalty_scale: 0.9,
            eps1: 1e-7,
            eps2: 1e-4,
            eps3: 1e-7,
            max_outer: 300,
            max_inner: 50,
            max_rcg_iters: 200,
            armijo_c1: 1e-4,
            armijo_contraction: 0.5,
            armijo_initial: 1.0,
            armijo_max_trials: 50,
            sca_zeta: 0.3,
            sca_beta: 1.0,
            sca_kappa0: 0.5,
            randomization_count: 50,
            bisection_tol: 1e-3,
            power_cap_factor: 1e6,
            duality_tol: 1e-10,
            duality_max_iters: 10_000,
        }
    }
}

// ── Deterministic seeding ────────────────────────────────────────────────────

/// Named sub-stream purposes so independent random draws never collide.
pub mod streams {
    pub const CHANNEL: u64 = 0;
    pub const PENALTY_INIT: u64 = 1;
    pub const RIS_RANDOMIZATION: u64 = 2;
    pub const RANDOM_THETA: u64 = 3;
    pub const ORACLE: u64 = 4;
}

/// A (seed, stream) pair. The same pair always produces bit-identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Stream for a given purpose and realization index.
    pub fn for_purpose(seed: u64, purpose: u64, realization: u64) -> Self {
        Self { seed, stream: (purpose << 48) | (realization & 0xffff_ffff_ffff) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

// ── Scenario document ────────────────────────────────────────────────────────

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PerUser {
    One(f64),
    Many(Vec<f64>),
}

impl PerUser {
    fn expand(&self, k: usize, what: &'static str) -> Result<Vec<f64>, ScenarioError> {
        match self {
            PerUser::One(v) => Ok(vec![*v; k]),
            PerUser::Many(vs) if vs.len() == k => Ok(vs.clone()),
            PerUser::Many(vs) => Err(ScenarioError::BadUserList { what, got: vs.len(), want: k }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
struct SystemDoc {
    bs_rows: Option<usize>,
    bs_cols: Option<usize>,
    rf_chains: Option<usize>,
    users: Option<usize>,
    ris_rows: Option<usize>,
    ris_cols: Option<usize>,
    analog_bits: Option<PhaseBits>,
    ris_bits: Option<PhaseBits>,
    sinr_target_db: Option<PerUser>,
    noise_dbm: Option<PerUser>,
    bs_position: Option<[f64; 2]>,
    ris_position: Option<[f64; 2]>,
    user_center: Option<[f64; 2]>,
    user_radius: Option<f64>,
    carrier_ghz: Option<f64>,
    bandwidth_mhz: Option<f64>,
}

impl SystemDoc {
    fn default_doc() -> Self {
        Self::default()
    }

    fn validate(&self) -> Result<(SystemConfig, Vec<String>), ScenarioError> {
        let bs_rows = self.bs_rows.unwrap_or(6);
        let bs_cols = self.bs_cols.unwrap_or(6);
        let n = self.rf_chains.unwrap_or(6);
        let k = self.users.unwrap_or(3);
        let ris_rows = self.ris_rows.unwrap_or(6);
        let ris_cols = self.ris_cols.unwrap_or(6);
        for (what, v) in [
            ("bs_rows", bs_rows),
            ("bs_cols", bs_cols),
            ("rf_chains", n),
            ("users", k),
            ("ris_rows", ris_rows),
            ("ris_cols", ris_cols),
        ] {
            if v == 0 {
                return Err(ScenarioError::ZeroCount { what });
            }
        }
        let m = bs_rows * bs_cols;
        if m % n != 0 {
            return Err(ScenarioError::BadChainSplit { m, n });
        }
        let bandwidth_mhz = self.bandwidth_mhz.unwrap_or(251.1886);
        if bandwidth_mhz <= 0.0 {
            return Err(ScenarioError::NonPositive { what: "bandwidth_mhz", value: bandwidth_mhz });
        }
        let gamma_db = self
            .sinr_target_db
            .clone()
            .unwrap_or(PerUser::One(10.0))
            .expand(k, "sinr_target_db")?;
        let default_noise = noise_dbm_for_bandwidth(bandwidth_mhz * 1e6);
        let noise_dbm = self
            .noise_dbm
            .clone()
            .unwrap_or(PerUser::One(default_noise))
            .expand(k, "noise_dbm")?;
        let gamma: Vec<f64> = gamma_db.iter().map(|&db| db_to_linear(db)).collect();
        let sigma2: Vec<f64> = noise_dbm.iter().map(|&d| dbm_to_watts(d)).collect();
        for &g in &gamma {
            if g <= 0.0 {
                return Err(ScenarioError::NonPositive { what: "sinr target (linear)", value: g });
            }
        }
        for &s in &sigma2 {
            if s <= 0.0 {
                return Err(ScenarioError::NonPositive { what: "noise power (watts)", value: s });
            }
        }
        let user_radius = self.user_radius.unwrap_or(5.0);
        if user_radius < 0.0 {
            return Err(ScenarioError::NonPositive { what: "user_radius", value: user_radius });
        }
        let mut warnings = Vec::new();
        if k > n {
            warnings.push(format!(
                "users ({k}) exceed RF chains ({n}); QoS targets may be infeasible"
            ));
        }
        Ok((
            SystemConfig {
                bs_rows,
                bs_cols,
                m,
                n,
                d: m / n,
                k,
                ris_rows,
                ris_cols,
                f: ris_rows * ris_cols,
                q1: self.analog_bits.unwrap_or(PhaseBits::Continuous),
                q2: self.ris_bits.unwrap_or(PhaseBits::Continuous),
                gamma,
                sigma2,
                bs_position: self.bs_position.unwrap_or([0.0, 0.0]),
                ris_position: self.ris_position.unwrap_or([50.0, 10.0]),
                user_center: self.user_center.unwrap_or([100.0, 0.0]),
                user_radius,
                carrier_ghz: self.carrier_ghz.unwrap_or(28.0),
                bandwidth_mhz,
            },
            warnings,
        ))
    }

    fn from_config(c: &SystemConfig) -> Self {
        Self {
            bs_rows: Some(c.bs_rows),
            bs_cols: Some(c.bs_cols),
            rf_chains: Some(c.n),
            users: Some(c.k),
            ris_rows: Some(c.ris_rows),
            ris_cols: Some(c.ris_cols),
            analog_bits: Some(c.q1),
            ris_bits: Some(c.q2),
            sinr_target_db: Some(PerUser::Many(c.gamma.iter().map(|&g| linear_to_db(g)).collect())),
            noise_dbm: Some(PerUser::Many(c.sigma2.iter().map(|&s| watts_to_dbm(s)).collect())),
            bs_position: Some(c.bs_position),
            ris_position: Some(c.ris_position),
            user_center: Some(c.user_center),
            user_radius: Some(c.user_radius),
            carrier_ghz: Some(c.carrier_ghz),
            bandwidth_mhz: Some(c.bandwidth_mhz),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
struct ScenarioDoc {
    system: SystemDoc,
    channel: Option<ClusterParams>,
    solver: Option<SolverConfig>,
}

/// A fully validated scenario: system constants, channel statistics, solver
/// parameters, plus any non-fatal warnings produced during validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub system: SystemConfig,
    pub channel: ClusterParams,
    pub solver: SolverConfig,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn desk() -> Self {
        Self {
            system: SystemConfig::desk_default(),
            channel: ClusterParams::default(),
            solver: SolverConfig::default(),
            warnings: Vec::new(),
        }
    }

    pub fn full_scale() -> Self {
        Self {
            system: SystemConfig::full_scale_default(),
            channel: ClusterParams::default(),
            solver: SolverConfig::default(),
            warnings: Vec::new(),
        }
    }

    /// Serialize back to a TOML document that reparses to an equal scenario.
    pub fn to_toml_string(&self) -> String {
        let doc = ScenarioDoc {
            system: SystemDoc::from_config(&self.system),
            channel: Some(self.channel.clone()),
            solver: Some(self.solver.clone()),
        };
        toml::to_string_pretty(&doc).expect("scenario serializes")
    }
}

/// Parse and validate a scenario document. Empty input yields the full-scale
/// defaults.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = toml::from_str(text)?;
    let (system, warnings) = doc.system.validate()?;
    let channel = doc.channel.unwrap_or_default().validated()?;
    let solver = doc.solver.unwrap_or_default();
    Ok(Scenario { system, channel, solver, warnings })
}

/// Uniform random point on the unit circle (used for phase initialization).
pub fn random_phasor<R: rand::Rng>(rng: &mut R) -> Cx {
    let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
    Cx::from_polar(1.0, theta)
}

/// Standard complex normal draw: CN(0, 1).
pub fn complex_normal<R: rand::Rng>(rng: &mut R) -> Cx {
    use rand_distr::{Distribution, StandardNormal};
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
