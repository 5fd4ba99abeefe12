//! Joint hybrid-beamforming and RIS reflection design for mmWave multiuser downlink.
//!
//! A base station with a sub-connected hybrid analog/digital array serves K
//! single-antenna users through a reconfigurable intelligent surface (RIS).
//! The library solves the quality-of-service (QoS) power-minimization problem
//! — minimize transmit power subject to per-user SINR targets over the digital
//! beamformer, the unit-modulus analog beamformer, and the unit-modulus RIS
//! reflection coefficients — plus the max-min-fairness dual of that problem.
//!
//! # Modules
//!
//! - [`scenario`] — configuration types, discrete phase sets, deterministic seeding
//! - [`channel`] — clustered mmWave channel generator with UPA steering vectors
//! - [`linalg`] — small dense complex vector/matrix kernels, generic over the scalar
//! - [`manifold`] — Riemannian toolkit on products of complex circles (projection,
//!   transport, retraction, conjugate gradient, phase-domain descent)
//! - [`conic`] — SINR-constrained power minimization and the per-row cone projection
//! - [`penalty`] — the two-layer penalty solver with block-coordinate inner updates
//! - [`sequential`] — low-complexity sequential design (RIS max-min, codebook OMP,
//!   optimal digital stage)
//! - [`mmf`] — max-min fairness via bisection over scaled SINR targets
//!
//! The numeric kernels (`linalg`, `manifold`, `conic`) are generic over the real
//! scalar through `num-traits`; the simulation pipeline instantiates them at `f64`
//! via the aliases below.

pub mod channel;
pub mod conic;
pub mod linalg;
pub mod manifold;
pub mod mmf;
pub mod penalty;
pub mod scenario;
pub mod sequential;

/// Double-precision complex scalar used throughout the simulation pipeline.
pub type Cx = num_complex::Complex<f64>;
/// Single-precision complex scalar, for callers instantiating the kernels at `f32`.
pub type Cx32 = num_complex::Complex<f32>;
/// Complex matrix at the pipeline precision.
pub type CMat64 = linalg::CMat<f64>;
/// Point on a product of complex circles at the pipeline precision.
pub type CirclePoint64 = manifold::CirclePoint<f64>;

pub use channel::{sample_channels, ChannelSet};
pub use conic::{project_sinr_row, solve_power_min, EffectiveChannels};
pub use mmf::{solve_mmf, MmfMode, MmfSolution};
pub use penalty::{run_qos, PhaseMethod, QoSSolution, RisResponse};
pub use scenario::{load_scenario, PhaseBits, RngSeed, Scenario, SolverConfig, SystemConfig};
pub use sequential::run_sequential;
