//! Transmit beamforming for bistatic backscatter links: maximize carrier
//! power at a backscatter device while holding an exact spatial null at the
//! readers, under per-antenna power limits.
//!
//! The numerical modules are generic over [`Real`] (`f32` or `f64`); the
//! `*64`/`*32` aliases below fix the scalar for everyday use.

pub mod beamform;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod scenario;

pub use beamform::{
    azf_bruteforce, azf_closed_form_dim1, azf_phase_only, azf_solve, nullspace_basis, po_mrt,
    BeamWeights, SolveReport, SolverOptions, WeightLabel,
};
pub use channel::{apply_csi_error, apply_phase_noise, los_channel, rician_channel, ChannelSet, ImpairmentSpec};
pub use error::{Error, Result};
pub use metrics::{evaluate, MetricsReport};
pub use scalar::Real;
pub use scenario::{default_techtile_scenario, load_scenario, GridSpec, Scenario};

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;
pub type CVector64 = scalar::CVector<f64>;
pub type CMatrix64 = scalar::CMatrix<f64>;
pub type CVector32 = scalar::CVector<f32>;
pub type CMatrix32 = scalar::CMatrix<f32>;
pub type ChannelSet64 = ChannelSet<f64>;
pub type ChannelSet32 = ChannelSet<f32>;
pub type BeamWeights64 = BeamWeights<f64>;
pub type BeamWeights32 = BeamWeights<f32>;
pub type SolverOptions64 = SolverOptions<f64>;
pub type SolverOptions32 = SolverOptions<f32>;
