//! Membership-inference auditing for diffusion-based tabular data synthesizers.
//!
//! The crate is organized around the audit pipeline:
//!
//! - [`numerics`]: dense matrices, a manually differentiated MLP, and Adam.
//! - [`tabular`]: schemas, row encoding, synthetic populations, splits.
//! - [`diffusion`]: noise schedules, the forward process, denoiser training,
//!   ancestral sampling, and deterministic DDIM stepping.
//! - [`attack`]: membership scoring: naive loss, SecMI t-error, the
//!   best-noise oracle, and the trained loss-feature classifier.
//! - [`challenge`]: fleet orchestration for white-box/black-box experiments.
//! - [`evaluation`]: ROC curves, AUC, TPR at fixed FPR, report emission.
//!
//! Core math is generic over the scalar type through the [`Real`] trait;
//! the pipeline itself runs in `f64` via the aliases below.

pub mod attack;
pub mod challenge;
pub mod config;
pub mod diffusion;
pub mod evaluation;
pub mod numerics;
pub mod real;
pub mod tabular;

pub use real::Real;

/// Scalar used by the concrete pipeline. Loss-feature gaps between members
/// and holdouts are small, and run-to-run determinism is part of the
/// contract, so everything downstream is pinned to 64-bit floats.
pub type Scalar = f64;

/// Dense row-major matrix over the pipeline scalar.
pub type Matrix = numerics::DenseMatrix<Scalar>;
/// Feed-forward network parameters over the pipeline scalar.
pub type Mlp = numerics::MlpParams<Scalar>;
/// Adam optimizer state over the pipeline scalar.
pub type Adam = numerics::AdamState<Scalar>;
/// Noise schedule over the pipeline scalar.
pub type Schedule = diffusion::NoiseSchedule<Scalar>;
/// Denoiser parameters over the pipeline scalar.
pub type Denoiser = diffusion::DenoiserParams<Scalar>;
