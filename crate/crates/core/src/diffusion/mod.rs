//! DDPM machinery: noise schedule, closed-form forward diffusion, denoiser
//! training on the diffusion loss, ancestral sampling, and the deterministic
//! DDIM step pair used by the round-trip membership statistic.

mod ddim;
mod denoiser;
mod sample;
mod schedule;
mod train;

pub use ddim::{
    ddim_backward_step, ddim_backward_step_with_eps, ddim_forward_step, ddim_step_with_eps,
    iterated_forward, predict_clean,
};
pub use denoiser::{diffusion_loss, forward_diffuse, time_embedding, DenoiserConfig, DenoiserParams};
pub use sample::sample;
pub use schedule::{build_schedule, NoiseSchedule};
pub use train::{train_denoiser, TrainConfig};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("timestep {t} out of range (T = {t_total})")]
    TimestepOutOfRange { t: usize, t_total: usize },
    #[error("dimension mismatch at {location}: expected {expected}, got {got}")]
    DimensionMismatch {
        location: String,
        expected: usize,
        got: usize,
    },
    #[error("non-finite denoiser output at t = {t}")]
    NonFiniteActivation { t: usize },
    #[error("training diverged (non-finite loss) at step {step}")]
    Divergence { step: usize },
    #[error("non-finite state while sampling at t = {t}")]
    NonFiniteSample { t: usize },
    #[error("training data is empty")]
    EmptyData,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, DiffusionError>;
