//! Deterministic DDIM stepping between noise levels.
//!
//! The forward step (often written `phi`) moves a sample one level noisier
//! with the model's own noise prediction at the current level; the backward
//! step (`psi`) denoises one level using a fresh prediction at the noisier
//! level. Both share the same algebra: predict the clean point, then re-noise
//! it to the destination level along the predicted direction (eta = 0).

use crate::real::Real;

use super::denoiser::DenoiserParams;
use super::schedule::NoiseSchedule;
use super::Result;

/// Predicted clean point: `(x - sqrt(1 - ab) eps_hat) / sqrt(ab)`.
pub fn predict_clean<T: Real>(x: &[T], eps_hat: &[T], alpha_bar: T) -> Vec<T> {
    let noise = (T::one() - alpha_bar).sqrt();
    let signal = alpha_bar.sqrt();
    x.iter()
        .zip(eps_hat)
        .map(|(&xv, &e)| (xv - noise * e) / signal)
        .collect()
}

/// Deterministic move from `level_from` to `level_to` reusing the supplied
/// noise prediction: re-noises the predicted clean point to the destination
/// level. Equal levels are an exact no-op (up to rounding).
pub fn ddim_step_with_eps<T: Real>(
    x: &[T],
    level_from: usize,
    level_to: usize,
    schedule: &NoiseSchedule<T>,
    eps_hat: &[T],
) -> Result<Vec<T>> {
    schedule.check_t(level_from)?;
    schedule.check_t(level_to)?;
    let x0_hat = predict_clean(x, eps_hat, schedule.alpha_bar[level_from]);
    let ab_to = schedule.alpha_bar[level_to];
    let signal = ab_to.sqrt();
    let noise = (T::one() - ab_to).sqrt();
    Ok(x0_hat
        .iter()
        .zip(eps_hat)
        .map(|(&x0, &e)| signal * x0 + noise * e)
        .collect())
}

/// One deterministic forward step `t -> t+1`, predicting at `(x_t, t)`.
pub fn ddim_forward_step<T: Real>(
    params: &DenoiserParams<T>,
    x_t: &[T],
    t: usize,
    schedule: &NoiseSchedule<T>,
) -> Result<Vec<T>> {
    schedule.check_t(t + 1)?;
    let eps_hat = params.predict_noise(x_t, t, schedule)?;
    ddim_step_with_eps(x_t, t, t + 1, schedule, &eps_hat)
}

/// One deterministic backward step `t+1 -> t`, predicting afresh at
/// `(x_{t+1}, t+1)`.
pub fn ddim_backward_step<T: Real>(
    params: &DenoiserParams<T>,
    x_next: &[T],
    t: usize,
    schedule: &NoiseSchedule<T>,
) -> Result<Vec<T>> {
    schedule.check_t(t + 1)?;
    let eps_hat = params.predict_noise(x_next, t + 1, schedule)?;
    ddim_step_with_eps(x_next, t + 1, t, schedule, &eps_hat)
}

/// Variant of the backward step reusing an already computed prediction
/// (the "cached" behavior): `psi(phi(x, t), t)` is then the identity.
pub fn ddim_backward_step_with_eps<T: Real>(
    x_next: &[T],
    t: usize,
    schedule: &NoiseSchedule<T>,
    eps_hat: &[T],
) -> Result<Vec<T>> {
    schedule.check_t(t + 1)?;
    ddim_step_with_eps(x_next, t + 1, t, schedule, eps_hat)
}

/// `t`-fold composition of unit-stride forward steps starting from clean
/// data: levels `0 -> 1 -> ... -> t`. `t = 0` is the empty composition.
pub fn iterated_forward<T: Real>(
    params: &DenoiserParams<T>,
    x0: &[T],
    t: usize,
    schedule: &NoiseSchedule<T>,
) -> Result<Vec<T>> {
    schedule.check_t(t)?;
    let mut x = x0.to_vec();
    for s in 0..t {
        x = ddim_forward_step(params, &x, s, schedule)?;
    }
    Ok(x)
}
