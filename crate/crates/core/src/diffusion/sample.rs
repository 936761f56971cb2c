//! Ancestral DDPM sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::real::Real;

use super::denoiser::DenoiserParams;
use super::schedule::NoiseSchedule;
use super::{DiffusionError, Result};

/// Draws `n` records by ancestral sampling from `t = T-1` down to `0`,
/// using the standard posterior mean with the predicted noise and adding
/// `sigma_t`-scaled Gaussian noise for `t > 0`
/// (`sigma_t^2 = beta_t (1 - alpha_bar[t-1]) / (1 - alpha_bar[t])`).
///
/// Deterministic per seed. RNG consumption order, per record: `d` draws for
/// the initial Gaussian, then `d` draws for the transition noise at each
/// `t = T-1, ..., 1` (none at `t = 0`).
pub fn sample<T: Real>(
    params: &DenoiserParams<T>,
    schedule: &NoiseSchedule<T>,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = params.input_dim;
    let t_total = schedule.num_timesteps;
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x: Vec<T> = (0..d)
            .map(|_| T::from_f64_lossy(StandardNormal.sample(&mut rng)))
            .collect();
        for t in (0..t_total).rev() {
            let eps_hat = params.predict_noise(&x, t, schedule)?;
            let beta = schedule.beta[t];
            let alpha = T::one() - beta;
            let ab = schedule.alpha_bar[t];
            let coef = beta / (T::one() - ab).sqrt();
            for (xv, e) in x.iter_mut().zip(&eps_hat) {
                *xv = (*xv - coef * *e) / alpha.sqrt();
            }
            if t > 0 {
                let ab_prev = schedule.alpha_bar[t - 1];
                let sigma = (beta * (T::one() - ab_prev) / (T::one() - ab)).sqrt();
                for xv in x.iter_mut() {
                    let z: T = T::from_f64_lossy(StandardNormal.sample(&mut rng));
                    *xv += sigma * z;
                }
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(DiffusionError::NonFiniteSample { t });
            }
        }
        records.push(x);
    }
    Ok(records)
}
