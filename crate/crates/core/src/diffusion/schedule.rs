//! Noise schedules.

use serde::{Deserialize, Serialize};

use crate::real::Real;

use super::{DiffusionError, Result};

/// Per-timestep noise schedule.
///
/// `alpha_bar[t]` is the cumulative signal coefficient of the closed-form
/// forward process `x_t = sqrt(alpha_bar[t]) x0 + sqrt(1 - alpha_bar[t]) eps`.
/// Invariants (enforced by [`build_schedule`]): `0 < beta[t] < 1`,
/// `alpha_bar` strictly decreasing, `alpha_bar[t]` in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule<T> {
    pub num_timesteps: usize,
    pub beta: Vec<T>,
    pub alpha_bar: Vec<T>,
}

impl<T: Real> NoiseSchedule<T> {
    #[inline]
    pub fn check_t(&self, t: usize) -> Result<()> {
        if t >= self.num_timesteps {
            return Err(DiffusionError::TimestepOutOfRange {
                t,
                t_total: self.num_timesteps,
            });
        }
        Ok(())
    }
}

/// Linear beta ramp from `beta_start` to `beta_end` over `t_total` steps,
/// with `alpha_bar[t]` the running product of `(1 - beta)`.
pub fn build_schedule<T: Real>(t_total: usize, beta_start: f64, beta_end: f64) -> Result<NoiseSchedule<T>> {
    if t_total < 1 {
        return Err(DiffusionError::InvalidSchedule("T must be >= 1".into()));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(DiffusionError::InvalidSchedule(format!(
            "need 0 < beta_start <= beta_end < 1, got {beta_start}..{beta_end}"
        )));
    }
    let mut beta = Vec::with_capacity(t_total);
    let mut alpha_bar = Vec::with_capacity(t_total);
    let mut product = 1.0f64;
    for t in 0..t_total {
        let b = if t_total == 1 {
            beta_start
        } else {
            beta_start + (beta_end - beta_start) * t as f64 / (t_total - 1) as f64
        };
        product *= 1.0 - b;
        beta.push(T::from_f64_lossy(b));
        alpha_bar.push(T::from_f64_lossy(product));
    }
    Ok(NoiseSchedule {
        num_timesteps: t_total,
        beta,
        alpha_bar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_schedule() {
        let s: NoiseSchedule<f64> = build_schedule(1, 0.5, 0.5).unwrap();
        assert_eq!(s.alpha_bar, vec![0.5]);
        assert_eq!(s.beta, vec![0.5]);
    }

    #[test]
    fn two_step_products_by_hand() {
        let s: NoiseSchedule<f64> = build_schedule(2, 0.1, 0.2).unwrap();
        assert!((s.alpha_bar[0] - 0.9).abs() < 1e-15);
        assert!((s.alpha_bar[1] - 0.72).abs() < 1e-15);
    }

    #[test]
    fn default_ddpm_schedule_is_strictly_decreasing() {
        let s: NoiseSchedule<f64> = build_schedule(1000, 1e-4, 0.02).unwrap();
        assert_eq!(s.alpha_bar.len(), 1000);
        for t in 1..1000 {
            assert!(s.alpha_bar[t] < s.alpha_bar[t - 1]);
            assert!(s.alpha_bar[t] > 0.0 && s.alpha_bar[t] < 1.0);
            assert!(s.beta[t] > 0.0 && s.beta[t] < 1.0);
        }
    }

    #[test]
    fn schedules_instantiate_in_f32() {
        let s: NoiseSchedule<f32> = build_schedule(100, 1e-3, 0.1).unwrap();
        assert_eq!(s.alpha_bar.len(), 100);
        assert!(s.alpha_bar.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn invalid_ranges_rejected() {
        assert!(build_schedule::<f64>(0, 0.1, 0.2).is_err());
        assert!(build_schedule::<f64>(10, 0.0, 0.2).is_err());
        assert!(build_schedule::<f64>(10, 0.3, 0.2).is_err());
        assert!(build_schedule::<f64>(10, 0.3, 1.0).is_err());
    }
}
