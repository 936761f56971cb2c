//! Denoiser training on the diffusion loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::numerics::{adam_step, Activation, AdamState, MlpGrads, MlpParams, OutputHead};
use crate::real::Real;

use super::denoiser::{forward_diffuse, time_embedding, DenoiserConfig, DenoiserParams};
use super::schedule::NoiseSchedule;
use super::{DiffusionError, Result};

/// Optimization settings for one denoiser run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

/// Trains a noise-prediction MLP, deterministically for a fixed seed.
///
/// Per step, for each of `batch_size` examples, the RNG is consumed in this
/// order: data index, timestep (uniform in `[0, T)`), then `d` standard
/// normal noise draws. One Adam step is taken on the batch-mean loss.
pub fn train_denoiser<T: Real>(
    data: &[Vec<T>],
    schedule: &NoiseSchedule<T>,
    arch: &DenoiserConfig,
    cfg: &TrainConfig,
) -> Result<DenoiserParams<T>> {
    if data.is_empty() {
        return Err(DiffusionError::EmptyData);
    }
    let d = data[0].len();
    if d == 0 || data.iter().any(|r| r.len() != d) {
        return Err(DiffusionError::InvalidConfig(
            "training rows must share a positive dimension".into(),
        ));
    }
    if cfg.batch_size == 0 {
        return Err(DiffusionError::InvalidConfig("batch_size must be >= 1".into()));
    }

    let mut sizes = Vec::with_capacity(arch.hidden_sizes.len() + 2);
    sizes.push(d + arch.embed_dim);
    sizes.extend_from_slice(&arch.hidden_sizes);
    sizes.push(d);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mlp = MlpParams::init_glorot(sizes, Activation::Relu, OutputHead::Linear, &mut rng)?;
    let mut opt = AdamState::with_lr(&mlp, T::from_f64_lossy(cfg.lr))
        .map_err(DiffusionError::Numerics)?;

    let t_total = schedule.num_timesteps;
    let inv_batch = T::from_f64_lossy(1.0 / cfg.batch_size as f64);

    for step in 0..cfg.steps {
        let mut grads = MlpGrads::zeros_like(&mlp);
        let mut batch_loss = T::zero();
        for _ in 0..cfg.batch_size {
            let idx = rng.gen_range(0..data.len());
            let t = rng.gen_range(0..t_total);
            let eps: Vec<T> = (0..d)
                .map(|_| T::from_f64_lossy(StandardNormal.sample(&mut rng)))
                .collect();

            let x_t = forward_diffuse(&data[idx], &eps, t, schedule)?;
            let mut input = x_t;
            input.extend(time_embedding::<T>(t, t_total, arch.embed_dim));
            let trace = mlp.forward_trace(&input)?;
            let predicted = trace.output();

            let mut upstream = Vec::with_capacity(d);
            let two = T::one() + T::one();
            for (p, e) in predicted.iter().zip(&eps) {
                let diff = *p - *e;
                batch_loss += diff * diff;
                upstream.push(two * diff * inv_batch);
            }
            let (g, _) = mlp.backward_with_trace(&trace, &upstream)?;
            grads.add_assign(&g);
        }
        batch_loss *= inv_batch;
        if !batch_loss.is_finite() {
            return Err(DiffusionError::Divergence { step });
        }
        adam_step(&mut mlp, &grads, &mut opt)?;
    }

    DenoiserParams::new(mlp, d, arch.embed_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{build_schedule, diffusion_loss};

    fn tiny_arch() -> DenoiserConfig {
        DenoiserConfig {
            hidden_sizes: vec![32, 32],
            embed_dim: 4,
        }
    }

    /// Mean loss of `point` under `den` over a deterministic set of noises.
    fn mean_loss(
        den: &DenoiserParams<f64>,
        point: &[f64],
        t: usize,
        schedule: &NoiseSchedule<f64>,
        noise_seed: u64,
        n_noises: usize,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let d = point.len();
        let mut total = 0.0;
        for _ in 0..n_noises {
            let eps: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            total += diffusion_loss(den, point, &eps, t, schedule).unwrap();
        }
        total / n_noises as f64
    }

    #[test]
    fn zero_steps_returns_initialization() {
        let s: NoiseSchedule<f64> = build_schedule(8, 1e-3, 0.1).unwrap();
        let data = vec![vec![0.5, -0.5]];
        let cfg = TrainConfig {
            steps: 0,
            batch_size: 4,
            lr: 1e-3,
            seed: 11,
        };
        let trained = train_denoiser(&data, &s, &tiny_arch(), &cfg).unwrap();

        // Same seed, zero steps: the parameters are exactly the Glorot draw.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let init = MlpParams::init_glorot(
            vec![2 + 4, 32, 32, 2],
            Activation::Relu,
            OutputHead::Linear,
            &mut rng,
        )
        .unwrap();
        assert_eq!(trained.mlp, init);
    }

    #[test]
    fn fixed_seed_reproduces_identical_checkpoints() {
        let s: NoiseSchedule<f64> = build_schedule(8, 1e-3, 0.1).unwrap();
        let data = vec![vec![0.5, -0.5], vec![1.0, 0.25]];
        let cfg = TrainConfig {
            steps: 50,
            batch_size: 4,
            lr: 1e-3,
            seed: 7,
        };
        let a = train_denoiser(&data, &s, &tiny_arch(), &cfg).unwrap();
        let b = train_denoiser(&data, &s, &tiny_arch(), &cfg).unwrap();
        assert_eq!(a.mlp, b.mlp);
    }

    #[test]
    fn memorizes_a_single_point() {
        // Small T, one data point: the t=0 loss collapses well below its
        // starting value.
        let s: NoiseSchedule<f64> = build_schedule(8, 0.1, 0.4).unwrap();
        let point = vec![0.8, -0.3];
        let data = vec![point.clone()];
        let arch = tiny_arch();
        let init = train_denoiser(
            &data,
            &s,
            &arch,
            &TrainConfig { steps: 0, batch_size: 4, lr: 1e-3, seed: 5 },
        )
        .unwrap();
        let trained = train_denoiser(
            &data,
            &s,
            &arch,
            &TrainConfig { steps: 6000, batch_size: 4, lr: 1e-3, seed: 5 },
        )
        .unwrap();
        let before = mean_loss(&init, &point, 0, &s, 99, 32);
        let after = mean_loss(&trained, &point, 0, &s, 99, 32);
        assert!(
            after * 10.0 <= before,
            "loss only moved from {before} to {after}"
        );
    }

    #[test]
    fn members_score_lower_than_holdouts_after_overfitting() {
        // The memorization gap the attacks exploit: train on 4 points, then
        // compare mean losses against 4 fresh points from the same population.
        let s: NoiseSchedule<f64> = build_schedule(64, 1e-3, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..3).map(|_| StandardNormal.sample(rng)).collect()
        };
        let members: Vec<Vec<f64>> = (0..4).map(|_| draw(&mut rng)).collect();
        let holdout: Vec<Vec<f64>> = (0..4).map(|_| draw(&mut rng)).collect();
        let den = train_denoiser(
            &members,
            &s,
            &DenoiserConfig { hidden_sizes: vec![64, 64], embed_dim: 8 },
            &TrainConfig { steps: 5000, batch_size: 4, lr: 1e-3, seed: 33 },
        )
        .unwrap();
        for t in [5usize, 10, 20, 50] {
            let member_mean: f64 = members
                .iter()
                .map(|p| mean_loss(&den, p, t, &s, 1234, 16))
                .sum::<f64>()
                / 4.0;
            let holdout_mean: f64 = holdout
                .iter()
                .map(|p| mean_loss(&den, p, t, &s, 1234, 16))
                .sum::<f64>()
                / 4.0;
            assert!(
                member_mean < holdout_mean,
                "no memorization gap at t={t}: member {member_mean} vs holdout {holdout_mean}"
            );
        }
    }

    #[test]
    fn empty_data_rejected() {
        let s: NoiseSchedule<f64> = build_schedule(8, 1e-3, 0.1).unwrap();
        let cfg = TrainConfig { steps: 1, batch_size: 1, lr: 1e-3, seed: 0 };
        assert!(matches!(
            train_denoiser(&[], &s, &tiny_arch(), &cfg),
            Err(DiffusionError::EmptyData)
        ));
    }
}
