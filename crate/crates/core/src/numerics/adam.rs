//! Adam optimizer with bias-corrected moment estimates.

use crate::real::Real;

use super::{MlpGrads, MlpParams, NumericsError, Result};

/// Optimizer state. Moments share the parameter shapes and start at zero.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    step: u64,
    first_moment: MlpGrads<T>,
    second_moment: MlpGrads<T>,
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps_hat: T,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &MlpParams<T>, lr: T, beta1: T, beta2: T, eps_hat: T) -> Result<Self> {
        if lr.is_nan() || lr <= T::zero() {
            return Err(NumericsError::InvalidHyperParameter(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        Ok(Self {
            step: 0,
            first_moment: MlpGrads::zeros_like(params),
            second_moment: MlpGrads::zeros_like(params),
            lr,
            beta1,
            beta2,
            eps_hat,
        })
    }

    /// Adam with (lr 1e-3, beta1 0.9, beta2 0.999, eps 1e-8).
    pub fn with_defaults(params: &MlpParams<T>) -> Self {
        Self::with_lr(params, T::from_f64_lossy(1e-3)).expect("default lr is positive")
    }

    pub fn with_lr(params: &MlpParams<T>, lr: T) -> Result<Self> {
        Self::new(
            params,
            lr,
            T::from_f64_lossy(0.9),
            T::from_f64_lossy(0.999),
            T::from_f64_lossy(1e-8),
        )
    }

    #[inline]
    pub fn step_count(&self) -> u64 {
        self.step
    }

    #[cfg(test)]
    pub(crate) fn moments(&self) -> (&MlpGrads<T>, &MlpGrads<T>) {
        (&self.first_moment, &self.second_moment)
    }
}

/// One bias-corrected Adam update, in place:
///
/// `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`,
/// `p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)`.
pub fn adam_step<T: Real>(
    params: &mut MlpParams<T>,
    grads: &MlpGrads<T>,
    state: &mut AdamState<T>,
) -> Result<()> {
    if let Some(block) = grads.first_non_finite_block() {
        return Err(NumericsError::NonFiniteGradient { block });
    }
    state.step += 1;
    let t = state.step as i32;
    let bias1 = T::one() - state.beta1.powi(t);
    let bias2 = T::one() - state.beta2.powi(t);
    let (lr, beta1, beta2, eps_hat) = (state.lr, state.beta1, state.beta2, state.eps_hat);

    for (layer, g) in grads.weights.iter().enumerate() {
        update_slice(
            params.weights_mut(layer).as_mut_slice(),
            g.as_slice(),
            state.first_moment.weights[layer].as_mut_slice(),
            state.second_moment.weights[layer].as_mut_slice(),
            beta1,
            beta2,
            bias1,
            bias2,
            lr,
            eps_hat,
        );
    }
    for (layer, g) in grads.biases.iter().enumerate() {
        update_slice(
            params.biases_mut(layer),
            g,
            &mut state.first_moment.biases[layer],
            &mut state.second_moment.biases[layer],
            beta1,
            beta2,
            bias1,
            bias2,
            lr,
            eps_hat,
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn update_slice<T: Real>(
    p: &mut [T],
    g: &[T],
    m: &mut [T],
    v: &mut [T],
    beta1: T,
    beta2: T,
    bias1: T,
    bias2: T,
    lr: T,
    eps_hat: T,
) {
    let one = T::one();
    for i in 0..p.len() {
        m[i] = beta1 * m[i] + (one - beta1) * g[i];
        v[i] = beta2 * v[i] + (one - beta2) * g[i] * g[i];
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + eps_hat);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Activation, DenseMatrix, OutputHead};

    fn scalar_net(w: f64) -> MlpParams<f64> {
        MlpParams::from_parts(
            vec![1, 1],
            vec![DenseMatrix::from_vec(1, 1, vec![w]).unwrap()],
            vec![vec![0.0]],
            Activation::Relu,
            OutputHead::Linear,
        )
        .unwrap()
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut net = scalar_net(0.7);
        let before = net.clone();
        let mut state = AdamState::with_defaults(&net);
        let grads = MlpGrads::zeros_like(&net);
        adam_step(&mut net, &grads, &mut state).unwrap();
        assert_eq!(net, before);
        assert_eq!(state.step_count(), 1);
        let (m, v) = state.moments();
        assert!(m.weights[0].as_slice().iter().all(|&x| x == 0.0));
        assert!(v.weights[0].as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn first_step_matches_hand_computation() {
        // g = 0.25, t = 1: m_hat = g, v_hat = g^2, so the update is
        // lr * g / (|g| + eps).
        let g = 0.25;
        let lr = 1e-3;
        let mut net = scalar_net(2.0);
        let mut state = AdamState::with_defaults(&net);
        let mut grads = MlpGrads::zeros_like(&net);
        grads.weights[0].as_mut_slice()[0] = g;
        adam_step(&mut net, &grads, &mut state).unwrap();
        let expected = 2.0 - lr * g / (g.abs() + 1e-8);
        assert!((net.get_param(0) - expected).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_names_the_block() {
        let mut net = scalar_net(1.0);
        let mut state = AdamState::with_defaults(&net);
        let mut grads = MlpGrads::zeros_like(&net);
        grads.biases[0][0] = f64::NAN;
        let err = adam_step(&mut net, &grads, &mut state).unwrap_err();
        assert!(err.to_string().contains("layer 0 biases"), "{err}");
    }

    #[test]
    fn rejects_non_positive_lr() {
        let net = scalar_net(1.0);
        assert!(AdamState::new(&net, 0.0, 0.9, 0.999, 1e-8).is_err());
    }

    #[test]
    fn training_loss_non_increasing_on_separable_toy_problem() {
        // 100 full-batch Adam steps at lr 1e-3 on a linearly separable task;
        // losses smoothed over 10-step windows must be monotone within 1e-8.
        use crate::numerics::sigmoid;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let data: Vec<(Vec<f64>, f64)> = (0..16)
            .map(|_| {
                let x = rng.gen::<f64>() * 4.0 - 2.0;
                let y = rng.gen::<f64>() * 2.0 - 1.0;
                (vec![x, y], if x > 0.0 { 1.0 } else { 0.0 })
            })
            .collect();
        let mut net = MlpParams::init_glorot(
            vec![2, 4, 1],
            Activation::Tanh,
            OutputHead::Sigmoid,
            &mut rng,
        )
        .unwrap();
        let mut state = AdamState::with_defaults(&net);
        let n = data.len() as f64;

        let mut losses = Vec::with_capacity(100);
        for _ in 0..100 {
            let mut grads = MlpGrads::zeros_like(&net);
            let mut loss = 0.0;
            for (x, target) in &data {
                let trace = net.forward_trace(x).unwrap();
                let z = trace.final_preactivation()[0];
                // Stable logistic loss from the logit.
                loss += z.max(0.0) - z * target + (-z.abs()).exp().ln_1p();
                let d_z = [(sigmoid(z) - target) / n];
                let (g, _) = net.backward_from_logits(&trace, &d_z).unwrap();
                grads.add_assign(&g);
            }
            losses.push(loss / n);
            adam_step(&mut net, &grads, &mut state).unwrap();
        }

        let windows: Vec<f64> = losses
            .chunks(10)
            .map(|w| w.iter().sum::<f64>() / w.len() as f64)
            .collect();
        for pair in windows.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-8,
                "smoothed loss increased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn identical_runs_are_bitwise_identical() {
        let run = || {
            let mut net = scalar_net(1.0);
            let mut state = AdamState::with_defaults(&net);
            let mut grads = MlpGrads::zeros_like(&net);
            for k in 0..50 {
                grads.weights[0].as_mut_slice()[0] = (k as f64 * 0.37).sin();
                grads.biases[0][0] = (k as f64 * 0.11).cos();
                adam_step(&mut net, &grads, &mut state).unwrap();
            }
            (net.get_param(0).to_bits(), net.get_param(1).to_bits())
        };
        assert_eq!(run(), run());
    }
}
