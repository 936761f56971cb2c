//! Feed-forward network with manual backpropagation.
//!
//! A network with layer sizes `[n0, n1, ..., nL]` applies, for each layer
//! `i`, `z_i = W_i a_i + b_i`; hidden layers follow with the configured
//! activation, the last layer with the output head. Weights are row-major
//! with shape `(n_{i+1}, n_i)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::real::Real;

use super::{DenseMatrix, NumericsError, Result};

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply<T: Real>(self, z: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    z
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative as a function of the pre-activation `z`.
    #[inline]
    fn grad<T: Real>(self, z: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                T::one() - t * t
            }
        }
    }
}

/// Final-layer head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputHead {
    Linear,
    Sigmoid,
}

/// Numerically stable logistic function, kept strictly inside (0, 1) even
/// where `exp` under- or overflows.
#[inline]
pub fn sigmoid<T: Real>(z: T) -> T {
    let y = if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    };
    let lo = T::min_positive_value();
    let hi = T::one() - T::epsilon() / (T::one() + T::one());
    y.max(lo).min(hi)
}

/// Parameters of a feed-forward network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams<T> {
    layer_sizes: Vec<usize>,
    weights: Vec<DenseMatrix<T>>,
    biases: Vec<Vec<T>>,
    activation: Activation,
    output_head: OutputHead,
}

/// Per-parameter gradients (or any other parameter-shaped buffer).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads<T> {
    pub weights: Vec<DenseMatrix<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Real> MlpGrads<T> {
    pub fn zeros_like(params: &MlpParams<T>) -> Self {
        Self {
            weights: params
                .weights
                .iter()
                .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: params.biases.iter().map(|b| vec![T::zero(); b.len()]).collect(),
        }
    }

    pub fn scale(&mut self, s: T) {
        for w in &mut self.weights {
            for v in w.as_mut_slice() {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= s;
            }
        }
    }

    /// `self += other`, layer by layer.
    pub fn add_assign(&mut self, other: &MlpGrads<T>) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += *y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }

    /// Name of the first parameter block containing a non-finite entry.
    pub fn first_non_finite_block(&self) -> Option<String> {
        for (i, w) in self.weights.iter().enumerate() {
            if !w.all_finite() {
                return Some(format!("layer {i} weights"));
            }
        }
        for (i, b) in self.biases.iter().enumerate() {
            if b.iter().any(|v| !v.is_finite()) {
                return Some(format!("layer {i} biases"));
            }
        }
        None
    }
}

/// Intermediate values of a forward pass, kept for backpropagation.
///
/// `acts[0]` is the input, `acts[i]` for `0 < i < L` the hidden activations,
/// `acts[L]` the post-head output. `preacts[i]` is `z_i = W_i a_i + b_i`.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    acts: Vec<Vec<T>>,
    preacts: Vec<Vec<T>>,
}

impl<T: Real> ForwardTrace<T> {
    #[inline]
    pub fn output(&self) -> &[T] {
        self.acts.last().expect("trace has an output")
    }

    #[inline]
    pub fn final_preactivation(&self) -> &[T] {
        self.preacts.last().expect("trace has a final layer")
    }
}

impl<T: Real> MlpParams<T> {
    /// Validates sizes and assembles a network from explicit parts.
    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<DenseMatrix<T>>,
        biases: Vec<Vec<T>>,
        activation: Activation,
        output_head: OutputHead,
    ) -> Result<Self> {
        validate_sizes(&layer_sizes)?;
        let n_layers = layer_sizes.len() - 1;
        if weights.len() != n_layers {
            return Err(NumericsError::InvalidLayout(format!(
                "expected {n_layers} weight layers, got {}",
                weights.len()
            )));
        }
        if biases.len() != n_layers {
            return Err(NumericsError::InvalidLayout(format!(
                "expected {n_layers} bias layers, got {}",
                biases.len()
            )));
        }
        for i in 0..n_layers {
            if weights[i].rows() != layer_sizes[i + 1] || weights[i].cols() != layer_sizes[i] {
                return Err(NumericsError::InvalidLayout(format!(
                    "weight layer {i} has shape ({}, {}), expected ({}, {})",
                    weights[i].rows(),
                    weights[i].cols(),
                    layer_sizes[i + 1],
                    layer_sizes[i]
                )));
            }
            if biases[i].len() != layer_sizes[i + 1] {
                return Err(NumericsError::DimensionMismatch {
                    location: format!("bias layer {i}"),
                    expected: layer_sizes[i + 1],
                    got: biases[i].len(),
                });
            }
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
            activation,
            output_head,
        })
    }

    /// All-zero parameters.
    pub fn zeros(layer_sizes: Vec<usize>, activation: Activation, output_head: OutputHead) -> Result<Self> {
        validate_sizes(&layer_sizes)?;
        let weights = (0..layer_sizes.len() - 1)
            .map(|i| DenseMatrix::zeros(layer_sizes[i + 1], layer_sizes[i]))
            .collect();
        let biases = (0..layer_sizes.len() - 1)
            .map(|i| vec![T::zero(); layer_sizes[i + 1]])
            .collect();
        Ok(Self {
            layer_sizes,
            weights,
            biases,
            activation,
            output_head,
        })
    }

    /// Glorot-style init: weights uniform in
    /// `[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]`, biases zero.
    ///
    /// Draws are taken from `rng` as `f64` in layer order, so the stream is
    /// identical for every scalar instantiation.
    pub fn init_glorot<R: Rng>(
        layer_sizes: Vec<usize>,
        activation: Activation,
        output_head: OutputHead,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, activation, output_head)?;
        for w in &mut net.weights {
            let limit = (6.0 / (w.cols() + w.rows()) as f64).sqrt();
            for v in w.as_mut_slice() {
                let u: f64 = rng.gen();
                *v = T::from_f64_lossy((2.0 * u - 1.0) * limit);
            }
        }
        Ok(net)
    }

    #[inline]
    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    #[inline]
    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("validated")
    }

    #[inline]
    pub fn activation(&self) -> Activation {
        self.activation
    }

    #[inline]
    pub fn output_head(&self) -> OutputHead {
        self.output_head
    }

    #[inline]
    pub fn weights(&self) -> &[DenseMatrix<T>] {
        &self.weights
    }

    #[inline]
    pub fn biases(&self) -> &[Vec<T>] {
        &self.biases
    }

    #[inline]
    pub(crate) fn weights_mut(&mut self, layer: usize) -> &mut DenseMatrix<T> {
        &mut self.weights[layer]
    }

    #[inline]
    pub(crate) fn biases_mut(&mut self, layer: usize) -> &mut [T] {
        &mut self.biases[layer]
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.as_slice().len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Reads a parameter by flat index (layer order, weights row-major then
    /// bias per layer; the checkpoint order).
    pub fn get_param(&self, mut idx: usize) -> T {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            if idx < w.as_slice().len() {
                return w.as_slice()[idx];
            }
            idx -= w.as_slice().len();
            if idx < b.len() {
                return b[idx];
            }
            idx -= b.len();
        }
        panic!("parameter index out of range");
    }

    /// Writes a parameter by flat index. See [`MlpParams::get_param`].
    pub fn set_param(&mut self, mut idx: usize, v: T) {
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            if idx < w.as_slice().len() {
                w.as_mut_slice()[idx] = v;
                return;
            }
            idx -= w.as_slice().len();
            if idx < b.len() {
                b[idx] = v;
                return;
            }
            idx -= b.len();
        }
        panic!("parameter index out of range");
    }

    fn check_input(&self, input: &[T]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(NumericsError::DimensionMismatch {
                location: "mlp_forward input (layer 0)".into(),
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Forward pass. Deterministic for fixed parameters and input.
    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        self.check_input(input)?;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        let last = self.weights.len() - 1;
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            next.clear();
            next.resize(w.rows(), T::zero());
            w.matvec(&cur, &mut next);
            for (z, bv) in next.iter_mut().zip(b) {
                *z += *bv;
            }
            if i < last {
                for z in &mut next {
                    *z = self.activation.apply(*z);
                }
            } else {
                match self.output_head {
                    OutputHead::Linear => {}
                    OutputHead::Sigmoid => {
                        for z in &mut next {
                            *z = sigmoid(*z);
                        }
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass retaining intermediates for backpropagation.
    pub fn forward_trace(&self, input: &[T]) -> Result<ForwardTrace<T>> {
        self.check_input(input)?;
        let last = self.weights.len() - 1;
        let mut acts = Vec::with_capacity(self.weights.len() + 1);
        let mut preacts = Vec::with_capacity(self.weights.len());
        acts.push(input.to_vec());
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = vec![T::zero(); w.rows()];
            w.matvec(acts.last().expect("nonempty"), &mut z);
            for (zv, bv) in z.iter_mut().zip(b) {
                *zv += *bv;
            }
            let a = if i < last {
                z.iter().map(|&zv| self.activation.apply(zv)).collect()
            } else {
                match self.output_head {
                    OutputHead::Linear => z.clone(),
                    OutputHead::Sigmoid => z.iter().map(|&zv| sigmoid(zv)).collect(),
                }
            };
            preacts.push(z);
            acts.push(a);
        }
        Ok(ForwardTrace { acts, preacts })
    }

    /// Backpropagation from an upstream gradient w.r.t. the post-head output.
    ///
    /// Returns parameter gradients (same shapes as the parameters) and the
    /// gradient w.r.t. the input.
    pub fn backward(&self, input: &[T], upstream: &[T]) -> Result<(MlpGrads<T>, Vec<T>)> {
        let trace = self.forward_trace(input)?;
        self.backward_with_trace(&trace, upstream)
    }

    /// Like [`MlpParams::backward`], reusing an existing forward trace.
    pub fn backward_with_trace(
        &self,
        trace: &ForwardTrace<T>,
        upstream: &[T],
    ) -> Result<(MlpGrads<T>, Vec<T>)> {
        if upstream.len() != self.output_dim() {
            return Err(NumericsError::DimensionMismatch {
                location: format!("mlp_backward upstream (layer {})", self.weights.len() - 1),
                expected: self.output_dim(),
                got: upstream.len(),
            });
        }
        // Pull the upstream gradient through the head to get dL/dz_last.
        let d_z_last: Vec<T> = match self.output_head {
            OutputHead::Linear => upstream.to_vec(),
            OutputHead::Sigmoid => {
                let y = trace.output();
                upstream
                    .iter()
                    .zip(y)
                    .map(|(&u, &yv)| u * yv * (T::one() - yv))
                    .collect()
            }
        };
        Ok(self.backprop_from_final_preactivation(trace, d_z_last))
    }

    /// Backpropagation from an upstream gradient w.r.t. the final
    /// pre-activation. Lets callers fuse the head with the loss (for a
    /// sigmoid head with logistic loss, `dL/dz = y_hat - y`), which stays
    /// finite even when the head saturates.
    pub fn backward_from_logits(
        &self,
        trace: &ForwardTrace<T>,
        d_final_preact: &[T],
    ) -> Result<(MlpGrads<T>, Vec<T>)> {
        if d_final_preact.len() != self.output_dim() {
            return Err(NumericsError::DimensionMismatch {
                location: format!(
                    "mlp_backward_from_logits upstream (layer {})",
                    self.weights.len() - 1
                ),
                expected: self.output_dim(),
                got: d_final_preact.len(),
            });
        }
        Ok(self.backprop_from_final_preactivation(trace, d_final_preact.to_vec()))
    }

    fn backprop_from_final_preactivation(
        &self,
        trace: &ForwardTrace<T>,
        mut d_z: Vec<T>,
    ) -> (MlpGrads<T>, Vec<T>) {
        let mut grads = MlpGrads::zeros_like(self);
        for i in (0..self.weights.len()).rev() {
            let a_in = &trace.acts[i];
            grads.weights[i].add_outer(&d_z, a_in);
            grads.biases[i].copy_from_slice(&d_z);
            let mut d_a = vec![T::zero(); self.layer_sizes[i]];
            self.weights[i].matvec_t_add(&d_z, &mut d_a);
            if i > 0 {
                let z_prev = &trace.preacts[i - 1];
                d_z = d_a
                    .iter()
                    .zip(z_prev)
                    .map(|(&da, &z)| da * self.activation.grad(z))
                    .collect();
            } else {
                return (grads, d_a);
            }
        }
        unreachable!("networks have at least one layer");
    }
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(NumericsError::InvalidLayout(format!(
            "need at least input and output sizes, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(NumericsError::InvalidLayout(format!(
            "layer sizes must be positive, got {layer_sizes:?}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_net(seed: u64, head: OutputHead) -> MlpParams<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MlpParams::init_glorot(vec![3, 5, 2], Activation::Tanh, head, &mut rng).unwrap()
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = MlpParams::<f64>::zeros(vec![4, 3, 2], Activation::Relu, OutputHead::Linear).unwrap();
        let out = net.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_is_identity() {
        let net = MlpParams::from_parts(
            vec![3, 3],
            vec![DenseMatrix::identity(3)],
            vec![vec![0.0; 3]],
            Activation::Relu,
            OutputHead::Linear,
        )
        .unwrap();
        let v = [0.25, -1.5, 3.0];
        assert_eq!(net.forward(&v).unwrap(), v.to_vec());
    }

    #[test]
    fn two_layer_relu_hand_computed() {
        // [2,1,1]: hidden z = 1*(-3) + 1*1 = -2, relu -> 0; out = 2*0 + 0.5 = 0.5.
        let net = MlpParams::from_parts(
            vec![2, 1, 1],
            vec![
                DenseMatrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap(),
                DenseMatrix::from_vec(1, 1, vec![2.0]).unwrap(),
            ],
            vec![vec![0.0], vec![0.5]],
            Activation::Relu,
            OutputHead::Linear,
        )
        .unwrap();
        assert_eq!(net.forward(&[-3.0, 1.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let net = small_net(1, OutputHead::Linear);
        let err = net.forward(&[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, NumericsError::DimensionMismatch { .. }));
        assert!(err.to_string().contains("layer 0"));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let net = small_net(2, OutputHead::Linear);
        let (grads, d_in) = net.backward(&[0.3, -0.2, 0.9], &[0.0, 0.0]).unwrap();
        assert!(grads.weights.iter().all(|w| w.as_slice().iter().all(|&v| v == 0.0)));
        assert!(d_in.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_scalar_net_product_rule() {
        // y = w * x with w = 1.5, x = 2.0, upstream 1: dL/dw = x, dL/dx = w.
        let net = MlpParams::from_parts(
            vec![1, 1],
            vec![DenseMatrix::from_vec(1, 1, vec![1.5]).unwrap()],
            vec![vec![0.0]],
            Activation::Relu,
            OutputHead::Linear,
        )
        .unwrap();
        let (grads, d_in) = net.backward(&[2.0], &[1.0]).unwrap();
        assert_eq!(grads.weights[0].as_slice(), &[2.0]);
        assert_eq!(grads.biases[0], vec![1.0]);
        assert_eq!(d_in, vec![1.5]);
    }

    /// Central finite differences of a scalar loss, the independent gradient
    /// oracle for backpropagation.
    fn finite_difference_check(net: &MlpParams<f64>, input: &[f64], tol: f64) {
        // Loss: 0.5 * ||y - target||^2 with a fixed arbitrary target, so the
        // upstream gradient is y - target.
        let target: Vec<f64> = (0..net.output_dim()).map(|i| 0.1 * i as f64 - 0.2).collect();
        let loss = |p: &MlpParams<f64>| -> f64 {
            let y = p.forward(input).unwrap();
            y.iter().zip(&target).map(|(&a, &b)| 0.5 * (a - b) * (a - b)).sum()
        };
        let y = net.forward(input).unwrap();
        let upstream: Vec<f64> = y.iter().zip(&target).map(|(&a, &b)| a - b).collect();
        let (grads, d_in) = net.backward(input, &upstream).unwrap();

        let h = 1e-5;
        for idx in 0..net.num_params() {
            let mut plus = net.clone();
            plus.set_param(idx, plus.get_param(idx) + h);
            let mut minus = net.clone();
            minus.set_param(idx, minus.get_param(idx) - h);
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let analytic = flat_grad(&grads, idx);
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(
                (analytic - numeric).abs() / denom < tol,
                "param {idx}: analytic {analytic} vs numeric {numeric}"
            );
        }
        for (i, &analytic) in d_in.iter().enumerate() {
            let mut xp = input.to_vec();
            xp[i] += h;
            let mut xm = input.to_vec();
            xm[i] -= h;
            let numeric = (loss_at(net, &xp, &target) - loss_at(net, &xm, &target)) / (2.0 * h);
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(
                (analytic - numeric).abs() / denom < tol,
                "input {i}: analytic {analytic} vs numeric {numeric}"
            );
        }
    }

    fn loss_at(net: &MlpParams<f64>, input: &[f64], target: &[f64]) -> f64 {
        let y = net.forward(input).unwrap();
        y.iter().zip(target).map(|(&a, &b)| 0.5 * (a - b) * (a - b)).sum()
    }

    fn flat_grad(g: &MlpGrads<f64>, mut idx: usize) -> f64 {
        for (w, b) in g.weights.iter().zip(&g.biases) {
            if idx < w.as_slice().len() {
                return w.as_slice()[idx];
            }
            idx -= w.as_slice().len();
            if idx < b.len() {
                return b[idx];
            }
            idx -= b.len();
        }
        panic!("index out of range");
    }

    #[test]
    fn gradients_match_finite_differences_tanh_linear() {
        let net = small_net(7, OutputHead::Linear);
        finite_difference_check(&net, &[0.4, -0.8, 0.15], 1e-4);
    }

    #[test]
    fn gradients_match_finite_differences_relu() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net =
            MlpParams::init_glorot(vec![4, 6, 3], Activation::Relu, OutputHead::Linear, &mut rng)
                .unwrap();
        finite_difference_check(&net, &[0.9, -0.3, 0.27, -1.1], 1e-4);
    }

    #[test]
    fn gradients_match_finite_differences_sigmoid_head() {
        let net = small_net(13, OutputHead::Sigmoid);
        finite_difference_check(&net, &[-0.6, 0.2, 1.3], 1e-4);
    }

    #[test]
    fn sigmoid_head_stays_in_open_unit_interval() {
        let net = MlpParams::from_parts(
            vec![1, 1],
            vec![DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap()],
            vec![vec![0.0]],
            Activation::Relu,
            OutputHead::Sigmoid,
        )
        .unwrap();
        for &x in &[-1e6, -50.0, 0.0, 50.0, 1e6] {
            let y = net.forward(&[x]).unwrap()[0];
            assert!(y > 0.0 && y < 1.0, "sigmoid({x}) = {y}");
        }
    }

    #[test]
    fn final_linear_layer_is_positively_homogeneous() {
        // With zero biases and a linear head, scaling the last weight layer
        // scales the output.
        let mut net = small_net(23, OutputHead::Linear);
        for b in net.biases.iter_mut() {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
        let input = [0.2, 0.5, -0.7];
        let base = net.forward(&input).unwrap();
        let mut scaled = net.clone();
        let last = scaled.weights.len() - 1;
        for v in scaled.weights[last].as_mut_slice() {
            *v *= 3.0;
        }
        let out = scaled.forward(&input).unwrap();
        for (a, b) in out.iter().zip(&base) {
            assert!((a - 3.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn generic_scalar_instantiates_in_f32() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let net: MlpParams<f32> =
            MlpParams::init_glorot(vec![3, 4, 2], Activation::Tanh, OutputHead::Sigmoid, &mut rng)
                .unwrap();
        let input = [0.1f32, -0.2, 0.3];
        let y = net.forward(&input).unwrap();
        assert!(y.iter().all(|v| v.is_finite() && *v > 0.0 && *v < 1.0));
        let (grads, d_in) = net.backward(&input, &[1.0, -1.0]).unwrap();
        assert!(grads.first_non_finite_block().is_none());
        assert_eq!(d_in.len(), 3);
    }

    #[test]
    fn glorot_init_is_deterministic() {
        let a = small_net(99, OutputHead::Linear);
        let b = small_net(99, OutputHead::Linear);
        assert_eq!(a, b);
    }
}
