//! Layered and cascaded feedforward networks with forward/backward passes and
//! per-tensor freezing.

mod cascade;
mod checkpoint;
mod layered;
mod spec;

pub use cascade::{CascadeBlock, CascadeCache, CascadeNetwork, OutputInit};
pub use checkpoint::{load_network, save_network, AnyNetwork, FORMAT_TAG};
pub use layered::{build_layered, forward_hidden, Layer, LayeredCache, LayeredNetwork};
pub use spec::ArchitectureSpec;

use crate::numerics::{Matrix, Rng};

/// Gradient of one parameter tensor pair (weight matrix + bias vector).
#[derive(Debug, Clone)]
pub struct TensorGrad {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Gradients for every parameter tensor of a network, in tensor order.
/// Frozen tensors carry zero gradients.
#[derive(Debug, Clone)]
pub struct GradientSet {
    pub tensors: Vec<TensorGrad>,
}

impl GradientSet {
    /// Scales every gradient entry by `alpha`.
    pub fn scale(&mut self, alpha: f64) {
        for t in &mut self.tensors {
            t.weight.scale(alpha);
            for b in &mut t.bias {
                *b *= alpha;
            }
        }
    }
}

/// Mutable view of one parameter tensor.
pub struct ParamTensorMut<'a> {
    pub weight: &'a mut Matrix,
    pub bias: &'a mut Vec<f64>,
    pub frozen: bool,
}

/// Shared view of one parameter tensor.
pub struct ParamTensor<'a> {
    pub weight: &'a Matrix,
    pub bias: &'a [f64],
    pub frozen: bool,
}

/// Common surface of layered and cascade networks, enough for the training
/// loop and the optimizers to stay topology-agnostic.
pub trait Network: Clone {
    type Cache;

    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    /// Batch forward pass. Each output row is a softmax probability vector.
    fn forward(&self, batch: &Matrix) -> (Matrix, Self::Cache);

    /// Gradients of the loss w.r.t. every parameter tensor, given the loss
    /// gradient w.r.t. the output probabilities. Frozen tensors get zeros but
    /// still propagate gradient to their inputs.
    fn backward(&self, cache: &Self::Cache, d_probs: &Matrix) -> GradientSet;

    fn tensors(&self) -> Vec<ParamTensor<'_>>;
    fn tensors_mut(&mut self) -> Vec<ParamTensorMut<'_>>;

    fn param_count(&self) -> usize {
        self.tensors()
            .iter()
            .map(|t| t.weight.len() + t.bias.len())
            .sum()
    }

    /// Glorot-uniform weights, zero biases; deterministic given the seed.
    fn init_weights(&mut self, rng: &mut Rng) {
        for t in self.tensors_mut() {
            init_tensor(t.weight, t.bias, rng);
        }
    }
}

/// Glorot-uniform limit for a weight tensor.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

pub(crate) fn init_tensor(weight: &mut Matrix, bias: &mut [f64], rng: &mut Rng) {
    let a = glorot_limit(weight.rows(), weight.cols());
    for w in weight.as_mut_slice() {
        *w = rng.uniform(-a, a);
    }
    for b in bias {
        *b = 0.0;
    }
}

/// Backprop through the output softmax: given `d_probs` (dL/dP), returns
/// dL/dZ where Z are the output pre-activations.
pub(crate) fn softmax_backward(probs: &Matrix, d_probs: &Matrix) -> Matrix {
    assert_eq!(probs.rows(), d_probs.rows());
    assert_eq!(probs.cols(), d_probs.cols());
    let mut dz = Matrix::zeros(probs.rows(), probs.cols());
    for r in 0..probs.rows() {
        let p = probs.row(r);
        let dp = d_probs.row(r);
        let dot: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
        for (c, out) in dz.row_mut(r).iter_mut().enumerate() {
            *out = p[c] * (dp[c] - dot);
        }
    }
    dz
}
