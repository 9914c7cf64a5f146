//! Layered (dense, feedforward) network.
//!
//! Weights are stored `in_dim x out_dim` so a batch forward is `X * W + b`
//! with `X` of shape `B x in_dim`. Hidden layers carry a relu/tanh activation;
//! the final layer is always softmax.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Activation, Matrix};

use super::{softmax_backward, GradientSet, Network, ParamTensor, ParamTensorMut, TensorGrad};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layer {
    /// `in_dim x out_dim`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
    /// `None` marks the softmax output layer.
    pub activation: Option<Activation>,
    pub frozen: bool,
}

impl Layer {
    pub fn new(in_dim: usize, out_dim: usize, activation: Option<Activation>) -> Layer {
        Layer {
            weight: Matrix::zeros(in_dim, out_dim),
            bias: vec![0.0; out_dim],
            activation,
            frozen: false,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.cols()
    }

    /// `act(X W + b)` for a batch.
    pub fn forward_batch(&self, batch: &Matrix) -> (Matrix, Matrix) {
        assert_eq!(batch.cols(), self.in_dim(), "batch width mismatch");
        let mut z = batch.matmul(&self.weight);
        z.add_row_vector(&self.bias);
        let mut a = z.clone();
        match self.activation {
            Some(act) => {
                for x in a.as_mut_slice() {
                    *x = act.apply_scalar(*x);
                }
            }
            None => {
                for r in 0..a.rows() {
                    crate::numerics::softmax_in_place(a.row_mut(r));
                }
            }
        }
        (z, a)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayeredNetwork {
    pub layers: Vec<Layer>,
}

/// Forward cache for [`LayeredNetwork::forward`].
pub struct LayeredCache {
    /// Input to each layer (first entry is the batch itself).
    layer_inputs: Vec<Matrix>,
    /// Pre-activation of each layer.
    preacts: Vec<Matrix>,
    probs: Matrix,
}

/// Builds a layered network: `input_dim -> hidden... -> output_dim` softmax.
/// Weights are zero until `init_weights`.
pub fn build_layered(
    input_dim: usize,
    hidden: &[(usize, Activation)],
    output_dim: usize,
) -> Result<LayeredNetwork> {
    if input_dim == 0 || output_dim == 0 {
        return Err(Error::contract("build_layered: zero input or output dim"));
    }
    if hidden.iter().any(|&(w, _)| w == 0) {
        return Err(Error::contract("build_layered: zero hidden width"));
    }
    let mut layers = Vec::with_capacity(hidden.len() + 1);
    let mut prev = input_dim;
    for &(width, act) in hidden {
        layers.push(Layer::new(prev, width, Some(act)));
        prev = width;
    }
    layers.push(Layer::new(prev, output_dim, None));
    Ok(LayeredNetwork { layers })
}

/// Runs a batch through a stack of hidden layers (no softmax head).
pub fn forward_hidden(layers: &[Layer], batch: &Matrix) -> Matrix {
    let mut x = batch.clone();
    for layer in layers {
        debug_assert!(layer.activation.is_some(), "forward_hidden on output layer");
        let (_, a) = layer.forward_batch(&x);
        x = a;
    }
    x
}

impl LayeredNetwork {
    pub fn hidden_layer_count(&self) -> usize {
        self.layers.len() - 1
    }
}

impl Network for LayeredNetwork {
    type Cache = LayeredCache;

    fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    fn forward(&self, batch: &Matrix) -> (Matrix, Self::Cache) {
        assert_eq!(batch.cols(), self.input_dim(), "batch width mismatch");
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut preacts = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let (z, a) = layer.forward_batch(&x);
            layer_inputs.push(x);
            preacts.push(z);
            x = a;
        }
        let probs = x;
        (
            probs.clone(),
            LayeredCache {
                layer_inputs,
                preacts,
                probs,
            },
        )
    }

    fn backward(&self, cache: &Self::Cache, d_probs: &Matrix) -> GradientSet {
        assert_eq!(
            cache.layer_inputs.len(),
            self.layers.len(),
            "stale cache: layer count mismatch"
        );
        assert_eq!(d_probs.rows(), cache.probs.rows(), "stale cache: batch size");
        assert_eq!(d_probs.cols(), cache.probs.cols());

        let mut grads: Vec<TensorGrad> = Vec::with_capacity(self.layers.len());
        // dL/dZ at the output layer.
        let mut dz = softmax_backward(&cache.probs, d_probs);
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.layer_inputs[idx];
            let (dw, db) = if layer.frozen {
                (
                    Matrix::zeros(layer.in_dim(), layer.out_dim()),
                    vec![0.0; layer.out_dim()],
                )
            } else {
                (input.matmul_t_left(&dz), dz.col_sums())
            };
            grads.push(TensorGrad { weight: dw, bias: db });
            if idx > 0 {
                // Gradient flows through frozen layers even though their own
                // tensors get zeros.
                let dx = dz.matmul_t_right(&layer.weight);
                let z_prev = &cache.preacts[idx - 1];
                let act = self.layers[idx - 1]
                    .activation
                    .expect("non-final layer must have an activation");
                let mut next = dx;
                for (g, z) in next.as_mut_slice().iter_mut().zip(z_prev.as_slice()) {
                    *g *= act.grad_scalar(*z);
                }
                dz = next;
            }
        }
        grads.reverse();
        GradientSet { tensors: grads }
    }

    fn tensors(&self) -> Vec<ParamTensor<'_>> {
        self.layers
            .iter()
            .map(|l| ParamTensor {
                weight: &l.weight,
                bias: &l.bias,
                frozen: l.frozen,
            })
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<ParamTensorMut<'_>> {
        self.layers
            .iter_mut()
            .map(|l| ParamTensorMut {
                frozen: l.frozen,
                weight: &mut l.weight,
                bias: &mut l.bias,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn parameter_counts() {
        let net = build_layered(784, &[(512, Activation::Tanh), (512, Activation::Tanh)], 10)
            .unwrap();
        assert_eq!(net.param_count(), 669_706);

        let net = build_layered(2, &[], 2).unwrap();
        assert_eq!(net.param_count(), 6);

        let net = build_layered(784, &[(100, Activation::Relu)], 10).unwrap();
        assert_eq!(net.param_count(), 79_510);
    }

    #[test]
    fn zero_width_rejected() {
        assert!(build_layered(4, &[(0, Activation::Relu)], 2).is_err());
    }

    #[test]
    fn glorot_limit_value() {
        assert!((super::super::glorot_limit(784, 512) - 0.068041).abs() < 1e-6);
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let mut a = build_layered(5, &[(4, Activation::Tanh)], 3).unwrap();
        let mut b = a.clone();
        a.init_weights(&mut Rng::new(11));
        b.init_weights(&mut Rng::new(11));
        for (ta, tb) in a.tensors().iter().zip(b.tensors().iter()) {
            assert_eq!(ta.weight.as_slice(), tb.weight.as_slice());
            assert!(ta.bias.iter().all(|&x| x == 0.0));
        }
        let limit = super::super::glorot_limit(5, 4);
        assert!(a.layers[0]
            .weight
            .as_slice()
            .iter()
            .all(|w| w.abs() < limit));
    }

    #[test]
    fn forward_rows_sum_to_one() {
        let mut net = build_layered(3, &[(6, Activation::Relu)], 4).unwrap();
        net.init_weights(&mut Rng::new(1));
        let batch = Matrix::from_rows(&[vec![0.1, -0.5, 2.0], vec![1.0, 1.0, 1.0]]);
        let (probs, _) = net.forward(&batch);
        for r in 0..probs.rows() {
            let s: f64 = probs.row(r).iter().sum();
            assert!((s - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn batch_forward_matches_rowwise() {
        let mut net = build_layered(3, &[(5, Activation::Tanh)], 3).unwrap();
        net.init_weights(&mut Rng::new(2));
        let rows = [vec![0.4, -1.0, 0.2], vec![2.0, 0.0, -0.3]];
        let batch = Matrix::from_rows(&rows);
        let (both, _) = net.forward(&batch);
        for (i, row) in rows.iter().enumerate() {
            let single = Matrix::from_rows(std::slice::from_ref(row));
            let (one, _) = net.forward(&single);
            for c in 0..3 {
                assert!((both.get(i, c) - one.get(0, c)).abs() < 1e-12);
            }
        }
    }
}
