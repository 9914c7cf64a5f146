//! Cascade network: every hidden block reads the input plus all previous
//! block outputs; the output layer reads the input plus every block output.

use serde::{Deserialize, Serialize};

use crate::numerics::{Activation, Matrix, Rng};

use super::{
    glorot_limit, init_tensor, softmax_backward, GradientSet, Network, ParamTensor,
    ParamTensorMut, TensorGrad,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeBlock {
    /// `fan_in x width` where `fan_in = input_dim + sum of previous widths`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
    pub frozen: bool,
}

impl CascadeBlock {
    pub fn width(&self) -> usize {
        self.weight.cols()
    }

    pub fn fan_in(&self) -> usize {
        self.weight.rows()
    }
}

/// How the rebuilt output layer is seeded when a block is inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputInit {
    /// Reinitialize the entire output layer.
    Fresh,
    /// Keep the output weights for pre-existing features; initialize only the
    /// rows belonging to the new block.
    ReusePrevious,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeNetwork {
    pub input_dim: usize,
    pub blocks: Vec<CascadeBlock>,
    /// `feature_dim x output_dim`.
    pub output_weight: Matrix,
    pub output_bias: Vec<f64>,
    pub output_frozen: bool,
}

pub struct CascadeCache {
    /// `B x feature_dim`: input columns followed by each block's activations.
    features: Matrix,
    /// Pre-activations per block.
    preacts: Vec<Matrix>,
    probs: Matrix,
}

impl CascadeCache {
    pub fn features(&self) -> &Matrix {
        &self.features
    }
}

impl CascadeNetwork {
    /// Cascade with zero blocks: a softmax linear classifier.
    pub fn new(input_dim: usize, output_dim: usize) -> CascadeNetwork {
        assert!(input_dim > 0 && output_dim > 0);
        CascadeNetwork {
            input_dim,
            blocks: Vec::new(),
            output_weight: Matrix::zeros(input_dim, output_dim),
            output_bias: vec![0.0; output_dim],
            output_frozen: false,
        }
    }

    /// `input_dim + sum of block widths`: the output layer's fan-in.
    pub fn feature_dim(&self) -> usize {
        self.input_dim + self.blocks.iter().map(|b| b.width()).sum::<usize>()
    }

    /// Column offset of block `k`'s activations inside the feature matrix.
    pub fn block_offset(&self, k: usize) -> usize {
        self.input_dim + self.blocks[..k].iter().map(|b| b.width()).sum::<usize>()
    }

    /// Appends a block of the given width. The block's input weights are
    /// Glorot-initialized from `rng`; the output layer is rebuilt per `init`.
    pub fn add_cascade_block(
        &mut self,
        width: usize,
        activation: Activation,
        rng: &mut Rng,
        init: OutputInit,
    ) {
        assert!(width >= 1, "block width must be >= 1");
        let fan_in = self.feature_dim();
        let mut block = CascadeBlock {
            weight: Matrix::zeros(fan_in, width),
            bias: vec![0.0; width],
            activation,
            frozen: false,
        };
        init_tensor(&mut block.weight, &mut block.bias, rng);
        self.blocks.push(block);

        let old_dim = fan_in;
        let new_dim = fan_in + width;
        let classes = self.output_weight.cols();
        let mut new_out = Matrix::zeros(new_dim, classes);
        match init {
            OutputInit::Fresh => {
                let mut bias = vec![0.0; classes];
                init_tensor(&mut new_out, &mut bias, rng);
                self.output_bias = bias;
            }
            OutputInit::ReusePrevious => {
                for r in 0..old_dim {
                    new_out.row_mut(r).copy_from_slice(self.output_weight.row(r));
                }
                let a = glorot_limit(new_dim, classes);
                for r in old_dim..new_dim {
                    for c in 0..classes {
                        new_out.set(r, c, rng.uniform(-a, a));
                    }
                }
                // output bias kept as-is
            }
        }
        self.output_weight = new_out;
        self.output_frozen = false;
    }

    /// Builds the full feature matrix for a batch.
    fn compute_features(&self, batch: &Matrix) -> (Matrix, Vec<Matrix>) {
        assert_eq!(batch.cols(), self.input_dim, "batch width mismatch");
        let b = batch.rows();
        let mut features = Matrix::zeros(b, self.feature_dim());
        features.copy_into_cols(0, batch);
        let mut preacts = Vec::with_capacity(self.blocks.len());
        let mut offset = self.input_dim;
        for block in &self.blocks {
            let fan_in = block.fan_in();
            let input = features.select_cols(0, fan_in);
            let mut z = input.matmul(&block.weight);
            z.add_row_vector(&block.bias);
            let mut h = z.clone();
            for x in h.as_mut_slice() {
                *x = block.activation.apply_scalar(*x);
            }
            features.copy_into_cols(offset, &h);
            offset += block.width();
            preacts.push(z);
        }
        (features, preacts)
    }
}

impl Network for CascadeNetwork {
    type Cache = CascadeCache;

    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_weight.cols()
    }

    fn forward(&self, batch: &Matrix) -> (Matrix, Self::Cache) {
        let (features, preacts) = self.compute_features(batch);
        let mut z = features.matmul(&self.output_weight);
        z.add_row_vector(&self.output_bias);
        for r in 0..z.rows() {
            crate::numerics::softmax_in_place(z.row_mut(r));
        }
        let probs = z;
        (
            probs.clone(),
            CascadeCache {
                features,
                preacts,
                probs,
            },
        )
    }

    fn backward(&self, cache: &Self::Cache, d_probs: &Matrix) -> GradientSet {
        assert_eq!(cache.preacts.len(), self.blocks.len(), "stale cache");
        assert_eq!(cache.features.cols(), self.feature_dim(), "stale cache");
        assert_eq!(d_probs.rows(), cache.probs.rows(), "stale cache: batch size");

        let dz_out = softmax_backward(&cache.probs, d_probs);
        let out_grad = if self.output_frozen {
            TensorGrad {
                weight: Matrix::zeros(self.feature_dim(), self.output_dim()),
                bias: vec![0.0; self.output_dim()],
            }
        } else {
            TensorGrad {
                weight: cache.features.matmul_t_left(&dz_out),
                bias: dz_out.col_sums(),
            }
        };
        let mut d_features = dz_out.matmul_t_right(&self.output_weight);

        let mut block_grads: Vec<TensorGrad> = Vec::with_capacity(self.blocks.len());
        for (k, block) in self.blocks.iter().enumerate().rev() {
            let offset = self.block_offset(k);
            let width = block.width();
            let fan_in = block.fan_in();
            let dh = d_features.select_cols(offset, offset + width);
            let mut dz = dh;
            for (g, z) in dz.as_mut_slice().iter_mut().zip(cache.preacts[k].as_slice()) {
                *g *= block.activation.grad_scalar(*z);
            }
            if block.frozen {
                block_grads.push(TensorGrad {
                    weight: Matrix::zeros(fan_in, width),
                    bias: vec![0.0; width],
                });
            } else {
                let input = cache.features.select_cols(0, fan_in);
                block_grads.push(TensorGrad {
                    weight: input.matmul_t_left(&dz),
                    bias: dz.col_sums(),
                });
            }
            // Gradient still flows to earlier features through frozen blocks.
            let dx = dz.matmul_t_right(&block.weight);
            d_features.add_into_cols(0, &dx);
        }
        block_grads.reverse();
        block_grads.push(out_grad);
        GradientSet {
            tensors: block_grads,
        }
    }

    fn tensors(&self) -> Vec<ParamTensor<'_>> {
        let mut out: Vec<ParamTensor<'_>> = self
            .blocks
            .iter()
            .map(|b| ParamTensor {
                weight: &b.weight,
                bias: &b.bias,
                frozen: b.frozen,
            })
            .collect();
        out.push(ParamTensor {
            weight: &self.output_weight,
            bias: &self.output_bias,
            frozen: self.output_frozen,
        });
        out
    }

    fn tensors_mut(&mut self) -> Vec<ParamTensorMut<'_>> {
        let mut out: Vec<ParamTensorMut<'_>> = self
            .blocks
            .iter_mut()
            .map(|b| ParamTensorMut {
                frozen: b.frozen,
                weight: &mut b.weight,
                bias: &mut b.bias,
            })
            .collect();
        out.push(ParamTensorMut {
            frozen: self.output_frozen,
            weight: &mut self.output_weight,
            bias: &mut self.output_bias,
        });
        out
    }
}
