//! Elementwise activations and the softmax output normalizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-unit activation. Output units always use softmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply_scalar(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x < 0.0 {
                    0.0
                } else {
                    x
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative at the pre-activation `x`.
    ///
    /// The relu derivative at exactly 0 is defined as 0 (subgradient choice).
    #[inline]
    pub fn grad_scalar(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::config(format!("unknown activation kind: {other}"))),
        }
    }
}

/// Elementwise activation of a vector.
pub fn activation(kind: Activation, v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| kind.apply_scalar(x)).collect()
}

/// Elementwise activation derivative at `v`.
pub fn activation_grad(kind: Activation, v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| kind.grad_scalar(x)).collect()
}

/// Softmax with max-subtraction for overflow safety.
pub fn softmax(z: &[f64]) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(Error::contract("softmax: empty vector"));
    }
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

/// Softmax over a mutable slice, in place.
pub fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in z.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in z.iter_mut() {
        *x /= sum;
    }
}
