//! Deterministic dense linear algebra, activations, and a finite-difference
//! gradient oracle. All operations work in `f64`.

mod activation;
mod fd;
mod matrix;
mod rng;

pub use activation::{activation, activation_grad, softmax, softmax_in_place, Activation};
pub use fd::fd_gradient;
pub use matrix::{affine_forward, gemm, Matrix};
pub use rng::Rng;
