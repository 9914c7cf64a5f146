//! Central-difference gradient oracle.

use crate::error::{Error, Result};

/// Central-difference gradient of `f` at `theta`:
/// `(f(theta + eps*e_i) - f(theta - eps*e_i)) / (2*eps)` per coordinate.
pub fn fd_gradient<F>(mut f: F, theta: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if eps <= 0.0 {
        return Err(Error::contract("fd_gradient: eps must be positive"));
    }
    let mut work = theta.to_vec();
    let mut grad = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let orig = work[i];
        work[i] = orig + eps;
        let plus = f(&work);
        work[i] = orig - eps;
        let minus = f(&work);
        work[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numerical(format!(
                "fd_gradient: non-finite evaluation at coordinate {i}"
            )));
        }
        grad[i] = (plus - minus) / (2.0 * eps);
    }
    Ok(grad)
}
