//! Loss and metric functions.

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Probabilities below this are clamped before taking logs, keeping the loss
/// finite for confident mistakes.
pub const PROB_CLAMP: f64 = 1e-12;

/// Mean crossentropy over the batch: `-(1/B) sum_i sum_c y_ic log p_ic`.
pub fn crossentropy(probabilities: &Matrix, onehot: &Matrix) -> Result<f64> {
    if probabilities.rows() != onehot.rows() || probabilities.cols() != onehot.cols() {
        return Err(Error::contract(format!(
            "crossentropy: shapes {}x{} vs {}x{}",
            probabilities.rows(),
            probabilities.cols(),
            onehot.rows(),
            onehot.cols()
        )));
    }
    let b = probabilities.rows() as f64;
    let mut total = 0.0;
    for r in 0..probabilities.rows() {
        for (p, y) in probabilities.row(r).iter().zip(onehot.row(r)) {
            if *y != 0.0 {
                total -= y * p.max(PROB_CLAMP).ln();
            }
        }
    }
    Ok(total / b)
}

/// Gradient of the mean crossentropy w.r.t. the probabilities.
pub fn crossentropy_grad(probabilities: &Matrix, onehot: &Matrix) -> Matrix {
    assert_eq!(probabilities.rows(), onehot.rows());
    assert_eq!(probabilities.cols(), onehot.cols());
    let b = probabilities.rows() as f64;
    let mut grad = Matrix::zeros(probabilities.rows(), probabilities.cols());
    for r in 0..probabilities.rows() {
        for c in 0..probabilities.cols() {
            let y = onehot.get(r, c);
            if y != 0.0 {
                grad.set(r, c, -y / probabilities.get(r, c).max(PROB_CLAMP) / b);
            }
        }
    }
    grad
}

/// Fraction of rows whose argmax (ties resolve to the lowest index) equals the
/// label.
pub fn accuracy(probabilities: &Matrix, labels: &[usize]) -> Result<f64> {
    if probabilities.rows() != labels.len() {
        return Err(Error::contract(format!(
            "accuracy: {} rows vs {} labels",
            probabilities.rows(),
            labels.len()
        )));
    }
    let classes = probabilities.cols();
    let mut correct = 0usize;
    for (r, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::contract(format!(
                "accuracy: label {label} out of range for {classes} classes"
            )));
        }
        if argmax(probabilities.row(r)) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / labels.len() as f64)
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Cascade-correlation objective:
/// `S = sum_o | sum_p (V_p - mean(V)) (E_po - mean_p(E_o)) |`.
pub fn error_correlation(candidate_values: &[f64], output_errors: &Matrix) -> Result<f64> {
    let patterns = output_errors.rows();
    if candidate_values.len() != patterns {
        return Err(Error::contract(format!(
            "error_correlation: {} values vs {} patterns",
            candidate_values.len(),
            patterns
        )));
    }
    if patterns == 0 || output_errors.cols() == 0 {
        return Err(Error::contract("error_correlation: empty input"));
    }
    let v_mean = candidate_values.iter().sum::<f64>() / patterns as f64;
    let e_means = {
        let mut m = output_errors.col_sums();
        for x in &mut m {
            *x /= patterns as f64;
        }
        m
    };
    let mut s = 0.0;
    for o in 0..output_errors.cols() {
        let mut corr = 0.0;
        for p in 0..patterns {
            corr += (candidate_values[p] - v_mean) * (output_errors.get(p, o) - e_means[o]);
        }
        s += corr.abs();
    }
    Ok(s)
}

/// Per-pattern gradient of S w.r.t. the candidate values.
///
/// Because the per-output centered errors sum to zero over patterns, the mean
/// term of V drops out and the gradient is
/// `dS/dV_p = sum_o sign(corr_o) (E_po - mean_p(E_o))`, with `sign(0) = 0`.
pub fn error_correlation_value_grad(candidate_values: &[f64], output_errors: &Matrix) -> Vec<f64> {
    let patterns = output_errors.rows();
    assert_eq!(candidate_values.len(), patterns);
    let v_mean = candidate_values.iter().sum::<f64>() / patterns as f64;
    let mut e_means = output_errors.col_sums();
    for x in &mut e_means {
        *x /= patterns as f64;
    }
    let mut signs = vec![0.0; output_errors.cols()];
    for (o, sign) in signs.iter_mut().enumerate() {
        let mut corr = 0.0;
        for p in 0..patterns {
            corr += (candidate_values[p] - v_mean) * (output_errors.get(p, o) - e_means[o]);
        }
        *sign = if corr > 0.0 {
            1.0
        } else if corr < 0.0 {
            -1.0
        } else {
            0.0
        };
    }
    let mut grad = vec![0.0; patterns];
    for (p, g) in grad.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (o, sign) in signs.iter().enumerate() {
            acc += sign * (output_errors.get(p, o) - e_means[o]);
        }
        *g = acc;
    }
    grad
}
