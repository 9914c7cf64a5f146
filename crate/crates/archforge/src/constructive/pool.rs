//! Candidate pools for cascade insertions.
//!
//! Candidates audition independently from derived seeds, so they can train in
//! parallel; the winner is picked by an ordered scan (ties go to the lowest
//! candidate index) to keep results schedule-independent.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::Result;
use crate::network::{CascadeNetwork, Network, OutputInit};
use crate::numerics::{Activation, Matrix, Rng};
use crate::training::{
    error_correlation, error_correlation_value_grad, fit, rmsprop_step, sgd_step, OptimizerKind,
    TrainConfig,
};

use super::types::{CandidateMetric, CandidatePoolConfig};

/// A trained correlation candidate: input weights, bias, and its S score.
pub struct CorrelationCandidate {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub score: f64,
}

/// Residual errors `probs - targets` on the training set, the snapshot every
/// correlation candidate reads.
pub fn residual_errors(net: &CascadeNetwork, data: &Dataset) -> (Matrix, Matrix) {
    let (probs, cache) = net.forward(&data.inputs);
    let mut errors = probs;
    for (e, t) in errors
        .as_mut_slice()
        .iter_mut()
        .zip(data.targets.as_slice())
    {
        *e -= t;
    }
    (cache.features().clone(), errors)
}

/// Trains one unit by stochastic gradient ascent on S. `features` is the
/// cascade feature matrix (the unit's input), `errors` the residual snapshot.
fn train_correlation_candidate(
    features: &Matrix,
    errors: &Matrix,
    activation: Activation,
    epochs: usize,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> CorrelationCandidate {
    let fan_in = features.cols();
    let limit = crate::network::glorot_limit(fan_in, 1);
    let mut weight: Vec<f64> = (0..fan_in).map(|_| rng.uniform(-limit, limit)).collect();
    let mut bias = 0.0;
    let mut w_acc = vec![0.0; fan_in];
    let mut b_acc = vec![0.0; 1];
    let n = features.rows();
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..epochs {
        rng.shuffle(&mut order);
        let mut start = 0;
        while start < n {
            let end = (start + cfg.batch_size).min(n);
            let idx = &order[start..end];
            let f = features.select_rows(idx);
            let e = errors.select_rows(idx);
            let mut preact = vec![0.0; idx.len()];
            let mut value = vec![0.0; idx.len()];
            for (i, (z, v)) in preact.iter_mut().zip(value.iter_mut()).enumerate() {
                let row = f.row(i);
                let mut acc = bias;
                for (w, x) in weight.iter().zip(row) {
                    acc += w * x;
                }
                *z = acc;
                *v = activation.apply_scalar(acc);
            }
            // Ascent on S: descend on -S with the configured optimizer.
            let dv = error_correlation_value_grad(&value, &e);
            let mut grad_w = vec![0.0; fan_in];
            let mut grad_b = 0.0;
            for (i, (&g, &z)) in dv.iter().zip(&preact).enumerate() {
                let dz = -g * activation.grad_scalar(z);
                grad_b += dz;
                for (gw, x) in grad_w.iter_mut().zip(f.row(i)) {
                    *gw += dz * x;
                }
            }
            let grad_b = [grad_b];
            let mut b_slice = [bias];
            match cfg.optimizer {
                OptimizerKind::Sgd => {
                    sgd_step(&mut weight, &grad_w, &mut w_acc, cfg);
                    sgd_step(&mut b_slice, &grad_b, &mut b_acc, cfg);
                }
                OptimizerKind::Rmsprop => {
                    rmsprop_step(&mut weight, &grad_w, &mut w_acc, cfg);
                    rmsprop_step(&mut b_slice, &grad_b, &mut b_acc, cfg);
                }
            }
            bias = b_slice[0];
            start = end;
        }
    }

    // Final score on the full snapshot.
    let mut value = vec![0.0; n];
    for (i, v) in value.iter_mut().enumerate() {
        let mut acc = bias;
        for (w, x) in weight.iter().zip(features.row(i)) {
            acc += w * x;
        }
        *v = activation.apply_scalar(acc);
    }
    let score = error_correlation(&value, errors).expect("snapshot shapes agree");
    CorrelationCandidate {
        weight: Matrix::from_vec(fan_in, 1, weight),
        bias: vec![bias],
        score,
    }
}

/// Auditions a correlation pool against a shared residual snapshot. Returns
/// the candidates, their metrics, and the winner index (argmax S, lowest
/// index on ties).
pub fn train_correlation_pool(
    features: &Matrix,
    errors: &Matrix,
    activation: Activation,
    pool: &CandidatePoolConfig,
    cfg: &TrainConfig,
    rng: &Rng,
) -> (Vec<CorrelationCandidate>, Vec<CandidateMetric>, usize) {
    let candidates: Vec<CorrelationCandidate> = (0..pool.pool_size)
        .into_par_iter()
        .map(|id| {
            let mut crng = rng.derive(id as u64);
            train_correlation_candidate(
                features,
                errors,
                activation,
                pool.candidate_epochs,
                cfg,
                &mut crng,
            )
        })
        .collect();
    let metrics: Vec<CandidateMetric> = candidates
        .iter()
        .enumerate()
        .map(|(id, c)| CandidateMetric {
            candidate_id: id,
            score: c.score,
            reused_output: false,
            record: None,
        })
        .collect();
    let winner = argmax_score(&metrics);
    (candidates, metrics, winner)
}

/// A loss-minimizing candidate: the grown network after its audition.
pub struct LossCandidate {
    pub net: CascadeNetwork,
    pub val_accuracy: f64,
}

/// Grows `base` by one block per candidate and auditions each for
/// `candidate_epochs` epochs. `reuse[id]` controls the output-weight seeding
/// of candidate `id`.
#[allow(clippy::too_many_arguments)]
pub fn train_loss_pool(
    base: &CascadeNetwork,
    train: &Dataset,
    val: &Dataset,
    activation: Activation,
    width: usize,
    reuse: &[bool],
    candidate_epochs: usize,
    cfg: &TrainConfig,
    rng: &Rng,
) -> Result<(Vec<LossCandidate>, Vec<CandidateMetric>, usize)> {
    let results: Result<Vec<(LossCandidate, CandidateMetric)>> = reuse
        .par_iter()
        .enumerate()
        .map(|(id, &reuse_output)| {
            let mut crng = rng.derive(id as u64);
            let mut net = base.clone();
            let init = if reuse_output {
                OutputInit::ReusePrevious
            } else {
                OutputInit::Fresh
            };
            net.add_cascade_block(width, activation, &mut crng, init);
            let audition_cfg = TrainConfig {
                early_stop: None,
                max_epochs: candidate_epochs,
                ..cfg.clone()
            };
            let record = fit(&mut net, train, val, &audition_cfg, &mut crng)?;
            let val_accuracy = record.final_val_acc();
            Ok((
                LossCandidate { net, val_accuracy },
                CandidateMetric {
                    candidate_id: id,
                    score: val_accuracy,
                    reused_output: reuse_output,
                    record: Some(record),
                },
            ))
        })
        .collect();
    let (candidates, metrics): (Vec<_>, Vec<_>) = results?.into_iter().unzip();
    let winner = argmax_score(&metrics);
    Ok((candidates, metrics, winner))
}

/// Highest score wins; ties resolve to the lowest candidate index.
pub fn argmax_score(metrics: &[CandidateMetric]) -> usize {
    let mut best = 0;
    for (i, m) in metrics.iter().enumerate().skip(1) {
        if m.score > metrics[best].score {
            best = i;
        }
    }
    best
}
