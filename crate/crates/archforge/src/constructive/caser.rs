//! Caser and CaserRe: cascade growth by loss minimization, with optional
//! reuse of the previous output weights.

use std::time::Instant;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{CascadeNetwork, Network};
use crate::numerics::{Activation, Rng};
use crate::training::{evaluate, fit, Monitor, TrainConfig};

use super::pool::train_loss_pool;
use super::types::{
    CandidatePoolConfig, ConstructiveRecord, InsertionRecord, PoolObjective, ReusePolicy,
};

/// Patience for training an inserted block to convergence.
const CONVERGE_PATIENCE: usize = 3;

/// Grows a cascade by `max_insertions` loss-trained insertions.
///
/// Per insertion: a candidate pool of grown clones auditions for
/// `candidate_epochs` epochs; the winner (highest validation accuracy) is
/// trained to convergence (validation accuracy, patience 3) and its new block
/// frozen. The reuse policy decides how each candidate's output layer is
/// seeded.
pub fn caser_re_train(
    train: &Dataset,
    val: &Dataset,
    max_insertions: usize,
    activation: Activation,
    pool: &CandidatePoolConfig,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(CascadeNetwork, ConstructiveRecord)> {
    pool.validate()?;
    if pool.objective != PoolObjective::LossMin {
        return Err(Error::config("caser_re_train needs a loss_min pool"));
    }
    let master = Rng::new(seed);
    let mut net = CascadeNetwork::new(train.input_dim(), train.class_count);
    net.init_weights(&mut master.derive(0));

    let mut record = ConstructiveRecord::default();
    let mut main_rng = master.derive(1);
    let converge_cfg = TrainConfig {
        early_stop: Some(crate::training::EarlyStop {
            monitor: Monitor::ValAccuracy,
            patience: CONVERGE_PATIENCE,
        }),
        ..cfg.clone()
    };

    // Converge the bare output layer first.
    let t = Instant::now();
    fit(&mut net, train, val, &converge_cfg, &mut main_rng)?;
    record.main_seconds += t.elapsed().as_secs_f64();
    let (_, mut prev_acc) = evaluate(&net, val, cfg.batch_size)?;

    let width = pool.insert_kind.width();
    for insertion in 1..=max_insertions {
        let pool_rng = master.derive(100 + insertion as u64);
        let reuse_flags: Vec<bool> = match pool.reuse_policy {
            ReusePolicy::Never | ReusePolicy::Threshold { .. } => vec![false; pool.pool_size],
            ReusePolicy::Always => vec![true; pool.pool_size],
            // Candidate 0 reuses the previous output weights.
            ReusePolicy::PoolMember => (0..pool.pool_size).map(|i| i == 0).collect(),
        };

        let t = Instant::now();
        let (mut candidates, mut metrics, mut winner) = train_loss_pool(
            &net,
            train,
            val,
            activation,
            width,
            &reuse_flags,
            pool.candidate_epochs,
            cfg,
            &pool_rng,
        )?;

        // Threshold policy: fall back to one reuse candidate only when the
        // best fresh audition dropped too far below the converged accuracy.
        if let ReusePolicy::Threshold { drop } = pool.reuse_policy {
            if metrics[winner].score < prev_acc - drop {
                let (reuse_cand, mut reuse_metrics, _) = train_loss_pool(
                    &net,
                    train,
                    val,
                    activation,
                    width,
                    &[true],
                    pool.candidate_epochs,
                    cfg,
                    &pool_rng.derive(u64::MAX),
                )?;
                let mut metric = reuse_metrics.remove(0);
                metric.candidate_id = metrics.len();
                winner = metrics.len();
                metrics.push(metric);
                candidates.extend(reuse_cand);
            }
        }
        record.candidate_seconds += t.elapsed().as_secs_f64();

        net = candidates.swap_remove(winner).net;

        // Train the winner to convergence, then freeze its new block.
        let t = Instant::now();
        let main = fit(&mut net, train, val, &converge_cfg, &mut main_rng)?;
        record.main_seconds += t.elapsed().as_secs_f64();
        net.blocks.last_mut().expect("block just added").frozen = true;
        (_, prev_acc) = evaluate(&net, val, cfg.batch_size)?;

        record.insertions.push(InsertionRecord {
            insertion,
            chosen_candidate: winner,
            pool: metrics,
            main,
            param_count: net.param_count(),
        });
    }
    Ok((net, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_polygons;

    fn setup() -> (Dataset, Dataset) {
        let data = synthetic_polygons(300, 17).unwrap();
        data.split(0.8, &mut Rng::new(17)).unwrap()
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig::rmsprop().with_max_epochs(4)
    }

    fn quick_pool(policy: ReusePolicy) -> CandidatePoolConfig {
        CandidatePoolConfig {
            pool_size: 2,
            candidate_epochs: 1,
            objective: PoolObjective::LossMin,
            reuse_policy: policy,
            insert_kind: super::super::types::InsertKind::Unit,
        }
    }

    #[test]
    fn grows_frozen_blocks_with_cascade_wiring() {
        let (train, val) = setup();
        let (net, record) = caser_re_train(
            &train,
            &val,
            3,
            Activation::Tanh,
            &quick_pool(ReusePolicy::Never),
            &quick_cfg(),
            1,
        )
        .unwrap();
        assert_eq!(net.blocks.len(), 3);
        for (k, b) in net.blocks.iter().enumerate() {
            assert!(b.frozen);
            assert_eq!(b.fan_in(), 2 + k);
        }
        assert_eq!(record.insertions.len(), 3);
        assert!(record.candidate_seconds > 0.0);
        assert!(record.main_seconds > 0.0);
    }

    #[test]
    fn pool_member_includes_reuse_candidate() {
        let (train, val) = setup();
        let (_, record) = caser_re_train(
            &train,
            &val,
            2,
            Activation::Tanh,
            &quick_pool(ReusePolicy::PoolMember),
            &quick_cfg(),
            2,
        )
        .unwrap();
        for ins in &record.insertions {
            assert!(ins.pool[0].reused_output);
            assert!(ins.pool[1..].iter().all(|m| !m.reused_output));
            // Winner's score is the pool maximum, so it is never below the
            // reuse member's score.
            let reuse_score = ins.pool[0].score;
            assert!(ins.pool[ins.chosen_candidate].score >= reuse_score);
        }
    }

    #[test]
    fn layer_blocks_widen_the_cascade() {
        let (train, val) = setup();
        let mut pool = quick_pool(ReusePolicy::Never);
        pool.insert_kind = super::super::types::InsertKind::Layer { width: 5 };
        let (net, _) = caser_re_train(
            &train,
            &val,
            2,
            Activation::Relu,
            &pool,
            &quick_cfg(),
            3,
        )
        .unwrap();
        assert_eq!(net.blocks.len(), 2);
        assert_eq!(net.blocks[0].width(), 5);
        assert_eq!(net.blocks[1].fan_in(), 7);
        assert_eq!(net.feature_dim(), 12);
    }

    #[test]
    fn wrong_objective_rejected() {
        let (train, val) = setup();
        let pool = CandidatePoolConfig::cascor();
        assert!(caser_re_train(
            &train,
            &val,
            1,
            Activation::Tanh,
            &pool,
            &quick_cfg(),
            1
        )
        .is_err());
    }

    #[test]
    fn seed_reproducibility() {
        let (train, val) = setup();
        let run = || {
            caser_re_train(
                &train,
                &val,
                2,
                Activation::Tanh,
                &quick_pool(ReusePolicy::PoolMember),
                &quick_cfg(),
                7,
            )
            .unwrap()
        };
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a.output_weight.as_slice(), b.output_weight.as_slice());
        for (x, y) in ra.insertions.iter().zip(&rb.insertions) {
            assert_eq!(x.chosen_candidate, y.chosen_candidate);
            for (ma, mb) in x.pool.iter().zip(&y.pool) {
                assert_eq!(ma.score, mb.score);
            }
        }
    }
}
