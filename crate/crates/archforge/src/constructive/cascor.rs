//! Cascade-correlation: alternate output training with correlation-maximizing
//! unit insertion.

use std::time::Instant;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{CascadeNetwork, Network, OutputInit};
use crate::numerics::{Activation, Rng};
use crate::training::{fit, TrainConfig};

use super::pool::{residual_errors, train_correlation_pool};
use super::types::{
    CandidatePoolConfig, ConstructiveRecord, InsertionRecord, PoolObjective,
};

/// Grows a cascade by `max_units` correlation-trained insertions.
///
/// Loop per insertion: train the output layer on crossentropy (early stop per
/// `cfg`), snapshot the residual errors, audition the candidate pool by
/// ascent on S, insert the winner with frozen input weights, rebuild the
/// output layer fresh, repeat. `max_units = 0` leaves a softmax linear
/// classifier.
pub fn cascor_train(
    train: &Dataset,
    val: &Dataset,
    max_units: usize,
    activation: Activation,
    pool: &CandidatePoolConfig,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(CascadeNetwork, ConstructiveRecord)> {
    pool.validate()?;
    if pool.objective != PoolObjective::CorrelationMax {
        return Err(Error::config("cascor_train needs a correlation_max pool"));
    }
    let master = Rng::new(seed);
    let mut net = CascadeNetwork::new(train.input_dim(), train.class_count);
    net.init_weights(&mut master.derive(0));

    let mut record = ConstructiveRecord::default();
    let mut main_rng = master.derive(1);

    // Initial output training (not tied to an insertion).
    let t = Instant::now();
    fit(&mut net, train, val, cfg, &mut main_rng)?;
    record.main_seconds += t.elapsed().as_secs_f64();

    for insertion in 1..=max_units {
        let t = Instant::now();
        let (features, errors) = residual_errors(&net, train);
        let pool_rng = master.derive(100 + insertion as u64);
        let (candidates, metrics, winner) =
            train_correlation_pool(&features, &errors, activation, pool, cfg, &pool_rng);
        record.candidate_seconds += t.elapsed().as_secs_f64();

        // Insert the winner frozen; the output layer is rebuilt fresh.
        let width = pool.insert_kind.width();
        let mut insert_rng = master.derive(200 + insertion as u64);
        net.add_cascade_block(width, activation, &mut insert_rng, OutputInit::Fresh);
        let block = net.blocks.last_mut().expect("block just added");
        block.weight = candidates[winner].weight.clone();
        block.bias = candidates[winner].bias.clone();
        block.frozen = true;

        let t = Instant::now();
        let main = fit(&mut net, train, val, cfg, &mut main_rng)?;
        record.main_seconds += t.elapsed().as_secs_f64();
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
    use crate::training::Monitor;

    fn setup() -> (Dataset, Dataset) {
        let data = synthetic_polygons(300, 13).unwrap();
        data.split(0.8, &mut Rng::new(13)).unwrap()
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig::rmsprop()
            .with_max_epochs(5)
            .with_early_stop(Monitor::ValAccuracy, 3)
    }

    #[test]
    fn zero_units_is_a_linear_classifier() {
        let (train, val) = setup();
        let mut pool = CandidatePoolConfig::cascor();
        pool.pool_size = 2;
        let (net, record) =
            cascor_train(&train, &val, 0, Activation::Tanh, &pool, &quick_cfg(), 1).unwrap();
        assert!(net.blocks.is_empty());
        assert!(record.insertions.is_empty());
        assert!(record.main_seconds > 0.0);
    }

    #[test]
    fn insertions_freeze_and_wire_correctly() {
        let (train, val) = setup();
        let mut pool = CandidatePoolConfig::cascor();
        pool.pool_size = 2;
        pool.candidate_epochs = 1;
        let (net, record) =
            cascor_train(&train, &val, 3, Activation::Tanh, &pool, &quick_cfg(), 2).unwrap();
        assert_eq!(net.blocks.len(), 3);
        assert_eq!(record.insertions.len(), 3);
        for (k, block) in net.blocks.iter().enumerate() {
            assert!(block.frozen);
            assert_eq!(block.fan_in(), 2 + k); // input_dim + one unit per prior block
        }
        assert_eq!(net.feature_dim(), 5);
        for (i, ins) in record.insertions.iter().enumerate() {
            assert_eq!(ins.insertion, i + 1);
            assert_eq!(ins.pool.len(), 2);
            assert!(ins.chosen_candidate < 2);
        }
        // Param counts grow monotonically with each insertion.
        for pair in record.insertions.windows(2) {
            assert!(pair[1].param_count > pair[0].param_count);
        }
    }

    #[test]
    fn frozen_blocks_stay_bit_identical() {
        let (train, val) = setup();
        let mut pool = CandidatePoolConfig::cascor();
        pool.pool_size = 2;
        pool.candidate_epochs = 1;
        // Two runs with the same seed, one unit longer: the shared prefix's
        // frozen blocks must agree bit for bit.
        let (short, _) =
            cascor_train(&train, &val, 1, Activation::Tanh, &pool, &quick_cfg(), 3).unwrap();
        let (long, _) =
            cascor_train(&train, &val, 2, Activation::Tanh, &pool, &quick_cfg(), 3).unwrap();
        assert_eq!(
            short.blocks[0].weight.as_slice(),
            long.blocks[0].weight.as_slice()
        );
        assert_eq!(short.blocks[0].bias, long.blocks[0].bias);
    }

    #[test]
    fn wrong_objective_rejected() {
        let (train, val) = setup();
        let pool = CandidatePoolConfig::caser();
        assert!(
            cascor_train(&train, &val, 1, Activation::Tanh, &pool, &quick_cfg(), 1).is_err()
        );
    }
}
