//! The training loop: shuffled mini-batches, per-epoch validation metrics,
//! early stopping with best-epoch restoration.

use std::time::Instant;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::numerics::Rng;

use super::loss::{accuracy, crossentropy, crossentropy_grad};
use super::optimizer::{apply_update, Monitor, OptimizerState, TrainConfig};
use super::record::{EpochRecord, RunRecord};

/// Tracks a monitored metric; "improvement" is strictly better than the best
/// so far (greater for accuracy, smaller for loss).
#[derive(Debug, Clone)]
pub struct EarlyStopTracker {
    monitor: Monitor,
    patience: usize,
    best_value: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopTracker {
    pub fn new(monitor: Monitor, patience: usize) -> EarlyStopTracker {
        assert!(patience >= 1, "patience must be >= 1");
        EarlyStopTracker {
            monitor,
            patience,
            best_value: match monitor {
                Monitor::ValAccuracy => f64::NEG_INFINITY,
                Monitor::ValLoss => f64::INFINITY,
            },
            best_epoch: 0,
            stale: 0,
        }
    }

    /// Records the metric for `epoch` (1-based). Returns true when the metric
    /// improved.
    pub fn observe(&mut self, epoch: usize, value: f64) -> bool {
        let improved = match self.monitor {
            Monitor::ValAccuracy => value > self.best_value,
            Monitor::ValLoss => value < self.best_value,
        };
        if improved {
            self.best_value = value;
            self.best_epoch = epoch;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        improved
    }

    /// True once the metric has gone `patience` consecutive epochs without
    /// improving.
    pub fn should_stop(&self) -> bool {
        self.stale >= self.patience
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }
}

/// Mean crossentropy and accuracy over a dataset, evaluated in batches.
pub fn evaluate<N: Network>(net: &N, data: &Dataset, batch_size: usize) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::contract("evaluate: empty dataset"));
    }
    let n = data.len();
    let mut loss_sum = 0.0;
    let mut correct_sum = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + batch_size).min(n);
        let indices: Vec<usize> = (start..end).collect();
        let batch = data.subset(&indices);
        let (probs, _) = net.forward(&batch.inputs);
        let m = (end - start) as f64;
        loss_sum += crossentropy(&probs, &batch.targets)? * m;
        correct_sum += accuracy(&probs, &batch.labels)? * m;
        start = end;
    }
    Ok((loss_sum / n as f64, correct_sum / n as f64))
}

/// Trains `net` in place and returns the per-epoch record. The network ends
/// up with the parameters of the best epoch under the configured monitor
/// (last epoch when early stopping is off).
pub fn fit<N: Network>(
    net: &mut N,
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<RunRecord> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::contract("fit: empty dataset"));
    }

    let mut state = OptimizerState::for_network(net);
    let mut tracker = cfg
        .early_stop
        .as_ref()
        .map(|es| EarlyStopTracker::new(es.monitor, es.patience));
    let mut best_snapshot: Option<N> = None;
    let mut epochs = Vec::new();
    let mut diverged = false;
    let mut order: Vec<usize> = (0..train.len()).collect();

    'epochs: for epoch in 1..=cfg.max_epochs {
        let started = Instant::now();
        rng.shuffle(&mut order);
        let mut train_loss_sum = 0.0;
        let mut train_correct_sum = 0.0;
        let mut start = 0;
        while start < train.len() {
            let end = (start + cfg.batch_size).min(train.len());
            let batch = train.subset(&order[start..end]);
            let (probs, cache) = net.forward(&batch.inputs);
            let loss = crossentropy(&probs, &batch.targets)?;
            if !loss.is_finite() {
                diverged = true;
                break 'epochs;
            }
            let m = (end - start) as f64;
            train_loss_sum += loss * m;
            train_correct_sum += accuracy(&probs, &batch.labels)? * m;
            let d_probs = crossentropy_grad(&probs, &batch.targets);
            let grads = net.backward(&cache, &d_probs);
            apply_update(net, &grads, &mut state, cfg);
            start = end;
        }

        let (val_loss, val_acc) = evaluate(net, val, cfg.batch_size)?;
        if !val_loss.is_finite() {
            diverged = true;
            break 'epochs;
        }
        epochs.push(EpochRecord {
            epoch,
            train_loss: train_loss_sum / train.len() as f64,
            train_acc: train_correct_sum / train.len() as f64,
            val_loss,
            val_acc,
            seconds: started.elapsed().as_secs_f64(),
        });

        if let Some(tracker) = &mut tracker {
            let metric = match cfg.early_stop.as_ref().unwrap().monitor {
                Monitor::ValAccuracy => val_acc,
                Monitor::ValLoss => val_loss,
            };
            if tracker.observe(epoch, metric) {
                best_snapshot = Some(net.clone());
            }
            if tracker.should_stop() {
                break;
            }
        }
    }

    let stopped_epoch = epochs.last().map_or(0, |e| e.epoch);
    let best_epoch = match (&tracker, diverged) {
        (Some(t), _) if t.best_epoch() > 0 => {
            if let Some(best) = best_snapshot {
                *net = best;
            }
            t.best_epoch()
        }
        _ => stopped_epoch,
    };

    Ok(RunRecord {
        epochs,
        best_epoch,
        stopped_epoch,
        diverged,
    })
}
