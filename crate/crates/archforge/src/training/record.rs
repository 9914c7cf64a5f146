//! Per-epoch and per-run training records with JSON and CSV serialization.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    /// Wall time of the epoch.
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters the returned network carries (1-based;
    /// 0 when no epoch completed).
    pub best_epoch: usize,
    /// Last epoch that ran (1-based).
    pub stopped_epoch: usize,
    /// True if training hit a non-finite loss and aborted.
    pub diverged: bool,
}

pub const CSV_HEADER: &str = "epoch,train_loss,train_acc,val_loss,val_acc,seconds";

impl RunRecord {
    pub fn final_val_acc(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.val_acc)
    }

    pub fn best_val_acc(&self) -> f64 {
        self.epochs
            .iter()
            .map(|e| e.val_acc)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }

    pub fn total_seconds(&self) -> f64 {
        self.epochs.iter().map(|e| e.seconds).sum()
    }

    /// CSV rows (header + one line per epoch). `include_timings = false`
    /// zeroes the seconds column so replays compare byte-for-byte.
    pub fn to_csv(&self, include_timings: bool) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for e in &self.epochs {
            let secs = if include_timings { e.seconds } else { 0.0 };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.epoch, e.train_loss, e.train_acc, e.val_loss, e.val_acc, secs
            ));
        }
        out
    }
}
