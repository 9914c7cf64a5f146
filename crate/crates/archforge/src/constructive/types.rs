//! Configuration and bookkeeping types shared by the constructive learners.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::training::RunRecord;

/// What a pool candidate optimizes while auditioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolObjective {
    /// Maximize the error correlation S (Cascor).
    CorrelationMax,
    /// Minimize crossentropy; candidates are scored by validation accuracy
    /// (Caser family).
    LossMin,
}

/// How an insertion treats the previous output weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReusePolicy {
    /// Fresh output weights every insertion.
    Never,
    /// Always start from the previous output weights.
    Always,
    /// Reuse only if the best fresh candidate's validation accuracy fell more
    /// than `drop` below the pre-insertion accuracy.
    Threshold { drop: f64 },
    /// The pool holds one reuse candidate; the rest are fresh.
    PoolMember,
}

/// What gets inserted per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertKind {
    /// A single hidden unit.
    Unit,
    /// A cascading block of the given width.
    Layer { width: usize },
}

impl InsertKind {
    pub fn width(self) -> usize {
        match self {
            InsertKind::Unit => 1,
            InsertKind::Layer { width } => width,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidatePoolConfig {
    pub pool_size: usize,
    pub candidate_epochs: usize,
    pub objective: PoolObjective,
    pub reuse_policy: ReusePolicy,
    pub insert_kind: InsertKind,
}

impl CandidatePoolConfig {
    /// Cascor regime: pool of 8 correlation-maximizing units.
    pub fn cascor() -> CandidatePoolConfig {
        CandidatePoolConfig {
            pool_size: 8,
            candidate_epochs: 2,
            objective: PoolObjective::CorrelationMax,
            reuse_policy: ReusePolicy::Never,
            insert_kind: InsertKind::Unit,
        }
    }

    /// Caser regime: pool of 8 loss-minimizing units trained one epoch.
    pub fn caser() -> CandidatePoolConfig {
        CandidatePoolConfig {
            pool_size: 8,
            candidate_epochs: 1,
            objective: PoolObjective::LossMin,
            reuse_policy: ReusePolicy::Never,
            insert_kind: InsertKind::Unit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 {
            return Err(Error::config("pool_size must be >= 1"));
        }
        if self.candidate_epochs == 0 {
            return Err(Error::config("candidate_epochs must be >= 1"));
        }
        if self.insert_kind.width() == 0 {
            return Err(Error::config("layer insert width must be >= 1"));
        }
        match self.reuse_policy {
            ReusePolicy::Threshold { drop } if !(0.0 < drop && drop < 1.0) => {
                Err(Error::config("threshold drop must be in (0,1)"))
            }
            ReusePolicy::PoolMember if self.pool_size < 2 => {
                Err(Error::config("pool_member needs pool_size >= 2"))
            }
            _ => Ok(()),
        }
    }
}

/// One candidate's audition outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateMetric {
    pub candidate_id: usize,
    /// S under correlation_max; validation accuracy under loss_min.
    pub score: f64,
    /// True for the pool_member reuse candidate.
    pub reused_output: bool,
    /// Per-epoch audition record (loss_min candidates only).
    pub record: Option<RunRecord>,
}

/// One insertion round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InsertionRecord {
    /// 1-based insertion index.
    pub insertion: usize,
    pub chosen_candidate: usize,
    pub pool: Vec<CandidateMetric>,
    /// Post-insertion (main) training of the grown network.
    pub main: RunRecord,
    /// Parameter count after the insertion.
    pub param_count: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstructiveRecord {
    pub insertions: Vec<InsertionRecord>,
    /// Wall time spent auditioning candidates.
    pub candidate_seconds: f64,
    /// Wall time spent training the main network.
    pub main_seconds: f64,
}

impl ConstructiveRecord {
    /// Long-format CSV: `insertion,candidate_id,phase,epoch,val_acc,val_loss`.
    /// Pool rows carry the candidate score as val_acc (val_loss empty for
    /// correlation candidates, which have no loss trajectory).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("insertion,candidate_id,phase,epoch,val_acc,val_loss\n");
        for ins in &self.insertions {
            for c in &ins.pool {
                match &c.record {
                    Some(rec) => {
                        for e in &rec.epochs {
                            out.push_str(&format!(
                                "{},{},pool,{},{},{}\n",
                                ins.insertion, c.candidate_id, e.epoch, e.val_acc, e.val_loss
                            ));
                        }
                    }
                    None => out.push_str(&format!(
                        "{},{},pool,{},{},\n",
                        ins.insertion, c.candidate_id, 0, c.score
                    )),
                }
            }
            for e in &ins.main.epochs {
                out.push_str(&format!(
                    "{},{},main,{},{},{}\n",
                    ins.insertion, ins.chosen_candidate, e.epoch, e.val_acc, e.val_loss
                ));
            }
        }
        out
    }
}

/// Accuracy/size trade-off observed while growing a layered network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerPoint {
    /// Constructed depth (number of hidden layers), contiguous from 1.
    pub depth: usize,
    pub width: usize,
    pub val_accuracy: f64,
    pub val_loss: f64,
    pub train_accuracy: f64,
    pub param_count: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LayerPerformanceCurve {
    pub points: Vec<LayerPoint>,
    /// Set when the width range emptied before max_layers was reached.
    pub stopped_early: bool,
}

impl LayerPerformanceCurve {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("depth,width,val_accuracy,val_loss,train_accuracy,param_count\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.depth, p.width, p.val_accuracy, p.val_loss, p.train_accuracy, p.param_count
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(CandidatePoolConfig::cascor().validate().is_ok());
        let mut c = CandidatePoolConfig::caser();
        c.pool_size = 0;
        assert!(c.validate().is_err());
        let mut c = CandidatePoolConfig::caser();
        c.reuse_policy = ReusePolicy::Threshold { drop: 1.5 };
        assert!(c.validate().is_err());
        let mut c = CandidatePoolConfig::caser();
        c.reuse_policy = ReusePolicy::PoolMember;
        c.pool_size = 1;
        assert!(c.validate().is_err());
        c.pool_size = 2;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn curve_csv_layout() {
        let curve = LayerPerformanceCurve {
            points: vec![LayerPoint {
                depth: 1,
                width: 100,
                val_accuracy: 0.9,
                val_loss: 0.3,
                train_accuracy: 0.95,
                param_count: 1402,
            }],
            stopped_early: false,
        };
        let csv = curve.to_csv();
        assert!(csv.starts_with("depth,width,"));
        assert!(csv.contains("1,100,0.9,0.3,0.95,1402"));
    }
}
