//! Constructive learners: the Cascor/Caser/CaserRe cascade family and the
//! forward-thinking layered family, including the automated variant.

mod cascor;
mod caser;
mod forward;
mod pool;
mod types;

pub use cascor::cascor_train;
pub use caser::caser_re_train;
pub use forward::{
    auto_forward_thinking, forward_thinking_train, prune_to_tradeoff, push_through, AftConfig,
};
pub use pool::{
    argmax_score, residual_errors, train_correlation_pool, train_loss_pool, CorrelationCandidate,
    LossCandidate,
};
pub use types::{
    CandidateMetric, CandidatePoolConfig, ConstructiveRecord, InsertKind, InsertionRecord,
    LayerPerformanceCurve, LayerPoint, PoolObjective, ReusePolicy,
};
