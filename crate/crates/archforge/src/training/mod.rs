//! Loss functions, optimizers, and the mini-batch training loop.

mod fit;
mod loss;
mod optimizer;
mod record;

pub use fit::{evaluate, fit, EarlyStopTracker};
pub use loss::{
    accuracy, argmax, crossentropy, crossentropy_grad, error_correlation,
    error_correlation_value_grad, PROB_CLAMP,
};
pub use optimizer::{
    apply_update, rmsprop_step, sgd_step, EarlyStop, Monitor, OptimizerKind, OptimizerState,
    TrainConfig, RMSPROP_EPS,
};
pub use record::{EpochRecord, RunRecord, CSV_HEADER};
