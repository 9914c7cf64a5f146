//! Mini-batch SGD (momentum + multiplicative weight decay) and RMSProp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{GradientSet, Network, TensorGrad};
use crate::numerics::Matrix;

/// Divisor guard inside the RMSProp update; the running average is 0 at t=0.
pub const RMSPROP_EPS: f64 = 1e-8;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Rmsprop,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Rmsprop => "rmsprop",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "rmsprop" => Ok(OptimizerKind::Rmsprop),
            other => Err(Error::config(format!("unknown optimizer: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitor {
    ValAccuracy,
    ValLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStop {
    pub monitor: Monitor,
    pub patience: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Per-step multiplicative weight decay (SGD only).
    pub weight_decay: f64,
    pub rmsprop_gamma: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop: Option<EarlyStop>,
}

impl TrainConfig {
    /// SGD defaults: eta 0.01, momentum 0.9, decay 1e-6.
    pub fn sgd() -> TrainConfig {
        TrainConfig {
            optimizer: OptimizerKind::Sgd,
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 1e-6,
            rmsprop_gamma: 0.9,
            batch_size: 128,
            max_epochs: 100,
            early_stop: None,
        }
    }

    /// RMSProp defaults: eta 0.001, gamma 0.9.
    pub fn rmsprop() -> TrainConfig {
        TrainConfig {
            optimizer: OptimizerKind::Rmsprop,
            learning_rate: 0.001,
            momentum: 0.0,
            weight_decay: 0.0,
            rmsprop_gamma: 0.9,
            batch_size: 128,
            max_epochs: 100,
            early_stop: None,
        }
    }

    pub fn for_kind(kind: OptimizerKind) -> TrainConfig {
        match kind {
            OptimizerKind::Sgd => TrainConfig::sgd(),
            OptimizerKind::Rmsprop => TrainConfig::rmsprop(),
        }
    }

    pub fn with_early_stop(mut self, monitor: Monitor, patience: usize) -> TrainConfig {
        self.early_stop = Some(EarlyStop { monitor, patience });
        self
    }

    pub fn with_max_epochs(mut self, max_epochs: usize) -> TrainConfig {
        self.max_epochs = max_epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::config("learning_rate must be positive"));
        }
        if !(0.0 < self.rmsprop_gamma && self.rmsprop_gamma < 1.0) {
            return Err(Error::config("rmsprop gamma must be in (0,1)"));
        }
        if let Some(es) = &self.early_stop {
            if es.patience == 0 {
                return Err(Error::config("patience must be >= 1"));
            }
        }
        Ok(())
    }
}

/// Per-parameter accumulators: momentum buffers for SGD, running squared
/// averages for RMSProp.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub accumulators: Vec<TensorGrad>,
    pub step: usize,
}

impl OptimizerState {
    pub fn for_network<N: Network>(net: &N) -> OptimizerState {
        let accumulators = net
            .tensors()
            .iter()
            .map(|t| TensorGrad {
                weight: Matrix::zeros(t.weight.rows(), t.weight.cols()),
                bias: vec![0.0; t.bias.len()],
            })
            .collect();
        OptimizerState {
            accumulators,
            step: 0,
        }
    }
}

/// `buffer <- mu*buffer + g; theta <- (1-lambda)*theta - eta*buffer`.
pub fn sgd_step(theta: &mut [f64], grad: &[f64], buffer: &mut [f64], cfg: &TrainConfig) {
    debug_assert_eq!(theta.len(), grad.len());
    debug_assert_eq!(theta.len(), buffer.len());
    let decay = 1.0 - cfg.weight_decay;
    for i in 0..theta.len() {
        buffer[i] = cfg.momentum * buffer[i] + grad[i];
        theta[i] = decay * theta[i] - cfg.learning_rate * buffer[i];
    }
}

/// `v <- gamma*v + (1-gamma)*g^2; theta <- theta - eta*g/(sqrt(v) + eps)`.
pub fn rmsprop_step(theta: &mut [f64], grad: &[f64], v: &mut [f64], cfg: &TrainConfig) {
    debug_assert_eq!(theta.len(), grad.len());
    debug_assert_eq!(theta.len(), v.len());
    let gamma = cfg.rmsprop_gamma;
    for i in 0..theta.len() {
        v[i] = gamma * v[i] + (1.0 - gamma) * grad[i] * grad[i];
        theta[i] -= cfg.learning_rate * grad[i] / (v[i].sqrt() + RMSPROP_EPS);
    }
}

/// Applies one optimizer step to every unfrozen tensor. Frozen tensors are
/// skipped entirely so their parameters stay bit-identical.
pub fn apply_update<N: Network>(
    net: &mut N,
    grads: &GradientSet,
    state: &mut OptimizerState,
    cfg: &TrainConfig,
) {
    let tensors = net.tensors_mut();
    assert_eq!(tensors.len(), grads.tensors.len());
    assert_eq!(tensors.len(), state.accumulators.len());
    for ((t, g), acc) in tensors
        .into_iter()
        .zip(&grads.tensors)
        .zip(&mut state.accumulators)
    {
        if t.frozen {
            continue;
        }
        match cfg.optimizer {
            OptimizerKind::Sgd => {
                sgd_step(t.weight.as_mut_slice(), g.weight.as_slice(), acc.weight.as_mut_slice(), cfg);
                sgd_step(t.bias, &g.bias, &mut acc.bias, cfg);
            }
            OptimizerKind::Rmsprop => {
                rmsprop_step(t.weight.as_mut_slice(), g.weight.as_slice(), acc.weight.as_mut_slice(), cfg);
                rmsprop_step(t.bias, &g.bias, &mut acc.bias, cfg);
            }
        }
    }
    state.step += 1;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(optimizer: OptimizerKind, lr: f64, mu: f64, lambda: f64) -> TrainConfig {
        TrainConfig {
            optimizer,
            learning_rate: lr,
            momentum: mu,
            weight_decay: lambda,
            rmsprop_gamma: 0.9,
            batch_size: 1,
            max_epochs: 1,
            early_stop: None,
        }
    }

    #[test]
    fn sgd_hand_arithmetic() {
        let c = cfg(OptimizerKind::Sgd, 0.01, 0.0, 0.0);
        let mut theta = [1.0];
        let mut buf = [0.0];
        sgd_step(&mut theta, &[0.5], &mut buf, &c);
        assert!((theta[0] - 0.995).abs() < 1e-15);
    }

    #[test]
    fn sgd_zero_grad_no_change() {
        let c = cfg(OptimizerKind::Sgd, 0.01, 0.0, 0.0);
        let mut theta = [1.5];
        let mut buf = [0.0];
        sgd_step(&mut theta, &[0.0], &mut buf, &c);
        assert_eq!(theta[0], 1.5);
    }

    #[test]
    fn sgd_momentum_two_steps() {
        let c = cfg(OptimizerKind::Sgd, 0.1, 0.9, 0.0);
        let mut theta = [0.0];
        let mut buf = [0.0];
        sgd_step(&mut theta, &[1.0], &mut buf, &c);
        assert!((theta[0] + 0.1).abs() < 1e-15); // dropped by 0.1
        sgd_step(&mut theta, &[1.0], &mut buf, &c);
        assert!((theta[0] + 0.29).abs() < 1e-15); // then by 0.19
    }

    #[test]
    fn rmsprop_hand_arithmetic() {
        let c = cfg(OptimizerKind::Rmsprop, 0.001, 0.0, 0.0);
        let mut theta = [0.0];
        let mut v = [0.0];
        rmsprop_step(&mut theta, &[2.0], &mut v, &c);
        assert!((v[0] - 0.4).abs() < 1e-15);
        assert!((theta[0] + 0.001 * 2.0 / (0.4f64.sqrt() + RMSPROP_EPS)).abs() < 1e-12);
        assert!((theta[0] + 0.0031623).abs() < 1e-6);
    }

    #[test]
    fn rmsprop_zero_grad_decays_v_only() {
        let c = cfg(OptimizerKind::Rmsprop, 0.001, 0.0, 0.0);
        let mut theta = [1.0];
        let mut v = [0.5];
        rmsprop_step(&mut theta, &[0.0], &mut v, &c);
        assert_eq!(theta[0], 1.0);
        assert!((v[0] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn rmsprop_constant_grad_step_tends_to_eta() {
        let c = cfg(OptimizerKind::Rmsprop, 0.001, 0.0, 0.0);
        let mut theta = [0.0];
        let mut v = [0.0];
        let mut last = 0.0;
        for _ in 0..200 {
            let before = theta[0];
            rmsprop_step(&mut theta, &[3.0], &mut v, &c);
            last = (theta[0] - before).abs();
        }
        assert!((last - c.learning_rate).abs() / c.learning_rate < 0.01);
    }
}
