//! A point in the discrete architecture search space.

use serde::{Deserialize, Serialize};

use crate::numerics::Activation;
use crate::training::OptimizerKind;

/// Uniform-width layered architecture: `depth` hidden layers of `width` units.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ArchitectureSpec {
    pub depth: usize,
    pub width: usize,
    pub hidden_activation: Activation,
    pub optimizer: OptimizerKind,
}

impl ArchitectureSpec {
    /// Hidden layer plan for `build_layered`.
    pub fn hidden_plan(&self) -> Vec<(usize, Activation)> {
        vec![(self.width, self.hidden_activation); self.depth]
    }
}

impl std::fmt::Display for ArchitectureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{} {} {}",
            self.depth,
            self.width,
            self.hidden_activation.name(),
            self.optimizer.name()
        )
    }
}
