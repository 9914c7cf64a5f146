//! Architecture search: the discrete space, random search, evolutionary
//! search, and exploration analytics.

mod evolve;
mod fitness;
mod report;
mod space;

pub use evolve::{evolve, EvolutionOutcome, EvolutionParams};
pub use fitness::{
    evaluate_fitness, evaluate_many, random_search, rank, EvaluatedSpec, FitnessConfig,
};
pub use report::{exploration_report, ExplorationReport};
pub use space::{breed, mutate, sample_random, SearchSpace};
