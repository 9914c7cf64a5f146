//! Fitness evaluation and random search over the architecture space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;
use crate::network::{build_layered, ArchitectureSpec, Network};
use crate::numerics::Rng;
use crate::training::{fit, RunRecord, TrainConfig};

use super::space::{sample_random, SearchSpace};

/// How many short trainings each spec gets and how long each runs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitnessConfig {
    /// Independent trainings per spec (different initial weights).
    pub runs: usize,
    /// Epochs per run; no early stopping.
    pub epochs: usize,
}

impl Default for FitnessConfig {
    fn default() -> FitnessConfig {
        FitnessConfig { runs: 3, epochs: 3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluatedSpec {
    pub spec: ArchitectureSpec,
    /// Mean final validation accuracy over the runs; 0 when any run diverged.
    pub fitness: f64,
    pub runs: Vec<RunRecord>,
    pub diverged: bool,
    /// Generation index (evolution only).
    pub generation: Option<usize>,
    pub seconds: f64,
}

/// Trains the spec `cfg.runs` times for exactly `cfg.epochs` epochs and
/// averages the final validation accuracies. A diverged run pins fitness to 0.
pub fn evaluate_fitness(
    spec: &ArchitectureSpec,
    train: &Dataset,
    val: &Dataset,
    cfg: &FitnessConfig,
    seed: u64,
) -> Result<EvaluatedSpec> {
    assert!(cfg.runs >= 1 && cfg.epochs >= 1);
    let started = std::time::Instant::now();
    let master = Rng::new(seed);
    let mut records = Vec::with_capacity(cfg.runs);
    let mut diverged = false;
    let mut acc_sum = 0.0;
    for run in 0..cfg.runs {
        let mut rng = master.derive(run as u64);
        let mut net = build_layered(train.input_dim(), &spec.hidden_plan(), train.class_count)?;
        net.init_weights(&mut rng);
        let train_cfg = TrainConfig::for_kind(spec.optimizer).with_max_epochs(cfg.epochs);
        let record = fit(&mut net, train, val, &train_cfg, &mut rng)?;
        diverged |= record.diverged;
        acc_sum += record.final_val_acc();
        records.push(record);
    }
    let fitness = if diverged {
        0.0
    } else {
        acc_sum / cfg.runs as f64
    };
    Ok(EvaluatedSpec {
        spec: *spec,
        fitness,
        runs: records,
        diverged,
        generation: None,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Evaluates many specs in parallel; spec `i` gets the seed derived from
/// `(seed, i)` so results do not depend on scheduling.
pub fn evaluate_many(
    specs: &[ArchitectureSpec],
    train: &Dataset,
    val: &Dataset,
    cfg: &FitnessConfig,
    seed: u64,
) -> Result<Vec<EvaluatedSpec>> {
    let master = Rng::new(seed);
    specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| evaluate_fitness(spec, train, val, cfg, master.derive(i as u64).seed()))
        .collect()
}

/// Sorts by fitness descending; ties break lexicographically on the spec so
/// the ranking is deterministic.
pub fn rank(mut evaluated: Vec<EvaluatedSpec>) -> Vec<EvaluatedSpec> {
    evaluated.sort_by(|a, b| {
        b.fitness
            .partial_cmp(&a.fitness)
            .expect("fitness is finite")
            .then_with(|| a.spec.cmp(&b.spec))
    });
    evaluated
}

/// Samples `n` specs (duplicates permitted), evaluates each, and returns them
/// ranked by fitness.
pub fn random_search(
    space: &SearchSpace,
    n: usize,
    train: &Dataset,
    val: &Dataset,
    cfg: &FitnessConfig,
    seed: u64,
) -> Result<Vec<EvaluatedSpec>> {
    assert!(n >= 1);
    let mut rng = Rng::new(seed);
    let specs: Vec<ArchitectureSpec> = (0..n).map(|_| sample_random(space, &mut rng)).collect();
    let evaluated = evaluate_many(&specs, train, val, cfg, rng.derive(u64::MAX).seed())?;
    Ok(rank(evaluated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_polygons;
    use crate::numerics::Activation;
    use crate::training::OptimizerKind;

    fn toy_split() -> (Dataset, Dataset) {
        let data = synthetic_polygons(300, 99).unwrap();
        data.split(0.8, &mut Rng::new(99)).unwrap()
    }

    #[test]
    fn fitness_in_unit_interval_and_deterministic() {
        let (train, val) = toy_split();
        let spec = ArchitectureSpec {
            depth: 1,
            width: 8,
            hidden_activation: Activation::Tanh,
            optimizer: OptimizerKind::Rmsprop,
        };
        let cfg = FitnessConfig { runs: 2, epochs: 2 };
        let a = evaluate_fitness(&spec, &train, &val, &cfg, 5).unwrap();
        let b = evaluate_fitness(&spec, &train, &val, &cfg, 5).unwrap();
        assert!((0.0..=1.0).contains(&a.fitness));
        assert_eq!(a.fitness, b.fitness);
        assert_eq!(a.runs.len(), 2);
        assert_eq!(a.runs[0].stopped_epoch, 2);
    }

    #[test]
    fn learnable_task_scores_high() {
        // A 1x100 tanh rmsprop net must pass 0.9 on the polygon task. The
        // default rmsprop step caps at eta per parameter per update, so the
        // sharp polygon boundary needs many epochs to carve out.
        let data = synthetic_polygons(2000, 11).unwrap();
        let (train, val) = data.split(0.8, &mut Rng::new(11)).unwrap();
        let spec = ArchitectureSpec {
            depth: 1,
            width: 100,
            hidden_activation: Activation::Tanh,
            optimizer: OptimizerKind::Rmsprop,
        };
        let cfg = FitnessConfig {
            runs: 1,
            epochs: 3000,
        };
        let e = evaluate_fitness(&spec, &train, &val, &cfg, 1).unwrap();
        assert!(e.fitness > 0.9, "fitness {}", e.fitness);
    }

    #[test]
    fn ranking_is_sorted_and_a_permutation() {
        let (train, val) = toy_split();
        let space = SearchSpace {
            widths: vec![4, 8],
            depths: vec![1, 2],
            activations: vec![Activation::Relu, Activation::Tanh],
            optimizers: vec![OptimizerKind::Sgd, OptimizerKind::Rmsprop],
        };
        let cfg = FitnessConfig { runs: 1, epochs: 1 };
        let ranked = random_search(&space, 6, &train, &val, &cfg, 3).unwrap();
        assert_eq!(ranked.len(), 6);
        for pair in ranked.windows(2) {
            assert!(pair[0].fitness >= pair[1].fitness);
        }
    }

    #[test]
    fn rank_tie_break_is_lexicographic() {
        let mk = |depth, fitness| EvaluatedSpec {
            spec: ArchitectureSpec {
                depth,
                width: 100,
                hidden_activation: Activation::Relu,
                optimizer: OptimizerKind::Sgd,
            },
            fitness,
            runs: vec![],
            diverged: false,
            generation: None,
            seconds: 0.0,
        };
        let ranked = rank(vec![mk(3, 0.5), mk(1, 0.5), mk(2, 0.7)]);
        assert_eq!(ranked[0].spec.depth, 2);
        assert_eq!(ranked[1].spec.depth, 1);
        assert_eq!(ranked[2].spec.depth, 3);
    }
}
