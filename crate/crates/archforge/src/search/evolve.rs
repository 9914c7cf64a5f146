//! Evolutionary search: retain the fittest, keep a few lucky stragglers, and
//! refill the population with bred-then-mutated children.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::ArchitectureSpec;
use crate::numerics::Rng;

use super::fitness::{evaluate_many, rank, EvaluatedSpec, FitnessConfig};
use super::space::{breed, mutate, sample_random, SearchSpace};

const DEDUPE_RETRIES: usize = 32;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub population_size: usize,
    pub mutation_chance: f64,
    pub retain_rate: f64,
    pub random_select_rate: f64,
    /// Forbid duplicate specs within a generation.
    pub dedupe: bool,
    /// Total spec evaluations before the search stops.
    pub budget: usize,
    pub fitness: FitnessConfig,
}

impl Default for EvolutionParams {
    fn default() -> EvolutionParams {
        EvolutionParams {
            population_size: 50,
            mutation_chance: 0.10,
            retain_rate: 0.40,
            random_select_rate: 0.10,
            dedupe: true,
            budget: 200,
            fitness: FitnessConfig::default(),
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config("population_size must be >= 2"));
        }
        for (name, rate) in [
            ("mutation_chance", self.mutation_chance),
            ("retain_rate", self.retain_rate),
            ("random_select_rate", self.random_select_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config(format!("{name} must be in [0,1]")));
            }
        }
        if self.budget == 0 {
            return Err(Error::config("budget must be >= 1"));
        }
        Ok(())
    }

    /// `ceil(retain_rate * population_size)` fittest kept as parents.
    pub fn retain_count(&self) -> usize {
        (self.retain_rate * self.population_size as f64).ceil() as usize
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionOutcome {
    /// Final population, ranked by fitness.
    pub population: Vec<EvaluatedSpec>,
    /// Every evaluation performed, tagged with its generation.
    pub history: Vec<EvaluatedSpec>,
    pub generations: usize,
    pub evaluations: usize,
}

/// Samples a spec that avoids `taken` (bounded retries, then unconstrained).
fn sample_fresh(
    space: &SearchSpace,
    taken: &HashSet<ArchitectureSpec>,
    rng: &mut Rng,
) -> ArchitectureSpec {
    for _ in 0..DEDUPE_RETRIES {
        let s = sample_random(space, rng);
        if !taken.contains(&s) {
            return s;
        }
    }
    sample_random(space, rng)
}

/// Runs the evolutionary search until `budget` evaluations are spent.
pub fn evolve(
    space: &SearchSpace,
    params: &EvolutionParams,
    train: &Dataset,
    val: &Dataset,
    seed: u64,
) -> Result<EvolutionOutcome> {
    params.validate()?;
    let master = Rng::new(seed);
    let mut rng = master.derive(0);

    // Generation 0: uniform samples; with dedupe, collisions are resampled.
    let mut taken = HashSet::new();
    let mut population_specs = Vec::with_capacity(params.population_size);
    for _ in 0..params.population_size {
        let s = if params.dedupe {
            sample_fresh(space, &taken, &mut rng)
        } else {
            sample_random(space, &mut rng)
        };
        taken.insert(s);
        population_specs.push(s);
    }

    let mut history: Vec<EvaluatedSpec> = Vec::new();
    let mut evaluations = 0usize;
    let mut generation = 0usize;
    // Retained members keep their records; only newcomers get evaluated.
    let mut population: Vec<EvaluatedSpec> = Vec::new();

    loop {
        // Evaluate the members that do not carry a fitness yet.
        let fresh: Vec<ArchitectureSpec> = population_specs
            .iter()
            .skip(population.len())
            .copied()
            .collect();
        let eval_seed = master.derive(1 + generation as u64).seed();
        let mut evaluated = evaluate_many(&fresh, train, val, &params.fitness, eval_seed)?;
        for e in &mut evaluated {
            e.generation = Some(generation);
        }
        evaluations += evaluated.len();
        history.extend(evaluated.iter().cloned());
        population.extend(evaluated);
        population = rank(population);

        if evaluations >= params.budget {
            return Ok(EvolutionOutcome {
                population,
                history,
                generations: generation + 1,
                evaluations,
            });
        }

        // Selection: fittest `retain_count`, plus lucky non-retained members.
        let retain = params.retain_count().min(population.len());
        let mut parents: Vec<EvaluatedSpec> = population[..retain].to_vec();
        for straggler in &population[retain..] {
            if rng.chance(params.random_select_rate) {
                parents.push(straggler.clone());
            }
        }

        // Refill with bred-then-mutated children of uniform parent pairs.
        let mut next_specs: Vec<ArchitectureSpec> = parents.iter().map(|p| p.spec).collect();
        let mut taken: HashSet<ArchitectureSpec> = next_specs.iter().copied().collect();
        while next_specs.len() < params.population_size {
            let mut child = None;
            for _ in 0..DEDUPE_RETRIES {
                let i = rng.index(parents.len());
                let j = if parents.len() >= 2 {
                    // Self-pairing forbidden when two or more parents exist.
                    let mut j = rng.index(parents.len() - 1);
                    if j >= i {
                        j += 1;
                    }
                    j
                } else {
                    i
                };
                let bred = breed(&parents[i].spec, &parents[j].spec, &mut rng);
                let mutated = mutate(&bred, space, &mut rng, params.mutation_chance);
                if !params.dedupe || !taken.contains(&mutated) {
                    child = Some(mutated);
                    break;
                }
            }
            // Bounded re-breeding failed: fall back to a random sample.
            let child = child.unwrap_or_else(|| sample_fresh(space, &taken, &mut rng));
            taken.insert(child);
            next_specs.push(child);
        }

        population = parents; // elitism: retained members keep their fitness
        population_specs = next_specs;
        generation += 1;
    }
}
