//! The discrete architecture space and its genetic operators.

use serde::{Deserialize, Serialize};

use crate::network::ArchitectureSpec;
use crate::numerics::{Activation, Rng};
use crate::training::OptimizerKind;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSpace {
    pub widths: Vec<usize>,
    pub depths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub optimizers: Vec<OptimizerKind>,
}

impl Default for SearchSpace {
    /// Widths 100..=1000 in steps of 50, depths 1..=10, relu/tanh, sgd/rmsprop.
    fn default() -> SearchSpace {
        SearchSpace {
            widths: (100..=1000).step_by(50).collect(),
            depths: (1..=10).collect(),
            activations: vec![Activation::Relu, Activation::Tanh],
            optimizers: vec![OptimizerKind::Sgd, OptimizerKind::Rmsprop],
        }
    }
}

impl SearchSpace {
    pub fn cardinality(&self) -> usize {
        self.widths.len() * self.depths.len() * self.activations.len() * self.optimizers.len()
    }

    pub fn contains(&self, spec: &ArchitectureSpec) -> bool {
        self.widths.contains(&spec.width)
            && self.depths.contains(&spec.depth)
            && self.activations.contains(&spec.hidden_activation)
            && self.optimizers.contains(&spec.optimizer)
    }

    /// Every point of the space, in lexicographic spec order.
    pub fn enumerate(&self) -> Vec<ArchitectureSpec> {
        let mut out = Vec::with_capacity(self.cardinality());
        for &depth in &self.depths {
            for &width in &self.widths {
                for &hidden_activation in &self.activations {
                    for &optimizer in &self.optimizers {
                        out.push(ArchitectureSpec {
                            depth,
                            width,
                            hidden_activation,
                            optimizer,
                        });
                    }
                }
            }
        }
        out.sort();
        out
    }
}

/// Uniform sample: each gene independent uniform over its choices.
pub fn sample_random(space: &SearchSpace, rng: &mut Rng) -> ArchitectureSpec {
    ArchitectureSpec {
        depth: *rng.choose(&space.depths),
        width: *rng.choose(&space.widths),
        hidden_activation: *rng.choose(&space.activations),
        optimizer: *rng.choose(&space.optimizers),
    }
}

/// Uniform crossover: each gene copied from `a` or `b` with probability 1/2.
pub fn breed(a: &ArchitectureSpec, b: &ArchitectureSpec, rng: &mut Rng) -> ArchitectureSpec {
    ArchitectureSpec {
        depth: if rng.chance(0.5) { a.depth } else { b.depth },
        width: if rng.chance(0.5) { a.width } else { b.width },
        hidden_activation: if rng.chance(0.5) {
            a.hidden_activation
        } else {
            b.hidden_activation
        },
        optimizer: if rng.chance(0.5) {
            a.optimizer
        } else {
            b.optimizer
        },
    }
}

/// With probability `chance`, resamples exactly one uniformly chosen gene
/// (possibly to its current value); otherwise returns the spec unchanged.
pub fn mutate(
    spec: &ArchitectureSpec,
    space: &SearchSpace,
    rng: &mut Rng,
    chance: f64,
) -> ArchitectureSpec {
    assert!((0.0..=1.0).contains(&chance), "chance must be in [0,1]");
    let mut out = *spec;
    if !rng.chance(chance) {
        return out;
    }
    match rng.index(4) {
        0 => out.depth = *rng.choose(&space.depths),
        1 => out.width = *rng.choose(&space.widths),
        2 => out.hidden_activation = *rng.choose(&space.activations),
        _ => out.optimizer = *rng.choose(&space.optimizers),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_is_computed() {
        let space = SearchSpace::default();
        assert_eq!(space.cardinality(), 760);
        assert_eq!(space.enumerate().len(), 760);
    }

    #[test]
    fn samples_stay_in_space() {
        let space = SearchSpace::default();
        let mut rng = Rng::new(1);
        for _ in 0..10_000 {
            let s = sample_random(&space, &mut rng);
            assert!(space.contains(&s));
            assert!(s.width % 50 == 0 && (100..=1000).contains(&s.width));
        }
    }

    #[test]
    fn sample_frequencies_near_uniform() {
        let space = SearchSpace::default();
        let mut rng = Rng::new(2);
        let n = 10_000;
        let mut width_counts = std::collections::HashMap::new();
        let mut seen_depths = std::collections::HashSet::new();
        let mut seen_acts = std::collections::HashSet::new();
        let mut seen_opts = std::collections::HashSet::new();
        for _ in 0..n {
            let s = sample_random(&space, &mut rng);
            *width_counts.entry(s.width).or_insert(0usize) += 1;
            seen_depths.insert(s.depth);
            seen_acts.insert(s.hidden_activation);
            seen_opts.insert(s.optimizer);
        }
        assert_eq!(seen_depths.len(), 10);
        assert_eq!(seen_acts.len(), 2);
        assert_eq!(seen_opts.len(), 2);
        // 5-sigma binomial bound per width bucket (p = 1/19).
        let p = 1.0 / 19.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for &w in &space.widths {
            let c = *width_counts.get(&w).unwrap_or(&0) as f64;
            assert!(
                (c - n as f64 * p).abs() <= 5.0 * sigma,
                "width {w}: count {c}"
            );
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let space = SearchSpace::default();
        let mut a = Rng::new(9);
        let mut b = Rng::new(9);
        for _ in 0..100 {
            assert_eq!(sample_random(&space, &mut a), sample_random(&space, &mut b));
        }
    }

    #[test]
    fn breed_identity_and_gene_membership() {
        let space = SearchSpace::default();
        let mut rng = Rng::new(3);
        let x = sample_random(&space, &mut rng);
        assert_eq!(breed(&x, &x, &mut rng), x);
        let y = sample_random(&space, &mut rng);
        for _ in 0..200 {
            let c = breed(&x, &y, &mut rng);
            assert!(c.depth == x.depth || c.depth == y.depth);
            assert!(c.width == x.width || c.width == y.width);
            assert!(
                c.hidden_activation == x.hidden_activation
                    || c.hidden_activation == y.hidden_activation
            );
            assert!(c.optimizer == x.optimizer || c.optimizer == y.optimizer);
        }
    }

    #[test]
    fn breed_picks_each_parent_half_the_time() {
        // Parents differ in every gene so gene origin is unambiguous.
        let a = ArchitectureSpec {
            depth: 1,
            width: 100,
            hidden_activation: Activation::Relu,
            optimizer: OptimizerKind::Sgd,
        };
        let b = ArchitectureSpec {
            depth: 2,
            width: 200,
            hidden_activation: Activation::Tanh,
            optimizer: OptimizerKind::Rmsprop,
        };
        let mut rng = Rng::new(4);
        let n = 10_000;
        let mut from_a = 0usize;
        for _ in 0..n {
            if breed(&a, &b, &mut rng).depth == a.depth {
                from_a += 1;
            }
        }
        let f = from_a as f64 / n as f64;
        assert!((f - 0.5).abs() <= 0.02, "frequency {f}");
    }

    #[test]
    fn mutate_chance_zero_is_identity() {
        let space = SearchSpace::default();
        let mut rng = Rng::new(5);
        let x = sample_random(&space, &mut rng);
        for _ in 0..100 {
            assert_eq!(mutate(&x, &space, &mut rng, 0.0), x);
        }
    }

    #[test]
    fn mutate_stays_in_space_and_changes_at_most_one_gene() {
        let space = SearchSpace::default();
        let mut rng = Rng::new(6);
        for _ in 0..1000 {
            let x = sample_random(&space, &mut rng);
            let m = mutate(&x, &space, &mut rng, 1.0);
            assert!(space.contains(&m));
            let diffs = usize::from(m.depth != x.depth)
                + usize::from(m.width != x.width)
                + usize::from(m.hidden_activation != x.hidden_activation)
                + usize::from(m.optimizer != x.optimizer);
            assert!(diffs <= 1);
        }
    }

    #[test]
    fn mutate_chance_one_differ_fraction() {
        // Expected differ fraction = 1 - mean over genes of 1/|choices|
        //                          = 1 - (1/4)(1/10 + 1/19 + 1/2 + 1/2)
        //                          ≈ 0.7118 (the resample may repeat the
        //                            original value).
        let space = SearchSpace::default();
        let expected = 1.0 - 0.25 * (1.0 / 10.0 + 1.0 / 19.0 + 0.5 + 0.5);
        let mut rng = Rng::new(7);
        let n = 10_000;
        let mut differ = 0usize;
        for _ in 0..n {
            let x = sample_random(&space, &mut rng);
            if mutate(&x, &space, &mut rng, 1.0) != x {
                differ += 1;
            }
        }
        let f = differ as f64 / n as f64;
        assert!((f - expected).abs() <= 0.02, "fraction {f} vs {expected}");
    }
}
