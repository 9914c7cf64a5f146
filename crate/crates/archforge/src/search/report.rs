//! Coverage analytics for a finished search: how much of the space was
//! visited and how evaluations spread across each dimension.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::network::ArchitectureSpec;

use super::fitness::EvaluatedSpec;
use super::space::SearchSpace;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub evaluations: usize,
    pub distinct_specs: usize,
    /// Distinct specs / space cardinality.
    pub space_coverage: f64,
    /// Fraction of evaluations whose spec was in the initial population.
    pub in_initial_fraction: f64,
    pub width_histogram: BTreeMap<usize, usize>,
    pub depth_histogram: BTreeMap<usize, usize>,
    pub activation_histogram: BTreeMap<String, usize>,
    pub optimizer_histogram: BTreeMap<String, usize>,
}

/// Summarizes a search history. An empty history yields an all-zero report.
pub fn exploration_report(
    history: &[EvaluatedSpec],
    space: &SearchSpace,
    initial_population: &[ArchitectureSpec],
) -> ExplorationReport {
    let initial: HashSet<&ArchitectureSpec> = initial_population.iter().collect();
    let mut distinct = HashSet::new();
    let mut width_histogram = BTreeMap::new();
    let mut depth_histogram = BTreeMap::new();
    let mut activation_histogram = BTreeMap::new();
    let mut optimizer_histogram = BTreeMap::new();
    let mut in_initial = 0usize;
    for e in history {
        distinct.insert(e.spec);
        *width_histogram.entry(e.spec.width).or_insert(0) += 1;
        *depth_histogram.entry(e.spec.depth).or_insert(0) += 1;
        *activation_histogram
            .entry(e.spec.hidden_activation.name().to_string())
            .or_insert(0) += 1;
        *optimizer_histogram
            .entry(e.spec.optimizer.name().to_string())
            .or_insert(0) += 1;
        if initial.contains(&e.spec) {
            in_initial += 1;
        }
    }
    let n = history.len();
    ExplorationReport {
        evaluations: n,
        distinct_specs: distinct.len(),
        space_coverage: distinct.len() as f64 / space.cardinality() as f64,
        in_initial_fraction: if n == 0 { 0.0 } else { in_initial as f64 / n as f64 },
        width_histogram,
        depth_histogram,
        activation_histogram,
        optimizer_histogram,
    }
}

impl ExplorationReport {
    /// Long-format CSV: `dimension,value,count`.
    pub fn histograms_csv(&self) -> String {
        let mut out = String::from("dimension,value,count\n");
        for (v, c) in &self.width_histogram {
            out.push_str(&format!("width,{v},{c}\n"));
        }
        for (v, c) in &self.depth_histogram {
            out.push_str(&format!("depth,{v},{c}\n"));
        }
        for (v, c) in &self.activation_histogram {
            out.push_str(&format!("activation,{v},{c}\n"));
        }
        for (v, c) in &self.optimizer_histogram {
            out.push_str(&format!("optimizer,{v},{c}\n"));
        }
        out
    }
}
