//! Batch execution of independent scenario runs. Each run owns its engine
//! and nodes; results are collected in input order.

use crate::scenario::{run_scenario, RunOutput, Scenario};

pub fn run_batch_sequential(scenarios: &[Scenario]) -> Vec<RunOutput> {
    scenarios.iter().map(run_scenario).collect()
}

#[cfg(feature = "parallel")]
pub fn run_batch_parallel(scenarios: &[Scenario]) -> Vec<RunOutput> {
    use rayon::prelude::*;
    scenarios.par_iter().map(run_scenario).collect()
}

/// Parallel when the `parallel` feature is enabled, sequential otherwise.
pub fn run_batch(scenarios: &[Scenario]) -> Vec<RunOutput> {
    #[cfg(feature = "parallel")]
    {
        run_batch_parallel(scenarios)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_batch_sequential(scenarios)
    }
}

/// Copies of `base` differing only in seed.
pub fn seed_variants(base: &Scenario, seeds: impl IntoIterator<Item = u64>) -> Vec<Scenario> {
    seeds
        .into_iter()
        .map(|seed| Scenario {
            seed,
            ..base.clone()
        })
        .collect()
}
