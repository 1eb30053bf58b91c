//! Parallel Monte Carlo driver. Trials are farmed out to a thread pool but
//! keep the exact per-trial seed derivation of the sequential simulator, so
//! the numbers (and therefore the artifacts) are identical regardless of
//! the parallelism degree.

use anyhow::{Context, Result};
use csa_core::sim::{
    aggregate_point, run_trial, trial_seed, users_for_load, SimEnsemble, SimPoint, TrialStats,
};
use rayon::prelude::*;

/// Runs the same sweep as [`csa_core::sim::simulate`], distributing trials
/// over `jobs` worker threads (`None` = one per core).
pub fn simulate_parallel(
    ensemble: &SimEnsemble<'_>,
    n_slots: usize,
    g_grid: &[f64],
    trials: usize,
    base_seed: u64,
    jobs: Option<usize>,
) -> Result<Vec<SimPoint>> {
    anyhow::ensure!(trials >= 1, "trials must be at least 1");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("cannot build worker pool")?;
    let k = ensemble.k();
    pool.install(|| {
        g_grid
            .iter()
            .enumerate()
            .map(|(pi, &g)| {
                anyhow::ensure!(
                    g.is_finite() && g >= 0.0,
                    "offered loads must be finite and non-negative"
                );
                let m = users_for_load(g, n_slots, k);
                let stats: Result<Vec<TrialStats>, csa_core::Error> = (0..trials)
                    .into_par_iter()
                    .map(|t| run_trial(ensemble, m, n_slots, trial_seed(base_seed, pi, trials, t)))
                    .collect();
                Ok(aggregate_point(g, n_slots, k, m, &stats?))
            })
            .collect()
    })
}
