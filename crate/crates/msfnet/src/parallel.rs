//! Parallel fan-out for grids, sweeps and Monte Carlo runs. Work items are
//! pure, and results are collected in index order, so output never depends
//! on the worker count.

use rayon::prelude::*;

use msfnet_core::design::{sweep_row, SweepFamily, SweepRow};
use msfnet_core::model::PlantModel;
use msfnet_core::msf::{grid_point, GridAxis, IntervalSearch, MsfPoint};
use msfnet_core::verify::{stability_trial, trial_seed, ProbabilityEstimate, TrialConfig};

/// Environment variable capping the worker count; `0` or unset means automatic.
pub const THREADS_ENV: &str = "MSF_THREADS";

pub fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

pub fn sigma_grid(model: &PlantModel, lambdas: &GridAxis, mus: &GridAxis) -> msfnet_core::Result<Vec<MsfPoint>> {
    thread_pool().install(|| {
        (0..lambdas.steps * mus.steps)
            .into_par_iter()
            .map(|idx| grid_point(model, lambdas, mus, idx))
            .collect()
    })
}

pub fn norm_sweep(
    model: &PlantModel,
    family: SweepFamily,
    sizes: std::ops::RangeInclusive<usize>,
    search: &IntervalSearch,
    margin: f64,
) -> Vec<SweepRow> {
    let sizes: Vec<usize> = sizes.collect();
    thread_pool().install(|| {
        sizes
            .par_iter()
            .map(|&n| sweep_row(model, family, n, search, margin))
            .collect()
    })
}

pub fn stability_probability(model: &PlantModel, cfg: &TrialConfig, trials: u64, master_seed: u64) -> ProbabilityEstimate {
    assert!(trials > 0);
    let successes = thread_pool().install(|| {
        (0..trials)
            .into_par_iter()
            .filter(|&k| stability_trial(model, cfg, trial_seed(master_seed, k)))
            .count()
    });
    ProbabilityEstimate::from_counts(successes as u64, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use msfnet_core::design::DesignMethod;
    use msfnet_core::model::reference_plant;

    #[test]
    fn parallel_grid_matches_sequential() {
        let p = reference_plant();
        let ax = GridAxis::new(-4.0, 4.0, 9).unwrap();
        let seq = msfnet_core::msf::sigma_grid(&p, &ax, &ax).unwrap();
        assert_eq!(sigma_grid(&p, &ax, &ax).unwrap(), seq);
    }

    #[test]
    fn parallel_probability_matches_sequential() {
        let p = reference_plant();
        let cfg = TrialConfig {
            nodes: 5,
            p: 0.5,
            coupling: 1.0,
            method: DesignMethod::Weighted,
            search: IntervalSearch::default(),
            margin: 0.01,
        };
        let seq = msfnet_core::verify::stability_probability(&p, &cfg, 12, 5).unwrap();
        assert_eq!(stability_probability(&p, &cfg, 12, 5), seq);
    }
}
