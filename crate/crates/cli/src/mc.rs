//! Parallel Monte Carlo drivers.
//!
//! Work is split across a rayon pool but every per-path result is
//! collected back in path-index order and reduced sequentially, so results
//! depend only on the configuration and seed.

use ccds_core::analytics::{cva_structure, exposure_profile, path_loss, summarize_losses};
use ccds_core::market::simulate_path;
use ccds_core::{CvaResult, DefaultModel, ExposureProfile, PathConfig, PathSet, StructureConfig};
use rayon::prelude::*;

use crate::error::CliError;

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::validation("threads", "must be at least 1")),
        Some(n) => {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Engine(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn simulate_paths_parallel(config: &PathConfig) -> Result<PathSet, CliError> {
    config.validate()?;
    let paths = (0..config.n_paths).into_par_iter().map(|i| simulate_path(config, i)).collect();
    Ok(PathSet { grid: config.grid.clone(), paths })
}

pub fn cva_parallel(
    paths: &PathSet,
    model: &DefaultModel,
    rate: f64,
    cfg: &StructureConfig,
) -> Result<CvaResult, CliError> {
    let cfg = cva_structure(cfg, &paths.grid, model)?;
    let losses =
        paths.paths.par_iter().map(|p| path_loss(p, &paths.grid, model, rate, &cfg)).collect::<Result<Vec<_>, _>>()?;
    Ok(summarize_losses(&losses, cfg.kind(), model)?)
}

pub struct CvaRun {
    pub results: Vec<CvaResult>,
    pub profiles: Vec<ExposureProfile>,
}

/// CVA and exposure profile for each structure on one shared path set.
pub fn run_cva(
    config: &PathConfig,
    model: &DefaultModel,
    rate: f64,
    structures: &[StructureConfig],
    threads: Option<usize>,
) -> Result<CvaRun, CliError> {
    with_threads(threads, || {
        let paths = simulate_paths_parallel(config)?;
        let mut results = Vec::with_capacity(structures.len());
        let mut profiles = Vec::with_capacity(structures.len());
        for cfg in structures {
            results.push(cva_parallel(&paths, model, rate, cfg)?);
            profiles.push(exposure_profile(&paths, cfg)?);
        }
        Ok(CvaRun { results, profiles })
    })?
}

#[cfg(test)]
mod tests {
    use super::*;
    use ccds_core::market::simulate_mtm_paths;
    use ccds_core::{cva, Lgd, Money, Schedule, StructureKind, TimeGrid};

    #[test]
    fn parallel_matches_sequential() {
        let config = PathConfig {
            initial_mtm: 1e6,
            volatility: 20e6,
            drift: 0.0,
            grid: TimeGrid::uniform(5.0, 20).unwrap(),
            n_paths: 3000,
            seed: 11,
        };
        let model = DefaultModel::new(0.1, Lgd::new(0.45).unwrap()).unwrap();
        let cfg = StructureConfig::standard(
            StructureKind::Baseline,
            Money::from_major(1),
            Schedule::annual(5, 0.0, 0.0).unwrap(),
            Lgd::ONE,
        )
        .unwrap();
        let seq = simulate_mtm_paths(&config).unwrap();
        for threads in [1, 3] {
            let par = with_threads(Some(threads), || simulate_paths_parallel(&config)).unwrap().unwrap();
            assert_eq!(par, seq);
            let a = with_threads(Some(threads), || cva_parallel(&par, &model, 0.02, &cfg)).unwrap().unwrap();
            assert_eq!(a, cva(&seq, &model, 0.02, &cfg).unwrap());
        }
        assert!(with_threads(Some(0), || ()).is_err());
    }
}
