//! Market states, default scenarios and the stochastic drivers.
//!
//! The Back Swap MtM for O follows an arithmetic Brownian motion (it is
//! signed and crosses zero). C's default time is exponential with a
//! constant hazard rate, independent of the MtM path. Discounting is flat.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ValidationError;
use crate::money::{Lgd, Money};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("time {0} is negative")]
    NegativeTime(f64),
    #[error("time grid must start at 0 and be strictly increasing with at least two points")]
    InvalidGrid,
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValuationMode {
    Curve,
    DirectMtm,
}

/// Flat discounting plus, in direct mode, the simulated Back Swap value
/// for O. Without that value swaps are valued off their schedules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub flat_discount_rate: f64,
    #[serde(rename = "back_swap_mtm_for_O", default, skip_serializing_if = "Option::is_none")]
    pub back_swap_mtm_for_o: Option<Money>,
}

impl MarketState {
    pub fn curve(flat_discount_rate: f64) -> Self {
        MarketState { flat_discount_rate, back_swap_mtm_for_o: None }
    }

    pub fn direct(flat_discount_rate: f64, back_swap_mtm_for_o: Money) -> Self {
        MarketState { flat_discount_rate, back_swap_mtm_for_o: Some(back_swap_mtm_for_o) }
    }

    pub fn mode(&self) -> ValuationMode {
        match self.back_swap_mtm_for_o {
            Some(_) => ValuationMode::DirectMtm,
            None => ValuationMode::Curve,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !self.flat_discount_rate.is_finite() {
            return Err(ValidationError::Invalid { field: "discount_rate", reason: "must be finite" });
        }
        Ok(())
    }
}

/// `exp(-rate * t)`.
pub fn discount_factor(rate: f64, t: f64) -> Result<f64, MarketError> {
    if t < 0.0 || t.is_nan() {
        return Err(MarketError::NegativeTime(t));
    }
    Ok(libm::exp(-rate * t))
}

/// Constant-intensity default of C with a fixed loss given default.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultModel {
    hazard_rate: f64,
    lgd: Lgd,
}

impl DefaultModel {
    pub fn new(hazard_rate: f64, lgd: Lgd) -> Result<Self, ValidationError> {
        if !hazard_rate.is_finite() || hazard_rate < 0.0 {
            return Err(ValidationError::OutOfRange {
                field: "hazard_rate",
                value: hazard_rate,
                expected: "a finite non-negative intensity",
            });
        }
        Ok(DefaultModel { hazard_rate, lgd })
    }

    pub fn hazard_rate(&self) -> f64 {
        self.hazard_rate
    }

    pub fn lgd(&self) -> Lgd {
        self.lgd
    }

    pub fn survival_probability(&self, horizon: f64) -> f64 {
        libm::exp(-self.hazard_rate * horizon)
    }
}

/// C's default time (if any) and the market observed then.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultScenario {
    pub tau: Option<f64>,
    pub market_at_tau: MarketState,
    pub discount_to_tau: f64,
}

impl DefaultScenario {
    pub fn at_default(tau: f64, market: MarketState) -> Result<Self, MarketError> {
        market.validate()?;
        let discount_to_tau = discount_factor(market.flat_discount_rate, tau)?;
        Ok(DefaultScenario { tau: Some(tau), market_at_tau: market, discount_to_tau })
    }

    pub fn no_default(market: MarketState) -> Self {
        DefaultScenario { tau: None, market_at_tau: market, discount_to_tau: 1.0 }
    }

    /// Checks the type invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<(), MarketError> {
        self.market_at_tau.validate()?;
        match self.tau {
            Some(tau) => {
                let expected = discount_factor(self.market_at_tau.flat_discount_rate, tau)?;
                if self.discount_to_tau != expected {
                    return Err(ValidationError::Invalid {
                        field: "discount_to_tau",
                        reason: "must equal exp(-discount_rate * tau)",
                    }
                    .into());
                }
            }
            None => {
                if self.discount_to_tau != 1.0 {
                    return Err(ValidationError::Invalid {
                        field: "discount_to_tau",
                        reason: "must be 1 when there is no default",
                    }
                    .into());
                }
            }
        }
        Ok(())
    }
}

/// Simulation dates: starts at 0, strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self, MarketError> {
        let ok = times.len() >= 2
            && times[0] == 0.0
            && times.windows(2).all(|w| w[1] > w[0])
            && times.iter().all(|t| t.is_finite());
        if ok {
            Ok(TimeGrid(times))
        } else {
            Err(MarketError::InvalidGrid)
        }
    }

    /// `steps + 1` equally spaced dates from 0 to `horizon`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self, MarketError> {
        if steps == 0 || horizon.is_nan() || horizon <= 0.0 {
            return Err(MarketError::InvalidGrid);
        }
        TimeGrid::new((0..=steps).map(|k| k as f64 * horizon / steps as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Index of the first date at or after `t`, if `t` is within the grid.
    pub fn first_at_or_after(&self, t: f64) -> Option<usize> {
        let k = self.0.partition_point(|&s| s < t);
        (k < self.0.len()).then_some(k)
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = MarketError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        TimeGrid::new(v)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.0
    }
}

/// Arithmetic Brownian motion for the Back Swap MtM seen by O, in major
/// currency units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub initial_mtm: f64,
    pub volatility: f64,
    pub drift: f64,
    pub grid: TimeGrid,
    pub n_paths: u64,
    pub seed: u64,
}

impl PathConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if !self.volatility.is_finite() || self.volatility < 0.0 {
            return Err(ValidationError::OutOfRange {
                field: "volatility",
                value: self.volatility,
                expected: "a finite non-negative volatility",
            });
        }
        if !self.initial_mtm.is_finite() || !self.drift.is_finite() {
            return Err(ValidationError::Invalid { field: "initial_mtm", reason: "must be finite" });
        }
        if self.n_paths == 0 {
            return Err(ValidationError::Invalid { field: "n_paths", reason: "at least one path is required" });
        }
        Ok(())
    }
}

/// One simulated MtM path on its set's grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtmPath {
    pub values: Vec<f64>,
    pub path_index: u64,
    pub seed: u64,
}

/// Paths sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSet {
    pub grid: TimeGrid,
    pub paths: Vec<MtmPath>,
}

impl PathSet {
    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Path `path_index` of `config`. Step `k` uses the normal keyed by
/// `(seed, path_index, k - 1)`.
pub fn simulate_path(config: &PathConfig, path_index: u64) -> MtmPath {
    let times = config.grid.times();
    let mut rng = rng::stream(config.seed, Domain::Mtm, path_index);
    let mut values = Vec::with_capacity(times.len());
    let mut x = config.initial_mtm;
    values.push(x);
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let z = rng::standard_normal(&mut rng);
        x += config.drift * dt + config.volatility * libm::sqrt(dt) * z;
        values.push(x);
    }
    MtmPath { values, path_index, seed: config.seed }
}

pub fn simulate_mtm_paths(config: &PathConfig) -> Result<PathSet, MarketError> {
    config.validate()?;
    let paths = (0..config.n_paths).map(|i| simulate_path(config, i)).collect();
    Ok(PathSet { grid: config.grid.clone(), paths })
}

/// Inverse-transform exponential default time from `u` in `(0, 1]`.
/// `u = 1` is an immediate default.
pub fn default_time_from_uniform(u: f64, hazard_rate: f64, horizon: f64) -> Option<f64> {
    if hazard_rate <= 0.0 {
        return None;
    }
    let tau = -libm::log(u) / hazard_rate;
    (tau <= horizon).then_some(tau)
}

/// Default time of C on path `path_index`, drawn from its own stream so it
/// is independent of the MtM path with the same index.
pub fn simulate_default_time(model: &DefaultModel, horizon: f64, seed: u64, path_index: u64) -> Option<f64> {
    if model.hazard_rate == 0.0 {
        return None;
    }
    let mut rng = rng::stream(seed, Domain::Default, path_index);
    let u = rng::uniform_open_closed(&mut rng);
    default_time_from_uniform(u, model.hazard_rate, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(initial: f64, vol: f64, drift: f64, n_paths: u64) -> PathConfig {
        PathConfig {
            initial_mtm: initial,
            volatility: vol,
            drift,
            grid: TimeGrid::uniform(2.0, 8).unwrap(),
            n_paths,
            seed: 9,
        }
    }

    #[test]
    fn discount_examples() {
        assert_eq!(discount_factor(0.07, 0.0).unwrap(), 1.0);
        assert_eq!(discount_factor(0.0, 12.0).unwrap(), 1.0);
        assert!((discount_factor(0.01, 1.0).unwrap() - 0.990050).abs() < 1e-6);
        assert!(discount_factor(0.01, -1.0).is_err());
    }

    #[test]
    fn degenerate_diffusions() {
        let flat = simulate_mtm_paths(&config(100.0, 0.0, 0.0, 5)).unwrap();
        assert!(flat.paths.iter().all(|p| p.values.iter().all(|&v| v == 100.0)));

        let drift = simulate_mtm_paths(&config(0.0, 0.0, 10.0, 5)).unwrap();
        for p in &drift.paths {
            assert!((p.values.last().unwrap() - 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn path_config_validation() {
        assert!(simulate_mtm_paths(&config(0.0, -1.0, 0.0, 5)).is_err());
        assert!(simulate_mtm_paths(&config(0.0, 1.0, 0.0, 0)).is_err());
        assert!(TimeGrid::new(alloc::vec![]).is_err());
        assert!(TimeGrid::new(alloc::vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(alloc::vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn paths_are_reproducible_in_isolation() {
        let cfg = config(0.0, 5.0, 1.0, 20);
        let all = simulate_mtm_paths(&cfg).unwrap();
        assert_eq!(simulate_path(&cfg, 13), all.paths[13]);
        // step k of path 4 from the keyed generator
        let z = rng::normal_at(cfg.seed, Domain::Mtm, 4, 2);
        let dt = 0.25;
        let p = &all.paths[4];
        let expected = p.values[2] + cfg.drift * dt + cfg.volatility * libm::sqrt(dt) * z;
        assert_eq!(p.values[3].to_bits(), expected.to_bits());
    }

    #[test]
    fn default_time_boundaries() {
        let m = DefaultModel::new(0.0, Lgd::new(0.6).unwrap()).unwrap();
        assert!((0..100).all(|i| simulate_default_time(&m, 10.0, 1, i).is_none()));
        assert_eq!(default_time_from_uniform(1.0, 0.02, 10.0), Some(0.0));
        assert_eq!(default_time_from_uniform(0.5, 0.0, 10.0), None);
        assert!(default_time_from_uniform(1e-9, 0.02, 10.0).is_none());
        assert!(DefaultModel::new(-0.1, Lgd::ZERO).is_err());
    }

    #[test]
    fn grid_lookup() {
        let g = TimeGrid::uniform(10.0, 40).unwrap();
        assert_eq!(g.first_at_or_after(0.0), Some(0));
        assert_eq!(g.first_at_or_after(0.1), Some(1));
        assert_eq!(g.first_at_or_after(0.25), Some(1));
        assert_eq!(g.first_at_or_after(10.0), Some(40));
        assert_eq!(g.first_at_or_after(10.1), None);
    }

    #[test]
    fn scenario_discount_invariant() {
        let s = DefaultScenario::at_default(5.0, MarketState::direct(0.01, Money::from_major(100_000_000))).unwrap();
        assert_eq!(s.discount_to_tau, libm::exp(-0.05));
        s.validate().unwrap();
        let mut bad = s;
        bad.discount_to_tau = 0.5;
        assert!(bad.validate().is_err());
        DefaultScenario::no_default(MarketState::curve(0.01)).validate().unwrap();
    }
}
