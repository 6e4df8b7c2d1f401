//! Scenario files.
//!
//! A scenario file is TOML. Amounts are integer minor units of `currency`;
//! rates, times and the LGD are plain decimals.
//!
//! ```toml
//! currency = "EUR"
//! tau = 5.0
//! back_swap_mtm_for_O = 10000000000
//! lgd = 0.6
//! hazard_rate = 0.02
//! discount_rate = 0.01
//! notional = 50000000000
//!
//! [[schedule]]
//! time = 1.0
//! asset_rate = 0.05
//! note_rate = 0.04
//!
//! [mc]
//! n_paths = 100000
//! seed = 42
//! horizon = 10.0
//! steps = 40
//! initial_mtm = 0
//! volatility = 3000000000
//!
//! [sweep]
//! n = 10000
//! seed = 1
//! ```
//!
//! Omitting `back_swap_mtm_for_O` values the swaps from the schedule;
//! omitting `tau` means C survives.

use std::fs;
use std::path::{Path, PathBuf};

use ccds_core::analytics::{SweepBounds, SweepCase};
use ccds_core::{
    DefaultModel, DefaultScenario, Lgd, MarketState, Money, PathConfig, Schedule, SchedulePeriod, StructureConfig,
    StructureKind, TimeGrid,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_currency() -> String {
    "USD".to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub time: f64,
    pub asset_rate: f64,
    pub note_rate: f64,
}

/// Monte Carlo settings; money-like quantities in minor units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_paths: u64,
    pub seed: u64,
    pub horizon: f64,
    pub steps: usize,
    #[serde(default)]
    pub initial_mtm: i64,
    /// Per square-root year.
    pub volatility: i64,
    /// Per year.
    #[serde(default)]
    pub drift: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub n: u64,
    pub seed: u64,
    pub mtm_min: i64,
    pub mtm_max: i64,
    pub max_tau: f64,
    pub max_discount_rate: f64,
    pub zero_mtm_probability: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let b = SweepBounds::default();
        SweepSection {
            n: 10_000,
            seed: 1,
            mtm_min: b.mtm_min.minor(),
            mtm_max: b.mtm_max.minor(),
            max_tau: b.max_tau,
            max_discount_rate: b.max_discount_rate,
            zero_mtm_probability: b.zero_mtm_probability,
        }
    }
}

/// The on-disk form of a scenario, field for field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_currency")]
    pub currency: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(rename = "back_swap_mtm_for_O", default, skip_serializing_if = "Option::is_none")]
    pub back_swap_mtm_for_o: Option<i64>,
    pub lgd: f64,
    #[serde(default)]
    pub hazard_rate: f64,
    pub discount_rate: f64,
    pub notional: i64,
    pub schedule: Vec<ScheduleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// A validated scenario file.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub source: PathBuf,
    pub file: ScenarioFile,
    pub scenario: DefaultScenario,
    pub model: DefaultModel,
    /// Baseline structure on the file's swaps; other structures derive
    /// from it.
    pub structure: StructureConfig,
}

impl Scenario {
    pub fn currency(&self) -> &str {
        &self.file.currency
    }

    pub fn path_config(&self) -> Result<PathConfig, CliError> {
        let mc = self.file.mc.as_ref().ok_or_else(|| CliError::validation("mc", "a [mc] section is required"))?;
        let cfg = PathConfig {
            initial_mtm: Money::from_minor(mc.initial_mtm).to_major_f64(),
            volatility: Money::from_minor(mc.volatility).to_major_f64(),
            drift: Money::from_minor(mc.drift).to_major_f64(),
            grid: TimeGrid::uniform(mc.horizon, mc.steps)
                .map_err(|e| CliError::validation("mc.steps", e.to_string()))?,
            n_paths: mc.n_paths,
            seed: mc.seed,
        };
        cfg.validate().map_err(|e| CliError::validation(format!("mc.{}", e.field()), e.to_string()))?;
        Ok(cfg)
    }

    pub fn sweep(&self) -> SweepSection {
        self.file.sweep.clone().unwrap_or_default()
    }

    /// A scenario file that reproduces `case` on this file's swaps.
    pub fn counterexample(&self, case: &SweepCase) -> ScenarioFile {
        ScenarioFile {
            tau: case.scenario.tau,
            back_swap_mtm_for_o: case.scenario.market_at_tau.back_swap_mtm_for_o.map(Money::minor),
            lgd: case.lgd.as_f64(),
            discount_rate: case.scenario.market_at_tau.flat_discount_rate,
            mc: None,
            sweep: None,
            ..self.file.clone()
        }
    }
}

impl SweepSection {
    pub fn bounds(&self) -> Result<SweepBounds, CliError> {
        if self.n == 0 {
            return Err(CliError::validation("sweep.n", "at least one scenario is required"));
        }
        if self.mtm_min > self.mtm_max {
            return Err(CliError::validation("sweep.mtm_min", "must not exceed sweep.mtm_max"));
        }
        if !(self.max_tau.is_finite() && self.max_tau > 0.0) {
            return Err(CliError::validation("sweep.max_tau", "must be positive"));
        }
        if !(self.max_discount_rate.is_finite() && self.max_discount_rate >= 0.0) {
            return Err(CliError::validation("sweep.max_discount_rate", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.zero_mtm_probability) {
            return Err(CliError::validation("sweep.zero_mtm_probability", "must be in [0, 1]"));
        }
        Ok(SweepBounds {
            mtm_min: Money::from_minor(self.mtm_min),
            mtm_max: Money::from_minor(self.mtm_max),
            max_tau: self.max_tau,
            max_discount_rate: self.max_discount_rate,
            zero_mtm_probability: self.zero_mtm_probability,
        })
    }
}

impl ScenarioFile {
    pub fn parse(text: &str, source: &Path) -> Result<ScenarioFile, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: source.to_path_buf(), message: e.to_string() })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    pub fn validate(self, source: &Path) -> Result<Scenario, CliError> {
        if self.currency.trim().is_empty() {
            return Err(CliError::validation("currency", "must not be empty"));
        }
        let lgd = Lgd::new(self.lgd)?;
        let model = DefaultModel::new(self.hazard_rate, lgd)?;
        if self.notional <= 0 {
            return Err(CliError::validation("notional", "must be positive"));
        }
        let periods = self
            .schedule
            .iter()
            .map(|e| SchedulePeriod { time: e.time, asset_rate: e.asset_rate, note_rate: e.note_rate })
            .collect();
        let schedule = Schedule::new(periods)?;
        let market = match self.back_swap_mtm_for_o {
            Some(x) => MarketState::direct(self.discount_rate, Money::from_minor(x)),
            None => MarketState::curve(self.discount_rate),
        };
        market.validate()?;
        let scenario = match self.tau {
            Some(tau) if !tau.is_finite() || tau < 0.0 => {
                return Err(CliError::validation("tau", "must be a finite non-negative time"));
            }
            Some(tau) => DefaultScenario::at_default(tau, market)?,
            None => DefaultScenario::no_default(market),
        };
        let structure =
            StructureConfig::standard(StructureKind::Baseline, Money::from_minor(self.notional), schedule, lgd)?;
        let loaded = Scenario { source: source.to_path_buf(), file: self, scenario, model, structure };
        if loaded.file.mc.is_some() {
            let paths = loaded.path_config()?;
            if paths.grid.horizon() > loaded.structure.back().maturity() {
                return Err(CliError::validation("mc.horizon", "must not exceed the last schedule time"));
            }
        }
        if let Some(s) = &loaded.file.sweep {
            s.bounds()?;
        }
        Ok(loaded)
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, CliError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ScenarioFile::parse(&text, path)?.validate(path)
}
