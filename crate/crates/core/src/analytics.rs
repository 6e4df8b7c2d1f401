//! Exposure, CVA and structure-level checks.
//!
//! Monte Carlo estimates are reduced in path-index order so the result is
//! bit-identical however the per-path work was scheduled. Per-path work is
//! exposed separately ([`path_loss`], [`summarize_losses`]) for parallel
//! drivers.
//!
//! In simulation, a default of C inside `(t[k-1], t[k]]` is closed out at
//! grid date `t[k]` with the MtM and discount factor of that date.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closeout::{
    originator_unsecured_claim, resolve, CloseoutError, CloseoutReport, FlowLabel, StructureConfig, StructureKind,
};
use crate::contracts::PartyId;
use crate::market::{
    simulate_default_time, DefaultModel, DefaultScenario, MarketError, MarketState, MtmPath, PathSet, TimeGrid,
};
use crate::money::{Lgd, Money};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Closeout(#[from] CloseoutError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("no paths to aggregate")]
    NoPaths,
    #[error("path {path_index} has {found} values for a grid of {expected}")]
    GridMismatch { path_index: u64, expected: usize, found: usize },
    #[error("simulation horizon {horizon} exceeds swap maturity {maturity}")]
    HorizonBeyondMaturity { horizon: f64, maturity: f64 },
}

/// Sample mean and standard error of the mean, summed in slice order.
fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var / n))
}

/// Expected positive exposure of O to C, in major units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExposureProfile {
    pub structure: StructureKind,
    pub times: Vec<f64>,
    pub epe: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: u64,
}

fn check_paths(paths: &PathSet) -> Result<(), AnalyticsError> {
    if paths.is_empty() {
        return Err(AnalyticsError::NoPaths);
    }
    let expected = paths.grid.len();
    for p in &paths.paths {
        if p.values.len() != expected {
            return Err(AnalyticsError::GridMismatch { path_index: p.path_index, expected, found: p.values.len() });
        }
    }
    Ok(())
}

fn check_horizon(grid: &TimeGrid, cfg: &StructureConfig) -> Result<(), AnalyticsError> {
    let maturity = cfg.back().maturity();
    if grid.horizon() > maturity {
        return Err(AnalyticsError::HorizonBeyondMaturity { horizon: grid.horizon(), maturity });
    }
    Ok(())
}

/// O's unsecured claim on C at each grid date, averaged over paths. Under
/// the baseline this is the positive part of the Back Swap MtM; under the
/// TPA and the chain the netting leaves nothing unsecured.
pub fn exposure_profile(paths: &PathSet, cfg: &StructureConfig) -> Result<ExposureProfile, AnalyticsError> {
    check_paths(paths)?;
    check_horizon(&paths.grid, cfg)?;
    let times = paths.times();
    let mut epe = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    let mut column = Vec::with_capacity(paths.len());
    for (k, &t) in times.iter().enumerate() {
        column.clear();
        for p in &paths.paths {
            let market = MarketState::direct(0.0, Money::from_major_f64(p.values[k]));
            column.push(originator_unsecured_claim(cfg, &market, t)?.to_major_f64());
        }
        let (m, s) = mean_and_stderr(&column);
        epe.push(m);
        stderr.push(s);
    }
    Ok(ExposureProfile { structure: cfg.kind(), times: times.to_vec(), epe, stderr, n_paths: paths.len() as u64 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvaResult {
    pub structure: StructureKind,
    pub cva: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub lgd: f64,
    pub hazard_rate: f64,
}

/// The close-out scenario of one path, or `None` if C survives the
/// horizon.
pub fn path_scenario(
    path: &MtmPath,
    grid: &TimeGrid,
    model: &DefaultModel,
    rate: f64,
) -> Result<Option<DefaultScenario>, AnalyticsError> {
    let Some(tau) = simulate_default_time(model, grid.horizon(), path.seed, path.path_index) else {
        return Ok(None);
    };
    let k = grid.first_at_or_after(tau).expect("default time within horizon");
    let x = Money::from_major_f64(path.values[k]);
    Ok(Some(DefaultScenario::at_default(grid.times()[k], MarketState::direct(rate, x))?))
}

/// Discounted realized loss of O on one path, in major units.
pub fn path_loss(
    path: &MtmPath,
    grid: &TimeGrid,
    model: &DefaultModel,
    rate: f64,
    cfg: &StructureConfig,
) -> Result<f64, AnalyticsError> {
    match path_scenario(path, grid, model, rate)? {
        None => Ok(0.0),
        Some(scn) => {
            let report = resolve(&scn, cfg)?;
            Ok(report.outcome(PartyId::Originator).realized_loss.to_major_f64() * scn.discount_to_tau)
        }
    }
}

/// Aggregates per-path discounted losses given in path-index order.
pub fn summarize_losses(
    losses: &[f64],
    structure: StructureKind,
    model: &DefaultModel,
) -> Result<CvaResult, AnalyticsError> {
    if losses.is_empty() {
        return Err(AnalyticsError::NoPaths);
    }
    let (cva, stderr) = mean_and_stderr(losses);
    Ok(CvaResult {
        structure,
        cva,
        stderr,
        n_paths: losses.len() as u64,
        lgd: model.lgd().as_f64(),
        hazard_rate: model.hazard_rate(),
    })
}

/// Prepares `cfg` for a CVA run under `model`: the model's LGD applies.
pub fn cva_structure(
    cfg: &StructureConfig,
    grid: &TimeGrid,
    model: &DefaultModel,
) -> Result<StructureConfig, AnalyticsError> {
    check_horizon(grid, cfg)?;
    Ok(cfg.clone().with_lgd(model.lgd()))
}

/// Unilateral CVA of O against C: the mean over paths of O's discounted
/// realized loss at C's default.
pub fn cva(
    paths: &PathSet,
    model: &DefaultModel,
    rate: f64,
    cfg: &StructureConfig,
) -> Result<CvaResult, AnalyticsError> {
    check_paths(paths)?;
    let cfg = cva_structure(cfg, &paths.grid, model)?;
    let losses =
        paths.paths.iter().map(|p| path_loss(p, &paths.grid, model, rate, &cfg)).collect::<Result<Vec<_>, _>>()?;
    summarize_losses(&losses, cfg.kind(), model)
}

/// Mean discounted loss of O over explicit scenarios; survivals count as
/// zero loss.
pub fn cva_from_scenarios(scenarios: &[DefaultScenario], cfg: &StructureConfig) -> Result<CvaResult, AnalyticsError> {
    let losses = scenarios
        .iter()
        .map(|s| {
            let r = resolve(s, cfg)?;
            Ok(r.outcome(PartyId::Originator).realized_loss.to_major_f64() * s.discount_to_tau)
        })
        .collect::<Result<Vec<_>, AnalyticsError>>()?;
    if losses.is_empty() {
        return Err(AnalyticsError::NoPaths);
    }
    let (cva, stderr) = mean_and_stderr(&losses);
    Ok(CvaResult {
        structure: cfg.kind(),
        cva,
        stderr,
        n_paths: losses.len() as u64,
        lgd: cfg.lgd().as_f64(),
        hazard_rate: 0.0,
    })
}

/// Ranges for randomized close-out scenarios. All scenarios are in direct
/// mode; X is the Back Swap MtM for O in minor units, drawn uniformly from
/// the inclusive range, with extra mass on X = 0 when 0 is in range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepBounds {
    pub mtm_min: Money,
    pub mtm_max: Money,
    pub max_tau: f64,
    pub max_discount_rate: f64,
    pub zero_mtm_probability: f64,
}

impl Default for SweepBounds {
    fn default() -> Self {
        SweepBounds {
            mtm_min: Money::from_major(-1_000_000_000),
            mtm_max: Money::from_major(1_000_000_000),
            max_tau: 10.0,
            max_discount_rate: 0.05,
            zero_mtm_probability: 0.05,
        }
    }
}

/// One randomized case: a default scenario and the LGD applied to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub index: u64,
    pub scenario: DefaultScenario,
    pub lgd: Lgd,
}

impl SweepCase {
    pub fn mtm(&self) -> Money {
        self.scenario.market_at_tau.back_swap_mtm_for_o.unwrap_or(Money::ZERO)
    }
}

/// Case `index` of a sweep; depends only on `(seed, index, bounds)`.
pub fn sweep_case(seed: u64, index: u64, bounds: &SweepBounds) -> Result<SweepCase, AnalyticsError> {
    let mut rng = rng::stream(seed, Domain::Sweep, index);
    let zero = rng.random::<f64>() < bounds.zero_mtm_probability;
    let x = if zero && bounds.mtm_min <= Money::ZERO && Money::ZERO <= bounds.mtm_max {
        Money::ZERO
    } else {
        Money::from_minor(rng.random_range(bounds.mtm_min.minor()..=bounds.mtm_max.minor()))
    };
    let lgd = Lgd::from_parts_per_billion(rng.random_range(0..=1_000_000_000)).expect("in range");
    // tau in (0, max_tau]
    let tau = bounds.max_tau * (1.0 - rng.random::<f64>());
    let rate = bounds.max_discount_rate * rng.random::<f64>();
    let scenario = DefaultScenario::at_default(tau, MarketState::direct(rate, x))?;
    Ok(SweepCase { index, scenario, lgd })
}

fn max_deviation(a: &CloseoutReport, b: &CloseoutReport) -> Money {
    let mut worst = (a.estate_net - b.estate_net).abs();
    for p in PartyId::LEDGER {
        let (x, y) = (a.outcome(p), b.outcome(p));
        worst = worst
            .max((x.realized_loss - y.realized_loss).abs())
            .max((x.liquidity_delta - y.liquidity_delta).abs())
            .max((x.termination_amount - y.termination_amount).abs());
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub n: u64,
    pub seed: u64,
    pub max_abs_deviation: Money,
    pub worst_case: Option<u64>,
    pub passed: bool,
}

/// Resolves `n` random cases under the TPA and the CCDS chain built on
/// `base` and reports the largest per-field difference.
pub fn equivalence_sweep(
    n: u64,
    seed: u64,
    bounds: &SweepBounds,
    base: &StructureConfig,
) -> Result<SweepReport, AnalyticsError> {
    let tpa = base.as_kind(StructureKind::Tpa)?;
    let chain = base.as_kind(StructureKind::CcdsChain)?;
    let mut worst = Money::ZERO;
    let mut worst_case = None;
    for i in 0..n {
        let case = sweep_case(seed, i, bounds)?;
        let a = resolve(&case.scenario, &tpa.clone().with_lgd(case.lgd))?;
        let b = resolve(&case.scenario, &chain.clone().with_lgd(case.lgd))?;
        let d = max_deviation(&a, &b);
        if d > worst {
            worst = d;
            worst_case = Some(i);
        }
    }
    Ok(SweepReport { n, seed, max_abs_deviation: worst, worst_case, passed: worst.is_zero() })
}

/// One row of a structure comparison, amounts in minor units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: usize,
    pub structure: StructureKind,
    pub realized_loss_o: Money,
    pub realized_loss_v: Money,
    pub liquidity_delta_o: Money,
    pub liquidity_delta_v: Money,
    pub estate_net: Money,
}

impl ComparisonRow {
    pub fn from_report(scenario: usize, r: &CloseoutReport) -> Self {
        ComparisonRow {
            scenario,
            structure: r.structure,
            realized_loss_o: r.outcome(PartyId::Originator).realized_loss,
            realized_loss_v: r.outcome(PartyId::Spv).realized_loss,
            liquidity_delta_o: r.outcome(PartyId::Originator).liquidity_delta,
            liquidity_delta_v: r.outcome(PartyId::Spv).liquidity_delta,
            estate_net: r.estate_net,
        }
    }
}

/// Resolves every scenario under all three structures built on `base`.
/// Rows are ordered by scenario, then structure.
pub fn compare_structures(
    scenarios: &[DefaultScenario],
    base: &StructureConfig,
) -> Result<Vec<ComparisonRow>, AnalyticsError> {
    let configs = StructureKind::ALL.map(|k| base.as_kind(k));
    let mut rows = Vec::with_capacity(scenarios.len() * 3);
    for (i, s) in scenarios.iter().enumerate() {
        for cfg in &configs {
            let cfg = cfg.as_ref().map_err(Clone::clone)?;
            rows.push(ComparisonRow::from_report(i, &resolve(s, cfg)?));
        }
    }
    Ok(rows)
}

pub type ResolverFn = fn(&DefaultScenario, &StructureConfig) -> Result<CloseoutReport, CloseoutError>;

/// The resolvers an invariant suite runs against.
#[derive(Clone, Copy)]
pub struct Resolvers {
    pub baseline: ResolverFn,
    pub tpa: ResolverFn,
    pub ccds_chain: ResolverFn,
}

impl Default for Resolvers {
    fn default() -> Self {
        Resolvers {
            baseline: crate::closeout::resolve_baseline,
            tpa: crate::closeout::resolve_tpa,
            ccds_chain: crate::closeout::resolve_ccds_chain,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Invariant {
    Conservation,
    BaselineLossLaw,
    TpaFairness,
    StructuralEquivalence,
    ConditionalIdentity,
    WaiverSettlementCorrespondence,
}

impl Invariant {
    pub const ALL: [Invariant; 6] = [
        Invariant::Conservation,
        Invariant::BaselineLossLaw,
        Invariant::TpaFairness,
        Invariant::StructuralEquivalence,
        Invariant::ConditionalIdentity,
        Invariant::WaiverSettlementCorrespondence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Invariant::Conservation => "conservation",
            Invariant::BaselineLossLaw => "baseline_loss_law",
            Invariant::TpaFairness => "tpa_fairness",
            Invariant::StructuralEquivalence => "structural_equivalence",
            Invariant::ConditionalIdentity => "conditional_identity",
            Invariant::WaiverSettlementCorrespondence => "waiver_settlement_correspondence",
        }
    }
}

/// Resolves `case` under all three structures on `base` and evaluates each
/// invariant. Returns the invariants that failed.
pub fn check_case(
    case: &SweepCase,
    base: &StructureConfig,
    resolvers: &Resolvers,
) -> Result<Vec<Invariant>, AnalyticsError> {
    let cfg = |k| base.as_kind(k).map(|c| c.with_lgd(case.lgd));
    let baseline = (resolvers.baseline)(&case.scenario, &cfg(StructureKind::Baseline)?)?;
    let tpa = (resolvers.tpa)(&case.scenario, &cfg(StructureKind::Tpa)?)?;
    let chain = (resolvers.ccds_chain)(&case.scenario, &cfg(StructureKind::CcdsChain)?)?;
    let x = case.mtm();
    let mut failed = Vec::new();

    if [&baseline, &tpa, &chain].iter().any(|r| !r.conservation_residual().is_zero()) {
        failed.push(Invariant::Conservation);
    }

    let o = baseline.outcome(PartyId::Originator);
    let v = baseline.outcome(PartyId::Spv);
    if o.realized_loss != case.lgd.loss_on(x.positive_part())
        || !v.realized_loss.is_zero()
        || !v.liquidity_delta.is_zero()
    {
        failed.push(Invariant::BaselineLossLaw);
    }

    let fair = [PartyId::Originator, PartyId::Spv, PartyId::EstateOfC].iter().all(|&p| {
        let out = tpa.outcome(p);
        out.realized_loss.is_zero() && out.liquidity_delta.is_zero()
    });
    if !fair || !tpa.estate_net.is_zero() {
        failed.push(Invariant::TpaFairness);
    }

    if tpa.per_party != chain.per_party || tpa.estate_net != chain.estate_net {
        failed.push(Invariant::StructuralEquivalence);
    }

    if !x.is_positive() && !(baseline.per_party == tpa.per_party && tpa.per_party == chain.per_party) {
        failed.push(Invariant::ConditionalIdentity);
    }

    if x.is_positive() {
        let legs = |r: &CloseoutReport, label| {
            let mut v: Vec<_> = r.flows_labelled(label).map(|f| (f.from, f.to, f.amount)).collect();
            v.sort();
            v
        };
        let waivers = legs(&tpa, FlowLabel::TpaWaiver);
        if waivers.is_empty() || waivers != legs(&chain, FlowLabel::CcdsSettlement) {
            failed.push(Invariant::WaiverSettlementCorrespondence);
        }
    }
    Ok(failed)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub n: u64,
    pub seed: u64,
    pub tallies: BTreeMap<Invariant, Tally>,
    pub failures: Vec<(SweepCase, Vec<Invariant>)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The failing case with the smallest |X|, earliest index on ties.
    pub fn minimal_failure(&self) -> Option<&(SweepCase, Vec<Invariant>)> {
        self.failures.iter().min_by_key(|(c, _)| (c.mtm().abs(), c.index))
    }
}

/// Runs every invariant over `n` random cases.
pub fn run_invariant_suite(
    n: u64,
    seed: u64,
    bounds: &SweepBounds,
    base: &StructureConfig,
    resolvers: &Resolvers,
) -> Result<SuiteReport, AnalyticsError> {
    let mut tallies: BTreeMap<Invariant, Tally> = Invariant::ALL.iter().map(|&i| (i, Tally::default())).collect();
    let mut failures = Vec::new();
    for i in 0..n {
        let case = sweep_case(seed, i, bounds)?;
        let failed = check_case(&case, base, resolvers)?;
        for inv in Invariant::ALL {
            let t = tallies.get_mut(&inv).expect("all invariants tallied");
            if failed.contains(&inv) {
                t.failed += 1;
            } else {
                t.passed += 1;
            }
        }
        if !failed.is_empty() {
            failures.push((case, failed));
        }
    }
    Ok(SuiteReport { n, seed, tallies, failures })
}
