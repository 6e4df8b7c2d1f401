//! Resolution of C's default under the three structures.
//!
//! Every resolver produces a double-entry ledger of flows at the default
//! instant between O, V, C's estate and the two replacement
//! counterparties. Swap positions are valued at their risk-free MtM;
//! posted collateral belongs to the poster until it is applied at
//! close-out, so applying it shows up as a `CollateralKept` flow.
//!
//! Within one netting set, gross obligations in both directions are set off
//! against each other and recorded with the label of the trade or clause
//! that produced them. Only the net remainder is secured by collateral or,
//! when owed by the estate, subject to recovery.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contracts::{
    ccds_notional, required_collateral, swap_mtm, BasisSwap, Booking, Ccds, ContractError, NettingSet, OneWayCsa,
    PartyId, Schedule, SignedMtm, SwapKind, TradeId,
};
use crate::market::{DefaultScenario, MarketError, MarketState};
use crate::money::{Lgd, Money};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CloseoutError {
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("structural error: {0}")]
    Structural(&'static str),
    #[error("resolver for {expected} given a {found} structure")]
    WrongStructure { expected: StructureKind, found: StructureKind },
    #[error("claim {0} on the estate is negative")]
    NegativeClaim(Money),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StructureKind {
    Baseline,
    Tpa,
    CcdsChain,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [StructureKind::Baseline, StructureKind::Tpa, StructureKind::CcdsChain];

    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Baseline => "baseline",
            StructureKind::Tpa => "tpa",
            StructureKind::CcdsChain => "ccds_chain",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StructureKind {
    type Err = &'static str;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(StructureKind::Baseline),
            "tpa" => Ok(StructureKind::Tpa),
            "ccds_chain" | "ccds" => Ok(StructureKind::CcdsChain),
            _ => Err("expected one of baseline, tpa, ccds_chain"),
        }
    }
}

/// Flow labels; declaration order is the sort order of report traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlowLabel {
    /// Posted collateral handed back to its poster. Posted collateral stays
    /// the poster's property until applied, so close-outs here never emit
    /// it.
    CollateralReturn,
    CollateralKept,
    TerminationPayment,
    RecoveryPayment,
    ReplacementUpfront,
    CcdsSettlement,
    TpaWaiver,
}

/// A strictly positive transfer; the direction carries the sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CashFlow {
    pub from: PartyId,
    pub to: PartyId,
    pub amount: Money,
    pub label: FlowLabel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyOutcome {
    /// Pre-default position value minus post-replacement position value
    /// plus net cash received at close-out.
    pub realized_loss: Money,
    /// Net cash paid out at the default instant.
    pub liquidity_delta: Money,
    /// Net amount left after set-off and collateral, positive when owed
    /// to the party.
    pub termination_amount: Money,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloseoutReport {
    pub scenario: DefaultScenario,
    pub structure: StructureKind,
    pub flows: Vec<CashFlow>,
    pub per_party: BTreeMap<PartyId, PartyOutcome>,
    /// Net cash received by C's estate.
    pub estate_net: Money,
}

impl CloseoutReport {
    pub fn outcome(&self, party: PartyId) -> PartyOutcome {
        self.per_party.get(&party).copied().unwrap_or_default()
    }

    /// Net cash received per party according to the flow trace.
    pub fn net_cash_by_party(&self) -> BTreeMap<PartyId, Money> {
        let mut net = BTreeMap::new();
        for f in &self.flows {
            *net.entry(f.to).or_insert(Money::ZERO) += f.amount;
            *net.entry(f.from).or_insert(Money::ZERO) -= f.amount;
        }
        net
    }

    /// Signed sum of all flows over all parties; zero for a balanced ledger.
    pub fn conservation_residual(&self) -> Money {
        self.net_cash_by_party().values().sum()
    }

    pub fn flows_labelled(&self, label: FlowLabel) -> impl Iterator<Item = &CashFlow> {
        self.flows.iter().filter(move |f| f.label == label)
    }
}

/// The two swaps, their netting sets, any CCDS, and the LGD applied to
/// unsecured claims on C's estate.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConfig {
    kind: StructureKind,
    front: BasisSwap,
    back: BasisSwap,
    front_set: NettingSet,
    back_set: NettingSet,
    ccds: Vec<Ccds>,
    lgd: Lgd,
}

pub const FRONT_SWAP: &str = "front_swap";
pub const BACK_SWAP: &str = "back_swap";
pub const FRONT_SET: &str = "isda_c_v";
pub const BACK_SET: &str = "isda_c_o";

impl StructureConfig {
    /// The standard structure of `kind` on a back-to-back pair with the
    /// given notional and schedule. Chain CCDS carry no upfront.
    pub fn standard(kind: StructureKind, notional: Money, schedule: Schedule, lgd: Lgd) -> Result<Self, CloseoutError> {
        Self::standard_with_upfront(kind, notional, schedule, lgd, Money::ZERO)
    }

    pub fn standard_with_upfront(
        kind: StructureKind,
        notional: Money,
        schedule: Schedule,
        lgd: Lgd,
        ccds_upfront: Money,
    ) -> Result<Self, CloseoutError> {
        let front = BasisSwap::front(FRONT_SWAP, notional, schedule.clone()).map_err(ContractError::from)?;
        let back = BasisSwap::back(BACK_SWAP, notional, schedule).map_err(ContractError::from)?;
        let mut front_set = NettingSet::new(
            FRONT_SET,
            PartyId::Counterparty,
            PartyId::Spv,
            Some(OneWayCsa::new(PartyId::Spv, PartyId::Counterparty)?),
        )?
        .with_trade(FRONT_SWAP);
        let mut back_set = NettingSet::new(
            BACK_SET,
            PartyId::Counterparty,
            PartyId::Originator,
            Some(OneWayCsa::new(PartyId::Counterparty, PartyId::Originator)?),
        )?
        .with_trade(BACK_SWAP);
        let mut ccds = Vec::new();
        if kind == StructureKind::CcdsChain {
            let leg = |id: &str, buyer, seller, booking| {
                Ccds::new(
                    id,
                    PartyId::Counterparty,
                    TradeId::from(BACK_SWAP),
                    PartyId::Originator,
                    buyer,
                    seller,
                    booking,
                    ccds_upfront,
                )
            };
            ccds.push(leg("ccds_1", PartyId::Counterparty, PartyId::Originator, Booking::NettingSet(BACK_SET.into()))?);
            ccds.push(leg("ccds_2", PartyId::Spv, PartyId::Counterparty, Booking::NettingSet(FRONT_SET.into()))?);
            ccds.push(leg("ccds_3", PartyId::Originator, PartyId::Spv, Booking::Standalone)?);
            back_set = back_set.with_trade("ccds_1");
            front_set = front_set.with_trade("ccds_2");
        }
        Self::from_parts(kind, front, back, front_set, back_set, ccds, lgd)
    }

    /// Assembles a structure from its parts, checking booking consistency.
    /// Chain-specific placement rules are checked at resolution time.
    pub fn from_parts(
        kind: StructureKind,
        front: BasisSwap,
        back: BasisSwap,
        front_set: NettingSet,
        back_set: NettingSet,
        ccds: Vec<Ccds>,
        lgd: Lgd,
    ) -> Result<Self, CloseoutError> {
        if front.kind() != SwapKind::FrontSwap || back.kind() != SwapKind::BackSwap {
            return Err(CloseoutError::Structural("front and back swap kinds are swapped"));
        }
        if front.notional() != back.notional() || front.schedule() != back.schedule() {
            return Err(CloseoutError::Structural("front and back swap must share notional and schedule"));
        }
        if front_set.id() == back_set.id() {
            return Err(CloseoutError::Structural("front and back swap need distinct ISDA agreements"));
        }
        let front_csa = front_set.csa().copied();
        let back_csa = back_set.csa().copied();
        if !front_set.has_member(PartyId::Counterparty) || !front_set.has_member(PartyId::Spv) {
            return Err(CloseoutError::Structural("front netting set must be between C and V"));
        }
        if !back_set.has_member(PartyId::Counterparty) || !back_set.has_member(PartyId::Originator) {
            return Err(CloseoutError::Structural("back netting set must be between C and O"));
        }
        if front_csa.map(|c| c.posting_party()) != Some(PartyId::Counterparty) {
            return Err(CloseoutError::Structural("front CSA must be one-way with C posting to V"));
        }
        if back_csa.map(|c| c.posting_party()) != Some(PartyId::Originator) {
            return Err(CloseoutError::Structural("back CSA must be one-way with O posting to C"));
        }
        let cfg = StructureConfig { kind, front, back, front_set, back_set, ccds, lgd };
        cfg.check_bookings()?;
        Ok(cfg)
    }

    fn check_bookings(&self) -> Result<(), CloseoutError> {
        let sets = [&self.front_set, &self.back_set];
        let mut known: Vec<&TradeId> = Vec::new();
        known.push(self.front.id());
        known.push(self.back.id());
        for c in &self.ccds {
            known.push(c.id());
        }
        for set in sets {
            for t in set.trades() {
                if !known.contains(&t) {
                    return Err(ContractError::UnknownTrade(t.clone()).into());
                }
            }
        }
        let count = |t: &TradeId| sets.iter().filter(|s| s.contains(t)).count();
        if count(self.front.id()) != 1 || !self.front_set.contains(self.front.id()) {
            return Err(CloseoutError::Structural("Front Swap must sit in the C-V netting set only"));
        }
        if count(self.back.id()) != 1 || !self.back_set.contains(self.back.id()) {
            return Err(CloseoutError::Structural("Back Swap must sit in the C-O netting set only"));
        }
        for c in &self.ccds {
            match c.booking() {
                Booking::Standalone => {
                    if count(c.id()) != 0 {
                        return Err(CloseoutError::Structural("standalone CCDS listed in a netting set"));
                    }
                }
                Booking::NettingSet(id) => {
                    let Some(set) = sets.iter().find(|s| s.id() == id) else {
                        return Err(CloseoutError::Structural("CCDS booked in an unknown netting set"));
                    };
                    if count(c.id()) != 1 || !set.contains(c.id()) {
                        return Err(CloseoutError::Structural("CCDS booking disagrees with netting set contents"));
                    }
                    if !set.has_member(c.protection_buyer()) || !set.has_member(c.protection_seller()) {
                        return Err(CloseoutError::Structural("CCDS parties must be the netting set's parties"));
                    }
                }
            }
            if c.reference_swap() != self.back.id() && c.reference_swap() != self.front.id() {
                return Err(ContractError::UnknownTrade(c.reference_swap().clone()).into());
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn front(&self) -> &BasisSwap {
        &self.front
    }

    pub fn back(&self) -> &BasisSwap {
        &self.back
    }

    pub fn front_set(&self) -> &NettingSet {
        &self.front_set
    }

    pub fn back_set(&self) -> &NettingSet {
        &self.back_set
    }

    pub fn ccds(&self) -> &[Ccds] {
        &self.ccds
    }

    pub fn lgd(&self) -> Lgd {
        self.lgd
    }

    pub fn with_lgd(mut self, lgd: Lgd) -> Self {
        self.lgd = lgd;
        self
    }

    /// The standard structure of another kind on the same swaps and LGD.
    pub fn as_kind(&self, kind: StructureKind) -> Result<Self, CloseoutError> {
        let upfront = self.ccds.first().map(|c| c.upfront()).unwrap_or(Money::ZERO);
        Self::standard_with_upfront(kind, self.front.notional(), self.front.schedule().clone(), self.lgd, upfront)
    }

    fn swap(&self, id: &TradeId) -> Option<&BasisSwap> {
        [&self.front, &self.back].into_iter().find(|s| s.id() == id)
    }

    fn find_ccds(&self, id: &TradeId) -> Option<&Ccds> {
        self.ccds.iter().find(|c| c.id() == id)
    }

    /// Net upfront premium received per contracting party across all CCDS.
    pub fn premium_by_party(&self) -> BTreeMap<PartyId, Money> {
        let mut net: BTreeMap<PartyId, Money> = PartyId::CONTRACTING.iter().map(|&p| (p, Money::ZERO)).collect();
        for c in &self.ccds {
            *net.entry(c.protection_buyer()).or_insert(Money::ZERO) -= c.upfront();
            *net.entry(c.protection_seller()).or_insert(Money::ZERO) += c.upfront();
        }
        net
    }

    /// Chain placement: three CCDS on C and the Back Swap seen by O, with
    /// C's own protection purchases booked under the ISDA of the swap they
    /// offset, and the O-V leg standalone.
    pub fn validate_chain(&self) -> Result<(), CloseoutError> {
        if self.ccds.len() != 3 {
            return Err(CloseoutError::Structural("the chain needs exactly three CCDS"));
        }
        let upfront = self.ccds[0].upfront();
        for c in &self.ccds {
            if c.reference_entity() != PartyId::Counterparty
                || c.reference_swap() != self.back.id()
                || c.reference_perspective() != PartyId::Originator
            {
                return Err(CloseoutError::Structural("chain CCDS must reference C and the Back Swap seen by O"));
            }
            if c.upfront() != upfront {
                return Err(CloseoutError::Structural("chain CCDS must carry equal upfronts"));
            }
        }
        let leg = |buyer, seller| {
            self.ccds
                .iter()
                .find(|c| c.protection_buyer() == buyer && c.protection_seller() == seller)
                .ok_or(CloseoutError::Structural("chain is missing a CCDS leg"))
        };
        let c_buys = leg(PartyId::Counterparty, PartyId::Originator)?;
        let v_buys = leg(PartyId::Spv, PartyId::Counterparty)?;
        let o_buys = leg(PartyId::Originator, PartyId::Spv)?;
        if c_buys.booking() != &Booking::NettingSet(self.back_set.id().clone()) {
            return Err(CloseoutError::Structural("CCDS sold by O to C must sit under the Back Swap ISDA"));
        }
        if v_buys.booking() != &Booking::NettingSet(self.front_set.id().clone()) {
            return Err(CloseoutError::Structural("CCDS sold by C to V must sit under the Front Swap ISDA"));
        }
        if o_buys.booking() != &Booking::Standalone {
            return Err(CloseoutError::Structural("CCDS sold by V to O must be standalone"));
        }
        Ok(())
    }
}

/// Recovered part of an unsecured claim on C's estate.
pub fn apply_recovery(claim: Money, lgd: Lgd) -> Result<Money, CloseoutError> {
    if claim.is_negative() {
        return Err(CloseoutError::NegativeClaim(claim));
    }
    Ok(lgd.recovery_on(claim))
}

fn live_value(swap: &BasisSwap, market: &MarketState, t: f64, party: PartyId) -> Result<Money, CloseoutError> {
    match swap_mtm(swap, market, t, party) {
        Ok(m) => Ok(m.value),
        Err(ContractError::BeyondMaturity { .. }) => Ok(Money::ZERO),
        Err(e) => Err(e.into()),
    }
}

/// Gross close-out items of one netting set for `party`: each trade's value
/// with the label its settlement carries. A CCDS pays only if its
/// reference entity is the defaulted party; its payoff enters the set as
/// an Unpaid Amount.
fn netting_items(
    ns: &NettingSet,
    cfg: &StructureConfig,
    market: &MarketState,
    tau: f64,
    defaulted: PartyId,
    party: PartyId,
) -> Result<Vec<(FlowLabel, Money)>, CloseoutError> {
    let mut items = Vec::with_capacity(ns.trades().len());
    for id in ns.trades() {
        if let Some(swap) = cfg.swap(id) {
            let v = live_value(swap, market, tau, party)?;
            items.push((FlowLabel::TerminationPayment, v));
        } else if let Some(ccds) = cfg.find_ccds(id) {
            let payoff = if ccds.reference_entity() == defaulted {
                let reference = cfg
                    .swap(ccds.reference_swap())
                    .ok_or_else(|| ContractError::UnknownTrade(ccds.reference_swap().clone()))?;
                ccds_notional(ccds, reference, market, tau)?
            } else {
                Money::ZERO
            };
            items.push((FlowLabel::CcdsSettlement, ccds.payoff_for(party, payoff)));
        } else {
            return Err(ContractError::UnknownTrade(id.clone()).into());
        }
    }
    Ok(items)
}

/// Net close-out value of all trades in `ns` for the non-defaulted party,
/// before collateral.
pub fn net_termination_amount(
    ns: &NettingSet,
    cfg: &StructureConfig,
    market: &MarketState,
    tau: f64,
    defaulted: PartyId,
) -> Result<SignedMtm, CloseoutError> {
    let [a, b] = ns.parties();
    let party = if defaulted == a {
        b
    } else if defaulted == b {
        a
    } else {
        let references = ns.trades().iter().filter_map(|t| cfg.find_ccds(t)).any(|c| c.reference_entity() == defaulted);
        if !references {
            return Err(ContractError::NotMember { party: defaulted, netting_set: ns.id().clone() }.into());
        }
        a
    };
    let items = netting_items(ns, cfg, market, tau, defaulted, party)?;
    Ok(SignedMtm::new(items.iter().map(|(_, v)| *v).sum(), party))
}

/// Upfront of the at-market replacement of `swap` for `surviving_party`:
/// a position worth `m > 0` costs `m`, one worth `-m` is paid `m`.
pub fn replacement_upfront(
    swap: &BasisSwap,
    market: &MarketState,
    tau: f64,
    surviving_party: PartyId,
) -> Result<Option<CashFlow>, CloseoutError> {
    let replacement =
        surviving_party.replacement().ok_or(CloseoutError::Structural("only O and V replace their swaps"))?;
    let value = live_value(swap, market, tau, surviving_party)?;
    Ok(if value.is_positive() {
        Some(CashFlow { from: surviving_party, to: replacement, amount: value, label: FlowLabel::ReplacementUpfront })
    } else if value.is_negative() {
        Some(CashFlow { from: replacement, to: surviving_party, amount: -value, label: FlowLabel::ReplacementUpfront })
    } else {
        None
    })
}

struct Ledger {
    flows: Vec<CashFlow>,
    pre: BTreeMap<PartyId, Money>,
    post: BTreeMap<PartyId, Money>,
    termination: BTreeMap<PartyId, Money>,
}

impl Ledger {
    fn new() -> Self {
        Ledger { flows: Vec::new(), pre: BTreeMap::new(), post: BTreeMap::new(), termination: BTreeMap::new() }
    }

    fn pay(&mut self, from: PartyId, to: PartyId, amount: Money, label: FlowLabel) {
        debug_assert!(!amount.is_negative());
        if amount.is_positive() {
            self.flows.push(CashFlow { from, to, amount, label });
        }
    }

    fn hold_before(&mut self, party: PartyId, value: Money) {
        *self.pre.entry(party).or_insert(Money::ZERO) += value;
    }

    fn hold_after(&mut self, party: PartyId, value: Money) {
        *self.post.entry(party).or_insert(Money::ZERO) += value;
    }

    /// Settles one netting set between `survivor` and the estate and
    /// returns the survivor's termination amount.
    fn settle_set(
        &mut self,
        survivor: PartyId,
        items: &[(FlowLabel, Money)],
        collateral: SetCollateral,
        lgd: Lgd,
    ) -> Result<Money, CloseoutError> {
        let estate = PartyId::EstateOfC;
        let receivable: Money = items.iter().map(|(_, v)| v.positive_part()).sum();
        let payable: Money = items.iter().map(|(_, v)| (-*v).positive_part()).sum();
        let offset = receivable.min(payable);

        let mut left = offset;
        for (label, v) in items.iter().filter(|(_, v)| v.is_negative()) {
            let a = left.min(-*v);
            self.pay(survivor, estate, a, *label);
            left -= a;
        }
        let mut left = offset;
        for (label, v) in items.iter().filter(|(_, v)| v.is_positive()) {
            let a = left.min(*v);
            self.pay(estate, survivor, a, *label);
            left -= a;
        }

        let net = receivable - payable;
        let termination = if net.is_positive() {
            let kept = collateral.held_by_survivor.min(net);
            self.pay(estate, survivor, kept, FlowLabel::CollateralKept);
            let unsecured = net - kept;
            self.pay(estate, survivor, apply_recovery(unsecured, lgd)?, FlowLabel::RecoveryPayment);
            unsecured
        } else if net.is_negative() {
            let owed = -net;
            let kept = collateral.posted_by_survivor.min(owed);
            self.pay(survivor, estate, kept, FlowLabel::CollateralKept);
            self.pay(survivor, estate, owed - kept, FlowLabel::TerminationPayment);
            -(owed - kept)
        } else {
            Money::ZERO
        };
        *self.termination.entry(survivor).or_insert(Money::ZERO) += termination;
        *self.termination.entry(estate).or_insert(Money::ZERO) -= termination;
        Ok(termination)
    }

    fn finish(mut self, scenario: DefaultScenario, structure: StructureKind) -> CloseoutReport {
        self.flows.sort_by_key(|f| (f.label, f.from, f.to, f.amount));
        let mut cash_in: BTreeMap<PartyId, Money> = BTreeMap::new();
        for f in &self.flows {
            *cash_in.entry(f.to).or_insert(Money::ZERO) += f.amount;
            *cash_in.entry(f.from).or_insert(Money::ZERO) -= f.amount;
        }
        let get = |m: &BTreeMap<PartyId, Money>, p| m.get(&p).copied().unwrap_or(Money::ZERO);
        let per_party = PartyId::LEDGER
            .iter()
            .map(|&p| {
                let cash = get(&cash_in, p);
                let outcome = PartyOutcome {
                    realized_loss: get(&self.pre, p) - (get(&self.post, p) + cash),
                    liquidity_delta: -cash,
                    termination_amount: get(&self.termination, p),
                };
                (p, outcome)
            })
            .collect();
        CloseoutReport {
            scenario,
            structure,
            flows: self.flows,
            per_party,
            estate_net: get(&cash_in, PartyId::EstateOfC),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct SetCollateral {
    held_by_survivor: Money,
    posted_by_survivor: Money,
}

/// Collateral in place just before the default: the one-way CSA target on
/// the set's net pre-default MtM. CCDS are premium-neutral zero-coupon
/// instruments and carry no pre-default value.
fn collateral_at_default(
    ns: &NettingSet,
    cfg: &StructureConfig,
    market: &MarketState,
    tau: f64,
    survivor: PartyId,
) -> Result<SetCollateral, CloseoutError> {
    let Some(csa) = ns.csa() else {
        return Ok(SetCollateral::default());
    };
    let mut net = Money::ZERO;
    for id in ns.trades() {
        if let Some(swap) = cfg.swap(id) {
            net += live_value(swap, market, tau, survivor)?;
        }
    }
    let balance = required_collateral(ns, SignedMtm::new(net, survivor))?;
    Ok(if csa.secured_party() == survivor {
        SetCollateral { held_by_survivor: balance, posted_by_survivor: Money::ZERO }
    } else {
        SetCollateral { held_by_survivor: Money::ZERO, posted_by_survivor: balance }
    })
}

fn empty_report(scn: &DefaultScenario, structure: StructureKind) -> CloseoutReport {
    Ledger::new().finish(*scn, structure)
}

/// Items for one of C's netting sets under `cfg`, including TPA clause
/// waivers when the structure is a TPA.
fn set_items(
    cfg: &StructureConfig,
    ns: &NettingSet,
    market: &MarketState,
    tau: f64,
    survivor: PartyId,
) -> Result<Vec<(FlowLabel, Money)>, CloseoutError> {
    let mut items = netting_items(ns, cfg, market, tau, PartyId::Counterparty, survivor)?;
    if cfg.kind == StructureKind::Tpa {
        let x = back_swap_value_for_o(cfg, market, tau)?;
        if x.is_positive() {
            // Clause 1: O waives its claim on the Back Swap in favour of C.
            // Clause 2: C waives V's debt on the Front Swap.
            match survivor {
                PartyId::Originator => items.push((FlowLabel::TpaWaiver, -x)),
                PartyId::Spv => items.push((FlowLabel::TpaWaiver, x)),
                _ => {}
            }
        }
    }
    Ok(items)
}

fn back_swap_value_for_o(cfg: &StructureConfig, market: &MarketState, tau: f64) -> Result<Money, CloseoutError> {
    live_value(&cfg.back, market, tau, PartyId::Originator)
}

/// O's unsecured claim on C's estate if C defaulted at `t` with this
/// market, after set-off and collateral.
pub fn originator_unsecured_claim(cfg: &StructureConfig, market: &MarketState, t: f64) -> Result<Money, CloseoutError> {
    let survivor = PartyId::Originator;
    let items = set_items(cfg, &cfg.back_set, market, t, survivor)?;
    let net: Money = items.iter().map(|(_, v)| *v).sum();
    let collateral = collateral_at_default(&cfg.back_set, cfg, market, t, survivor)?;
    Ok((net - collateral.held_by_survivor).positive_part())
}

fn resolve_common(scn: &DefaultScenario, cfg: &StructureConfig) -> Result<Option<(Ledger, f64)>, CloseoutError> {
    let Some(tau) = scn.tau else {
        return Ok(None);
    };
    scn.validate()?;
    let market = &scn.market_at_tau;
    let mut ledger = Ledger::new();

    // C's positions pass to the estate; they net to zero by construction.
    for swap in [&cfg.front, &cfg.back] {
        let v = live_value(swap, market, tau, PartyId::Counterparty)?;
        ledger.hold_before(PartyId::EstateOfC, v);
    }

    for (ns, survivor) in [(&cfg.back_set, PartyId::Originator), (&cfg.front_set, PartyId::Spv)] {
        let items = set_items(cfg, ns, market, tau, survivor)?;
        let collateral = collateral_at_default(ns, cfg, market, tau, survivor)?;
        ledger.settle_set(survivor, &items, collateral, cfg.lgd)?;
    }

    for (swap, survivor) in [(&cfg.back, PartyId::Originator), (&cfg.front, PartyId::Spv)] {
        let v = live_value(swap, market, tau, survivor)?;
        ledger.hold_before(survivor, v);
        ledger.hold_after(survivor, v);
        if let Some(replacement) = survivor.replacement() {
            ledger.hold_after(replacement, -v);
        }
        if let Some(flow) = replacement_upfront(swap, market, tau, survivor)? {
            ledger.pay(flow.from, flow.to, flow.amount, flow.label);
        }
    }
    Ok(Some((ledger, tau)))
}

fn expect_kind(cfg: &StructureConfig, expected: StructureKind) -> Result<(), CloseoutError> {
    if cfg.kind != expected {
        return Err(CloseoutError::WrongStructure { expected, found: cfg.kind });
    }
    if expected != StructureKind::CcdsChain && !cfg.ccds.is_empty() {
        return Err(CloseoutError::Structural("only the chain structure holds CCDS"));
    }
    Ok(())
}

/// C defaults under the usual structure: two swaps under separate ISDAs,
/// each with a one-way CSA.
pub fn resolve_baseline(scn: &DefaultScenario, cfg: &StructureConfig) -> Result<CloseoutReport, CloseoutError> {
    expect_kind(cfg, StructureKind::Baseline)?;
    match resolve_common(scn, cfg)? {
        Some((ledger, _)) => Ok(ledger.finish(*scn, StructureKind::Baseline)),
        None => Ok(empty_report(scn, StructureKind::Baseline)),
    }
}

/// C defaults under the three-party agreement. When the Back Swap is worth
/// a positive amount to O, O and C waive their claims on each other's
/// ISDAs and V passes the replacement upfront it receives on to O.
pub fn resolve_tpa(scn: &DefaultScenario, cfg: &StructureConfig) -> Result<CloseoutReport, CloseoutError> {
    expect_kind(cfg, StructureKind::Tpa)?;
    let Some((mut ledger, _)) = resolve_common(scn, cfg)? else {
        return Ok(empty_report(scn, StructureKind::Tpa));
    };
    // Clause 3: V pays O what its replacement counterparty paid it upfront.
    let x = back_swap_value_for_o(cfg, &scn.market_at_tau, scn.tau.unwrap_or_default())?;
    if x.is_positive() {
        let received: Money = ledger
            .flows
            .iter()
            .filter(|f| f.label == FlowLabel::ReplacementUpfront && f.to == PartyId::Spv)
            .map(|f| f.amount)
            .sum();
        ledger.pay(PartyId::Spv, PartyId::Originator, received, FlowLabel::TpaWaiver);
    }
    Ok(ledger.finish(*scn, StructureKind::Tpa))
}

/// C defaults under the CCDS chain: C bought protection on itself from O
/// (under the Back Swap ISDA), V bought it from C (under the Front Swap
/// ISDA, settled as an Unpaid Amount) and O bought it from V.
pub fn resolve_ccds_chain(scn: &DefaultScenario, cfg: &StructureConfig) -> Result<CloseoutReport, CloseoutError> {
    expect_kind(cfg, StructureKind::CcdsChain)?;
    cfg.validate_chain()?;
    let Some((mut ledger, tau)) = resolve_common(scn, cfg)? else {
        return Ok(empty_report(scn, StructureKind::CcdsChain));
    };
    let market = &scn.market_at_tau;
    for ccds in cfg.ccds.iter().filter(|c| c.booking() == &Booking::Standalone) {
        if ccds.reference_entity() != PartyId::Counterparty {
            continue;
        }
        let reference = cfg
            .swap(ccds.reference_swap())
            .ok_or_else(|| ContractError::UnknownTrade(ccds.reference_swap().clone()))?;
        let notional = ccds_notional(ccds, reference, market, tau)?;
        ledger.pay(ccds.protection_seller(), ccds.protection_buyer(), notional, FlowLabel::CcdsSettlement);
    }
    Ok(ledger.finish(*scn, StructureKind::CcdsChain))
}

/// Dispatches on the structure kind of `cfg`.
pub fn resolve(scn: &DefaultScenario, cfg: &StructureConfig) -> Result<CloseoutReport, CloseoutError> {
    match cfg.kind {
        StructureKind::Baseline => resolve_baseline(scn, cfg),
        StructureKind::Tpa => resolve_tpa(scn, cfg),
        StructureKind::CcdsChain => resolve_ccds_chain(scn, cfg),
    }
}
