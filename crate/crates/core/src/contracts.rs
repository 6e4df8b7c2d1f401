//! Parties, swaps, one-way CSAs, netting sets and contingent CDS.
//!
//! Every mark-to-market value carries the party it is seen from
//! ([`SignedMtm`]); bare signed numbers are not passed between modules.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ValidationError;
use crate::market::MarketState;
use crate::money::Money;

/// Ledger parties. Only `Originator`, `Counterparty` and `Spv` sign
/// contracts; the rest appear in close-out reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PartyId {
    Originator,
    Counterparty,
    Spv,
    ReplacementCtpyO,
    ReplacementCtpyV,
    EstateOfC,
}

impl PartyId {
    pub const CONTRACTING: [PartyId; 3] = [PartyId::Originator, PartyId::Counterparty, PartyId::Spv];

    /// Parties that can appear in a close-out ledger once C has defaulted.
    pub const LEDGER: [PartyId; 5] =
        [PartyId::Originator, PartyId::Spv, PartyId::ReplacementCtpyO, PartyId::ReplacementCtpyV, PartyId::EstateOfC];

    pub fn is_contracting(self) -> bool {
        matches!(self, PartyId::Originator | PartyId::Counterparty | PartyId::Spv)
    }

    pub fn code(self) -> &'static str {
        match self {
            PartyId::Originator => "O",
            PartyId::Counterparty => "C",
            PartyId::Spv => "V",
            PartyId::ReplacementCtpyO => "RO",
            PartyId::ReplacementCtpyV => "RV",
            PartyId::EstateOfC => "EC",
        }
    }

    /// The new counterparty a surviving party trades with after C defaults.
    pub fn replacement(self) -> Option<PartyId> {
        match self {
            PartyId::Originator => Some(PartyId::ReplacementCtpyO),
            PartyId::Spv => Some(PartyId::ReplacementCtpyV),
            _ => None,
        }
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TradeId(pub String);

impl From<&str> for TradeId {
    fn from(s: &str) -> Self {
        TradeId(s.into())
    }
}

impl fmt::Display for TradeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NettingSetId(pub String);

impl From<&str> for NettingSetId {
    fn from(s: &str) -> Self {
        NettingSetId(s.into())
    }
}

impl fmt::Display for NettingSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractError {
    #[error("party {party} is not a counterparty to {trade}")]
    UnknownPerspective { party: PartyId, trade: TradeId },
    #[error("valuation time {t} is beyond maturity {maturity}")]
    BeyondMaturity { t: f64, maturity: f64 },
    #[error("valuation time {0} is negative")]
    NegativeTime(f64),
    #[error("party {party} is not a member of netting set {netting_set}")]
    NotMember { party: PartyId, netting_set: NettingSetId },
    #[error("unknown trade {0}")]
    UnknownTrade(TradeId),
    #[error("structural mismatch: {0}")]
    Structural(&'static str),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwapKind {
    FrontSwap,
    BackSwap,
}

/// One exchange date. Rates are per year; the accrual fraction of a period
/// is the distance to the previous payment time (or to 0 for the first).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulePeriod {
    pub time: f64,
    pub asset_rate: f64,
    pub note_rate: f64,
}

/// Payment dates in strictly increasing order, all after time 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SchedulePeriod>", into = "Vec<SchedulePeriod>")]
pub struct Schedule {
    periods: Vec<SchedulePeriod>,
}

impl Schedule {
    pub fn new(periods: Vec<SchedulePeriod>) -> Result<Self, ValidationError> {
        if periods.is_empty() {
            return Err(ValidationError::Invalid {
                field: "schedule",
                reason: "at least one payment date is required",
            });
        }
        let mut prev = 0.0;
        for p in &periods {
            if !p.time.is_finite() || p.time <= prev {
                return Err(ValidationError::Invalid {
                    field: "schedule.time",
                    reason: "payment times must be finite, positive and strictly increasing",
                });
            }
            if !p.asset_rate.is_finite() || !p.note_rate.is_finite() {
                return Err(ValidationError::Invalid { field: "schedule.rate", reason: "rates must be finite" });
            }
            prev = p.time;
        }
        Ok(Schedule { periods })
    }

    /// Equal annual periods `1, 2, ..., years` with constant rates.
    pub fn annual(years: u32, asset_rate: f64, note_rate: f64) -> Result<Self, ValidationError> {
        Schedule::new((1..=years).map(|y| SchedulePeriod { time: y as f64, asset_rate, note_rate }).collect())
    }

    pub fn periods(&self) -> &[SchedulePeriod] {
        &self.periods
    }

    pub fn maturity(&self) -> f64 {
        self.periods[self.periods.len() - 1].time
    }

    /// `(period, accrual fraction)` pairs.
    pub fn with_accruals(&self) -> impl Iterator<Item = (&SchedulePeriod, f64)> {
        self.periods.iter().scan(0.0, |prev, p| {
            let acc = p.time - *prev;
            *prev = p.time;
            Some((p, acc))
        })
    }

    pub fn same_dates(&self, other: &Schedule) -> bool {
        self.periods.len() == other.periods.len()
            && self.periods.iter().zip(&other.periods).all(|(a, b)| a.time == b.time)
    }
}

impl TryFrom<Vec<SchedulePeriod>> for Schedule {
    type Error = ValidationError;
    fn try_from(periods: Vec<SchedulePeriod>) -> Result<Self, Self::Error> {
        Schedule::new(periods)
    }
}

impl From<Schedule> for Vec<SchedulePeriod> {
    fn from(s: Schedule) -> Self {
        s.periods
    }
}

/// The Front Swap (V pays the asset leg to C, C pays Note coupons to V) or
/// its back-to-back mirror, the Back Swap (C pays the asset leg to O, O pays
/// Note coupons to C).
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSwap {
    id: TradeId,
    kind: SwapKind,
    payer_of_asset_leg: PartyId,
    payer_of_note_leg: PartyId,
    notional: Money,
    schedule: Schedule,
}

impl BasisSwap {
    pub fn front(id: impl Into<TradeId>, notional: Money, schedule: Schedule) -> Result<Self, ValidationError> {
        Self::build(id.into(), SwapKind::FrontSwap, notional, schedule)
    }

    pub fn back(id: impl Into<TradeId>, notional: Money, schedule: Schedule) -> Result<Self, ValidationError> {
        Self::build(id.into(), SwapKind::BackSwap, notional, schedule)
    }

    fn build(id: TradeId, kind: SwapKind, notional: Money, schedule: Schedule) -> Result<Self, ValidationError> {
        if notional.is_negative() {
            return Err(ValidationError::OutOfRange {
                field: "notional",
                value: notional.to_major_f64(),
                expected: "a non-negative amount",
            });
        }
        let (payer_of_asset_leg, payer_of_note_leg) = match kind {
            SwapKind::FrontSwap => (PartyId::Spv, PartyId::Counterparty),
            SwapKind::BackSwap => (PartyId::Counterparty, PartyId::Originator),
        };
        Ok(BasisSwap { id, kind, payer_of_asset_leg, payer_of_note_leg, notional, schedule })
    }

    pub fn id(&self) -> &TradeId {
        &self.id
    }

    pub fn kind(&self) -> SwapKind {
        self.kind
    }

    pub fn payer_of_asset_leg(&self) -> PartyId {
        self.payer_of_asset_leg
    }

    pub fn payer_of_note_leg(&self) -> PartyId {
        self.payer_of_note_leg
    }

    pub fn notional(&self) -> Money {
        self.notional
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn maturity(&self) -> f64 {
        self.schedule.maturity()
    }

    pub fn parties(&self) -> [PartyId; 2] {
        [self.payer_of_asset_leg, self.payer_of_note_leg]
    }

    pub fn other_party(&self, party: PartyId) -> Option<PartyId> {
        if party == self.payer_of_asset_leg {
            Some(self.payer_of_note_leg)
        } else if party == self.payer_of_note_leg {
            Some(self.payer_of_asset_leg)
        } else {
            None
        }
    }
}

/// A mark-to-market value and the party it is seen from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedMtm {
    pub value: Money,
    pub perspective: PartyId,
}

impl SignedMtm {
    pub fn new(value: Money, perspective: PartyId) -> Self {
        SignedMtm { value, perspective }
    }

    pub fn zero(perspective: PartyId) -> Self {
        SignedMtm { value: Money::ZERO, perspective }
    }

    /// The same bilateral value seen from the other side.
    pub fn flipped(self, other: PartyId) -> Self {
        SignedMtm { value: -self.value, perspective: other }
    }

    /// True when both describe the same bilateral value, possibly from
    /// opposite sides.
    pub fn equivalent(&self, other: &SignedMtm) -> bool {
        if self.perspective == other.perspective {
            self.value == other.value
        } else {
            self.value == -other.value
        }
    }
}

/// Collateral flows only from `posting_party` to `secured_party`: zero
/// threshold one way, infinite the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneWayCsa {
    secured_party: PartyId,
    posting_party: PartyId,
}

impl OneWayCsa {
    pub fn new(secured_party: PartyId, posting_party: PartyId) -> Result<Self, ContractError> {
        if secured_party == posting_party {
            return Err(ContractError::Structural("a CSA needs two distinct parties"));
        }
        Ok(OneWayCsa { secured_party, posting_party })
    }

    pub fn secured_party(&self) -> PartyId {
        self.secured_party
    }

    pub fn posting_party(&self) -> PartyId {
        self.posting_party
    }
}

/// Where a trade is booked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Booking {
    NettingSet(NettingSetId),
    Standalone,
}

/// Contingent CDS: on default of `reference_entity`, the seller pays the
/// buyer the positive part of `reference_swap`'s MtM seen from
/// `reference_perspective`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ccds {
    id: TradeId,
    reference_entity: PartyId,
    reference_swap: TradeId,
    reference_perspective: PartyId,
    protection_buyer: PartyId,
    protection_seller: PartyId,
    booking: Booking,
    upfront: Money,
}

impl Ccds {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<TradeId>,
        reference_entity: PartyId,
        reference_swap: TradeId,
        reference_perspective: PartyId,
        protection_buyer: PartyId,
        protection_seller: PartyId,
        booking: Booking,
        upfront: Money,
    ) -> Result<Self, ContractError> {
        if protection_buyer == protection_seller {
            return Err(ContractError::Structural("protection buyer and seller must differ"));
        }
        if upfront.is_negative() {
            return Err(ValidationError::OutOfRange {
                field: "upfront",
                value: upfront.to_major_f64(),
                expected: "a non-negative premium",
            }
            .into());
        }
        Ok(Ccds {
            id: id.into(),
            reference_entity,
            reference_swap,
            reference_perspective,
            protection_buyer,
            protection_seller,
            booking,
            upfront,
        })
    }

    pub fn id(&self) -> &TradeId {
        &self.id
    }

    pub fn reference_entity(&self) -> PartyId {
        self.reference_entity
    }

    pub fn reference_swap(&self) -> &TradeId {
        &self.reference_swap
    }

    pub fn reference_perspective(&self) -> PartyId {
        self.reference_perspective
    }

    pub fn protection_buyer(&self) -> PartyId {
        self.protection_buyer
    }

    pub fn protection_seller(&self) -> PartyId {
        self.protection_seller
    }

    pub fn booking(&self) -> &Booking {
        &self.booking
    }

    /// Premium paid by the buyer to the seller at inception.
    pub fn upfront(&self) -> Money {
        self.upfront
    }

    /// A triggered payoff seen from `party`: received by the buyer, paid
    /// by the seller, nothing for anyone else.
    pub fn payoff_for(&self, party: PartyId, notional: Money) -> Money {
        if party == self.protection_buyer {
            notional
        } else if party == self.protection_seller {
            -notional
        } else {
            Money::ZERO
        }
    }
}

/// An ISDA master agreement between two parties.
#[derive(Clone, Debug, PartialEq)]
pub struct NettingSet {
    id: NettingSetId,
    party_a: PartyId,
    party_b: PartyId,
    trades: Vec<TradeId>,
    csa: Option<OneWayCsa>,
    collateral_balance: Money,
}

impl NettingSet {
    pub fn new(
        id: impl Into<NettingSetId>,
        party_a: PartyId,
        party_b: PartyId,
        csa: Option<OneWayCsa>,
    ) -> Result<Self, ContractError> {
        let id = id.into();
        if party_a == party_b {
            return Err(ContractError::Structural("a netting set needs two distinct parties"));
        }
        if let Some(csa) = csa {
            for p in [csa.secured_party, csa.posting_party] {
                if p != party_a && p != party_b {
                    return Err(ContractError::NotMember { party: p, netting_set: id });
                }
            }
        }
        Ok(NettingSet { id, party_a, party_b, trades: Vec::new(), csa, collateral_balance: Money::ZERO })
    }

    pub fn with_trade(mut self, trade: impl Into<TradeId>) -> Self {
        self.trades.push(trade.into());
        self
    }

    /// Sets the collateral held by the secured party.
    pub fn with_collateral(mut self, balance: Money) -> Result<Self, ContractError> {
        if balance.is_negative() {
            return Err(ValidationError::OutOfRange {
                field: "collateral_balance",
                value: balance.to_major_f64(),
                expected: "a non-negative amount",
            }
            .into());
        }
        if self.csa.is_none() && !balance.is_zero() {
            return Err(ContractError::Structural("collateral without a CSA"));
        }
        self.collateral_balance = balance;
        Ok(self)
    }

    pub fn id(&self) -> &NettingSetId {
        &self.id
    }

    pub fn parties(&self) -> [PartyId; 2] {
        [self.party_a, self.party_b]
    }

    pub fn trades(&self) -> &[TradeId] {
        &self.trades
    }

    pub fn csa(&self) -> Option<&OneWayCsa> {
        self.csa.as_ref()
    }

    pub fn collateral_balance(&self) -> Money {
        self.collateral_balance
    }

    pub fn contains(&self, trade: &TradeId) -> bool {
        self.trades.contains(trade)
    }

    pub fn has_member(&self, party: PartyId) -> bool {
        party == self.party_a || party == self.party_b
    }

    pub fn other_party(&self, party: PartyId) -> Option<PartyId> {
        if party == self.party_a {
            Some(self.party_b)
        } else if party == self.party_b {
            Some(self.party_a)
        } else {
            None
        }
    }
}

/// Value of `swap` at time `t` seen from `perspective`.
///
/// In curve mode this is the discounted sum of the remaining net
/// exchanges `notional * (asset_rate - note_rate) * accrual`, positive for
/// the receiver of the asset leg. In direct mode the market's Back Swap
/// value for O is used as is; the Front Swap, being its mirror, is worth
/// the same to C as the Back Swap is to O.
pub fn swap_mtm(
    swap: &BasisSwap,
    market: &MarketState,
    t: f64,
    perspective: PartyId,
) -> Result<SignedMtm, ContractError> {
    if swap.other_party(perspective).is_none() {
        return Err(ContractError::UnknownPerspective { party: perspective, trade: swap.id.clone() });
    }
    if t < 0.0 || t.is_nan() {
        return Err(ContractError::NegativeTime(t));
    }
    let maturity = swap.maturity();
    if t > maturity {
        return Err(ContractError::BeyondMaturity { t, maturity });
    }
    // Curve mode is zero at maturity because no exchange remains; a
    // supplied direct value is taken as given up to and including maturity.
    let for_asset_receiver = match market.back_swap_mtm_for_o {
        Some(x) => x,
        None => {
            let r = market.flat_discount_rate;
            let notional = swap.notional.minor() as f64;
            let pv: f64 = swap
                .schedule
                .with_accruals()
                .filter(|(p, _)| p.time > t)
                .map(|(p, acc)| libm::exp(-r * (p.time - t)) * notional * (p.asset_rate - p.note_rate) * acc)
                .sum();
            Money::round_minor_f64(pv)
        }
    };
    let value = if perspective == swap.payer_of_note_leg { for_asset_receiver } else { -for_asset_receiver };
    Ok(SignedMtm::new(value, perspective))
}

/// True when the Front Swap seen by V is exactly the negative of the Back
/// Swap seen by O.
pub fn mirror_check(front: &BasisSwap, back: &BasisSwap, market: &MarketState, t: f64) -> Result<bool, ContractError> {
    if front.kind != SwapKind::FrontSwap || back.kind != SwapKind::BackSwap {
        return Err(ContractError::Structural("mirror check needs a Front Swap and a Back Swap"));
    }
    if front.notional != back.notional || !front.schedule.same_dates(&back.schedule) {
        return Err(ContractError::Structural("Front and Back Swap must share notional and payment dates"));
    }
    let v = swap_mtm(front, market, t, PartyId::Spv)?;
    let o = swap_mtm(back, market, t, PartyId::Originator)?;
    Ok(v.value == -o.value)
}

/// Target collateral under continuous, zero-threshold, zero-MTA
/// collateralization: the positive part of the secured party's net MtM.
pub fn required_collateral(ns: &NettingSet, net_mtm: SignedMtm) -> Result<Money, ContractError> {
    let Some(csa) = ns.csa else {
        return Ok(Money::ZERO);
    };
    if !ns.has_member(net_mtm.perspective) {
        return Err(ContractError::NotMember { party: net_mtm.perspective, netting_set: ns.id.clone() });
    }
    let for_secured = if net_mtm.perspective == csa.secured_party { net_mtm.value } else { -net_mtm.value };
    Ok(for_secured.positive_part())
}

/// Notional of a triggered CCDS: the positive part of the reference swap's
/// value for the reference perspective at the default time. A matured
/// reference swap gives zero.
pub fn ccds_notional(
    ccds: &Ccds,
    reference_swap: &BasisSwap,
    market: &MarketState,
    default_time: f64,
) -> Result<Money, ContractError> {
    if reference_swap.id != ccds.reference_swap {
        return Err(ContractError::UnknownTrade(ccds.reference_swap.clone()));
    }
    match swap_mtm(reference_swap, market, default_time, ccds.reference_perspective) {
        Ok(m) => Ok(m.value.positive_part()),
        Err(ContractError::BeyondMaturity { .. }) => Ok(Money::ZERO),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn single_exchange(asset: f64, note: f64) -> Schedule {
        Schedule::new(vec![SchedulePeriod { time: 1.0, asset_rate: asset, note_rate: note }]).unwrap()
    }

    fn pair(schedule: Schedule) -> (BasisSwap, BasisSwap) {
        let n = Money::from_major(100_000_000);
        (BasisSwap::front("front", n, schedule.clone()).unwrap(), BasisSwap::back("back", n, schedule).unwrap())
    }

    #[test]
    fn leg_payers_follow_swap_kind() {
        let (front, back) = pair(single_exchange(0.03, 0.02));
        assert_eq!(front.payer_of_asset_leg(), PartyId::Spv);
        assert_eq!(front.payer_of_note_leg(), PartyId::Counterparty);
        assert_eq!(back.payer_of_asset_leg(), PartyId::Counterparty);
        assert_eq!(back.payer_of_note_leg(), PartyId::Originator);
    }

    #[test]
    fn equal_legs_are_worth_nothing() {
        let (_, back) = pair(Schedule::annual(5, 0.025, 0.025).unwrap());
        let market = MarketState::curve(0.01);
        for t in [0.0, 0.5, 2.0, 4.99] {
            assert_eq!(swap_mtm(&back, &market, t, PartyId::Originator).unwrap().value, Money::ZERO);
        }
    }

    #[test]
    fn single_discounted_exchange() {
        let (_, back) = pair(single_exchange(0.03, 0.02));
        let market = MarketState::curve(0.01);
        // one net exchange of 1% on 100m, discounted one year at 1%
        let expected = libm::exp(-0.01) * 1_000_000.0;
        let o = swap_mtm(&back, &market, 0.0, PartyId::Originator).unwrap();
        assert!((o.value.to_major_f64() - expected).abs() <= 0.005);
        assert!((o.value.to_major_f64() - 990_050.0).abs() < 1.0);
        let c = swap_mtm(&back, &market, 0.0, PartyId::Counterparty).unwrap();
        assert_eq!(c.value, -o.value);
        assert!(c.equivalent(&o));
    }

    #[test]
    fn perspective_must_be_a_party() {
        let (front, _) = pair(single_exchange(0.03, 0.02));
        let err = swap_mtm(&front, &MarketState::curve(0.0), 0.0, PartyId::Originator).unwrap_err();
        assert!(matches!(err, ContractError::UnknownPerspective { .. }));
    }

    #[test]
    fn maturity_boundary() {
        let (_, back) = pair(single_exchange(0.03, 0.02));
        let m = MarketState::curve(0.01);
        assert_eq!(swap_mtm(&back, &m, 1.0, PartyId::Originator).unwrap().value, Money::ZERO);
        let direct = MarketState::direct(0.01, Money::from_major(5));
        assert_eq!(swap_mtm(&back, &direct, 1.0, PartyId::Originator).unwrap().value, Money::from_major(5));
        assert!(matches!(swap_mtm(&back, &m, 1.5, PartyId::Originator), Err(ContractError::BeyondMaturity { .. })));
    }

    #[test]
    fn direct_mode_mirrors_front_and_back() {
        let (front, back) = pair(Schedule::annual(10, 0.0, 0.0).unwrap());
        let x = Money::from_major(40);
        let m = MarketState::direct(0.01, x);
        assert_eq!(swap_mtm(&back, &m, 3.0, PartyId::Originator).unwrap().value, x);
        assert_eq!(swap_mtm(&front, &m, 3.0, PartyId::Spv).unwrap().value, -x);
        assert_eq!(swap_mtm(&front, &m, 3.0, PartyId::Counterparty).unwrap().value, x);
    }

    #[test]
    fn mirror_check_cases() {
        let (front, back) = pair(Schedule::annual(3, 0.04, 0.015).unwrap());
        let m = MarketState::curve(0.02);
        assert!(mirror_check(&front, &back, &m, 0.7).unwrap());

        let perturbed = Schedule::annual(3, 0.04, 0.016).unwrap();
        let front_p = BasisSwap::front("front", front.notional(), perturbed).unwrap();
        assert!(!mirror_check(&front_p, &back, &m, 0.7).unwrap());

        let zero_front = BasisSwap::front("f", Money::ZERO, Schedule::annual(3, 0.04, 0.01).unwrap()).unwrap();
        let zero_back = BasisSwap::back("b", Money::ZERO, Schedule::annual(3, 0.04, 0.01).unwrap()).unwrap();
        assert!(mirror_check(&zero_front, &zero_back, &m, 0.0).unwrap());

        let short = BasisSwap::back("b", front.notional(), Schedule::annual(2, 0.04, 0.015).unwrap()).unwrap();
        assert!(matches!(mirror_check(&front, &short, &m, 0.0), Err(ContractError::Structural(_))));
        assert!(matches!(mirror_check(&back, &front, &m, 0.0), Err(ContractError::Structural(_))));
    }

    #[test]
    fn collateral_is_positive_part_for_secured_party() {
        let front_set = NettingSet::new(
            "front",
            PartyId::Counterparty,
            PartyId::Spv,
            Some(OneWayCsa::new(PartyId::Spv, PartyId::Counterparty).unwrap()),
        )
        .unwrap();
        let back_set = NettingSet::new(
            "back",
            PartyId::Counterparty,
            PartyId::Originator,
            Some(OneWayCsa::new(PartyId::Counterparty, PartyId::Originator).unwrap()),
        )
        .unwrap();
        let forty = Money::from_major(40);
        assert_eq!(required_collateral(&front_set, SignedMtm::new(forty, PartyId::Spv)).unwrap(), forty);
        assert_eq!(required_collateral(&back_set, SignedMtm::new(forty, PartyId::Originator)).unwrap(), Money::ZERO);
        assert_eq!(required_collateral(&back_set, SignedMtm::new(-forty, PartyId::Counterparty)).unwrap(), Money::ZERO);
        assert_eq!(required_collateral(&back_set, SignedMtm::zero(PartyId::Counterparty)).unwrap(), Money::ZERO);
        let bare = NettingSet::new("ccds3", PartyId::Originator, PartyId::Spv, None).unwrap();
        assert_eq!(required_collateral(&bare, SignedMtm::new(forty, PartyId::Spv)).unwrap(), Money::ZERO);
        assert!(required_collateral(&front_set, SignedMtm::new(forty, PartyId::Originator)).is_err());
    }

    #[test]
    fn ccds_notional_is_positive_part() {
        let (_, back) = pair(Schedule::annual(10, 0.0, 0.0).unwrap());
        let ccds = Ccds::new(
            "ccds",
            PartyId::Counterparty,
            back.id().clone(),
            PartyId::Originator,
            PartyId::Originator,
            PartyId::Spv,
            Booking::Standalone,
            Money::ZERO,
        )
        .unwrap();
        let at = |x: i64| ccds_notional(&ccds, &back, &MarketState::direct(0.0, Money::from_major(x)), 2.0).unwrap();
        assert_eq!(at(100), Money::from_major(100));
        assert_eq!(at(-50), Money::ZERO);
        assert_eq!(at(0), Money::ZERO);
        let matured = ccds_notional(&ccds, &back, &MarketState::direct(0.0, Money::from_major(5)), 11.0).unwrap();
        assert_eq!(matured, Money::ZERO);
    }

    #[test]
    fn ccds_needs_distinct_sides() {
        let err = Ccds::new(
            "x",
            PartyId::Counterparty,
            "back".into(),
            PartyId::Originator,
            PartyId::Spv,
            PartyId::Spv,
            Booking::Standalone,
            Money::ZERO,
        );
        assert!(err.is_err());
        assert!(OneWayCsa::new(PartyId::Spv, PartyId::Spv).is_err());
    }
}
