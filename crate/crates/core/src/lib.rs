//! Close-out engine and exposure analytics for a securitization swap
//! structure with a one-way CSA.
//!
//! A counterparty C trades a Front Swap with a special purpose vehicle V and
//! hedges it with a back-to-back Back Swap with the originator O. Both
//! swaps sit under separate ISDA agreements with one-way CSAs: O posts to
//! C, C posts to V, nobody posts to O. The crate resolves C's default
//! under three structures:
//!
//! | Structure | Description |
//! |-----------|-------------|
//! | [`StructureKind::Baseline`] | the usual two-ISDA structure |
//! | [`StructureKind::Tpa`] | a three-party waiver agreement between O, C and V |
//! | [`StructureKind::CcdsChain`] | three back-to-back contingent CDS on C and the Back Swap |
//!
//! and estimates O's exposure and CVA by Monte Carlo.
//!
//! The crate is `no_std` (with `alloc`); file formats, the command line
//! and parallel drivers live in `ccds-cli`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytics;
pub mod closeout;
pub mod contracts;
pub mod error;
pub mod market;
pub mod money;
pub mod rng;

pub use analytics::{cva, exposure_profile, CvaResult, ExposureProfile};
pub use closeout::{
    resolve, resolve_baseline, resolve_ccds_chain, resolve_tpa, CashFlow, CloseoutError, CloseoutReport, FlowLabel,
    PartyOutcome, StructureConfig, StructureKind,
};
pub use contracts::{BasisSwap, Ccds, NettingSet, OneWayCsa, PartyId, Schedule, SchedulePeriod, SignedMtm};
pub use error::ValidationError;
pub use market::{DefaultModel, DefaultScenario, MarketState, MtmPath, PathConfig, PathSet, TimeGrid};
pub use money::{Lgd, Money};
