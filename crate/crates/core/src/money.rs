//! Exact money arithmetic.
//!
//! Amounts are integer minor units (cents) of a single run currency. All
//! close-out arithmetic happens on integers so the equivalence and
//! conservation checks can demand exact equality. Floating point enters only
//! at valuation time and is rounded once, here.

use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Minor units per major currency unit.
pub const MINOR_PER_MAJOR: i64 = 100;

/// A signed amount in integer minor units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_minor(minor: i64) -> Self {
        Money(minor)
    }

    /// Whole major units, e.g. `Money::from_major(100_000_000)` for 100m.
    pub const fn from_major(major: i64) -> Self {
        Money(major * MINOR_PER_MAJOR)
    }

    /// Rounds a floating amount given in minor units to the nearest minor
    /// unit, ties away from zero.
    pub fn round_minor_f64(minor: f64) -> Self {
        Money(libm::round(minor) as i64)
    }

    /// Rounds a floating amount given in major units.
    pub fn from_major_f64(major: f64) -> Self {
        Self::round_minor_f64(major * MINOR_PER_MAJOR as f64)
    }

    pub const fn minor(self) -> i64 {
        self.0
    }

    pub fn to_major_f64(self) -> f64 {
        self.0 as f64 / MINOR_PER_MAJOR as f64
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub const fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// `max(self, 0)`.
    pub fn positive_part(self) -> Money {
        Money(self.0.max(0))
    }

    pub fn abs(self) -> Money {
        Money(self.0.abs())
    }

    pub fn min(self, other: Money) -> Money {
        Money(self.0.min(other.0))
    }

    pub fn max(self, other: Money) -> Money {
        Money(self.0.max(other.0))
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let per = MINOR_PER_MAJOR as u64;
        write!(f, "{}{}.{:02}", sign, abs / per, abs % per)
    }
}

const LGD_SCALE: u64 = 1_000_000_000;

/// Loss given default, held as an exact fraction in parts per billion.
///
/// Serialized as a plain decimal fraction; parsing rounds to the nearest
/// part per billion, so a value written by this type reads back unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Lgd(u32);

impl Lgd {
    pub const ZERO: Lgd = Lgd(0);
    pub const ONE: Lgd = Lgd(LGD_SCALE as u32);

    pub fn new(fraction: f64) -> Result<Self, ValidationError> {
        if !fraction.is_finite() || !(0.0..=1.0).contains(&fraction) {
            return Err(ValidationError::OutOfRange {
                field: "lgd",
                value: fraction,
                expected: "a fraction in [0, 1]",
            });
        }
        Ok(Lgd(libm::round(fraction * LGD_SCALE as f64) as u32))
    }

    pub fn from_parts_per_billion(ppb: u32) -> Result<Self, ValidationError> {
        if ppb as u64 > LGD_SCALE {
            return Err(ValidationError::OutOfRange {
                field: "lgd",
                value: ppb as f64 / LGD_SCALE as f64,
                expected: "a fraction in [0, 1]",
            });
        }
        Ok(Lgd(ppb))
    }

    pub const fn parts_per_billion(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / LGD_SCALE as f64
    }

    /// `lgd * claim`, rounded half to even at the minor unit.
    pub fn loss_on(self, claim: Money) -> Money {
        let num = claim.minor() as i128 * self.0 as i128;
        let den = LGD_SCALE as i128;
        let q = num.div_euclid(den);
        let r = num.rem_euclid(den);
        let q = match (2 * r).cmp(&den) {
            core::cmp::Ordering::Less => q,
            core::cmp::Ordering::Greater => q + 1,
            core::cmp::Ordering::Equal => q + (q & 1),
        };
        Money::from_minor(q as i64)
    }

    /// The part of `claim` that is recovered: `claim - loss_on(claim)`.
    pub fn recovery_on(self, claim: Money) -> Money {
        claim - self.loss_on(claim)
    }
}

impl TryFrom<f64> for Lgd {
    type Error = ValidationError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Lgd::new(value)
    }
}

impl From<Lgd> for f64 {
    fn from(value: Lgd) -> f64 {
        value.as_f64()
    }
}
