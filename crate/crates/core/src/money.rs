//! Fixed-point currency.
//!
//! Rewards are sums of price × integer quantity terms. Keeping them in integer
//! micro-units makes shaping and its inverse adjustment exact, and lets a
//! persisted trajectory reproduce every logged reward bit-for-bit.

use core::fmt;
use core::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_traits::Float;

/// Micro-units per currency unit.
pub const SCALE: i64 = 1_000_000;

/// Serialized as the integer count of micro-units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_micros(micros: i64) -> Self {
        Money(micros)
    }

    /// Rounds `value` to the nearest micro-unit.
    pub fn from_f64(value: f64) -> Self {
        Money(Float::round(value * SCALE as f64) as i64)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    /// `self × quantity`, exact.
    pub const fn times(self, quantity: i64) -> Self {
        Money(self.0 * quantity)
    }

    /// Parses the fixed six-decimal form produced by `Display`, and plain
    /// integers or shorter decimals.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() || frac_part.len() > 6 {
            return None;
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let whole: i64 = int_part.parse().ok()?;
        let mut frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
        for _ in frac_part.len()..6 {
            frac *= 10;
        }
        let micros = whole.checked_mul(SCALE)?.checked_add(frac)?;
        Some(Money(if neg { -micros } else { micros }))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{:06}", sign, abs / SCALE as u64, abs % SCALE as u64)
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

impl core::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn display_negative_fraction() {
        assert_eq!(Money::from_f64(-2.8).to_string(), "-2.800000");
        assert_eq!(Money::from_f64(-0.2).to_string(), "-0.200000");
        assert_eq!(Money::ZERO.to_string(), "0.000000");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert_eq!(Money::parse("1.2345678"), None);
        assert_eq!(Money::parse("abc"), None);
        assert_eq!(Money::parse(".5"), None);
        assert_eq!(Money::parse("52.4"), Some(Money::from_micros(52_400_000)));
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(m in -1_000_000_000_000i64..1_000_000_000_000) {
            let money = Money::from_micros(m);
            prop_assert_eq!(Money::parse(&money.to_string()), Some(money));
        }
    }
}
