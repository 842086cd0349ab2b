//! Currency amounts stored as integer minor units (cents).
//!
//! All stored amounts are exact integers; allocation math that needs
//! fractional intermediate values converts to `f64` dollars and rounds
//! back when a stored amount is produced.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// An amount of money in integer minor units (cents).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Currency(i64);

impl Currency {
    pub const ZERO: Currency = Currency(0);

    pub fn from_minor(minor: i64) -> Self {
        Currency(minor)
    }

    pub fn from_major(major: i64) -> Self {
        Currency(major * 100)
    }

    /// Round a fractional dollar amount to the nearest cent.
    pub fn from_major_f64(major: f64) -> Self {
        Currency((major * 100.0).round() as i64)
    }

    pub fn minor(self) -> i64 {
        self.0
    }

    pub fn as_major_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn checked_add(self, other: Currency) -> Option<Currency> {
        self.0.checked_add(other.0).map(Currency)
    }

    pub fn checked_sub(self, other: Currency) -> Option<Currency> {
        self.0.checked_sub(other.0).map(Currency)
    }

    pub fn saturating_add(self, other: Currency) -> Currency {
        Currency(self.0.saturating_add(other.0))
    }

    /// Midpoint of two amounts, rounded to the nearest cent.
    pub fn midpoint(self, other: Currency) -> Currency {
        Currency(((self.0 as f64 + other.0 as f64) / 2.0).round() as i64)
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{:02}", sign, abs / 100, abs % 100)
    }
}

/// Error parsing a currency string.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid currency amount {0:?}")]
pub struct CurrencyParseError(pub String);

impl FromStr for Currency {
    type Err = CurrencyParseError;

    /// Parses plain decimal amounts without locale separators: `199`,
    /// `199.99`, `-3.5`. At most two fraction digits are kept exactly;
    /// longer fractions are rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || CurrencyParseError(s.to_string());
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        if t.is_empty() {
            return Err(bad());
        }
        let (int_part, frac_part) = match t.split_once('.') {
            Some((i, f)) => (i, f),
            None => (t, ""),
        };
        if frac_part.len() > 2 || !int_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let frac: i64 = match frac_part.len() {
            0 => 0,
            1 => frac_part.parse::<i64>().map_err(|_| bad())? * 10,
            _ => frac_part.parse().map_err(|_| bad())?,
        };
        let minor = int.checked_mul(100).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        Ok(Currency(if neg { -minor } else { minor }))
    }
}

impl Serialize for Currency {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_major_f64())
    }
}

impl<'de> Deserialize<'de> for Currency {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let major = f64::deserialize(deserializer)?;
        if !major.is_finite() {
            return Err(serde::de::Error::custom("non-finite currency amount"));
        }
        Ok(Currency::from_major_f64(major))
    }
}
