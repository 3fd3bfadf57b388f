//! Exact money amounts.
//!
//! Exposure weights are stored as integer counts of a fixed atomic unit
//! (10^-4 of a currency unit) so that summing parallel transactions is
//! order-independent and export/import round-trips are bit-exact. No
//! floating point ever enters an exposure sum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rational;

/// Atoms per currency unit: amounts carry at most four decimal places.
pub const ATOMS_PER_UNIT: u64 = 10_000;

const MAX_DECIMALS: usize = 4;

/// A non-negative money amount in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(u64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn from_atoms(atoms: u64) -> Money {
        Money(atoms)
    }

    /// Whole currency units, no fractional part.
    pub fn from_units(units: u64) -> Money {
        Money(units * ATOMS_PER_UNIT)
    }

    pub fn atoms(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, other: Money) -> Result<Money> {
        self.0
            .checked_add(other.0)
            .map(Money)
            .ok_or(Error::MoneyOverflow)
    }

    /// Exact value in currency units as a rational.
    pub fn to_rational(self) -> Rational {
        Rational::new(self.0 as i128, ATOMS_PER_UNIT as i128)
    }

    /// Approximate value in currency units (reporting only).
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / ATOMS_PER_UNIT as f64
    }

    /// Nearest representable amount to `units` currency units, never
    /// rounding a positive value down to zero.
    pub fn from_f64_round(units: f64) -> Result<Money> {
        if !units.is_finite() || units < 0.0 {
            return Err(Error::InvalidAmount {
                text: units.to_string(),
                reason: "amount must be finite and non-negative",
            });
        }
        let atoms = units * ATOMS_PER_UNIT as f64;
        if atoms > u64::MAX as f64 / 2.0 {
            return Err(Error::MoneyOverflow);
        }
        let rounded = atoms.round() as u64;
        if rounded == 0 && units > 0.0 {
            return Ok(Money(1));
        }
        Ok(Money(rounded))
    }
}

impl std::iter::Sum<Money> for Result<Money> {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Result<Money> {
        let mut acc = Money::ZERO;
        for m in iter {
            acc = acc.checked_add(m)?;
        }
        Ok(acc)
    }
}

/// Canonical decimal rendering: integer part, then up to four fractional
/// digits with trailing zeros trimmed. Never scientific notation.
impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let units = self.0 / ATOMS_PER_UNIT;
        let frac = self.0 % ATOMS_PER_UNIT;
        if frac == 0 {
            return write!(f, "{units}");
        }
        let mut digits = format!("{frac:04}");
        while digits.ends_with('0') {
            digits.pop();
        }
        write!(f, "{units}.{digits}")
    }
}

impl FromStr for Money {
    type Err = Error;

    /// Parses a plain decimal amount: digits with an optional fractional
    /// part of at most four digits. Signs, exponents, and grouping are
    /// rejected.
    fn from_str(s: &str) -> Result<Money> {
        let err = |reason| Error::InvalidAmount {
            text: s.to_string(),
            reason,
        };
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err("empty amount"));
        }
        if int_part.is_empty() || (frac_part.is_empty() && s.contains('.')) {
            return Err(err("amount must have digits on both sides of the decimal point"));
        }
        if frac_part.len() > MAX_DECIMALS {
            return Err(err("at most four decimal places are supported"));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err("amount must be plain decimal digits"));
        }
        let units: u64 = int_part
            .parse()
            .map_err(|_| err("integer part out of range"))?;
        let mut atoms = units.checked_mul(ATOMS_PER_UNIT).ok_or(Error::MoneyOverflow)?;
        if !frac_part.is_empty() {
            let mut frac: u64 = frac_part.parse().map_err(|_| err("bad fractional part"))?;
            for _ in 0..(MAX_DECIMALS - frac_part.len()) {
                frac *= 10;
            }
            atoms = atoms.checked_add(frac).ok_or(Error::MoneyOverflow)?;
        }
        Ok(Money(atoms))
    }
}

impl Serialize for Money {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a non-negative decimal string into an exact rational.
///
/// Used for model parameters (alpha, kappa, q, kappa grids) where the
/// boundary semantics of the solvency condition must hold exactly.
pub fn parse_decimal_rational(s: &str) -> Result<Rational> {
    let err = |reason: &'static str| Error::InvalidParameter(format!("{s:?}: {reason}"));
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("empty decimal"));
    }
    if s.contains('.') && (int_part.is_empty() || frac_part.is_empty()) {
        return Err(err("decimal must have digits on both sides of the point"));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(err("expected plain decimal digits"));
    }
    if int_part.len() + frac_part.len() > 27 {
        return Err(err("too many digits"));
    }
    let mantissa: i128 = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| err("out of range"))?;
    let denom = 10i128.pow(frac_part.len() as u32);
    Ok(Rational::new(mantissa, denom))
}

/// Renders a rational with a 10^k denominator as the shortest exact
/// decimal; falls back to `num/den` otherwise.
pub fn rational_to_decimal_string(r: &Rational) -> String {
    let mut den = *r.denom();
    debug_assert!(den > 0);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    if places > 27 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    // Scale the numerator so the denominator becomes exactly 10^places.
    let scale = 2i128.pow(places - twos) * 5i128.pow(places - fives);
    let mantissa = r.numer() * scale;
    let (sign, mag) = if mantissa < 0 {
        ("-", (-mantissa) as u128)
    } else {
        ("", mantissa as u128)
    };
    if places == 0 {
        return format!("{sign}{mag}");
    }
    let pow = 10u128.pow(places);
    let units = mag / pow;
    let mut digits = format!("{:0width$}", mag % pow, width = places as usize);
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}{units}")
    } else {
        format!("{sign}{units}.{digits}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_decimals() {
        assert_eq!("5000000".parse::<Money>().unwrap().atoms(), 5_000_000 * ATOMS_PER_UNIT);
        assert_eq!("12.5".parse::<Money>().unwrap().atoms(), 125_000);
        assert_eq!("0.0001".parse::<Money>().unwrap().atoms(), 1);
        assert_eq!("0".parse::<Money>().unwrap(), Money::ZERO);
    }

    #[test]
    fn rejects_malformed_amounts() {
        for bad in ["", ".", "1.", ".5", "1e6", "-3", "1.00001", "1,000", "+1", "abc"] {
            assert!(bad.parse::<Money>().is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn display_round_trips() {
        for text in ["0", "8", "5000000", "12.5", "0.0001", "3.1415"] {
            let m: Money = text.parse().unwrap();
            assert_eq!(m.to_string(), text);
            assert_eq!(m.to_string().parse::<Money>().unwrap(), m);
        }
    }

    #[test]
    fn checked_add_detects_overflow() {
        let big = Money::from_atoms(u64::MAX);
        assert!(big.checked_add(Money::from_atoms(1)).is_err());
        assert_eq!(
            Money::from_units(5).checked_add(Money::from_units(3)).unwrap(),
            Money::from_units(8)
        );
    }

    #[test]
    fn decimal_rational_is_exact() {
        assert_eq!(parse_decimal_rational("0.04").unwrap(), Rational::new(1, 25));
        assert_eq!(parse_decimal_rational("0.20").unwrap(), Rational::new(1, 5));
        assert_eq!(parse_decimal_rational("1").unwrap(), Rational::new(1, 1));
        assert!(parse_decimal_rational("1e-3").is_err());
        assert!(parse_decimal_rational("-0.5").is_err());
    }

    #[test]
    fn rational_decimal_rendering() {
        assert_eq!(rational_to_decimal_string(&Rational::new(1, 25)), "0.04");
        assert_eq!(rational_to_decimal_string(&Rational::new(7, 100)), "0.07");
        assert_eq!(rational_to_decimal_string(&Rational::new(1, 1)), "1");
        assert_eq!(rational_to_decimal_string(&Rational::new(1, 3)), "1/3");
    }
}
