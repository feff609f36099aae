use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Arbitrary-precision real scalar used throughout the crate.
pub type BigReal = Float;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision in decimal digits.
///
/// Every routine taking a `Precision` computes with [`Precision::GUARD_DIGITS`]
/// extra digits (plus a few spare bits), so results are good to at least
/// `digits` significant digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub const MIN_DIGITS: u32 = 32;
    pub const GUARD_DIGITS: u32 = 8;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidParams(format!(
                "precision must be at least {} digits, got {digits}",
                Self::MIN_DIGITS
            )));
        }
        Ok(Precision { digits })
    }

    /// Digit budget for determinant computations at size `n`:
    /// `max(64, ceil(1.4 n) + 32)`.
    pub fn for_hankel(n: usize) -> Self {
        let scaled = (1.4 * n as f64).ceil() as u32 + 32;
        Precision { digits: scaled.max(64) }
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Binary precision of every intermediate `BigReal`.
    pub fn bits(self) -> u32 {
        ((self.digits + Self::GUARD_DIGITS) as f64 * LOG2_10).ceil() as u32 + 16
    }

    /// Same decimal contract, with `extra` additional working bits.
    pub fn bits_with(self, extra: u32) -> u32 {
        self.bits() + extra
    }

    /// `10^(8 - digits)`: the relative error promised by operations at this
    /// precision.
    pub fn tolerance(self) -> BigReal {
        pow10(self.bits(), 8 - self.digits as i64)
    }

    /// A precision with `factor` times as many digits.
    pub fn scaled(self, factor: u32) -> Self {
        Precision {
            digits: self.digits * factor,
        }
    }

    /// The largest precision whose [`bits`](Self::bits) fit in `bits`,
    /// never below the minimum.
    pub fn from_bits(bits: u32) -> Self {
        let digits = ((bits.saturating_sub(16)) as f64 / LOG2_10).floor() as u32;
        Precision {
            digits: digits.saturating_sub(Self::GUARD_DIGITS).max(Self::MIN_DIGITS),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} digits", self.digits)
    }
}

/// `10^e` at `bits` binary digits.
pub fn pow10(bits: u32, e: i64) -> BigReal {
    let ten = Float::with_val(bits, 10);
    if e >= 0 {
        ten.pow(e as u32)
    } else {
        Float::with_val(bits, 1) / ten.pow((-e) as u32)
    }
}

/// Parses `"-1.25"`, `"3e-2"`, `"1/3"` or an integer into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str_radix(&digits, 10).ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10);
    if scale >= 0 {
        value *= ten.pow(scale as u32);
    } else {
        value /= ten.pow((-scale) as u32);
    }
    if neg {
        value = -value;
    }
    Some(value)
}

pub(crate) fn ensure_finite(x: BigReal, op: &'static str) -> Result<BigReal> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(op))
    }
}

pub(crate) fn pi(bits: u32) -> BigReal {
    Float::with_val(bits, rug::float::Constant::Pi)
}

/// Decimal rendering with `digits` significant digits.
pub fn to_decimal(x: &BigReal, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits as usize))
}
