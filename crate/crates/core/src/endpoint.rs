//! Extended rationals: exact rationals plus the two symbolic infinities.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// Build a rational from a small numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^-k` as an exact rational.
pub fn pow2_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// `2^k` as an exact rational.
pub fn pow2(k: u32) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseNumberError {
    #[error("empty number")]
    Empty,
    #[error("invalid number `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("infinite value `{0}` not allowed here")]
    Infinite(String),
}

/// Parse an exact rational: `p/q`, an integer, or a finite decimal such as `-0.75`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseNumberError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseNumberError::Empty);
    }
    let bad = || ParseNumberError::Invalid(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = parse_int(n.trim()).ok_or_else(bad)?;
        let d: BigInt = parse_int(d.trim()).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(ParseNumberError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let (negative, whole) = match whole.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, whole.strip_prefix('+').unwrap_or(whole)),
        };
        let digits_ok = |t: &str| t.chars().all(|c| c.is_ascii_digit());
        if !digits_ok(whole) || !digits_ok(frac) || (whole.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let joined = format!("{whole}{frac}");
        let mantissa: BigInt = joined.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let value = Rational::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    parse_int(s).map(Rational::from_integer).ok_or_else(bad)
}

fn parse_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Canonical text for a rational: `3`, `-1/2`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// An extended rational. The derived order is the intended one: `-inf < finite < +inf`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Endpoint {
    pub fn zero() -> Self {
        Endpoint::Finite(Rational::zero())
    }

    pub fn int(n: i64) -> Self {
        Endpoint::Finite(int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Endpoint::Finite(rat(n, d))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Endpoint::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Endpoint::Finite(r) => Some(r),
            _ => None,
        }
    }

    /// Translate by a finite amount; infinities are fixed.
    pub fn shifted(&self, c: &Rational) -> Self {
        match self {
            Endpoint::Finite(r) => Endpoint::Finite(r + c),
            other => other.clone(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Endpoint::NegInf => false,
            Endpoint::Finite(r) => !r.is_negative(),
            Endpoint::PosInf => true,
        }
    }

    /// Approximate value, for geometry and display only.
    pub fn to_f64(&self) -> f64 {
        match self {
            Endpoint::NegInf => f64::NEG_INFINITY,
            Endpoint::PosInf => f64::INFINITY,
            Endpoint::Finite(r) => rational_to_f64(r),
        }
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

impl From<Rational> for Endpoint {
    fn from(r: Rational) -> Self {
        Endpoint::Finite(r)
    }
}

impl Neg for Endpoint {
    type Output = Endpoint;
    fn neg(self) -> Endpoint {
        match self {
            Endpoint::NegInf => Endpoint::PosInf,
            Endpoint::PosInf => Endpoint::NegInf,
            Endpoint::Finite(r) => Endpoint::Finite(-r),
        }
    }
}

/// Sum of extended values. `+inf + -inf` has no meaning and panics.
impl Add for &Endpoint {
    type Output = Endpoint;
    fn add(self, rhs: &Endpoint) -> Endpoint {
        use Endpoint::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => panic!("undefined sum inf + -inf"),
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }
}

impl Sub for &Endpoint {
    type Output = Endpoint;
    fn sub(self, rhs: &Endpoint) -> Endpoint {
        self + &(-rhs.clone())
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => f.write_str("-inf"),
            Endpoint::PosInf => f.write_str("inf"),
            Endpoint::Finite(r) => f.write_str(&format_rational(r)),
        }
    }
}

impl FromStr for Endpoint {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "-inf" | "-infinity" | "-∞" => Ok(Endpoint::NegInf),
            "inf" | "+inf" | "infinity" | "+infinity" | "∞" | "+∞" => Ok(Endpoint::PosInf),
            other => parse_rational(other).map(Endpoint::Finite),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!("3/6".parse::<Endpoint>().unwrap(), Endpoint::ratio(1, 2));
        assert_eq!("-4".parse::<Endpoint>().unwrap(), Endpoint::int(-4));
        assert_eq!("0.7".parse::<Endpoint>().unwrap(), Endpoint::ratio(7, 10));
        assert_eq!("-1.25".parse::<Endpoint>().unwrap(), Endpoint::ratio(-5, 4));
        assert_eq!(".5".parse::<Endpoint>().unwrap(), Endpoint::ratio(1, 2));
        assert_eq!("-inf".parse::<Endpoint>().unwrap(), Endpoint::NegInf);
        assert_eq!("inf".parse::<Endpoint>().unwrap(), Endpoint::PosInf);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "abc", "1.2.3", "--1", "1e5", "."] {
            assert!(bad.parse::<Endpoint>().is_err(), "{bad}");
        }
    }

    #[test]
    fn order_is_total_with_infinities() {
        let mut v = vec![
            Endpoint::PosInf,
            Endpoint::int(3),
            Endpoint::NegInf,
            Endpoint::ratio(-1, 2),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                Endpoint::NegInf,
                Endpoint::ratio(-1, 2),
                Endpoint::int(3),
                Endpoint::PosInf
            ]
        );
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(Endpoint::ratio(6, 4).to_string(), "3/2");
        assert_eq!(Endpoint::ratio(-6, 3).to_string(), "-2");
        assert_eq!(Endpoint::NegInf.to_string(), "-inf");
    }

    #[test]
    fn shift_fixes_infinities() {
        assert_eq!(Endpoint::NegInf.shifted(&int(5)), Endpoint::NegInf);
        assert_eq!(Endpoint::int(1).shifted(&rat(1, 2)), Endpoint::ratio(3, 2));
    }
}
