//! Exact rational arithmetic helpers.
//!
//! Everything that has to be decided exactly (ball nesting, cylinder
//! endpoints, measure brackets) runs on [`Rational`], an arbitrary precision
//! reduced fraction. Rationals cross the serialization boundary as `"p/q"`
//! strings so nothing is lost on a round trip.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

/// Arbitrary precision rational, always stored reduced with a positive denominator.
pub type Rational = BigRational;

/// Largest decimal exponent accepted by [`parse_rational`].
pub const MAX_DECIMAL_EXPONENT: i64 = 4096;

/// Longest string accepted by [`parse_rational`].
pub const MAX_RATIONAL_LEN: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("rational literal longer than {MAX_RATIONAL_LEN} bytes")]
    TooLong,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("exponent out of range in `{0}`")]
    ExponentRange(String),
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `p/q` as a reduced rational.
///
/// Panics when `q == 0`; use [`parse_rational`] for untrusted input.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// `3^{-n}`, `2^{-n}` and friends.
pub fn inv_pow(base: u64, exp: u32) -> Rational {
    Rational::new(BigInt::one(), num_traits::pow(BigInt::from(base), exp as usize))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Always `p/q`, including integers (`3/1`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Wrapper that displays a rational as `p/q`.
pub struct Fraction<'a>(pub &'a Rational);

impl fmt::Display for Fraction<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Parses `p/q`, a signed integer, or a decimal with optional exponent
/// (`0.125`, `-1.5e-3`). Decimals are converted exactly.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if s.len() > MAX_RATIONAL_LEN {
        return Err(ParseRationalError::TooLong);
    }
    let invalid = || ParseRationalError::Invalid(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_int(p.trim()).ok_or_else(invalid)?;
        let q = parse_int(q.trim()).ok_or_else(invalid)?;
        if q.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(s)
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse::<BigInt>().ok()
}

fn parse_decimal(s: &str) -> Result<Rational, ParseRationalError> {
    let invalid = || ParseRationalError::Invalid(s.to_string());
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(at) => {
            let exp_str = &s[at + 1..];
            let digits = exp_str.strip_prefix(['-', '+']).unwrap_or(exp_str);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(invalid());
            }
            if digits.len() > 6 {
                return Err(ParseRationalError::ExponentRange(s.to_string()));
            }
            let exp: i64 = exp_str.parse().map_err(|_| invalid())?;
            (&s[..at], exp)
        }
        None => (s, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(invalid());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(invalid());
    }
    let scale = exponent - frac.len() as i64;
    if scale.abs() > MAX_DECIMAL_EXPONENT + MAX_RATIONAL_LEN as i64 || exponent.abs() > MAX_DECIMAL_EXPONENT {
        return Err(ParseRationalError::ExponentRange(s.to_string()));
    }
    let digits = format!("{whole}{frac}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_biguint(Sign::Plus, digits.parse::<BigUint>().map_err(|_| invalid())?)
    };
    if negative {
        numer = -numer;
    }
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// `floor(sqrt(r))` for non-negative `r`, as an integer.
pub fn floor_sqrt(r: &Rational) -> BigInt {
    if !r.is_positive() {
        return BigInt::zero();
    }
    // floor(sqrt(x)) == floor(sqrt(floor(x))) for x >= 0.
    r.floor().to_integer().sqrt()
}

/// Rational bracket `(lo, hi)` with `lo ≤ √r ≤ hi` and roughly 64 bits of relative precision.
pub fn sqrt_bracket(r: &Rational) -> (Rational, Rational) {
    if !r.is_positive() {
        return (Rational::zero(), Rational::zero());
    }
    let log2 = r.numer().bits() as i64 - r.denom().bits() as i64;
    let k = (64 - log2 / 2).max(0) as usize;
    let scale = num_traits::pow(BigInt::from(2), k);
    let n = (r * Rational::from_integer(&scale * &scale)).floor().to_integer();
    let root = n.sqrt();
    let lo = Rational::new(root.clone(), scale.clone());
    let hi = Rational::new(root + 1, scale);
    (lo, hi)
}

/// Squared Euclidean distance between coordinate slices.
pub fn dist_sq(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            &d * &d
        })
        .fold(Rational::zero(), |acc, v| acc + v)
}

/// Nearest integer to `r`, ties rounding down.
pub fn nearest_integer(r: &Rational) -> BigInt {
    let floor = r.floor();
    let frac = r - &floor;
    let half = ratio(1, 2);
    if frac > half {
        floor.to_integer() + 1
    } else {
        floor.to_integer()
    }
}

/// Distance from `r` to the nearest integer.
pub fn dist_to_integer(r: &Rational) -> Rational {
    let frac = r - r.floor();
    let other = Rational::one() - &frac;
    frac.min(other)
}

/// `lcm` of the denominators of the given rationals.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub mod serde_str {
    //! Serialize a [`Rational`](super::Rational) as a `"p/q"` string.
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_vec {
    //! Serialize a list of rationals as a list of `"p/q"` strings.
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Parses a comma separated list of rationals (`"1/9,1/27,0.01"`).
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>, ParseRationalError> {
    s.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(parse_rational)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), int(-4));
        assert_eq!(parse_rational("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("-1.5e-3").unwrap(), ratio(-3, 2000));
        assert_eq!(parse_rational("2E2").unwrap(), int(200));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "/", "1/0", "a/b", "1.2.3", "e5", "1e", "--1", "1/-", "1e9999999", "+"] {
            assert!(parse_rational(bad).is_err(), "{bad} parsed");
        }
    }

    #[test]
    fn formats_integers_with_unit_denominator() {
        assert_eq!(format_rational(&int(3)), "3/1");
        assert_eq!(format_rational(&ratio(-2, 4)), "-1/2");
    }

    #[test]
    fn integer_helpers() {
        assert_eq!(floor_sqrt(&ratio(17, 2)), BigInt::from(2));
        assert_eq!(nearest_integer(&ratio(7, 4)), BigInt::from(2));
        assert_eq!(dist_to_integer(&ratio(-1, 4)), ratio(1, 4));
        assert_eq!(common_denominator(&[ratio(1, 4), ratio(1, 6)]), BigInt::from(12));
    }

    #[test]
    fn sqrt_bracket_encloses_root() {
        for r in [ratio(2, 1), ratio(1, 3), ratio(1, 1_000_000_007), ratio(49, 4)] {
            let (lo, hi) = sqrt_bracket(&r);
            assert!(&lo * &lo <= r && r <= &hi * &hi);
            assert!(to_f64(&(&hi - &lo)) <= 1e-15 * to_f64(&r).sqrt().max(1e-300) * 8.0);
        }
    }
}
