//! Exact rational numbers plus decimal parsing and rendering.
//!
//! Every cost, power, weight and objective value in the crate is a
//! [`Rational`]. Text enters through [`parse_rational`] (no rounding) and
//! leaves either exactly (`p/q`) or through [`format_decimal`], which rounds
//! half away from zero to a fixed number of significant digits.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

/// Significant digits used for every decimal rendering (LP files, CSV).
pub const DECIMAL_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational number `{0}`")]
pub struct ParseRationalError(pub String);

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `7`, `-2.50`, `1e-3`, `.5` or `1/3` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = parse_integer(num.trim()).ok_or_else(err)?;
        let d: BigInt = parse_integer(den.trim()).ok_or_else(err)?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }

    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = body[pos + 1..].parse().map_err(|_| err())?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{whole}{frac}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| err())?);
    let shift = exponent - frac.len() as i64;
    if shift.unsigned_abs() > 4096 {
        return Err(err());
    }
    let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), shift.unsigned_abs() as usize));
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if negative { -value } else { value })
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Exact rendering: `3`, `-1/6`.
pub fn format_exact(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal rendering with `digits` significant digits, rounded half away from
/// zero, trailing zeros trimmed, never in exponent notation.
pub fn format_decimal(value: &Rational, digits: usize) -> String {
    assert!(digits > 0);
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let magnitude = value.abs();
    let ten = BigInt::from(10);

    // 10^exp <= magnitude < 10^(exp+1)
    let mut exp = magnitude.numer().to_string().len() as i64 - magnitude.denom().to_string().len() as i64;
    while pow10(exp) > magnitude {
        exp -= 1;
    }
    while pow10(exp + 1) <= magnitude {
        exp += 1;
    }

    let shift = digits as i64 - 1 - exp;
    let scaled = &magnitude * pow10(shift);
    let mut mantissa = round_half_away(&scaled);
    if mantissa == num_traits::pow(ten.clone(), digits) {
        mantissa /= &ten;
        exp += 1;
    }
    let shift = digits as i64 - 1 - exp;

    let raw = mantissa.to_string();
    let mut out = if shift <= 0 {
        let mut s = raw;
        s.extend(std::iter::repeat_n('0', (-shift) as usize));
        s
    } else if (shift as usize) < raw.len() {
        let split = raw.len() - shift as usize;
        format!("{}.{}", &raw[..split], &raw[split..])
    } else {
        let zeros = shift as usize - raw.len();
        format!("0.{}{}", "0".repeat(zeros), raw)
    };
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.').len();
        out.truncate(trimmed);
    }
    if negative {
        out.insert(0, '-');
    }
    out
}

/// Rounds `value` to `digits` significant digits, exactly as
/// [`format_decimal`] would print it.
pub fn quantize(value: &Rational, digits: usize) -> Rational {
    parse_rational(&format_decimal(value, digits)).expect("decimal rendering always parses")
}

fn pow10(exp: i64) -> Rational {
    let p = num_traits::pow(BigInt::from(10), exp.unsigned_abs() as usize);
    if exp >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

fn round_half_away(value: &Rational) -> BigInt {
    let (q, r) = value.numer().div_rem(value.denom());
    if (r.abs() * 2u32) >= *value.denom() {
        q + value.numer().signum()
    } else {
        q
    }
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Serde adapter storing a rational as its exact string form.
pub mod serde_exact {
    use super::{format_exact, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_exact(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::super::{format_exact, parse_rational, Rational};
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => s.serialize_some(&format_exact(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| parse_rational(&t).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exactly() {
        assert_eq!(parse_rational("0.5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-2.50").unwrap(), ratio(-5, 2));
        assert_eq!(parse_rational("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse_rational("-4/6").unwrap(), ratio(-2, 3));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("2E2").unwrap(), int(200));
        assert_eq!(parse_rational(".25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        for bad in ["", "-", ".", "1/0", "a", "1.2.3", "1/x", "0x10", "1e"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(format_decimal(&ratio(1, 6), 12), "0.166666666667");
        assert_eq!(format_decimal(&ratio(-1, 3), 12), "-0.333333333333");
        assert_eq!(format_decimal(&int(5), 12), "5");
        assert_eq!(format_decimal(&ratio(1, 2), 12), "0.5");
        assert_eq!(format_decimal(&int(0), 12), "0");
        assert_eq!(format_decimal(&ratio(1, 1000), 12), "0.001");
        assert_eq!(format_decimal(&int(1_000_000_000_000_000), 12), "1000000000000000");
        assert_eq!(format_decimal(&ratio(2, 3), 3), "0.667");
        assert_eq!(format_decimal(&ratio(9995, 10), 3), "1000");
        assert_eq!(format_decimal(&ratio(-5, 2), 1), "-3");
        assert_eq!(format_decimal(&ratio(123456789, 1000), 12), "123456.789");
    }

    #[test]
    fn exact_rendering() {
        assert_eq!(format_exact(&ratio(3, 2)), "3/2");
        assert_eq!(format_exact(&int(-4)), "-4");
    }

    proptest::proptest! {
        #[test]
        fn quantize_error_within_half_ulp(n in -1_000_000_000i64..1_000_000_000, d in 1i64..1_000_000) {
            let v = ratio(n, d);
            let q = quantize(&v, 6);
            let err = (&q - &v).abs();
            if !v.is_zero() {
                // relative error bounded by 5e-6 at six significant digits
                proptest::prop_assert!(err <= v.abs() * ratio(5, 1_000_000));
            }
            proptest::prop_assert_eq!(parse_rational(&format_exact(&v)).unwrap(), v);
        }
    }
}
