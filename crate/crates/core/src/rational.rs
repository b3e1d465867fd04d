//! Exact rational scalars.
//!
//! Every probability, support point and integral in this crate is a
//! [`Rational`]: an arbitrary-precision fraction kept in lowest terms with a
//! positive denominator. Nothing is ever rounded; [`to_decimal`] exists only
//! for human-readable report output.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

pub type Rational = BigRational;

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `p/q`, `-p/q` or a plain integer. Surrounding whitespace is ignored.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let trimmed = text.trim();
    let bad = || Error::Parse(format!("not a rational: {trimmed:?}"));
    if trimmed.is_empty() {
        return Err(bad());
    }
    match trimmed.split_once('/') {
        Some((num, den)) => {
            let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {trimmed:?}")));
            }
            Ok(Rational::new(num, den))
        }
        None => BigInt::from_str(trimmed)
            .map(Rational::from_integer)
            .map_err(|_| bad()),
    }
}

/// Canonical text form: `p/q`, or `p` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn is_in_unit_interval(value: &Rational) -> bool {
    !value.is_negative() && *value <= Rational::one()
}

/// `base^exp` for a nonnegative integer exponent. `0^0 = 1`.
pub fn pow(base: &Rational, exp: usize) -> Rational {
    num_traits::pow::pow(base.clone(), exp)
}

/// Binomial coefficient C(n, k) as an exact integer.
pub fn binomial_coefficient(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

/// Truncated decimal rendering with `digits` fractional digits, for display.
pub fn to_decimal(value: &Rational, digits: usize) -> String {
    let negative = value.is_negative();
    let abs = value.abs();
    let (whole, mut rem) = abs.numer().div_rem(abs.denom());
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if digits > 0 {
        out.push('.');
        let ten = BigInt::from(10);
        for _ in 0..digits {
            rem *= &ten;
            let (digit, r) = rem.div_rem(abs.denom());
            out.push_str(&digit.to_string());
            rem = r;
        }
    }
    out
}

/// Serde adapters that move rationals across JSON as `"p/q"` strings.
pub mod serde_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => s.serialize_some(&format_rational(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| parse_rational(&t).map_err(D::Error::custom))
                .transpose()
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&format_rational(v))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -4 ").unwrap(), int(-4));
        assert_eq!(parse_rational("2/-4").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn lowest_terms_positive_denominator() {
        let r = rat(6, -8);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(4));
        assert_eq!(format_rational(&r), "-3/4");
        assert_eq!(format_rational(&int(4)), "4");
    }

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial_coefficient(5, 2), BigInt::from(10));
        assert_eq!(binomial_coefficient(0, 0), BigInt::from(1));
        assert_eq!(binomial_coefficient(3, 4), BigInt::from(0));
        assert_eq!(
            binomial_coefficient(60, 30).to_string(),
            "118264581564861424"
        );
    }

    #[test]
    fn decimal_display() {
        assert_eq!(to_decimal(&rat(1, 3), 4), "0.3333");
        assert_eq!(to_decimal(&rat(-7, 4), 2), "-1.75");
        assert_eq!(to_decimal(&int(2), 0), "2");
    }

    #[test]
    fn zero_to_the_zero() {
        assert_eq!(pow(&int(0), 0), int(1));
        assert_eq!(pow(&rat(1, 2), 3), rat(1, 8));
    }
}
