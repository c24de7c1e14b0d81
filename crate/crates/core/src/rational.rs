//! Exact rational arithmetic helpers.
//!
//! All weights, fractional matching values and bounds are carried as
//! arbitrary-precision rationals. Persisted artifacts store them as
//! `"numerator/denominator"` strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn from_usize(value: usize) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Canonical text form; integers still carry a `/1` denominator.
pub fn format(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse(text: &str) -> Result<Rational> {
    let bad = |message: &str| Error::Schema {
        location: format!("rational `{text}`"),
        message: message.to_string(),
    };
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| bad("bad denominator"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Round to nearest, ties away from zero.
pub fn round_half_away(q: &Rational) -> BigInt {
    q.round().to_integer()
}

pub fn to_usize(q: &BigInt) -> Result<usize> {
    if q.is_negative() {
        return Err(Error::InvalidParameter(format!("negative count {q}")));
    }
    q.to_usize()
        .ok_or_else(|| Error::CapExceeded(format!("count {q} does not fit in usize")))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Serde adapter storing a rational as a `"num/den"` string.
pub mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}

pub mod serde_str_vec {
    use super::Rational;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(qs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(qs.len()))?;
        for q in qs {
            seq.serialize_element(&super::format(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| super::parse(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse() {
        assert_eq!(format(&rat(2, 24)), "1/12");
        assert_eq!(parse("1/12").unwrap(), rat(1, 12));
        assert_eq!(parse(" 3 ").unwrap(), int(3));
        assert_eq!(format(&int(3)), "3/1");
        assert!(parse("1/0").is_err());
        assert!(parse("x/2").is_err());
    }

    #[test]
    fn rounding_ties_away_from_zero() {
        assert_eq!(round_half_away(&rat(9, 2)), BigInt::from(5));
        assert_eq!(round_half_away(&rat(1, 2)), BigInt::from(1));
        assert_eq!(round_half_away(&rat(7, 16)), BigInt::from(0));
        assert_eq!(round_half_away(&rat(-1, 2)), BigInt::from(-1));
    }
}
