//! Helpers for exact rational probabilities.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Parses `"num/den"` (or a bare integer) into a reduced rational.
pub fn parse(s: &str) -> Result<BigRational> {
    let bad = || Error::Rational(s.to_string());
    let (num, den) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Formats as `"num/den"`, always including the denominator.
pub fn format(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `2^e` for a possibly negative integer exponent, exactly.
pub fn pow2(e: i64) -> BigRational {
    let one = BigInt::one();
    if e >= 0 {
        BigRational::from_integer(one << (e as usize))
    } else {
        BigRational::new(one.clone(), one << ((-e) as usize))
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Only reachable when numerator or denominator exceed f64 range.
        log2(r).exp2()
    })
}

fn log2_uint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits in f64").log2()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("64 bits").log2() + shift as f64
    }
}

/// Base-2 logarithm of a strictly positive rational.
pub fn log2(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "log2 of non-positive rational");
    log2_uint(r.numer()) - log2_uint(r.denom())
}

/// Scales nonnegative rational weights to integers with a common denominator.
pub fn common_numerators(weights: &[BigRational]) -> Vec<BigUint> {
    let lcm = weights
        .iter()
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    weights
        .iter()
        .map(|w| {
            let scaled = w.numer() * (&lcm / w.denom());
            scaled.to_biguint().expect("nonnegative weight")
        })
        .collect()
}

pub fn sum<'a, I: IntoIterator<Item = &'a BigRational>>(items: I) -> BigRational {
    items
        .into_iter()
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Serde adapter writing a rational as its `"num/den"` string.
pub mod serde_rat {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(D::Error::custom)
    }
}

/// As [`serde_rat`] for a sequence.
pub mod serde_rat_vec {
    use super::*;
    use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse(t).map_err(D::Error::custom))
            .collect()
    }
}
