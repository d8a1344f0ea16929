//! Exact rationals and the handful of helpers the rest of the crate needs:
//! textual form, serde adapters, and certified bounds on integer radicals.

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always stored reduced with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"n"`, `"n/d"` or a finite decimal such as `"-1.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Input(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Input(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let mag = whole.abs() * &scale + frac;
        let num = if negative { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratio of huge integers: scale both down first
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Nearest dyadic rational `round(x * 2^bits) / 2^bits`.
pub fn dyadic(x: f64, bits: u32) -> Rational {
    let scaled = (x * (bits as f64).exp2()).round();
    let n = BigInt::from(scaled as i128);
    Rational::new(n, BigInt::one() << bits as usize)
}

pub fn sign_of(r: &Rational) -> i8 {
    match r.numer().sign() {
        BigSign::Minus => -1,
        BigSign::NoSign => 0,
        BigSign::Plus => 1,
    }
}

pub fn lcm_denominators<'a>(it: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    it.into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Exact `⌊a^(1/n)⌋` when `a` is a perfect n-th power.
pub fn exact_root(a: &BigUint, n: u32) -> Option<BigUint> {
    let r = a.nth_root(n);
    (r.pow(n) == *a).then_some(r)
}

/// Certified rational enclosure `lo ≤ a^(1/n) ≤ hi` with `hi - lo ≤ 2^-bits`.
pub fn root_bounds(a: &BigUint, n: u32, bits: u32) -> (Rational, Rational) {
    let scaled = a << (bits as usize * n as usize);
    let r = scaled.nth_root(n);
    let den = BigInt::one() << bits as usize;
    let lo = BigInt::from(r.clone());
    let hi = if r.pow(n) == scaled { lo.clone() } else { lo.clone() + 1 };
    (Rational::new(lo, den.clone()), Rational::new(hi, den))
}

pub mod serde_str {
    //! Serialize a [`Rational`] as its `"n/d"` string.
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let v = super::StrOrNum::deserialize(d)?;
        parse_rational(&v.0).map_err(serde::de::Error::custom)
    }
}

pub mod serde_vec {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<super::StrOrNum>::deserialize(d)?;
        v.iter()
            .map(|x| parse_rational(&x.0).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_opt {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(format_rational).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<super::StrOrNum>::deserialize(d)?
            .map(|x| parse_rational(&x.0).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Accepts either a JSON string or a JSON number for rational-valued fields.
struct StrOrNum(String);

impl<'de> serde::Deserialize<'de> for StrOrNum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => Ok(StrOrNum(s)),
            serde_json::Value::Number(n) => Ok(StrOrNum(n.to_string())),
            other => Err(serde::de::Error::custom(format!(
                "expected rational string or number, got {other}"
            ))),
        }
    }
}
