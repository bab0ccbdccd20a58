//! Exact rational scalars and their textual forms.

use num::bigint::{BigInt, Sign};
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use std::str::FromStr;

/// Exact rational number. Always reduced, denominator positive.
pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rat(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(v: BigInt) -> Scalar {
    BigRational::from_integer(v)
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

pub fn half(x: &Scalar) -> Scalar {
    x / int(2)
}

pub fn sign(x: &Scalar) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub fn min_ref<'a>(a: &'a Scalar, b: &'a Scalar) -> &'a Scalar {
    if a <= b {
        a
    } else {
        b
    }
}

/// Parses `"p/q"`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_scalar(text: &str) -> Option<Scalar> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], i64::from_str(&s[pos + 1..]).ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).ok()?);
    let scale = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    if scale >= 0 {
        value *= big(num::pow(ten, scale as usize));
    } else {
        value /= big(num::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// Canonical text: `"p/q"`, or `"p"` for integers.
pub fn format_scalar(x: &Scalar) -> String {
    x.to_string()
}

/// Decimal rendering with `sig` significant digits, rounded half away from zero.
pub fn decimal_string(x: &Scalar, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let sig = sig.max(1);
    let neg = x.is_negative();
    let ax = x.abs();
    let ten = big(BigInt::from(10));
    // e = floor(log10(ax))
    let mut e: i64 = ax.numer().to_string().len() as i64 - ax.denom().to_string().len() as i64;
    loop {
        let p = pow10(e);
        if ax < p {
            e -= 1;
        } else if ax >= &p * &ten {
            e += 1;
        } else {
            break;
        }
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &ax * pow10(shift);
    let mut digits = round_half_up(&scaled);
    let mut e = e;
    if digits.to_string().len() > sig {
        digits /= BigInt::from(10);
        e += 1;
    }
    let ds = digits.to_string();
    let body = if (-20..=20).contains(&e) {
        if e >= 0 {
            let int_len = (e + 1) as usize;
            if ds.len() <= int_len {
                format!("{}{}", ds, "0".repeat(int_len - ds.len()))
            } else {
                let frac = ds[int_len..].trim_end_matches('0');
                if frac.is_empty() {
                    ds[..int_len].to_string()
                } else {
                    format!("{}.{}", &ds[..int_len], frac)
                }
            }
        } else {
            let frac = format!("{}{}", "0".repeat((-e - 1) as usize), ds);
            format!("0.{}", frac.trim_end_matches('0'))
        }
    } else {
        let frac = ds[1..].trim_end_matches('0');
        if frac.is_empty() {
            format!("{}e{}", &ds[..1], e)
        } else {
            format!("{}.{}e{}", &ds[..1], frac, e)
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn pow10(e: i64) -> Scalar {
    let ten = BigInt::from(10);
    if e >= 0 {
        big(num::pow(ten, e as usize))
    } else {
        BigRational::new(BigInt::one(), num::pow(ten, (-e) as usize))
    }
}

fn round_half_up(x: &Scalar) -> BigInt {
    let (q, r) = x.numer().div_rem(x.denom());
    if &r * BigInt::from(2) >= *x.denom() {
        q + 1
    } else {
        q
    }
}

/// Floor of a rational as a big integer.
pub fn floor_int(x: &Scalar) -> BigInt {
    x.floor().to_integer()
}

/// Integer square root (floor) of a non-negative big integer.
pub fn isqrt(n: &BigInt) -> BigInt {
    debug_assert!(n.sign() != Sign::Minus);
    n.sqrt()
}

/// Returns `Some(r)` when `n` is a perfect square `r*r`.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Serde adaptor writing scalars as canonical strings and reading strings or JSON numbers.
pub mod scalar_serde {
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_scalar(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_value(&v).map_err(D::Error::custom)
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Scalar, String> {
        match v {
            serde_json::Value::String(s) => {
                parse_scalar(s).ok_or_else(|| format!("invalid number {s:?}"))
            }
            serde_json::Value::Number(n) => {
                let t = n.to_string();
                parse_scalar(&t).ok_or_else(|| format!("invalid number {t}"))
            }
            other => Err(format!("expected a number, found {other}")),
        }
    }
}

pub mod opt_scalar_serde {
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&format_scalar(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Scalar>, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        if v.is_null() {
            return Ok(None);
        }
        scalar_serde::from_value(&v).map(Some).map_err(D::Error::custom)
    }
}

pub mod vec_scalar_serde {
    use super::*;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_scalar(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter()
            .map(scalar_serde::from_value)
            .collect::<Result<_, _>>()
            .map_err(D::Error::custom)
    }
}
