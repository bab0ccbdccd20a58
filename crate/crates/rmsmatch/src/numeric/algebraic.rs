//! Exact numbers `p + q·√d` with rational `p`, `q` and a non-negative integer `d`.

use super::scalar::{big, decimal_string, exact_sqrt, format_scalar, int, scalar_serde, Scalar};
use num::bigint::BigInt;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Largest trial divisor used when pulling square factors out of `d`.
const TRIAL_LIMIT: u64 = 10_000;

#[derive(Clone, Debug, Hash, Serialize, Deserialize)]
pub struct QuadraticAlgebraic {
    #[serde(with = "scalar_serde")]
    pub p: Scalar,
    #[serde(with = "scalar_serde")]
    pub q: Scalar,
    #[serde(with = "bigint_string")]
    pub d: BigInt,
}

mod bigint_string {
    use num::bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(D::Error::custom(format!("expected an integer, found {other}"))),
        };
        BigInt::from_str(&text).map_err(D::Error::custom)
    }
}

/// Splits `n > 0` as `s² · r`, removing square factors found by trial division
/// and a final perfect-square check.
fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut r = n.clone();
    let mut f: u64 = 2;
    while f <= TRIAL_LIMIT {
        let ff = BigInt::from(f * f);
        if ff > r {
            break;
        }
        let fb = BigInt::from(f);
        while (&r % &ff).is_zero() {
            r /= &ff;
            s *= &fb;
        }
        f += 1;
    }
    if let Some(root) = exact_sqrt(&r) {
        s *= root;
        r = BigInt::one();
    }
    (s, r)
}

impl QuadraticAlgebraic {
    pub fn new(p: Scalar, q: Scalar, d: BigInt) -> Self {
        assert!(!d.is_negative(), "radicand must be non-negative");
        if q.is_zero() || d.is_zero() {
            return QuadraticAlgebraic::rational(p);
        }
        let (s, r) = square_part(&d);
        let q = q * big(s);
        if r.is_one() {
            QuadraticAlgebraic::rational(p + q)
        } else {
            QuadraticAlgebraic { p, q, d: r }
        }
    }

    /// Like `new`, for a radicand already free of square factors.
    fn reduced(p: Scalar, q: Scalar, d: BigInt) -> Self {
        if q.is_zero() || d.is_zero() {
            QuadraticAlgebraic::rational(p)
        } else {
            QuadraticAlgebraic { p, q, d }
        }
    }

    pub fn rational(p: Scalar) -> Self {
        QuadraticAlgebraic {
            p,
            q: Scalar::zero(),
            d: BigInt::zero(),
        }
    }

    /// `√x` for a rational `x ≥ 0`.
    pub fn sqrt_of(x: &Scalar) -> Self {
        assert!(!x.is_negative(), "square root of a negative number");
        let den = x.denom().clone();
        let radicand = x.numer() * &den;
        QuadraticAlgebraic::new(Scalar::zero(), Scalar::new(BigInt::one(), den), radicand)
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Scalar> {
        if self.is_rational() {
            Some(&self.p)
        } else {
            None
        }
    }

    pub fn conjugate(&self) -> Self {
        QuadraticAlgebraic {
            p: self.p.clone(),
            q: -&self.q,
            d: self.d.clone(),
        }
    }

    /// Radicand shared by `self` and `o`, if they live in a common field.
    fn common_d(&self, o: &Self) -> Option<BigInt> {
        if self.is_rational() {
            Some(o.d.clone())
        } else if o.is_rational() || self.d == o.d {
            Some(self.d.clone())
        } else {
            None
        }
    }

    pub fn sign(&self) -> Ordering {
        let a = self.p.cmp(&Scalar::zero());
        let b = self.q.cmp(&Scalar::zero());
        if b == Ordering::Equal || a == b {
            return if a == Ordering::Equal { b } else { a };
        }
        if a == Ordering::Equal {
            return b;
        }
        // Opposite signs: compare p² with q²d.
        let lhs = &self.p * &self.p;
        let rhs = &self.q * &self.q * big(self.d.clone());
        match lhs.cmp(&rhs) {
            Ordering::Equal => Ordering::Equal,
            Ordering::Greater => a,
            Ordering::Less => b,
        }
    }

    /// Exact comparison, valid across different radicands.
    pub fn cmp_exact(&self, o: &Self) -> Ordering {
        if let Some(d) = self.common_d(o) {
            return QuadraticAlgebraic {
                p: &self.p - &o.p,
                q: &self.q - &o.q,
                d,
            }
            .sign();
        }
        // x = (p1 - p2) + q1√d1, y = q2√d2; compare x with y.
        let x = QuadraticAlgebraic {
            p: &self.p - &o.p,
            q: self.q.clone(),
            d: self.d.clone(),
        };
        let sx = x.sign();
        let sy = o.q.cmp(&Scalar::zero());
        if sx != sy {
            return sx.cmp(&sy);
        }
        let x2 = x.mul_same(&x);
        let y2 = QuadraticAlgebraic::rational(&o.q * &o.q * big(o.d.clone()));
        let c = x2.cmp_exact(&y2);
        if sx == Ordering::Greater {
            c
        } else {
            c.reverse()
        }
    }

    fn mul_same(&self, o: &Self) -> Self {
        let d = self
            .common_d(o)
            .expect("multiplication needs a common radicand");
        let dd = big(d.clone());
        QuadraticAlgebraic::reduced(
            &self.p * &o.p + &self.q * &o.q * &dd,
            &self.p * &o.q + &self.q * &o.p,
            d,
        )
    }

    pub fn try_add(&self, o: &Self) -> Option<Self> {
        let d = self.common_d(o)?;
        Some(QuadraticAlgebraic::reduced(&self.p + &o.p, &self.q + &o.q, d))
    }

    pub fn try_sub(&self, o: &Self) -> Option<Self> {
        let d = self.common_d(o)?;
        Some(QuadraticAlgebraic::reduced(&self.p - &o.p, &self.q - &o.q, d))
    }

    pub fn try_mul(&self, o: &Self) -> Option<Self> {
        self.common_d(o)?;
        Some(self.mul_same(o))
    }

    pub fn try_div(&self, o: &Self) -> Option<Self> {
        self.common_d(o)?;
        let den = o.mul_same(&o.conjugate());
        let den = den.as_rational()?.clone();
        if den.is_zero() {
            return None;
        }
        let num = self.mul_same(&o.conjugate());
        Some(QuadraticAlgebraic::reduced(
            num.p / &den,
            num.q / &den,
            num.d,
        ))
    }

    pub fn add_rational(&self, r: &Scalar) -> Self {
        QuadraticAlgebraic {
            p: &self.p + r,
            q: self.q.clone(),
            d: self.d.clone(),
        }
    }

    pub fn scale(&self, r: &Scalar) -> Self {
        QuadraticAlgebraic::reduced(&self.p * r, &self.q * r, self.d.clone())
    }

    /// `a x² + b x + c` evaluated exactly at `x = self`.
    pub fn eval_quadratic(&self, a: &Scalar, b: &Scalar, c: &Scalar) -> Self {
        let x2 = self.mul_same(self);
        x2.scale(a)
            .try_add(&self.scale(b))
            .expect("same field")
            .add_rational(c)
    }

    /// Rational approximation with absolute error below `10^-digits`.
    pub fn approx(&self, digits: u32) -> Scalar {
        if self.is_rational() {
            return self.p.clone();
        }
        let scale = num::pow(BigInt::from(10), digits as usize + 2);
        let root = (&self.d * &scale * &scale).sqrt();
        &self.p + &self.q * Scalar::new(root, scale)
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.approx(30);
        a.numer().to_f64().unwrap_or(f64::NAN) / a.denom().to_f64().unwrap_or(f64::NAN)
    }

    pub fn decimal(&self, sig: usize) -> String {
        decimal_string(&self.approx(sig as u32 + 40), sig)
    }
}

impl From<Scalar> for QuadraticAlgebraic {
    fn from(p: Scalar) -> Self {
        QuadraticAlgebraic::rational(p)
    }
}

impl PartialEq for QuadraticAlgebraic {
    fn eq(&self, o: &Self) -> bool {
        self.cmp_exact(o) == Ordering::Equal
    }
}

impl Eq for QuadraticAlgebraic {}

impl PartialOrd for QuadraticAlgebraic {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for QuadraticAlgebraic {
    fn cmp(&self, o: &Self) -> Ordering {
        self.cmp_exact(o)
    }
}

impl std::fmt::Display for QuadraticAlgebraic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_rational() {
            write!(f, "{}", format_scalar(&self.p))
        } else {
            write!(
                f,
                "{} + {}*sqrt({})",
                format_scalar(&self.p),
                format_scalar(&self.q),
                self.d
            )
        }
    }
}

/// A point whose coordinates may be quadratic irrationals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlgPoint {
    pub x: QuadraticAlgebraic,
    pub y: QuadraticAlgebraic,
}

impl AlgPoint {
    pub fn rational(p: &super::point::Point) -> Self {
        AlgPoint {
            x: QuadraticAlgebraic::rational(p.x.clone()),
            y: QuadraticAlgebraic::rational(p.y.clone()),
        }
    }

    pub fn as_point(&self) -> Option<super::point::Point> {
        Some(super::point::Point::new(
            self.x.as_rational()?.clone(),
            self.y.as_rational()?.clone(),
        ))
    }
}

/// Real roots of `a x² + b x + c`, ascending and deduplicated.
/// The zero polynomial has no isolated roots and yields an empty list.
pub fn quadratic_roots(a: &Scalar, b: &Scalar, c: &Scalar) -> Vec<QuadraticAlgebraic> {
    if a.is_zero() {
        if b.is_zero() {
            return vec![];
        }
        return vec![QuadraticAlgebraic::rational(-c / b)];
    }
    let disc = b * b - int(4) * a * c;
    if disc.is_negative() {
        return vec![];
    }
    let two_a = a * int(2);
    let base = -b / &two_a;
    if disc.is_zero() {
        return vec![QuadraticAlgebraic::rational(base)];
    }
    let root = QuadraticAlgebraic::sqrt_of(&disc).scale(&(Scalar::one() / &two_a));
    let r1 = root.add_rational(&base);
    let r2 = root.scale(&int(-1)).add_rational(&base);
    let mut v = vec![r1, r2];
    v.sort();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::scalar::rat;

    fn qa(p: i64, q: i64, d: i64) -> QuadraticAlgebraic {
        QuadraticAlgebraic::new(int(p), int(q), BigInt::from(d))
    }

    #[test]
    fn canonical_radicand() {
        let x = qa(1, 1, 12);
        assert_eq!(x.d, BigInt::from(3));
        assert_eq!(x.q, int(2));
        assert!(qa(3, 2, 9).is_rational());
        assert_eq!(qa(3, 2, 9).p, int(9));
        assert!(qa(5, 0, 7).d.is_zero());
    }

    #[test]
    fn signs_and_comparisons() {
        assert_eq!(qa(1, -1, 2).sign(), Ordering::Less);
        assert_eq!(qa(2, -1, 2).sign(), Ordering::Greater);
        assert_eq!(qa(-3, 2, 2).sign(), Ordering::Less);
        assert!(qa(0, 1, 2) < qa(0, 1, 3));
        assert!(qa(0, 1, 3) < qa(2, 0, 0));
        assert!(qa(1, 1, 2) > qa(0, 1, 5));
        assert!(qa(1, 1, 2) < qa(0, 1, 6));
        assert_eq!(qa(0, 2, 2).cmp_exact(&qa(0, 1, 8)), Ordering::Equal);
    }

    #[test]
    fn field_operations() {
        let x = qa(1, 1, 2);
        let y = x.try_mul(&x.conjugate()).unwrap();
        assert_eq!(y, QuadraticAlgebraic::rational(int(-1)));
        let z = qa(1, 0, 0).try_div(&x).unwrap();
        assert_eq!(z, qa(-1, 1, 2));
        assert_eq!(x.eval_quadratic(&int(1), &int(-2), &int(-1)), qa(0, 0, 0));
    }

    #[test]
    fn roots_of_quadratics() {
        let r = quadratic_roots(&int(1), &int(0), &int(-2));
        assert_eq!(r, vec![qa(0, -1, 2), qa(0, 1, 2)]);
        let r = quadratic_roots(&int(0), &int(2), &int(-1));
        assert_eq!(r, vec![QuadraticAlgebraic::rational(rat(1, 2))]);
        assert!(quadratic_roots(&int(1), &int(0), &int(1)).is_empty());
        for x in quadratic_roots(&int(3), &int(-7), &int(1)) {
            assert!(x.eval_quadratic(&int(3), &int(-7), &int(1)).sign() == Ordering::Equal);
        }
    }

    #[test]
    fn approximation_and_serde() {
        assert_eq!(qa(0, 1, 2).decimal(10), "1.414213562");
        let x = qa(1, -3, 5);
        let t = serde_json::to_string(&x).unwrap();
        assert_eq!(t, r#"{"p":"1","q":"-3","d":"5"}"#);
        let back: QuadraticAlgebraic = serde_json::from_str(&t).unwrap();
        assert_eq!(back, x);
    }
}
