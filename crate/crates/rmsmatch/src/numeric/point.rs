use super::scalar::{format_scalar, int, scalar_serde, Scalar};
use num::traits::Zero;
use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, Neg, Sub};

/// A point or vector of the plane with exact coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Scalar,
    pub y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Point { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::new(int(x), int(y))
    }

    pub fn origin() -> Self {
        Point::new(Scalar::zero(), Scalar::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn dot(&self, o: &Point) -> Scalar {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn cross(&self, o: &Point) -> Scalar {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn norm2(&self) -> Scalar {
        self.dot(self)
    }

    pub fn scale(&self, k: &Scalar) -> Point {
        Point::new(&self.x * k, &self.y * k)
    }

    /// Counterclockwise quarter turn.
    pub fn perp(&self) -> Point {
        Point::new(-&self.y, self.x.clone())
    }

    pub fn mean(points: &[Point]) -> Point {
        let mut sx = Scalar::zero();
        let mut sy = Scalar::zero();
        for p in points {
            sx += &p.x;
            sy += &p.y;
        }
        let k = int(points.len().max(1) as i64);
        Point::new(sx / &k, sy / k)
    }

    pub fn sum<'a>(points: impl IntoIterator<Item = &'a Point>) -> Point {
        let mut acc = Point::origin();
        for p in points {
            acc.x += &p.x;
            acc.y += &p.y;
        }
        acc
    }
}

impl<'a> Add<&'a Point> for &'a Point {
    type Output = Point;
    fn add(self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }
}

impl<'a> Sub<&'a Point> for &'a Point {
    type Output = Point;
    fn sub(self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-&self.x, -&self.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [format_scalar(&self.x), format_scalar(&self.y)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        if v.len() != 2 {
            return Err(D::Error::custom(format!(
                "a point needs exactly 2 coordinates, found {}",
                v.len()
            )));
        }
        let x = scalar_serde::from_value(&v[0]).map_err(D::Error::custom)?;
        let y = scalar_serde::from_value(&v[1]).map_err(D::Error::custom)?;
        Ok(Point::new(x, y))
    }
}

/// Squared Euclidean distance.
pub fn sq_dist(p: &Point, q: &Point) -> Scalar {
    let dx = &p.x - &q.x;
    let dy = &p.y - &q.y;
    &dx * &dx + &dy * &dy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::scalar::rat;

    #[test]
    fn squared_distances() {
        assert_eq!(sq_dist(&Point::origin(), &Point::origin()), int(0));
        assert_eq!(sq_dist(&Point::origin(), &Point::from_ints(3, 4)), int(25));
        let p = Point::new(rat(1, 2), int(0));
        let q = Point::new(int(0), rat(1, 3));
        assert_eq!(sq_dist(&p, &q), rat(13, 36));
    }

    #[test]
    fn serde_round_trip() {
        let p = Point::new(rat(-1, 3), int(7));
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"["-1/3","7"]"#);
        let back: Point = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        let q: Point = serde_json::from_str(r#"[0.25, "2/4"]"#).unwrap();
        assert_eq!(q, Point::new(rat(1, 4), rat(1, 2)));
    }
}
