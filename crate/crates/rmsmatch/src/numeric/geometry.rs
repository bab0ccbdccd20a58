//! Lines, halfplanes, convex polygons with rays, and slab queries.

use super::point::Point;
use super::scalar::{int, one, opt_scalar_serde, scalar_serde, Scalar};
use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// The locus `{t : <t, normal> = offset}`, stored in canonical integer form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    pub normal: Point,
    #[serde(with = "scalar_serde")]
    pub offset: Scalar,
}

/// Positive or negative factor bringing `(a, b, c)` to canonical form.
fn canonical_factor(a: &Scalar, b: &Scalar, c: &Scalar) -> Scalar {
    let l = a.denom().lcm(b.denom()).lcm(c.denom());
    let ai = (a * Scalar::from_integer(l.clone())).to_integer();
    let bi = (b * Scalar::from_integer(l.clone())).to_integer();
    let ci = (c * Scalar::from_integer(l.clone())).to_integer();
    let g = ai.gcd(&bi).gcd(&ci);
    let g = if g.is_zero() { BigInt::one() } else { g };
    let lead_negative = if !ai.is_zero() {
        ai.is_negative()
    } else {
        bi.is_negative()
    };
    let f = Scalar::new(l, g);
    if lead_negative {
        -f
    } else {
        f
    }
}

impl Line {
    /// Canonical line `<t, normal> = offset`; `None` when the normal vanishes.
    pub fn new(normal: Point, offset: Scalar) -> Option<Line> {
        Line::scaled(normal, offset).map(|(l, _)| l)
    }

    /// Canonical line plus the factor that was applied (negative when flipped).
    fn scaled(normal: Point, offset: Scalar) -> Option<(Line, Scalar)> {
        if normal.is_zero() {
            return None;
        }
        let f = canonical_factor(&normal.x, &normal.y, &offset);
        let line = Line {
            normal: normal.scale(&f),
            offset: offset * &f,
        };
        Some((line, f))
    }

    pub fn vertical(x: Scalar) -> Line {
        Line::new(Point::new(one(), Scalar::zero()), x).expect("nonzero normal")
    }

    pub fn horizontal(y: Scalar) -> Line {
        Line::new(Point::new(Scalar::zero(), one()), y).expect("nonzero normal")
    }

    /// Line `a x + b y = c`.
    pub fn from_coeffs(a: Scalar, b: Scalar, c: Scalar) -> Option<Line> {
        Line::new(Point::new(a, b), c)
    }

    pub fn through(p: &Point, q: &Point) -> Option<Line> {
        let d = q - p;
        let n = d.perp();
        let c = n.dot(p);
        Line::new(n, c)
    }

    /// `<normal, p> - offset`; zero exactly on the line.
    pub fn eval(&self, p: &Point) -> Scalar {
        self.normal.dot(p) - &self.offset
    }

    pub fn side(&self, p: &Point) -> i32 {
        super::scalar::sign(&self.eval(p))
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.eval(p).is_zero()
    }

    pub fn is_vertical(&self) -> bool {
        self.normal.y.is_zero()
    }

    pub fn is_parallel(&self, o: &Line) -> bool {
        self.normal.cross(&o.normal).is_zero()
    }

    pub fn intersection(&self, o: &Line) -> Option<Point> {
        let det = self.normal.cross(&o.normal);
        if det.is_zero() {
            return None;
        }
        let x = (&self.offset * &o.normal.y - &o.offset * &self.normal.y) / &det;
        let y = (&self.normal.x * &o.offset - &o.normal.x * &self.offset) / &det;
        Some(Point::new(x, y))
    }

    /// Direction along the line whose first nonzero coordinate is positive.
    pub fn direction(&self) -> Point {
        let d = Point::new(self.normal.y.clone(), -&self.normal.x);
        if d.x.is_negative() || (d.x.is_zero() && d.y.is_negative()) {
            -d
        } else {
            d
        }
    }

    /// Some point of the line.
    pub fn point_on(&self) -> Point {
        if !self.normal.x.is_zero() {
            Point::new(&self.offset / &self.normal.x, Scalar::zero())
        } else {
            Point::new(Scalar::zero(), &self.offset / &self.normal.y)
        }
    }

    pub fn y_at(&self, x: &Scalar) -> Option<Scalar> {
        if self.normal.y.is_zero() {
            None
        } else {
            Some((&self.offset - &self.normal.x * x) / &self.normal.y)
        }
    }

    /// `(base, u)` with the line equal to `{base + s·u}`, where `s` is the
    /// x-coordinate for non-vertical lines and the y-coordinate for vertical ones.
    pub fn param_frame(&self) -> (Point, Point) {
        if self.normal.y.is_zero() {
            (
                Point::new(&self.offset / &self.normal.x, Scalar::zero()),
                Point::new(Scalar::zero(), one()),
            )
        } else {
            (
                Point::new(Scalar::zero(), &self.offset / &self.normal.y),
                Point::new(one(), -(&self.normal.x / &self.normal.y)),
            )
        }
    }

    /// Parameter of `p` under [`Line::param_frame`] (meaningful for points on the line).
    pub fn param_of(&self, p: &Point) -> Scalar {
        if self.normal.y.is_zero() {
            p.y.clone()
        } else {
            p.x.clone()
        }
    }

    /// Orthogonal projection of `p` onto the line.
    pub fn project(&self, p: &Point) -> Point {
        let k = self.eval(p) / self.normal.norm2();
        p - &self.normal.scale(&k)
    }
}

impl std::fmt::Display for Line {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x + {}y = {}",
            self.normal.x, self.normal.y, self.offset
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// `<t, normal> <= offset`
    Le,
    /// `<t, normal> >= offset`
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfplane {
    pub boundary: Line,
    pub keep: Side,
}

impl Halfplane {
    /// The halfplane `<t, normal> <= offset`.
    pub fn le(normal: Point, offset: Scalar) -> Option<Halfplane> {
        let (boundary, f) = Line::scaled(normal, offset)?;
        let keep = if f.is_negative() { Side::Ge } else { Side::Le };
        Some(Halfplane { boundary, keep })
    }

    /// The halfplane `<t, normal> >= offset`.
    pub fn ge(normal: Point, offset: Scalar) -> Option<Halfplane> {
        Halfplane::le(-normal, -offset)
    }

    /// Signed slack: non-negative inside, zero on the boundary.
    pub fn slack(&self, p: &Point) -> Scalar {
        match self.keep {
            Side::Le => -self.boundary.eval(p),
            Side::Ge => self.boundary.eval(p),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        !self.slack(p).is_negative()
    }

    pub fn contains_strictly(&self, p: &Point) -> bool {
        self.slack(p).is_positive()
    }

    /// `(n, c)` with the halfplane equal to `<t, n> <= c`.
    pub fn outward(&self) -> (Point, Scalar) {
        match self.keep {
            Side::Le => (self.boundary.normal.clone(), self.boundary.offset.clone()),
            Side::Ge => (-&self.boundary.normal, -&self.boundary.offset),
        }
    }

    pub fn complement(&self) -> Halfplane {
        Halfplane {
            boundary: self.boundary.clone(),
            keep: match self.keep {
                Side::Le => Side::Ge,
                Side::Ge => Side::Le,
            },
        }
    }
}

/// A boundary piece of a convex polygon; `None` endpoints are at infinity.
/// Traversal keeps the interior on the left.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonEdge {
    pub halfplane: Halfplane,
    pub start: Option<Point>,
    pub end: Option<Point>,
}

impl PolygonEdge {
    /// Direction of traversal (interior on the left).
    pub fn direction(&self) -> Point {
        let (n, _) = self.halfplane.outward();
        n.perp()
    }

    /// A point in the relative interior of the edge.
    pub fn interior_point(&self) -> Point {
        let d = self.direction();
        match (&self.start, &self.end) {
            (Some(s), Some(e)) => Point::mean(&[s.clone(), e.clone()]),
            (Some(s), None) => s + &d,
            (None, Some(e)) => e - &d,
            (None, None) => self.halfplane.boundary.point_on(),
        }
    }

    /// Closest point of the edge to `q`.
    pub fn closest_point(&self, q: &Point) -> Point {
        let d = self.direction();
        let p0 = self.halfplane.boundary.project(q);
        let anchor = self
            .start
            .clone()
            .or_else(|| self.end.clone())
            .unwrap_or_else(|| p0.clone());
        let s = (&p0 - &anchor).dot(&d) / d.norm2();
        let lo = self.start.as_ref().map(|s0| (s0 - &anchor).dot(&d) / d.norm2());
        let hi = self.end.as_ref().map(|e0| (e0 - &anchor).dot(&d) / d.norm2());
        let mut s = s;
        if let Some(lo) = lo {
            if s < lo {
                s = lo;
            }
        }
        if let Some(hi) = hi {
            if s > hi {
                s = hi;
            }
        }
        &anchor + &d.scale(&s)
    }
}

/// A possibly unbounded convex polygon given by its non-redundant halfplanes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    /// Finite vertices in counterclockwise boundary order.
    pub vertices: Vec<Point>,
    /// Directions of the unbounded boundary rays (empty when bounded).
    pub unbounded_rays: Vec<Point>,
    /// Non-redundant supporting halfplanes in boundary order.
    pub halfplanes: Vec<Halfplane>,
    /// Boundary pieces, parallel to `halfplanes`.
    pub edges: Vec<PolygonEdge>,
}

impl ConvexPolygon {
    pub fn whole_plane() -> Self {
        ConvexPolygon {
            vertices: vec![],
            unbounded_rays: vec![],
            halfplanes: vec![],
            edges: vec![],
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.halfplanes.iter().all(|h| h.contains(p))
    }

    pub fn contains_strictly(&self, p: &Point) -> bool {
        self.halfplanes.iter().all(|h| h.contains_strictly(p))
    }

    pub fn is_bounded(&self) -> bool {
        !self.edges.is_empty() && self.edges.iter().all(|e| e.start.is_some() && e.end.is_some())
    }

    /// A point strictly inside the polygon.
    pub fn interior_point(&self) -> Point {
        if self.edges.is_empty() {
            return Point::origin();
        }
        if self.is_bounded() && self.vertices.len() >= 3 {
            let c = Point::mean(&self.vertices);
            if self.contains_strictly(&c) {
                return c;
            }
        }
        let e = &self.edges[0];
        let m = e.interior_point();
        let (n, _) = e.halfplane.outward();
        let mut delta = one();
        for _ in 0..512 {
            let p = &m - &n.scale(&delta);
            if self.contains_strictly(&p) {
                return p;
            }
            delta = delta / int(2);
        }
        m
    }

    /// Euclidean projection of `q` onto the closed polygon.
    pub fn closest_point(&self, q: &Point) -> Point {
        if self.contains(q) {
            return q.clone();
        }
        let mut best: Option<(Scalar, Point)> = None;
        for e in &self.edges {
            let c = e.closest_point(q);
            let d = super::point::sq_dist(&c, q);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, c));
            }
        }
        best.map(|(_, p)| p).unwrap_or_else(|| q.clone())
    }

    /// Range of `y` over the polygon on the vertical line at `x`, if nonempty.
    pub fn vertical_extent(&self, x: &Scalar) -> Option<(Option<Scalar>, Option<Scalar>)> {
        let mut lo: Option<Scalar> = None;
        let mut hi: Option<Scalar> = None;
        for h in &self.halfplanes {
            let (n, c) = h.outward();
            let rhs = &c - &n.x * x;
            if n.y.is_zero() {
                if rhs.is_negative() {
                    return None;
                }
            } else if n.y.is_positive() {
                let v = rhs / &n.y;
                if hi.as_ref().is_none_or(|h0| v < *h0) {
                    hi = Some(v);
                }
            } else {
                let v = rhs / &n.y;
                if lo.as_ref().is_none_or(|l0| v > *l0) {
                    lo = Some(v);
                }
            }
        }
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                return None;
            }
        }
        Some((lo, hi))
    }
}

/// Intersection of halfplanes known to contain `witness` (possibly on a boundary).
pub fn halfplane_intersection(hs: &[Halfplane], witness: &Point) -> Result<ConvexPolygon> {
    if hs.iter().any(|h| !h.contains(witness)) {
        return Err(Error::EmptyIntersection);
    }
    let mut uniq: Vec<Halfplane> = Vec::new();
    for h in hs {
        if !uniq.contains(h) {
            uniq.push(h.clone());
        }
    }
    for (i, h) in uniq.iter().enumerate() {
        if uniq[i + 1..].iter().any(|o| o.boundary == h.boundary) {
            return Err(Error::EmptyIntersection);
        }
    }
    let outward: Vec<(Point, Scalar)> = uniq.iter().map(|h| h.outward()).collect();
    let mut edges: Vec<PolygonEdge> = Vec::new();
    for (i, h) in uniq.iter().enumerate() {
        let (ni, _) = &outward[i];
        let p0 = h.boundary.point_on();
        let dir = ni.perp();
        let mut lo: Option<Scalar> = None;
        let mut hi: Option<Scalar> = None;
        let mut empty = false;
        for (j, (nj, cj)) in outward.iter().enumerate() {
            if i == j {
                continue;
            }
            let k = nj.dot(&dir);
            let r = cj - nj.dot(&p0);
            if k.is_zero() {
                if r.is_negative() {
                    empty = true;
                    break;
                }
            } else if k.is_positive() {
                let v = r / k;
                if hi.as_ref().is_none_or(|h0| v < *h0) {
                    hi = Some(v);
                }
            } else {
                let v = r / k;
                if lo.as_ref().is_none_or(|l0| v > *l0) {
                    lo = Some(v);
                }
            }
        }
        if empty {
            continue;
        }
        if let (Some(l), Some(u)) = (&lo, &hi) {
            if l >= u {
                continue;
            }
        }
        edges.push(PolygonEdge {
            halfplane: h.clone(),
            start: lo.map(|s| &p0 + &dir.scale(&s)),
            end: hi.map(|s| &p0 + &dir.scale(&s)),
        });
    }
    if edges.is_empty() {
        if uniq.is_empty() {
            return Ok(ConvexPolygon::whole_plane());
        }
        return Err(Error::EmptyIntersection);
    }
    // Chain the edges along the boundary.
    let mut chains: Vec<Vec<usize>> = Vec::new();
    let mut used = vec![false; edges.len()];
    let mut starts: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].start.is_none()).collect();
    let bounded = starts.is_empty();
    if bounded {
        let first = (0..edges.len())
            .min_by(|&a, &b| edges[a].start.cmp(&edges[b].start))
            .expect("nonempty");
        starts.push(first);
    }
    for s in starts {
        let mut chain = vec![s];
        used[s] = true;
        let mut cur = s;
        while let Some(end) = edges[cur].end.clone() {
            let next = (0..edges.len()).find(|&j| !used[j] && edges[j].start.as_ref() == Some(&end));
            match next {
                Some(j) => {
                    used[j] = true;
                    chain.push(j);
                    cur = j;
                }
                None => break,
            }
        }
        chains.push(chain);
    }
    if used.iter().any(|u| !u) {
        return Err(Error::Invariant("polygon boundary does not close".into()));
    }
    let mut vertices = Vec::new();
    let mut halfplanes = Vec::new();
    let mut ordered = Vec::new();
    let mut rays = Vec::new();
    for chain in &chains {
        for &i in chain {
            if let Some(s) = &edges[i].start {
                vertices.push(s.clone());
            }
            halfplanes.push(edges[i].halfplane.clone());
            ordered.push(edges[i].clone());
        }
        if !bounded {
            let first = &edges[chain[0]];
            let last = &edges[*chain.last().expect("nonempty")];
            if chains.len() == 1 {
                rays.push(-first.direction());
                rays.push(last.direction());
            } else {
                rays.push(last.direction());
            }
        }
    }
    Ok(ConvexPolygon {
        vertices,
        unbounded_rays: rays,
        halfplanes,
        edges: ordered,
    })
}

/// Vertical slab `left < x < right`; a missing side is unbounded.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerticalSlab {
    #[serde(with = "opt_scalar_serde")]
    pub left: Option<Scalar>,
    #[serde(with = "opt_scalar_serde")]
    pub right: Option<Scalar>,
}

impl VerticalSlab {
    pub fn new(left: Option<Scalar>, right: Option<Scalar>) -> Self {
        if let (Some(l), Some(r)) = (&left, &right) {
            assert!(l < r, "slab needs left < right");
        }
        VerticalSlab { left, right }
    }

    pub fn unbounded() -> Self {
        VerticalSlab::default()
    }

    pub fn contains_x(&self, x: &Scalar) -> bool {
        self.left.as_ref().is_none_or(|l| x > l) && self.right.as_ref().is_none_or(|r| x < r)
    }

    /// Some abscissa strictly inside the slab.
    pub fn interior_x(&self) -> Scalar {
        match (&self.left, &self.right) {
            (Some(l), Some(r)) => (l + r) / int(2),
            (Some(l), None) => l + one(),
            (None, Some(r)) => r - one(),
            (None, None) => Scalar::zero(),
        }
    }
}

/// All distinct pairwise intersection points with `x` strictly inside the slab,
/// sorted by `x` and then by `y`.
pub fn intersections_in_slab(lines: &[Line], slab: &VerticalSlab) -> Vec<Point> {
    let mut pts = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(p) = lines[i].intersection(&lines[j]) {
                if slab.contains_x(&p.x) {
                    pts.push(p);
                }
            }
        }
    }
    pts.sort();
    pts.dedup();
    pts
}

/// The intersection point with the `k`-th smallest `x` inside the slab (1-based),
/// ties broken by smaller `y`.
pub fn kth_intersection_in_slab(lines: &[Line], slab: &VerticalSlab, k: usize) -> Result<Point> {
    let pts = intersections_in_slab(lines, slab);
    if k == 0 || k > pts.len() {
        return Err(Error::OutOfRange {
            k,
            count: pts.len(),
        });
    }
    Ok(pts[k - 1].clone())
}

/// Smallest value whose cumulative weight reaches half of the total weight.
pub fn weighted_median(items: &[(Scalar, Scalar)]) -> Scalar {
    assert!(!items.is_empty(), "weighted median of an empty list");
    let mut sorted: Vec<&(Scalar, Scalar)> = items.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let total: Scalar = items.iter().map(|(_, w)| w.clone()).sum();
    let mut acc = Scalar::zero();
    for (v, w) in sorted {
        acc += w;
        if &acc * int(2) >= total {
            return v.clone();
        }
    }
    unreachable!("cumulative weight reaches the total")
}

/// Convenience constructor used by tests and examples.
pub fn line(a: i64, b: i64, c: i64) -> Line {
    Line::from_coeffs(int(a), int(b), int(c)).expect("nonzero normal")
}
