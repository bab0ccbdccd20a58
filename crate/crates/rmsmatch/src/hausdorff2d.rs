//! Hausdorff RMS distance in the plane under translation.
//!
//! Every directed term is a nearest-point distance from `t` to a set of
//! difference points `a_j − b_i`: one row of that table per `b_i` for the
//! distance from `B + t` to `A`, one column per `a_j` for the reverse distance.

use crate::assignment::Instance;
use crate::error::{Error, Result};
pub use crate::hausdorff1d::Variant;
use crate::numeric::algebraic::{quadratic_roots, AlgPoint, QuadraticAlgebraic as Qa};
use crate::numeric::geometry::{
    halfplane_intersection, intersections_in_slab, kth_intersection_in_slab, ConvexPolygon, Halfplane, Line,
    VerticalSlab,
};
use crate::numeric::point::{sq_dist, Point};
use crate::numeric::scalar::{floor_int, int, isqrt, scalar_serde, Scalar};
use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

const FIELD: &str = "coordinates share one quadratic field";

fn qr(x: &Scalar) -> Qa {
    Qa::rational(x.clone())
}

fn qadd(a: &Qa, b: &Qa) -> Qa {
    a.try_add(b).expect(FIELD)
}

fn qsub(a: &Qa, b: &Qa) -> Qa {
    a.try_sub(b).expect(FIELD)
}

fn qmul(a: &Qa, b: &Qa) -> Qa {
    a.try_mul(b).expect(FIELD)
}

fn asub(p: &AlgPoint, q: &AlgPoint) -> AlgPoint {
    AlgPoint {
        x: qsub(&p.x, &q.x),
        y: qsub(&p.y, &q.y),
    }
}

fn adot(p: &AlgPoint, q: &AlgPoint) -> Qa {
    qadd(&qmul(&p.x, &q.x), &qmul(&p.y, &q.y))
}

fn across(p: &AlgPoint, q: &AlgPoint) -> Qa {
    qsub(&qmul(&p.x, &q.y), &qmul(&p.y, &q.x))
}

fn alg(p: &Point) -> AlgPoint {
    AlgPoint::rational(p)
}

fn zero_qa() -> Qa {
    Qa::rational(Scalar::zero())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoronoiEdge {
    pub line: Line,
    pub start: Option<Point>,
    pub end: Option<Point>,
    /// Direction of travel from `start` towards `end`.
    pub direction: Point,
    pub sites: (usize, usize),
}

fn ray_range(p: &Point, d: &Point) -> (Option<Scalar>, Option<Scalar>) {
    match d.x.cmp(&Scalar::zero()) {
        Ordering::Greater => (Some(p.x.clone()), None),
        Ordering::Less => (None, Some(p.x.clone())),
        Ordering::Equal => (Some(p.x.clone()), Some(p.x.clone())),
    }
}

impl VoronoiEdge {
    /// Closed range of `x` covered by the edge; `None` is unbounded.
    pub fn x_range(&self) -> (Option<Scalar>, Option<Scalar>) {
        match (&self.start, &self.end) {
            (Some(s), Some(e)) => (Some(s.x.clone().min(e.x.clone())), Some(s.x.clone().max(e.x.clone()))),
            (Some(s), None) => ray_range(s, &self.direction),
            (None, Some(e)) => ray_range(e, &-&self.direction),
            (None, None) => {
                if self.direction.x.is_zero() {
                    let x = self.line.point_on().x;
                    (Some(x.clone()), Some(x))
                } else {
                    (None, None)
                }
            }
        }
    }

    fn map(&self, f: impl Fn(&Point) -> Point, reflect: bool, line: Line) -> VoronoiEdge {
        VoronoiEdge {
            line,
            start: self.start.as_ref().map(&f),
            end: self.end.as_ref().map(&f),
            direction: if reflect {
                -&self.direction
            } else {
                self.direction.clone()
            },
            sites: self.sites,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoronoiDiagram {
    pub sites: Vec<Point>,
    pub vertices: Vec<Point>,
    pub edges: Vec<VoronoiEdge>,
    pub cells: Vec<ConvexPolygon>,
}

/// Exact Voronoi diagram, each cell the intersection of its bisector halfplanes.
pub fn voronoi(sites: &[Point]) -> Result<VoronoiDiagram> {
    if sites.is_empty() {
        return Err(Error::Validation("Voronoi diagram of an empty set".into()));
    }
    if sites.iter().collect::<BTreeSet<_>>().len() != sites.len() {
        return Err(Error::Validation("Voronoi sites must be distinct".into()));
    }
    let mut cells = Vec::with_capacity(sites.len());
    let mut edges = Vec::new();
    let mut vertices = BTreeSet::new();
    for (i, a) in sites.iter().enumerate() {
        let hs: Vec<(Halfplane, usize)> = sites
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, o)| {
                let h = Halfplane::le(o - a, (o.norm2() - a.norm2()) / int(2)).expect("distinct sites");
                (h, j)
            })
            .collect();
        let planes: Vec<Halfplane> = hs.iter().map(|(h, _)| h.clone()).collect();
        let cell = halfplane_intersection(&planes, a)?;
        for e in &cell.edges {
            let j = hs
                .iter()
                .find(|(h, _)| h.boundary == e.halfplane.boundary)
                .map(|(_, j)| *j)
                .ok_or_else(|| Error::Invariant("cell edge without a bisector".into()))?;
            if i < j {
                edges.push(VoronoiEdge {
                    line: e.halfplane.boundary.clone(),
                    start: e.start.clone(),
                    end: e.end.clone(),
                    direction: e.direction(),
                    sites: (i, j),
                });
            }
        }
        vertices.extend(cell.vertices.iter().cloned());
        cells.push(cell);
    }
    Ok(VoronoiDiagram {
        sites: sites.to_vec(),
        vertices: vertices.into_iter().collect(),
        edges,
        cells,
    })
}

/// `m ‖t‖² + ⟨d, t⟩ + c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaboloidPiece {
    #[serde(with = "scalar_serde")]
    pub c: Scalar,
    pub d: Point,
    pub m: usize,
}

impl ParaboloidPiece {
    fn empty() -> Self {
        ParaboloidPiece {
            c: Scalar::zero(),
            d: Point::origin(),
            m: 0,
        }
    }

    /// Adds (or removes) the term `‖t − p‖²`.
    fn add_target(&mut self, p: &Point, remove: bool) {
        let s = if remove { int(-1) } else { int(1) };
        self.d = &self.d - &p.scale(&(int(2) * &s));
        self.c += p.norm2() * &s;
        if remove {
            self.m -= 1;
        } else {
            self.m += 1;
        }
    }

    pub fn eval(&self, t: &Point) -> Scalar {
        int(self.m as i64) * t.norm2() + self.d.dot(t) + &self.c
    }

    pub fn eval_alg(&self, t: &AlgPoint) -> Qa {
        let lead = qadd(&qmul(&t.x, &t.x), &qmul(&t.y, &t.y)).scale(&int(self.m as i64));
        qadd(&qadd(&lead, &adot(&alg(&self.d), t)), &qr(&self.c))
    }

    pub fn vertex(&self) -> Point {
        self.d.scale(&(Scalar::new((-1).into(), (2 * self.m as i64).into())))
    }

    pub fn add(&self, o: &ParaboloidPiece) -> ParaboloidPiece {
        ParaboloidPiece {
            c: &self.c + &o.c,
            d: &self.d + &o.d,
            m: self.m + o.m,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Left,
    Right,
    LocalMinFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDecision {
    pub t_bar: AlgPoint,
    pub value: Qa,
    pub direction: Direction,
    pub breakpoint_count: usize,
    pub at_breakpoint: bool,
}

/// Rational box around a point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enclosure {
    #[serde(with = "scalar_serde")]
    pub x_lo: Scalar,
    #[serde(with = "scalar_serde")]
    pub x_hi: Scalar,
    #[serde(with = "scalar_serde")]
    pub y_lo: Scalar,
    #[serde(with = "scalar_serde")]
    pub y_hi: Scalar,
}

impl Enclosure {
    pub fn width(&self) -> Scalar {
        (&self.x_hi - &self.x_lo).max(&self.y_hi - &self.y_lo)
    }

    pub fn contains(&self, p: &AlgPoint) -> bool {
        qr(&self.x_lo) <= p.x && p.x <= qr(&self.x_hi) && qr(&self.y_lo) <= p.y && p.y <= qr(&self.y_hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub sample: Point,
    pub forward: ParaboloidPiece,
    pub reverse: Option<ParaboloidPiece>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct H2Stats {
    pub stage1_candidates: usize,
    pub stage1_calls: usize,
    pub stage2_intersections: usize,
    pub stage2_calls: usize,
    pub early_exit: bool,
    /// Slab after every shrink.
    pub slabs: Vec<VerticalSlab>,
    pub slices: Vec<SliceRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMin2D {
    pub t_star: AlgPoint,
    pub value: Qa,
    /// Nearest `A`-index of each `b_i + t*`, ties to the smaller index.
    pub assignment: Vec<usize>,
    /// Nearest `B`-index of each `a_j − t*` (bidirectional variants only).
    pub reverse_assignment: Vec<usize>,
    pub variant: Variant,
    pub enclosure: Option<Enclosure>,
    pub stats: H2Stats,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
struct Term {
    targets: Vec<Point>,
    forward: bool,
}

fn terms_of(inst: &Instance, variant: Variant) -> Vec<Term> {
    let mut terms: Vec<Term> = inst
        .b
        .iter()
        .map(|b| Term {
            targets: inst.a.iter().map(|a| a - b).collect(),
            forward: true,
        })
        .collect();
    if variant != Variant::Uni {
        terms.extend(inst.a.iter().map(|a| Term {
            targets: inst.b.iter().map(|b| a - b).collect(),
            forward: false,
        }));
    }
    terms
}

fn nearest(targets: &[Point], t: &Point) -> usize {
    let mut best = 0;
    let mut bd = sq_dist(t, &targets[0]);
    for (k, p) in targets.iter().enumerate().skip(1) {
        let d = sq_dist(t, p);
        if d < bd {
            best = k;
            bd = d;
        }
    }
    best
}

/// Squared distance to the nearest target and all indices attaining it.
fn nearest_alg(targets: &[Point], t: &AlgPoint) -> (Qa, Vec<usize>) {
    let mut best: Option<Qa> = None;
    let mut ties = Vec::new();
    for (k, p) in targets.iter().enumerate() {
        let v = asub(t, &alg(p));
        let d = adot(&v, &v);
        match best.as_ref().map(|b| d.cmp(b)) {
            None | Some(Ordering::Less) => {
                best = Some(d);
                ties = vec![k];
            }
            Some(Ordering::Equal) => ties.push(k),
            Some(Ordering::Greater) => {}
        }
    }
    (best.expect("nonempty targets"), ties)
}

/// Counterclockwise angular order starting at the positive x-axis.
fn angle_cmp(a: &Point, b: &Point) -> Ordering {
    let half = |p: &Point| if p.y.is_positive() || (p.y.is_zero() && p.x.is_positive()) { 0 } else { 1 };
    half(a).cmp(&half(b)).then_with(|| Scalar::zero().cmp(&a.cross(b)))
}

struct Local {
    ties: Vec<Vec<usize>>,
    f: Qa,
    g: Qa,
}

fn local_at(terms: &[Term], t: &AlgPoint) -> Local {
    let mut f = zero_qa();
    let mut g = zero_qa();
    let mut ties = Vec::with_capacity(terms.len());
    for term in terms {
        let (d, tie) = nearest_alg(&term.targets, t);
        if term.forward {
            f = qadd(&f, &d);
        } else {
            g = qadd(&g, &d);
        }
        ties.push(tie);
    }
    Local { ties, f, g }
}

/// One-sided directional derivative of the distance at `t` along `dir`.
fn slope(terms: &[Term], loc: &Local, variant: Variant, t: &AlgPoint, dir: &AlgPoint) -> Qa {
    let mut sf = zero_qa();
    let mut sg = zero_qa();
    for (term, ties) in terms.iter().zip(&loc.ties) {
        let s = ties
            .iter()
            .map(|&k| adot(&asub(t, &alg(&term.targets[k])), dir).scale(&int(2)))
            .min()
            .expect("nonempty ties");
        if term.forward {
            sf = qadd(&sf, &s);
        } else {
            sg = qadd(&sg, &s);
        }
    }
    match variant {
        Variant::Uni => sf,
        Variant::L1 => qadd(&sf, &sg),
        Variant::Linf => match loc.f.cmp(&loc.g) {
            Ordering::Greater => sf,
            Ordering::Less => sg,
            Ordering::Equal => sf.max(sg),
        },
    }
}

/// Directions where the directional derivative can change its linear form,
/// plus the axes. Checking signs on these decides descent exactly.
fn critical_directions(terms: &[Term], loc: &Local, variant: Variant, t: &AlgPoint) -> Vec<AlgPoint> {
    let mut dirs: Vec<Point> = vec![
        Point::from_ints(1, 0),
        Point::from_ints(0, 1),
        Point::from_ints(-1, 0),
        Point::from_ints(0, -1),
    ];
    for (term, ties) in terms.iter().zip(&loc.ties) {
        for (x, &k) in ties.iter().enumerate() {
            for &l in &ties[x + 1..] {
                let v = (&term.targets[l] - &term.targets[k]).perp();
                dirs.push(-&v);
                dirs.push(v);
            }
        }
    }
    dirs.sort_by(angle_cmp);
    dirs.dedup_by(|a, b| angle_cmp(a, b) == Ordering::Equal);
    let mut out: Vec<AlgPoint> = dirs.iter().map(alg).collect();
    if variant == Variant::Linf && loc.f == loc.g {
        // inside a sector both one-sided derivatives are linear; their crossing matters
        for w in 0..dirs.len() {
            let (c1, c2) = (&dirs[w], &dirs[(w + 1) % dirs.len()]);
            let mid = alg(&(c1 + c2));
            let mut wf = AlgPoint::rational(&Point::origin());
            let mut wg = wf.clone();
            for (term, ties) in terms.iter().zip(&loc.ties) {
                let k = *ties
                    .iter()
                    .min_by(|&&k, &&l| {
                        adot(&asub(t, &alg(&term.targets[k])), &mid).cmp(&adot(&asub(t, &alg(&term.targets[l])), &mid))
                    })
                    .expect("nonempty ties");
                let grad = asub(t, &alg(&term.targets[k]));
                let acc = if term.forward { &mut wf } else { &mut wg };
                *acc = AlgPoint {
                    x: qadd(&acc.x, &grad.x),
                    y: qadd(&acc.y, &grad.y),
                };
            }
            let h = asub(&wf, &wg);
            let z = AlgPoint {
                x: h.y.scale(&int(-1)),
                y: h.x.clone(),
            };
            let nz = AlgPoint {
                x: z.x.scale(&int(-1)),
                y: z.y.scale(&int(-1)),
            };
            for s in [z, nz] {
                let zero = zero_qa();
                if across(&alg(c1), &s) > zero && across(&s, &alg(c2)) > zero {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn classify(terms: &[Term], variant: Variant, t: &AlgPoint) -> Result<Direction> {
    let loc = local_at(terms, t);
    let zero = zero_qa();
    let (mut left, mut right, mut other) = (false, false, false);
    for d in critical_directions(terms, &loc, variant, t) {
        if slope(terms, &loc, variant, t, &d) < zero {
            match d.x.cmp(&zero) {
                Ordering::Greater => right = true,
                Ordering::Less => left = true,
                Ordering::Equal => other = true,
            }
        }
    }
    if left {
        Ok(Direction::Left)
    } else if right {
        Ok(Direction::Right)
    } else if other {
        Err(Error::Invariant("descent along a vertical line at its minimum".into()))
    } else {
        Ok(Direction::LocalMinFound)
    }
}

/// Exact first-order certificate: no direction decreases the distance at `t`.
pub fn is_stationary(inst: &Instance, t: &AlgPoint, variant: Variant) -> bool {
    stationary(&terms_of(inst, variant), variant, t)
}

fn stationary(terms: &[Term], variant: Variant, t: &AlgPoint) -> bool {
    let loc = local_at(terms, t);
    let zero = zero_qa();
    critical_directions(terms, &loc, variant, t)
        .iter()
        .all(|d| slope(terms, &loc, variant, t, d) >= zero)
}

fn directed(terms: &[Term], t: &Point) -> (Scalar, Scalar) {
    let mut f = Scalar::zero();
    let mut g = Scalar::zero();
    for term in terms {
        let d = sq_dist(t, &term.targets[nearest(&term.targets, t)]);
        if term.forward {
            f += d;
        } else {
            g += d;
        }
    }
    (f, g)
}

fn combine(variant: Variant, f: Scalar, g: Scalar) -> Scalar {
    match variant {
        Variant::Uni => f,
        Variant::L1 => f + g,
        Variant::Linf => f.max(g),
    }
}

/// Exact value of the chosen distance at `t`.
pub fn rms2d(inst: &Instance, t: &Point, variant: Variant) -> Scalar {
    let (f, g) = directed(&terms_of(inst, variant), t);
    combine(variant, f, g)
}

pub fn rms2d_alg(inst: &Instance, t: &AlgPoint, variant: Variant) -> Qa {
    let loc = local_at(&terms_of(inst, variant), t);
    match variant {
        Variant::Uni => loc.f,
        Variant::L1 => qadd(&loc.f, &loc.g),
        Variant::Linf => loc.f.max(loc.g),
    }
}

type Quad = [Scalar; 3];

fn quad_zero() -> Quad {
    [Scalar::zero(), Scalar::zero(), Scalar::zero()]
}

fn quad_at(q: &Quad, y: &Qa) -> Qa {
    y.eval_quadratic(&q[0], &q[1], &q[2])
}

fn quad_sum(p: &Quad, q: &Quad) -> Quad {
    [&p[0] + &q[0], &p[1] + &q[1], &p[2] + &q[2]]
}

/// Minimum of a convex piecewise function on a closed interval of the line.
fn min_on_interval(variant: Variant, f: &Quad, g: &Quad, lo: Option<&Scalar>, hi: Option<&Scalar>) -> (Qa, Qa) {
    let clamp = |v: Scalar| -> Scalar {
        match (lo, hi) {
            (Some(l), _) if &v < l => l.clone(),
            (_, Some(h)) if &v > h => h.clone(),
            _ => v,
        }
    };
    let vertex = |q: &Quad| -q[1].clone() / (int(2) * &q[0]);
    match variant {
        Variant::Uni | Variant::L1 => {
            let q = if variant == Variant::Uni { f.clone() } else { quad_sum(f, g) };
            let y = qr(&clamp(vertex(&q)));
            (quad_at(&q, &y), y)
        }
        Variant::Linf => {
            let mut cands: Vec<Qa> = vec![qr(&clamp(vertex(f))), qr(&clamp(vertex(g)))];
            cands.extend(quadratic_roots(&(&f[0] - &g[0]), &(&f[1] - &g[1]), &(&f[2] - &g[2])));
            cands.extend(lo.map(qr));
            cands.extend(hi.map(qr));
            cands
                .into_iter()
                .filter(|y| lo.is_none_or(|l| y >= &qr(l)) && hi.is_none_or(|h| y <= &qr(h)))
                .map(|y| (quad_at(f, &y).max(quad_at(g, &y)), y))
                .min()
                .expect("an interval has a candidate")
        }
    }
}

/// Unconstrained minimum of `max(f, g)` for two paraboloids.
fn max_min(f: &ParaboloidPiece, g: &ParaboloidPiece) -> Option<(AlgPoint, Qa)> {
    let vf = f.vertex();
    if f.eval(&vf) >= g.eval(&vf) {
        return Some((alg(&vf), qr(&f.eval(&vf))));
    }
    let vg = g.vertex();
    if g.eval(&vg) >= f.eval(&vg) {
        return Some((alg(&vg), qr(&g.eval(&vg))));
    }
    // the minimum lies on the locus f = g
    let (lf, lg) = (int(f.m as i64), int(g.m as i64));
    let e = &f.d - &g.d;
    let k = &f.c - &g.c;
    if lf == lg {
        if e.is_zero() {
            return None;
        }
        let u = e.perp();
        let p0 = e.scale(&(-&k / e.norm2()));
        let s = -(int(2) * &lf * p0.dot(&u) + f.d.dot(&u)) / (int(2) * &lf * u.norm2());
        let t = &p0 + &u.scale(&s);
        return Some((alg(&t), qr(&f.eval(&t))));
    }
    let delta = &lf - &lg;
    let c0 = e.scale(&(Scalar::one() / (int(-2) * &delta)));
    let r2 = c0.norm2() - &k / &delta;
    let w = &f.d - &e.scale(&(&lf / &delta));
    if !r2.is_positive() || w.is_zero() {
        return None;
    }
    let root = Qa::sqrt_of(&(r2 / w.norm2()));
    let t = AlgPoint {
        x: root.scale(&-w.x.clone()).add_rational(&c0.x),
        y: root.scale(&-w.y.clone()).add_rational(&c0.y),
    };
    let v = f.eval_alg(&t);
    Some((t, v))
}

fn bit_length(x: &Scalar) -> u64 {
    (floor_int(&x.abs()) + BigInt::one()).bits()
}

/// Rational bounds on `v` of width at most `2^-64`.
fn enclose(v: &Qa) -> (Scalar, Scalar) {
    if v.is_rational() {
        return (v.p.clone(), v.p.clone());
    }
    let k = 66 + bit_length(&v.q);
    let scale = BigInt::one() << k;
    let root = isqrt(&(&v.d * &scale * &scale));
    let lo_s = Scalar::new(root.clone(), scale.clone());
    let hi_s = Scalar::new(root + BigInt::one(), scale);
    let (a, b) = (&v.p + &v.q * &lo_s, &v.p + &v.q * &hi_s);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn enclosure_of(p: &AlgPoint) -> Enclosure {
    let (x_lo, x_hi) = enclose(&p.x);
    let (y_lo, y_hi) = enclose(&p.y);
    Enclosure { x_lo, x_hi, y_lo, y_hi }
}

#[derive(Clone, Debug)]
struct TermEdge {
    line: Line,
    lo: Option<Scalar>,
    hi: Option<Scalar>,
    sites: (usize, usize),
}

impl TermEdge {
    fn vertical(&self) -> bool {
        self.line.is_vertical()
    }

    fn spans(&self, x: &Scalar) -> bool {
        self.lo.as_ref().is_none_or(|l| l <= x) && self.hi.as_ref().is_none_or(|h| x <= h)
    }

    fn meets(&self, slab: &VerticalSlab) -> bool {
        let right_of_left = match (&slab.left, &self.hi) {
            (Some(l), Some(h)) => h > l,
            _ => true,
        };
        let left_of_right = match (&slab.right, &self.lo) {
            (Some(r), Some(l)) => l < r,
            _ => true,
        };
        right_of_left && left_of_right
    }
}

struct Engine<'a> {
    inst: &'a Instance,
    variant: Variant,
    terms: Vec<Term>,
    edges: Vec<Vec<TermEdge>>,
    /// Distinct abscissae of original vertices and of vertical full-line edges.
    candidate_xs: Vec<Scalar>,
}

impl<'a> Engine<'a> {
    fn new(inst: &'a Instance, variant: Variant) -> Result<Self> {
        let terms = terms_of(inst, variant);
        let va = voronoi(&inst.a)?;
        let vb = if variant == Variant::Uni {
            None
        } else {
            Some(voronoi(&inst.b)?)
        };
        let mut edges = Vec::with_capacity(terms.len());
        let mut xs = BTreeSet::new();
        let mut collect = |mapped: Vec<VoronoiEdge>, verts: Vec<Point>, xs: &mut BTreeSet<Scalar>| {
            xs.extend(verts.into_iter().map(|p| p.x));
            let te: Vec<TermEdge> = mapped
                .into_iter()
                .map(|e| {
                    let (lo, hi) = e.x_range();
                    if e.start.is_none() && e.end.is_none() && e.line.is_vertical() {
                        xs.insert(lo.clone().expect("vertical line has an abscissa"));
                    }
                    TermEdge {
                        line: e.line,
                        lo,
                        hi,
                        sites: e.sites,
                    }
                })
                .collect();
            edges.push(te);
        };
        for b in &inst.b {
            let mapped = va
                .edges
                .iter()
                .map(|e| {
                    let line = Line::new(e.line.normal.clone(), &e.line.offset - e.line.normal.dot(b)).expect("nonzero");
                    e.map(|p| p - b, false, line)
                })
                .collect();
            collect(mapped, va.vertices.iter().map(|v| v - b).collect(), &mut xs);
        }
        if let Some(vb) = &vb {
            for a in &inst.a {
                let mapped = vb
                    .edges
                    .iter()
                    .map(|e| {
                        let line =
                            Line::new(e.line.normal.clone(), e.line.normal.dot(a) - &e.line.offset).expect("nonzero");
                        e.map(|p| a - p, true, line)
                    })
                    .collect();
                collect(mapped, vb.vertices.iter().map(|v| a - v).collect(), &mut xs);
            }
        }
        Ok(Engine {
            inst,
            variant,
            terms,
            edges,
            candidate_xs: xs.into_iter().collect(),
        })
    }

    /// Global minimum of the distance on the vertical line `x = x0`, and the side to continue on.
    fn gamma1(&self, x0: &Scalar) -> Result<LineDecision> {
        let piece = |p: &Point| -> Quad {
            let dx = x0 - &p.x;
            [Scalar::one(), int(-2) * &p.y, &p.y * &p.y + &dx * &dx]
        };
        let mut f = quad_zero();
        let mut g = quad_zero();
        let mut events: BTreeMap<Scalar, Vec<(usize, usize, usize)>> = BTreeMap::new();
        let mut all_ys = BTreeSet::new();
        for (ti, term) in self.terms.iter().enumerate() {
            let mut ys: Vec<Scalar> = self.edges[ti]
                .iter()
                .filter(|e| !e.vertical() && e.spans(x0))
                .map(|e| e.line.y_at(x0).expect("non-vertical"))
                .collect();
            ys.sort();
            ys.dedup();
            let sites: Vec<usize> = (0..=ys.len())
                .map(|k| {
                    let y = match (k.checked_sub(1).map(|i| &ys[i]), ys.get(k)) {
                        (Some(l), Some(h)) => (l + h) / int(2),
                        (Some(l), None) => l + Scalar::one(),
                        (None, Some(h)) => h - Scalar::one(),
                        (None, None) => Scalar::zero(),
                    };
                    nearest(&term.targets, &Point::new(x0.clone(), y))
                })
                .collect();
            let acc = if term.forward { &mut f } else { &mut g };
            *acc = quad_sum(acc, &piece(&term.targets[sites[0]]));
            for (k, y) in ys.iter().enumerate() {
                if sites[k] != sites[k + 1] {
                    events.entry(y.clone()).or_default().push((ti, sites[k], sites[k + 1]));
                }
            }
            all_ys.extend(ys);
        }
        let ys: Vec<Scalar> = all_ys.into_iter().collect();
        let mut best: Option<(Qa, Qa)> = None;
        for k in 0..=ys.len() {
            let lo = k.checked_sub(1).map(|i| &ys[i]);
            let cand = min_on_interval(self.variant, &f, &g, lo, ys.get(k));
            if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                best = Some(cand);
            }
            if let Some(evs) = ys.get(k).and_then(|y| events.get(y)) {
                for &(ti, old, new) in evs {
                    let term = &self.terms[ti];
                    let acc = if term.forward { &mut f } else { &mut g };
                    let (po, pn) = (piece(&term.targets[old]), piece(&term.targets[new]));
                    *acc = [&acc[0] - &po[0] + &pn[0], &acc[1] - &po[1] + &pn[1], &acc[2] - &po[2] + &pn[2]];
                }
            }
        }
        let (value, y) = best.expect("at least one interval");
        let at_breakpoint = y.as_rational().is_some_and(|r| ys.binary_search(r).is_ok());
        let t_bar = AlgPoint { x: qr(x0), y };
        let direction = classify(&self.terms, self.variant, &t_bar)?;
        Ok(LineDecision {
            t_bar,
            value,
            direction,
            breakpoint_count: ys.len(),
            at_breakpoint,
        })
    }

    fn result_at(&self, t: AlgPoint, value: Qa, stats: H2Stats) -> LocalMin2D {
        let m = self.inst.m();
        let mut assignment = Vec::with_capacity(m);
        let mut reverse = Vec::new();
        for (ti, term) in self.terms.iter().enumerate() {
            let k = nearest_alg(&term.targets, &t).1[0];
            if ti < m {
                assignment.push(k);
            } else {
                reverse.push(k);
            }
        }
        let enclosure = (self.variant == Variant::Linf).then(|| enclosure_of(&t));
        let iterations = stats.stage1_calls + stats.stage2_calls;
        LocalMin2D {
            t_star: t,
            value,
            assignment,
            reverse_assignment: reverse,
            variant: self.variant,
            enclosure,
            stats,
            iterations,
            converged: true,
        }
    }

    fn piece_min(&self, f: &ParaboloidPiece, g: &ParaboloidPiece) -> Option<(AlgPoint, Qa)> {
        match self.variant {
            Variant::Uni => {
                let v = f.vertex();
                Some((alg(&v), qr(&f.eval(&v))))
            }
            Variant::L1 => {
                let s = f.add(g);
                let v = s.vertex();
                Some((alg(&v), qr(&s.eval(&v))))
            }
            Variant::Linf => max_min(f, g),
        }
    }

    /// Scans the slices of a slab free of overlay vertices.
    fn final_scan(&self, slab: &VerticalSlab, stats: &mut H2Stats) -> Result<(AlgPoint, Qa)> {
        let xm = slab.interior_x();
        let mut by_line: BTreeMap<Line, Vec<(usize, (usize, usize))>> = BTreeMap::new();
        for (ti, es) in self.edges.iter().enumerate() {
            for e in es {
                if !e.vertical() && e.meets(slab) {
                    by_line.entry(e.line.clone()).or_default().push((ti, e.sites));
                }
            }
        }
        let mut stack: Vec<(Scalar, Line, Vec<(usize, (usize, usize))>)> = by_line
            .into_iter()
            .map(|(l, ann)| (l.y_at(&xm).expect("non-vertical"), l, ann))
            .collect();
        stack.sort_by(|a, b| a.0.cmp(&b.0));
        let sample = |k: usize| -> Point {
            let y = match (k.checked_sub(1).map(|i| &stack[i].0), stack.get(k).map(|s| &s.0)) {
                (Some(l), Some(h)) => (l + h) / int(2),
                (Some(l), None) => l + Scalar::one(),
                (None, Some(h)) => h - Scalar::one(),
                (None, None) => Scalar::zero(),
            };
            Point::new(xm.clone(), y)
        };
        let first = sample(0);
        let mut sites: Vec<usize> = self.terms.iter().map(|t| nearest(&t.targets, &first)).collect();
        let mut f = ParaboloidPiece::empty();
        let mut g = ParaboloidPiece::empty();
        for (term, &s) in self.terms.iter().zip(&sites) {
            if term.forward {
                f.add_target(&term.targets[s], false);
            } else {
                g.add_target(&term.targets[s], false);
            }
        }
        let zero = zero_qa();
        let mut best: Option<(Qa, AlgPoint)> = None;
        for k in 0..=stack.len() {
            if k > 0 {
                for &(ti, (p, q)) in &stack[k - 1].2 {
                    let cur = sites[ti];
                    let new = if cur == p {
                        q
                    } else if cur == q {
                        p
                    } else {
                        return Err(Error::Invariant("crossed an edge not bounding the current cell".into()));
                    };
                    let term = &self.terms[ti];
                    let acc = if term.forward { &mut f } else { &mut g };
                    acc.add_target(&term.targets[cur], true);
                    acc.add_target(&term.targets[new], false);
                    sites[ti] = new;
                }
            }
            stats.slices.push(SliceRecord {
                sample: sample(k),
                forward: f.clone(),
                reverse: (self.variant != Variant::Uni).then(|| g.clone()),
            });
            let Some((t, v)) = self.piece_min(&f, &g) else {
                continue;
            };
            let (lx, rx) = (
                slab.left.as_ref().map(|l| t.x.cmp(&qr(l))),
                slab.right.as_ref().map(|r| t.x.cmp(&qr(r))),
            );
            let side = |l: &Line| -> Qa {
                // y − y_line(x), for a non-vertical line
                let slope = -&l.normal.x / &l.normal.y;
                qsub(&t.y, &t.x.scale(&slope).add_rational(&(&l.offset / &l.normal.y)))
            };
            let above = (k > 0).then(|| side(&stack[k - 1].1).cmp(&zero));
            let below = (k < stack.len()).then(|| side(&stack[k].1).cmp(&zero));
            let closed = lx != Some(Ordering::Less)
                && rx != Some(Ordering::Greater)
                && above != Some(Ordering::Less)
                && below != Some(Ordering::Greater);
            let strict = lx.is_none_or(|o| o == Ordering::Greater)
                && rx.is_none_or(|o| o == Ordering::Less)
                && above.is_none_or(|o| o == Ordering::Greater)
                && below.is_none_or(|o| o == Ordering::Less);
            // a boundary point minimizes the slice's pieces but must still be checked against its neighbors
            let valid = closed && (strict || stationary(&self.terms, self.variant, &t));
            if valid && best.as_ref().is_none_or(|(bv, bt)| v < *bv || (v == *bv && t < *bt)) {
                best = Some((v, t));
            }
        }
        best.map(|(v, t)| (t, v))
            .ok_or_else(|| Error::Invariant("final slab holds no local minimum".into()))
    }

    fn run(&self) -> Result<LocalMin2D> {
        let mut stats = H2Stats {
            stage1_candidates: self.candidate_xs.len(),
            ..H2Stats::default()
        };
        let mut slab = VerticalSlab::unbounded();
        macro_rules! decide {
            ($x:expr, $counter:ident) => {{
                let dec = self.gamma1($x)?;
                stats.$counter += 1;
                if dec.direction == Direction::LocalMinFound {
                    stats.early_exit = true;
                    return Ok(self.result_at(dec.t_bar, dec.value, stats));
                }
                dec.direction
            }};
        }
        let xs = &self.candidate_xs;
        if !xs.is_empty() {
            let last = xs.len() - 1;
            if decide!(&xs[0], stage1_calls) == Direction::Left {
                slab = VerticalSlab::new(None, Some(xs[0].clone()));
            } else if last == 0 {
                slab = VerticalSlab::new(Some(xs[0].clone()), None);
            } else if decide!(&xs[last], stage1_calls) == Direction::Right {
                slab = VerticalSlab::new(Some(xs[last].clone()), None);
            } else {
                let (mut lo, mut hi) = (0, last);
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if decide!(&xs[mid], stage1_calls) == Direction::Right {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    stats.slabs.push(VerticalSlab::new(Some(xs[lo].clone()), Some(xs[hi].clone())));
                }
                slab = VerticalSlab::new(Some(xs[lo].clone()), Some(xs[hi].clone()));
            }
            stats.slabs.push(slab.clone());
        }
        let lines: Vec<Line> = self
            .edges
            .iter()
            .flatten()
            .filter(|e| !e.vertical() && e.meets(&slab))
            .map(|e| e.line.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        stats.stage2_intersections = intersections_in_slab(&lines, &slab).len();
        loop {
            let count = intersections_in_slab(&lines, &slab).len();
            if count == 0 {
                break;
            }
            let p = kth_intersection_in_slab(&lines, &slab, count.div_ceil(2))?;
            if decide!(&p.x, stage2_calls) == Direction::Right {
                slab.left = Some(p.x);
            } else {
                slab.right = Some(p.x);
            }
            stats.slabs.push(slab.clone());
        }
        let (t, v) = self.final_scan(&slab, &mut stats)?;
        Ok(self.result_at(t, v, stats))
    }
}

/// Decision procedure on the vertical line `x = x0`.
pub fn gamma1(inst: &Instance, x0: &Scalar, variant: Variant) -> Result<LineDecision> {
    Engine::new(inst, variant)?.gamma1(x0)
}

pub fn local_min_h2(inst: &Instance, variant: Variant) -> Result<LocalMin2D> {
    Engine::new(inst, variant)?.run()
}

/// Checks the fixed-point certificate (uni, L1) or the exact first-order
/// certificate (linf) of a reported minimum.
pub fn certificate_holds(inst: &Instance, r: &LocalMin2D) -> bool {
    if r.variant == Variant::Linf {
        return is_stationary(inst, &r.t_star, r.variant) && r.enclosure.as_ref().is_none_or(|e| e.contains(&r.t_star));
    }
    let Some(t) = r.t_star.as_point() else {
        return false;
    };
    let terms = terms_of(inst, r.variant);
    let chosen: Vec<usize> = r.assignment.iter().chain(&r.reverse_assignment).copied().collect();
    if chosen.len() != terms.len() {
        return false;
    }
    let mut sum = Point::origin();
    for (term, &k) in terms.iter().zip(&chosen) {
        let d = sq_dist(&t, &term.targets[k]);
        if term.targets.iter().any(|p| sq_dist(&t, p) < d) {
            return false;
        }
        sum = &sum + &term.targets[k];
    }
    t.scale(&int(terms.len() as i64)) == sum
}

/// Iterated closest point from `t0`; `dim = 1` requires all points and `t0` on the x-axis.
pub fn icp(inst: &Instance, t0: &Point, dim: u8) -> Result<LocalMin2D> {
    match dim {
        1 => {
            if inst.a.iter().chain(&inst.b).chain([t0]).any(|p| !p.y.is_zero()) {
                return Err(Error::Validation("dim 1 needs every point on the x-axis".into()));
            }
        }
        2 => {}
        _ => return Err(Error::Validation(format!("dim must be 1 or 2, got {dim}"))),
    }
    let terms = terms_of(inst, Variant::Uni);
    let guard = 10 * inst.n() * inst.m() + 10;
    let mean_b = Point::mean(&inst.b);
    let mut t = t0.clone();
    let mut steps = 0;
    let mut converged = false;
    let mut assignment;
    loop {
        assignment = terms.iter().map(|term| nearest(&term.targets, &t)).collect::<Vec<_>>();
        let chosen: Vec<Point> = assignment.iter().map(|&k| inst.a[k].clone()).collect();
        let next = &Point::mean(&chosen) - &mean_b;
        if next == t {
            converged = true;
            break;
        }
        if steps == guard {
            break;
        }
        t = next;
        steps += 1;
    }
    let value = qr(&rms2d(inst, &t, Variant::Uni));
    Ok(LocalMin2D {
        t_star: alg(&t),
        value,
        assignment,
        reverse_assignment: vec![],
        variant: Variant::Uni,
        enclosure: None,
        stats: H2Stats::default(),
        iterations: steps,
        converged,
    })
}
