//! Exhaustive reference computations used to certify the main algorithms.
//! Only the numeric primitives are shared with the code under test.

use crate::assignment::{CostPlane, Instance, Matching};
use crate::error::{Error, Result};
use crate::hausdorff1d::Variant;
use crate::numeric::algebraic::{quadratic_roots, AlgPoint, QuadraticAlgebraic};
use crate::numeric::geometry::Line;
use crate::numeric::point::{sq_dist, Point};
use crate::numeric::scalar::{int, Scalar};
use crate::subdivision::{Descent, LineMin, LineTrace, TraceCell};
use itertools::Itertools;
use num::traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Location {
    OneD(QuadraticAlgebraic),
    TwoD(AlgPoint),
}

impl Location {
    pub fn point(p: &Point) -> Self {
        Location::TwoD(AlgPoint::rational(p))
    }

    pub fn scalar(x: &Scalar) -> Self {
        Location::OneD(QuadraticAlgebraic::rational(x.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimumEntry {
    pub t: Location,
    pub value: QuadraticAlgebraic,
    /// Matching (partial matching) or nearest-neighbor assignment at `t`.
    pub assignment: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimaSet {
    pub entries: Vec<MinimumEntry>,
}

impl MinimaSet {
    pub fn from_entries(mut entries: Vec<MinimumEntry>) -> Self {
        entries.sort_by(|a, b| a.value.cmp(&b.value).then_with(|| a.t.cmp(&b.t)));
        entries.dedup_by(|a, b| a.t == b.t);
        MinimaSet { entries }
    }

    pub fn contains(&self, t: &Location, value: &QuadraticAlgebraic) -> bool {
        self.entries.iter().any(|e| &e.t == t && &e.value == value)
    }

    pub fn min_value(&self) -> Option<&QuadraticAlgebraic> {
        self.entries.first().map(|e| &e.value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn guard_pm(inst: &Instance) -> Result<()> {
    if inst.n() > 9 || inst.m() > 6 {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive matching oracle limited to n <= 9, m <= 6 (got n = {}, m = {})",
            inst.n(),
            inst.m()
        )));
    }
    Ok(())
}

/// Lexicographically first minimum of `cost(assign)` over all injections `m -> cols`.
fn enumerate_injections(m: usize, cols: &[usize], cost: &dyn Fn(usize, usize) -> Scalar) -> (Vec<usize>, Scalar) {
    fn rec(
        i: usize,
        m: usize,
        cols: &[usize],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        acc: Scalar,
        cost: &dyn Fn(usize, usize) -> Scalar,
        best: &mut Option<(Vec<usize>, Scalar)>,
    ) {
        if i == m {
            if best.as_ref().is_none_or(|(_, b)| acc < *b) {
                *best = Some((cur.clone(), acc));
            }
            return;
        }
        for (k, &j) in cols.iter().enumerate() {
            if used[k] {
                continue;
            }
            used[k] = true;
            cur.push(j);
            let next = &acc + cost(i, j);
            rec(i + 1, m, cols, used, cur, next, cost, best);
            cur.pop();
            used[k] = false;
        }
    }
    let mut best = None;
    let mut used = vec![false; cols.len()];
    rec(0, m, cols, &mut used, &mut Vec::new(), Scalar::zero(), cost, &mut best);
    best.expect("at least one injection")
}

/// Exhaustive optimal matching at `t`, lexicographically smallest among optima.
pub fn brute_matching(inst: &Instance, t: &Point) -> Result<Matching> {
    guard_pm(inst)?;
    let shifted: Vec<Point> = inst.b.iter().map(|b| b + t).collect();
    let table: Vec<Vec<Scalar>> = shifted
        .iter()
        .map(|b| inst.a.iter().map(|a| sq_dist(b, a)).collect())
        .collect();
    let cols: Vec<usize> = (0..inst.n()).collect();
    let (assign, _) = enumerate_injections(inst.m(), &cols, &|i, j| table[i][j].clone());
    Ok(Matching::new(assign))
}

/// Per matched subset: its cheapest perfect matching and the affine part `(c, d)`.
struct SubsetPlane {
    assign: Vec<usize>,
    c: Scalar,
    d: Point,
}

fn subset_planes(inst: &Instance) -> Vec<SubsetPlane> {
    let m = inst.m();
    let sum_b = Point::sum(&inst.b);
    (0..inst.n())
        .combinations(m)
        .map(|subset| {
            let (assign, c) =
                enumerate_injections(m, &subset, &|i, j| sq_dist(&inst.b[i], &inst.a[j]));
            let sum_s = Point::sum(subset.iter().map(|&j| &inst.a[j]));
            let d = (&sum_b - &sum_s).scale(&int(2));
            SubsetPlane { assign, c, d }
        })
        .collect()
}

fn plane_value(sp: &SubsetPlane, m: usize, t: &Point) -> Scalar {
    &sp.c + t.dot(&sp.d) + int(m as i64) * t.norm2()
}

/// All local minima of the partial-matching function, each a paraboloid vertex
/// at which its plane is the unique optimal one.
pub fn enumerate_pm_minima(inst: &Instance) -> Result<MinimaSet> {
    guard_pm(inst)?;
    let m = inst.m();
    let planes = subset_planes(inst);
    let two_m = int(2 * m as i64);
    let mut entries = Vec::new();
    for sp in &planes {
        let t = sp.d.scale(&(int(-1) / &two_m));
        let values: Vec<Scalar> = planes.iter().map(|q| plane_value(q, m, &t)).collect();
        let best = values.iter().min().expect("nonempty").clone();
        let own = plane_value(sp, m, &t);
        if own != best {
            continue;
        }
        let unique = planes
            .iter()
            .zip(&values)
            .all(|(q, v)| *v != best || (q.c == sp.c && q.d == sp.d));
        if !unique {
            continue;
        }
        let assign = planes
            .iter()
            .zip(&values)
            .filter(|(_, v)| **v == best)
            .map(|(q, _)| q.assign.clone())
            .min()
            .expect("own plane attains the minimum");
        entries.push(MinimumEntry {
            t: Location::point(&t),
            value: QuadraticAlgebraic::rational(own),
            assignment: assign,
        });
    }
    Ok(MinimaSet::from_entries(entries))
}

fn oracle_plane(inst: &Instance, assign: &[usize]) -> CostPlane {
    let mut c = Scalar::zero();
    let mut d = Point::origin();
    for (i, &j) in assign.iter().enumerate() {
        let diff = &inst.b[i] - &inst.a[j];
        c += diff.norm2();
        d = &d + &diff;
    }
    CostPlane {
        c,
        d: d.scale(&int(2)),
        m: inst.m(),
    }
}

/// Line trace computed from all pairwise plane equalities along the line.
pub fn brute_line_trace(inst: &Instance, line: &Line) -> Result<LineTrace> {
    guard_pm(inst)?;
    let m = inst.m();
    let mi = int(m as i64);
    let planes = subset_planes(inst);
    let (base, u) = line.param_frame();
    // F_S(s) = α s² + β_S s + γ_S with α shared.
    let alpha = &mi * u.norm2();
    let coeffs: Vec<(Scalar, Scalar)> = planes
        .iter()
        .map(|p| {
            (
                u.dot(&p.d) + int(2) * &mi * base.dot(&u),
                &p.c + base.dot(&p.d) + &mi * base.norm2(),
            )
        })
        .collect();
    let mut params = Vec::new();
    for i in 0..coeffs.len() {
        for j in i + 1..coeffs.len() {
            let db = &coeffs[i].0 - &coeffs[j].0;
            if !db.is_zero() {
                params.push((&coeffs[j].1 - &coeffs[i].1) / db);
            }
        }
    }
    params.sort();
    params.dedup();
    let mut samples = Vec::new();
    if params.is_empty() {
        samples.push(Scalar::zero());
    } else {
        samples.push(&params[0] - int(1));
        for w in params.windows(2) {
            samples.push((&w[0] + &w[1]) / int(2));
        }
        samples.push(params.last().expect("nonempty") + int(1));
    }
    let mut cells: Vec<TraceCell> = Vec::new();
    for (k, s) in samples.iter().enumerate() {
        let vals: Vec<Scalar> = coeffs.iter().map(|(b, g)| b * s + g).collect();
        let best = vals.iter().min().expect("nonempty");
        let assign = planes
            .iter()
            .zip(&vals)
            .filter(|(_, v)| *v == best)
            .map(|(p, _)| p.assign.clone())
            .min()
            .expect("nonempty");
        let matching = Matching::new(assign);
        let plane = oracle_plane(inst, &matching.assign);
        let start = if k == 0 { None } else { Some(params[k - 1].clone()) };
        let end = params.get(k).cloned();
        if let Some(last) = cells.last_mut() {
            if last.plane.c == plane.c && last.plane.d == plane.d {
                last.end = end;
                continue;
            }
        }
        cells.push(TraceCell {
            start,
            end,
            matching,
            plane,
        });
    }
    let breakpoints: Vec<Scalar> = cells.iter().filter_map(|c| c.end.clone()).collect();
    // Line minimum: per cell, clamp the vertex of the shared-curvature quadratic.
    let mut best: Option<(Scalar, Scalar)> = None;
    let mut degenerate = false;
    for c in &cells {
        let beta = u.dot(&c.plane.d) + int(2) * &mi * base.dot(&u);
        let gamma = &c.plane.c + base.dot(&c.plane.d) + &mi * base.norm2();
        let mut s = -&beta / (int(2) * &alpha);
        if let Some(lo) = &c.start {
            s = s.max(lo.clone());
        }
        if let Some(hi) = &c.end {
            s = s.min(hi.clone());
        }
        let v = &alpha * &s * &s + &beta * &s + &gamma;
        match &best {
            Some((bv, bs)) if v > *bv || (v == *bv && s >= *bs) => {
                if v == *bv && s != *bs {
                    degenerate = true;
                }
            }
            Some((bv, bs)) => {
                degenerate = v == *bv && s != *bs;
                best = Some((v, s));
            }
            None => best = Some((v, s)),
        }
    }
    let (value, param) = best.expect("at least one cell");
    let point = &base + &u.scale(&param);
    // Directional derivatives from all planes active at the minimizer.
    let active: Vec<Point> = planes
        .iter()
        .filter(|p| plane_value(p, m, &point) == value)
        .map(|p| &p.d + &point.scale(&(int(2) * &mi)))
        .collect();
    let deriv = |w: &Point| active.iter().map(|g| g.dot(w)).min().expect("active plane");
    let normal = line.normal.clone();
    let descent = if deriv(&-&normal).is_negative() {
        Descent::Left
    } else if deriv(&normal).is_negative() {
        Descent::Right
    } else {
        Descent::LocalMinFound
    };
    Ok(LineTrace {
        line: line.clone(),
        cells,
        breakpoints,
        line_min: LineMin { param, point, value },
        descent,
        degenerate,
    })
}

/// `(a2, a1, a0)` for `a2 t² + a1 t + a0`.
type Quad = (Scalar, Scalar, Scalar);

fn quad_of(offsets: impl Iterator<Item = Scalar>) -> Quad {
    offsets.fold((Scalar::zero(), Scalar::zero(), Scalar::zero()), |(a2, a1, a0), o| {
        (a2 + int(1), a1 + int(2) * &o, a0 + &o * &o)
    })
}

fn quad_add(p: &Quad, q: &Quad) -> Quad {
    (&p.0 + &q.0, &p.1 + &q.1, &p.2 + &q.2)
}

fn quad_at(q: &Quad, t: &QuadraticAlgebraic) -> QuadraticAlgebraic {
    t.eval_quadratic(&q.0, &q.1, &q.2)
}

fn quad_slope(q: &Quad, t: &QuadraticAlgebraic) -> QuadraticAlgebraic {
    t.scale(&(int(2) * &q.0)).add_rational(&q.1)
}

fn distinct_sorted(xs: &[Scalar]) -> Result<Vec<Scalar>> {
    let mut v = xs.to_vec();
    v.sort();
    if v.is_empty() || v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Validation("point sets must be nonempty and free of duplicates".into()));
    }
    Ok(v)
}

fn strictly_between(x: &QuadraticAlgebraic, lo: Option<&Scalar>, hi: Option<&Scalar>) -> bool {
    lo.is_none_or(|l| x > &QuadraticAlgebraic::rational(l.clone()))
        && hi.is_none_or(|h| x < &QuadraticAlgebraic::rational(h.clone()))
}

/// Every local minimum of the 1D distance, from an explicit piecewise representation.
pub fn enumerate_h1_minima(a: &[Scalar], b: &[Scalar], variant: Variant) -> Result<MinimaSet> {
    let a = distinct_sorted(a)?;
    let b = distinct_sorted(b)?;
    let (n, m) = (a.len(), b.len());
    if n * m > 1_000_000 {
        return Err(Error::BudgetExceeded(format!("1D oracle limited to nm <= 10^6 (got {})", n * m)));
    }
    let two = int(2);
    let mut bps: Vec<Scalar> = Vec::new();
    for w in a.windows(2) {
        let mu = (&w[0] + &w[1]) / &two;
        bps.extend(b.iter().map(|bi| &mu - bi));
    }
    if variant != Variant::Uni {
        for w in b.windows(2) {
            let nu = (&w[0] + &w[1]) / &two;
            bps.extend(a.iter().map(|aj| aj - &nu));
        }
    }
    bps.sort();
    bps.dedup();

    // Sweep left to right; nearest indices move monotonically.
    let dist = |x: &Scalar, y: &Scalar| (x - y).abs();
    let mut fwd = vec![0usize; m];
    let mut rev = vec![m - 1; n];
    let mut arcs: Vec<(Quad, Quad, Vec<usize>)> = Vec::with_capacity(bps.len() + 1);
    for k in 0..=bps.len() {
        let sample = match (k.checked_sub(1).map(|i| &bps[i]), bps.get(k)) {
            (Some(l), Some(h)) => (l + h) / &two,
            (Some(l), None) => l + int(1),
            (None, Some(h)) => h - int(1),
            (None, None) => Scalar::zero(),
        };
        for (i, bi) in b.iter().enumerate() {
            let q = bi + &sample;
            while fwd[i] + 1 < n && dist(&q, &a[fwd[i] + 1]) <= dist(&q, &a[fwd[i]]) {
                fwd[i] += 1;
            }
        }
        for (j, aj) in a.iter().enumerate() {
            let s = aj - &sample;
            while rev[j] > 0 && dist(&s, &b[rev[j] - 1]) < dist(&s, &b[rev[j]]) {
                rev[j] -= 1;
            }
        }
        let f = quad_of(b.iter().zip(&fwd).map(|(bi, &j)| bi - &a[j]));
        let g = quad_of(a.iter().zip(&rev).map(|(aj, &i)| &b[i] - aj));
        arcs.push((f, g, fwd.clone()));
    }

    let combine = |f: &Quad, g: &Quad| -> Option<Quad> {
        match variant {
            Variant::Uni => Some(f.clone()),
            Variant::L1 => Some(quad_add(f, g)),
            Variant::Linf => (f == g).then(|| f.clone()),
        }
    };
    let mut entries = Vec::new();
    let mut push = |t: QuadraticAlgebraic, value: QuadraticAlgebraic, assignment: &Vec<usize>| {
        entries.push(MinimumEntry {
            t: Location::OneD(t),
            value,
            assignment: assignment.clone(),
        })
    };
    for (k, (f, g, asg)) in arcs.iter().enumerate() {
        let lo = k.checked_sub(1).map(|i| &bps[i]);
        let hi = bps.get(k);
        if let Some(q) = combine(f, g) {
            let v = QuadraticAlgebraic::rational(-&q.1 / (&two * &q.0));
            if strictly_between(&v, lo, hi) {
                let val = quad_at(&q, &v);
                push(v, val, asg);
            }
            continue;
        }
        // max of two distinct parabolas
        for (p, o) in [(f, g), (g, f)] {
            let v = QuadraticAlgebraic::rational(-&p.1 / (&two * &p.0));
            if strictly_between(&v, lo, hi) && quad_at(p, &v) > quad_at(o, &v) {
                let val = quad_at(p, &v);
                push(v, val, asg);
            }
        }
        for c in quadratic_roots(&(&f.0 - &g.0), &(&f.1 - &g.1), &(&f.2 - &g.2)) {
            if !strictly_between(&c, lo, hi) {
                continue;
            }
            let (sf, sg) = (quad_slope(f, &c), quad_slope(g, &c));
            let zero = QuadraticAlgebraic::rational(Scalar::zero());
            if sf.clone().min(sg.clone()) <= zero && sf.max(sg) >= zero {
                let val = quad_at(f, &c);
                push(c, val, asg);
            }
        }
    }
    for (k, tau) in bps.iter().enumerate() {
        let t = QuadraticAlgebraic::rational(tau.clone());
        let (fl, gl, _) = &arcs[k];
        let (fr, gr, asg) = &arcs[k + 1];
        let (vf, vg) = (quad_at(fl, &t), quad_at(gl, &t));
        let (value, left, right) = match variant {
            Variant::Uni => (vf, quad_slope(fl, &t), quad_slope(fr, &t)),
            Variant::L1 => (
                quad_at(&quad_add(fl, gl), &t),
                quad_slope(&quad_add(fl, gl), &t),
                quad_slope(&quad_add(fr, gr), &t),
            ),
            Variant::Linf => match vf.cmp(&vg) {
                Ordering::Greater => (vf, quad_slope(fl, &t), quad_slope(fr, &t)),
                Ordering::Less => (vg, quad_slope(gl, &t), quad_slope(gr, &t)),
                Ordering::Equal => (
                    vf,
                    quad_slope(fl, &t).min(quad_slope(gl, &t)),
                    quad_slope(fr, &t).max(quad_slope(gr, &t)),
                ),
            },
        };
        let zero = QuadraticAlgebraic::rational(Scalar::zero());
        if left <= zero && right >= zero {
            push(t, value, asg);
        }
    }
    Ok(MinimaSet::from_entries(entries))
}

struct FloatRow {
    exact: Vec<Point>,
    approx: Vec<(f64, f64)>,
}

fn approx(p: &Point) -> (f64, f64) {
    (p.x.to_f64().unwrap_or(f64::NAN), p.y.to_f64().unwrap_or(f64::NAN))
}

impl FloatRow {
    fn new(exact: Vec<Point>) -> Self {
        let approx = exact.iter().map(approx).collect();
        FloatRow { exact, approx }
    }

    /// Exact set of nearest targets. Floating point only discards targets
    /// that are farther by a margin well above the rounding error.
    fn ties(&self, t: &Point, tf: (f64, f64)) -> Vec<usize> {
        let d: Vec<f64> = self.approx.iter().map(|&(x, y)| (x - tf.0).powi(2) + (y - tf.1).powi(2)).collect();
        let scale = self
            .approx
            .iter()
            .map(|&(x, y)| x.abs().max(y.abs()))
            .fold(tf.0.abs().max(tf.1.abs()), f64::max);
        let best = d.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * (1.0 + scale * scale);
        let finite = tf.0.is_finite() && tf.1.is_finite() && d.iter().all(|x| x.is_finite());
        let near: Vec<usize> = if finite && tol.is_finite() {
            (0..d.len()).filter(|&k| d[k] <= best + tol).collect()
        } else {
            (0..d.len()).collect()
        };
        if near.len() == 1 {
            return near;
        }
        let exact: Vec<Scalar> = near.iter().map(|&k| sq_dist(t, &self.exact[k])).collect();
        let min = exact.iter().min().expect("nonempty").clone();
        near.into_iter().zip(exact).filter(|(_, e)| *e == min).map(|(k, _)| k).collect()
    }
}

/// Nearest target of `t + εd` among the ties at `t`.
fn resolve_towards(row: &FloatRow, ties: &[usize], t: &Point, d: &Point) -> usize {
    *ties
        .iter()
        .min_by(|&&k, &&l| (t - &row.exact[k]).dot(d).cmp(&(t - &row.exact[l]).dot(d)))
        .expect("nonempty ties")
}

/// Every local minimum of the 2D distance (uni or l1), by visiting every cell
/// of the arrangement of all bisector lines of the difference sets.
pub fn enumerate_h2_minima(inst: &Instance, variant: Variant) -> Result<MinimaSet> {
    if variant == Variant::Linf {
        return Err(Error::Validation("the 2D oracle covers uni and l1".into()));
    }
    let mut rows: Vec<Vec<Point>> = inst.b.iter().map(|b| inst.a.iter().map(|a| a - b).collect()).collect();
    if variant == Variant::L1 {
        rows.extend(inst.a.iter().map(|a| inst.b.iter().map(|b| a - b).collect::<Vec<_>>()));
    }
    let mut lines = std::collections::BTreeSet::new();
    for row in &rows {
        for (k, l) in (0..row.len()).tuple_combinations() {
            let (p, q) = (&row[k], &row[l]);
            lines.insert(Line::new(q - p, (q.norm2() - p.norm2()) / int(2)).expect("distinct targets"));
        }
    }
    let lines: Vec<Line> = lines.into_iter().collect();
    if lines.len().saturating_mul(lines.len()) > 10_000_000 {
        return Err(Error::BudgetExceeded(format!("2D oracle limited to L^2 <= 10^7 (L = {})", lines.len())));
    }
    let mut vertices: std::collections::BTreeMap<Point, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, j) in (0..lines.len()).tuple_combinations() {
        if let Some(p) = lines[i].intersection(&lines[j]) {
            let e = vertices.entry(p).or_default();
            for k in [i, j] {
                if !e.contains(&k) {
                    e.push(k);
                }
            }
        }
    }
    // (sample point, direction of an infinitesimal step into the cell)
    let mut probes: Vec<(Point, Point)> = Vec::new();
    let half = |p: &Point| if p.y.is_positive() || (p.y.is_zero() && p.x.is_positive()) { 0 } else { 1 };
    for (v, through) in &vertices {
        let mut dirs: Vec<Point> = through
            .iter()
            .flat_map(|&k| {
                let d = lines[k].direction();
                [-&d, d]
            })
            .collect();
        dirs.sort_by(|a, b| half(a).cmp(&half(b)).then_with(|| Scalar::zero().cmp(&a.cross(b))));
        for w in 0..dirs.len() {
            probes.push((v.clone(), &dirs[w] + &dirs[(w + 1) % dirs.len()]));
        }
    }
    let far = 1 + vertices.keys().chain(rows.iter().flatten()).map(|p| p.x.abs().max(p.y.abs())).max().map_or(0, |s| {
        let c = s.ceil().to_integer();
        i64::try_from(c).unwrap_or(i64::MAX / 8)
    });
    for (dx, dy) in [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)] {
        let d = Point::from_ints(dx, dy);
        probes.push((d.scale(&int(8 * far)), d));
    }
    if vertices.is_empty() {
        // all lines parallel: sample between consecutive offsets along the common normal
        if let Some(first) = lines.first() {
            let n = first.normal.clone();
            let mut offs: Vec<Scalar> = lines.iter().map(|l| l.point_on().dot(&n) / n.norm2()).collect();
            offs.sort();
            let mut ss = vec![&offs[0] - int(1), offs.last().unwrap() + int(1)];
            ss.extend(offs.windows(2).map(|w| (&w[0] + &w[1]) / int(2)));
            probes.extend(ss.into_iter().map(|s| (n.scale(&s), Point::origin())));
        } else {
            probes.push((Point::origin(), Point::origin()));
        }
    }
    use rayon::prelude::*;
    let rows: Vec<FloatRow> = rows.into_iter().map(FloatRow::new).collect();
    let signatures: std::collections::BTreeSet<Vec<usize>> = probes
        .par_iter()
        .map(|(p, d)| {
            let pf = approx(p);
            rows.iter().map(|row| resolve_towards(row, &row.ties(p, pf), p, d)).collect::<Vec<usize>>()
        })
        .collect();
    let entries: Vec<MinimumEntry> = signatures
        .into_par_iter()
        .filter_map(|sig| {
            let chosen: Vec<Point> = rows.iter().zip(&sig).map(|(row, &k)| row.exact[k].clone()).collect();
            let t = Point::mean(&chosen);
            let tf = approx(&t);
            // a tie at the vertex lets an active paraboloid with nonzero gradient descend
            let strict = rows.iter().zip(&sig).all(|(row, &k)| row.ties(&t, tf) == [k]);
            strict.then(|| {
                let value: Scalar = chosen.iter().map(|p| sq_dist(&t, p)).sum();
                MinimumEntry {
                    t: Location::point(&t),
                    value: QuadraticAlgebraic::rational(value),
                    assignment: sig[..inst.m()].to_vec(),
                }
            })
        })
        .collect();
    Ok(MinimaSet::from_entries(entries))
}


#[cfg(test)]
mod tests {
    use super::*;

    fn inst(a: &[(i64, i64)], b: &[(i64, i64)]) -> Instance {
        Instance::new(
            a.iter().map(|&(x, y)| Point::from_ints(x, y)).collect(),
            b.iter().map(|&(x, y)| Point::from_ints(x, y)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn brute_matching_examples() {
        let i = inst(&[(0, 0), (1, 0), (4, 0)], &[(0, 0), (2, 0)]);
        let pi = brute_matching(&i, &Point::origin()).unwrap();
        assert_eq!(pi.assign, vec![0, 1]);
        assert_eq!(pi.cost(&i, &Point::origin()), int(1));
        let j = inst(&[(0, 0), (1, 0), (4, 0)], &[(0, 0), (1, 0)]);
        assert_eq!(brute_matching(&j, &Point::origin()).unwrap().assign, vec![0, 1]);
    }

    #[test]
    fn pm_minima_two_points() {
        let i = inst(&[(0, 0), (4, 0)], &[(0, 0)]);
        let set = enumerate_pm_minima(&i).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.contains(&Location::point(&Point::origin()), &QuadraticAlgebraic::rational(int(0))));
        assert!(set.contains(&Location::point(&Point::from_ints(4, 0)), &QuadraticAlgebraic::rational(int(0))));
    }

    #[test]
    fn line_trace_two_points() {
        let i = inst(&[(0, 0), (4, 0)], &[(0, 0)]);
        let tr = brute_line_trace(&i, &Line::horizontal(int(0))).unwrap();
        assert_eq!(tr.breakpoints, vec![int(2)]);
        assert_eq!(tr.cells.len(), 2);
        assert_eq!(tr.descent, Descent::LocalMinFound);
    }

    #[test]
    fn guard_refuses_large_instances() {
        let a: Vec<(i64, i64)> = (0..10).map(|k| (k, 0)).collect();
        let i = inst(&a, &[(0, 0)]);
        assert!(matches!(brute_matching(&i, &Point::origin()), Err(Error::BudgetExceeded(_))));
    }
}
