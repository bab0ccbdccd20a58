//! The partial-matching subdivision of translation space: regions, line tracing,
//! slab-shrinking local minimum search, full construction and global minimum.

use crate::assignment::{
    cost_plane, optimal_matching, optimal_matching_perturbed, optimal_onto_subset, CostPlane,
    Instance, Matching, SymbolicPoint,
};
use crate::error::{Error, Result};
use crate::numeric::geometry::{halfplane_intersection, ConvexPolygon, Halfplane, Line, VerticalSlab};
use crate::numeric::point::Point;
use crate::numeric::scalar::{int, opt_scalar_serde, scalar_serde, Scalar};
use num::traits::Signed;
use serde::{Deserialize, Serialize};
use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, HashMap, VecDeque};

/// Slope of the fixed symbolic perturbation used for degenerate start points.
pub fn generic_direction() -> Point {
    Point::new(int(1), Scalar::new(1.into(), num::pow(num::BigInt::from(2), 32)))
}

/// Equality line between a region's plane and a single-swap neighbor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialBisector {
    /// A-index leaving the matched set.
    pub i: usize,
    /// A-index entering the matched set.
    pub j: usize,
    pub line: Line,
    /// Side on which the region's matching is at least as cheap.
    pub halfplane: Halfplane,
    pub neighbor: Matching,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionEdge {
    pub line: Line,
    pub neighbor: Matching,
    pub neighbor_plane: CostPlane,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub polygon: ConvexPolygon,
    pub matching: Matching,
    pub plane: CostPlane,
    /// Parallel to `polygon.edges`.
    pub edges: Vec<RegionEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionVertex {
    pub point: Point,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subdivision {
    pub regions: Vec<Region>,
    pub vertices: Vec<SubdivisionVertex>,
    /// Pairs of region indices sharing an edge, `i < j`.
    pub adjacency: Vec<(usize, usize)>,
    pub edge_count: usize,
    pub unbounded_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Descent {
    Left,
    Right,
    LocalMinFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCell {
    #[serde(with = "opt_scalar_serde")]
    pub start: Option<Scalar>,
    #[serde(with = "opt_scalar_serde")]
    pub end: Option<Scalar>,
    pub matching: Matching,
    pub plane: CostPlane,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineMin {
    #[serde(with = "scalar_serde")]
    pub param: Scalar,
    pub point: Point,
    #[serde(with = "scalar_serde")]
    pub value: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineTrace {
    pub line: Line,
    pub cells: Vec<TraceCell>,
    #[serde(with = "crate::numeric::scalar::vec_scalar_serde")]
    pub breakpoints: Vec<Scalar>,
    pub line_min: LineMin,
    pub descent: Descent,
    /// Set when the line minimum value is attained at more than one parameter.
    pub degenerate: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMinStats {
    pub line_calls: usize,
    pub regions_stacked: usize,
    pub early_exit: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMinResult {
    pub t_star: Point,
    #[serde(with = "scalar_serde")]
    pub value: Scalar,
    pub matching: Matching,
    pub plane: CostPlane,
    /// Gradient of the matching's cost at `t_star`; zero for a valid result.
    pub certificate: Point,
    pub stats: LocalMinStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub max_regions: usize,
    pub max_m: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_regions: 1_000_000,
            max_m: 8,
        }
    }
}

/// Coefficients `(α, β, γ)` of `F(base + s·u) = α s² + β s + γ` for one plane.
pub fn plane_along(plane: &CostPlane, base: &Point, u: &Point) -> (Scalar, Scalar, Scalar) {
    let m = int(plane.m as i64);
    let alpha = &m * u.norm2();
    let beta = u.dot(&plane.d) + int(2) * &m * base.dot(u);
    let gamma = &plane.c + base.dot(&plane.d) + &m * base.norm2();
    (alpha, beta, gamma)
}

/// Holds an instance and caches the translation-independent optimal matchings
/// onto each candidate subset of A.
pub struct PmEngine<'a> {
    inst: &'a Instance,
    cache: RefCell<HashMap<Vec<usize>, (Matching, CostPlane)>>,
    line_calls: Cell<usize>,
}

impl<'a> PmEngine<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        PmEngine {
            inst,
            cache: RefCell::new(HashMap::new()),
            line_calls: Cell::new(0),
        }
    }

    fn subset_optimum(&self, subset: &[usize]) -> (Matching, CostPlane) {
        if let Some(hit) = self.cache.borrow().get(subset) {
            return hit.clone();
        }
        let pi = optimal_onto_subset(self.inst, subset);
        let plane = cost_plane(self.inst, &pi);
        self.cache
            .borrow_mut()
            .insert(subset.to_vec(), (pi.clone(), plane.clone()));
        (pi, plane)
    }

    pub fn potential_bisectors(&self, pi: &Matching) -> Vec<PotentialBisector> {
        let plane = cost_plane(self.inst, pi);
        let set = &pi.matched_set;
        let mut out = Vec::new();
        for &i in set {
            for j in 0..self.inst.n() {
                if set.binary_search(&j).is_ok() {
                    continue;
                }
                let mut sub: Vec<usize> = set.iter().copied().filter(|&k| k != i).collect();
                sub.push(j);
                sub.sort_unstable();
                let (sigma, sp) = self.subset_optimum(&sub);
                if sp.key() == plane.key() {
                    continue;
                }
                let normal = &plane.d - &sp.d;
                let offset = &sp.c - &plane.c;
                let (Some(line), Some(halfplane)) = (
                    Line::new(normal.clone(), offset.clone()),
                    Halfplane::le(normal, offset),
                ) else {
                    continue;
                };
                out.push(PotentialBisector {
                    i,
                    j,
                    line,
                    halfplane,
                    neighbor: sigma,
                });
            }
        }
        out
    }

    /// Region of the matching `pi`, given a point in its closure.
    pub fn region_from(&self, pi: &Matching, witness: &Point) -> Result<Region> {
        let bis = self.potential_bisectors(pi);
        let hs: Vec<Halfplane> = bis.iter().map(|b| b.halfplane.clone()).collect();
        let polygon = halfplane_intersection(&hs, witness)?;
        let mut edges = Vec::with_capacity(polygon.edges.len());
        for e in &polygon.edges {
            let (n, _) = e.halfplane.outward();
            let neighbor = optimal_matching_perturbed(self.inst, &SymbolicPoint::new(e.interior_point(), n));
            let neighbor_plane = cost_plane(self.inst, &neighbor);
            edges.push(RegionEdge {
                line: e.halfplane.boundary.clone(),
                neighbor,
                neighbor_plane,
            });
        }
        Ok(Region {
            polygon,
            matching: pi.clone(),
            plane: cost_plane(self.inst, pi),
            edges,
        })
    }

    pub fn region_at(&self, t0: &Point) -> Result<Region> {
        let pi = optimal_matching(self.inst, t0);
        if self
            .potential_bisectors(&pi)
            .iter()
            .any(|b| b.line.contains(t0))
        {
            return Err(Error::OnBoundary);
        }
        self.region_from(&pi, t0)
    }

    fn region_of_symbolic(&self, at: &SymbolicPoint) -> Result<Region> {
        let pi = optimal_matching_perturbed(self.inst, at);
        self.region_from(&pi, &at.base)
    }

    /// One-sided directional derivative of F at `t` along `w`.
    pub fn directional_derivative(&self, t: &Point, w: &Point) -> Scalar {
        let pi = optimal_matching_perturbed(self.inst, &SymbolicPoint::new(t.clone(), w.clone()));
        cost_plane(self.inst, &pi).gradient(t).dot(w)
    }

    /// Walks the line from `s0` in direction `sign·u`, returning cells in walk order.
    fn walk(&self, base: &Point, u: &Point, s0: &Scalar, forward: bool) -> Result<Vec<TraceCell>> {
        let w = if forward { u.clone() } else { -u };
        let at = |s: &Scalar| base + &u.scale(s);
        let mut cells = Vec::new();
        let mut s = s0.clone();
        let limit = self.inst.m() * (self.inst.n() - self.inst.m()) + 2;
        loop {
            let pi = optimal_matching_perturbed(self.inst, &SymbolicPoint::new(at(&s), w.clone()));
            let plane = cost_plane(self.inst, &pi);
            let mut exit: Option<Scalar> = None;
            for b in self.potential_bisectors(&pi) {
                let (n, c) = b.halfplane.outward();
                let k = n.dot(&w);
                if k.is_positive() {
                    // distance along w to the boundary
                    let v = (c - n.dot(&at(&s))) / k;
                    if exit.as_ref().is_none_or(|e| v < *e) {
                        exit = Some(v);
                    }
                }
            }
            if let Some(e) = &exit {
                if !e.is_positive() {
                    return Err(Error::Invariant("zero-length cell while tracing".into()));
                }
            }
            let next = exit.as_ref().map(|e| if forward { &s + e } else { &s - e });
            let (start, end) = if forward {
                (Some(s.clone()), next.clone())
            } else {
                (next.clone(), Some(s.clone()))
            };
            cells.push(TraceCell {
                start,
                end,
                matching: pi,
                plane,
            });
            match next {
                Some(n) => s = n,
                None => break,
            }
            if cells.len() > limit {
                return Err(Error::Invariant("line trace exceeded the cell bound".into()));
            }
        }
        Ok(cells)
    }

    pub fn trace_line(&self, line: &Line) -> Result<LineTrace> {
        self.line_calls.set(self.line_calls.get() + 1);
        let (base, u) = line.param_frame();
        let target = centroid_difference(self.inst);
        let s0 = line.param_of(&line.project(&target));
        let right = self.walk(&base, &u, &s0, true)?;
        let left = self.walk(&base, &u, &s0, false)?;
        let mut cells: Vec<TraceCell> = left.into_iter().rev().collect();
        for c in right {
            let last = cells.last_mut().expect("walk yields at least one cell");
            if last.plane.key() == c.plane.key() && last.end == c.start {
                last.end = c.end;
            } else {
                cells.push(c);
            }
        }
        let breakpoints: Vec<Scalar> = cells.iter().filter_map(|c| c.end.clone()).collect();
        let (line_min, degenerate) = line_minimum(&cells, &base, &u);
        let normal = line.normal.clone();
        let t = &line_min.point;
        let descent = if self.directional_derivative(t, &-&normal).is_negative() {
            Descent::Left
        } else if self.directional_derivative(t, &normal).is_negative() {
            Descent::Right
        } else {
            Descent::LocalMinFound
        };
        Ok(LineTrace {
            line: line.clone(),
            cells,
            breakpoints,
            line_min,
            descent,
            degenerate,
        })
    }

    fn finish(&self, t: &Point, stats: LocalMinStats) -> Result<LocalMinResult> {
        let pi = optimal_matching(self.inst, t);
        let plane = cost_plane(self.inst, &pi);
        let certificate = plane.gradient(t);
        if !certificate.is_zero() {
            return Err(Error::Invariant("local minimum without zero gradient".into()));
        }
        Ok(LocalMinResult {
            t_star: t.clone(),
            value: plane.cost_at(t),
            matching: pi,
            plane,
            certificate,
            stats,
        })
    }

    /// Shrinks `slab` by binary search over the candidate abscissas with vertical traces.
    /// Returns `Some(point)` when a trace certifies a local minimum.
    fn shrink(&self, slab: &mut VerticalSlab, xs: &[Scalar]) -> Result<Option<Point>> {
        let mut xs: Vec<Scalar> = xs.iter().filter(|x| slab.contains_x(x)).cloned().collect();
        xs.sort();
        xs.dedup();
        let mut lo: isize = -1;
        let mut hi: isize = xs.len() as isize;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let tr = self.trace_line(&Line::vertical(xs[mid as usize].clone()))?;
            match tr.descent {
                Descent::LocalMinFound => return Ok(Some(tr.line_min.point)),
                Descent::Left => hi = mid,
                Descent::Right => lo = mid,
            }
        }
        if lo >= 0 {
            slab.left = Some(xs[lo as usize].clone());
        }
        if (hi as usize) < xs.len() {
            slab.right = Some(xs[hi as usize].clone());
        }
        Ok(None)
    }

    pub fn local_minimum(&self) -> Result<LocalMinResult> {
        self.line_calls.set(0);
        let mut stats = LocalMinStats::default();
        let y0 = centroid_difference(self.inst).y;
        let lambda = Line::horizontal(y0.clone());
        let tr = self.trace_line(&lambda)?;
        let mut slab = VerticalSlab::unbounded();
        let found = self.shrink(&mut slab, &tr.breakpoints)?;
        if let Some(p) = found {
            stats.early_exit = true;
            stats.line_calls = self.line_calls.get();
            return self.finish(&p, stats);
        }
        let mut stacked: Vec<Region> = Vec::new();
        for up in [true, false] {
            let dir = if up { Point::from_ints(0, 1) } else { Point::from_ints(0, -1) };
            let mut at = Point::new(slab.interior_x(), y0.clone());
            loop {
                let region = self.region_of_symbolic(&SymbolicPoint::new(at.clone(), dir.clone()))?;
                let xs: Vec<Scalar> = region.polygon.vertices.iter().map(|v| v.x.clone()).collect();
                if let Some(p) = self.shrink(&mut slab, &xs)? {
                    stats.early_exit = true;
                    stats.line_calls = self.line_calls.get();
                    stats.regions_stacked = stacked.len();
                    return self.finish(&p, stats);
                }
                let x = slab.interior_x();
                let ext = region
                    .polygon
                    .vertical_extent(&x)
                    .ok_or_else(|| Error::Invariant("stacked region misses the slab".into()))?;
                let next = if up { ext.1.clone() } else { ext.0.clone() };
                stacked.push(region);
                match next {
                    Some(y) => at = Point::new(x, y),
                    None => break,
                }
            }
        }
        stats.regions_stacked = stacked.len();
        stats.line_calls = self.line_calls.get();
        for r in &stacked {
            let v = r.plane.vertex();
            if slab.contains_x(&v.x) && r.polygon.contains_strictly(&v) {
                return self.finish(&v, stats);
            }
        }
        Err(Error::Invariant("final slab scan found no local minimum".into()))
    }

    pub fn build(&self, opts: BuildOptions) -> Result<Subdivision> {
        if self.inst.m() > opts.max_m {
            return Err(Error::BudgetExceeded(format!(
                "m = {} exceeds the subdivision guard of {}",
                self.inst.m(),
                opts.max_m
            )));
        }
        let start = SymbolicPoint::new(centroid_difference(self.inst), generic_direction());
        let first = self.region_of_symbolic(&start)?;
        let mut index: HashMap<(Scalar, Point), usize> = HashMap::new();
        index.insert(first.plane.key(), 0);
        let mut regions = vec![first];
        let mut queue = VecDeque::from([0usize]);
        while let Some(r) = queue.pop_front() {
            let pending: Vec<(Matching, CostPlane, Point)> = regions[r]
                .edges
                .iter()
                .zip(&regions[r].polygon.edges)
                .map(|(e, pe)| (e.neighbor.clone(), e.neighbor_plane.clone(), pe.interior_point()))
                .collect();
            for (nb, plane, witness) in pending {
                if index.contains_key(&plane.key()) {
                    continue;
                }
                if regions.len() >= opts.max_regions {
                    return Err(Error::BudgetExceeded(format!(
                        "more than {} regions",
                        opts.max_regions
                    )));
                }
                let region = self.region_from(&nb, &witness)?;
                index.insert(plane.key(), regions.len());
                queue.push_back(regions.len());
                regions.push(region);
            }
        }
        let mut adjacency = Vec::new();
        for (i, r) in regions.iter().enumerate() {
            for e in &r.edges {
                let j = *index
                    .get(&e.neighbor_plane.key())
                    .ok_or_else(|| Error::Invariant("edge neighbor not discovered".into()))?;
                if i < j {
                    adjacency.push((i, j));
                }
            }
        }
        adjacency.sort_unstable();
        let edge_count = adjacency.len();
        adjacency.dedup();
        let mut degree: BTreeMap<Point, usize> = BTreeMap::new();
        for r in &regions {
            for v in &r.polygon.vertices {
                *degree.entry(v.clone()).or_insert(0) += 1;
            }
        }
        let vertices = degree
            .into_iter()
            .map(|(point, degree)| SubdivisionVertex { point, degree })
            .collect();
        let unbounded_count = regions.iter().filter(|r| !r.polygon.is_bounded()).count();
        Ok(Subdivision {
            regions,
            vertices,
            adjacency,
            edge_count,
            unbounded_count,
        })
    }
}

/// `centroid(A) − centroid(B)`.
pub fn centroid_difference(inst: &Instance) -> Point {
    &Point::mean(&inst.a) - &Point::mean(&inst.b)
}

/// Exact minimum of the traced function over all cells.
fn line_minimum(cells: &[TraceCell], base: &Point, u: &Point) -> (LineMin, bool) {
    let mut best: Option<(Scalar, Scalar)> = None;
    let mut degenerate = false;
    for c in cells {
        let (a, b, g) = plane_along(&c.plane, base, u);
        let mut s = -&b / (int(2) * &a);
        if let Some(lo) = &c.start {
            if s < *lo {
                s = lo.clone();
            }
        }
        if let Some(hi) = &c.end {
            if s > *hi {
                s = hi.clone();
            }
        }
        let v = &a * &s * &s + &b * &s + &g;
        match &best {
            None => best = Some((v, s)),
            Some((bv, bs)) => {
                if v < *bv {
                    best = Some((v, s));
                    degenerate = false;
                } else if v == *bv && s != *bs {
                    degenerate = true;
                    if s < *bs {
                        best = Some((v, s));
                    }
                }
            }
        }
    }
    let (value, param) = best.expect("at least one cell");
    let point = base + &u.scale(&param);
    (LineMin { param, point, value }, degenerate)
}

pub fn potential_bisectors(inst: &Instance, region_matching: &Matching, _t0: &Point) -> Vec<PotentialBisector> {
    PmEngine::new(inst).potential_bisectors(region_matching)
}

pub fn region_at(inst: &Instance, t0: &Point) -> Result<Region> {
    PmEngine::new(inst).region_at(t0)
}

pub fn trace_line(inst: &Instance, line: &Line) -> Result<LineTrace> {
    PmEngine::new(inst).trace_line(line)
}

pub fn local_minimum_pm(inst: &Instance) -> Result<LocalMinResult> {
    PmEngine::new(inst).local_minimum()
}

pub fn build_subdivision(inst: &Instance) -> Result<Subdivision> {
    PmEngine::new(inst).build(BuildOptions::default())
}

pub fn build_subdivision_with(inst: &Instance, opts: BuildOptions) -> Result<Subdivision> {
    PmEngine::new(inst).build(opts)
}

/// Minimizes F over every region of a built subdivision.
pub fn global_minimum_from(sub: &Subdivision) -> Result<LocalMinResult> {
    let mut best: Option<(Scalar, Point, usize)> = None;
    for (k, r) in sub.regions.iter().enumerate() {
        let p = r.polygon.closest_point(&r.plane.vertex());
        let v = r.plane.cost_at(&p);
        let better = match &best {
            None => true,
            Some((bv, bp, _)) => v < *bv || (v == *bv && p < *bp),
        };
        if better {
            best = Some((v, p, k));
        }
    }
    let (value, t_star, k) = best.ok_or_else(|| Error::Invariant("empty subdivision".into()))?;
    let r = &sub.regions[k];
    let certificate = r.plane.gradient(&t_star);
    if !certificate.is_zero() {
        return Err(Error::Invariant("global minimum on a region boundary".into()));
    }
    Ok(LocalMinResult {
        t_star,
        value,
        matching: r.matching.clone(),
        plane: r.plane.clone(),
        certificate,
        stats: LocalMinStats::default(),
    })
}

pub fn global_minimum_pm(inst: &Instance) -> Result<LocalMinResult> {
    global_minimum_pm_with(inst, BuildOptions::default())
}

pub fn global_minimum_pm_with(inst: &Instance, opts: BuildOptions) -> Result<LocalMinResult> {
    let sub = build_subdivision_with(inst, opts)?;
    let mut res = global_minimum_from(&sub)?;
    // Report the lexicographically smallest optimal matching at the minimizer.
    let pi = optimal_matching(inst, &res.t_star);
    res.plane = cost_plane(inst, &pi);
    res.matching = pi;
    Ok(res)
}

/// Value of the envelope `F(t)`.
pub fn pm_value(inst: &Instance, t: &Point) -> Scalar {
    optimal_matching(inst, t).cost(inst, t)
}
