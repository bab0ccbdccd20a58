//! Optimal injective assignments of B into A and the cost-plane form of their cost.

use crate::error::{Error, Result};
use crate::numeric::point::{sq_dist, Point};
use crate::numeric::scalar::{big, int, scalar_serde, Scalar};
use num::bigint::BigInt;
use num::traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::ops::{Add, Sub};

/// Two planar point sets with `1 <= |B| <= |A|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(rename = "A")]
    pub a: Vec<Point>,
    #[serde(rename = "B")]
    pub b: Vec<Point>,
}

impl Instance {
    pub fn new(a: Vec<Point>, b: Vec<Point>) -> Result<Self> {
        let inst = Instance { a, b };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() || self.b.is_empty() {
            return Err(Error::Validation("A and B must be nonempty".into()));
        }
        if self.b.len() > self.a.len() {
            return Err(Error::Validation(format!(
                "B has {} points but A only {}; need m <= n",
                self.b.len(),
                self.a.len()
            )));
        }
        for (name, set) in [("A", &self.a), ("B", &self.b)] {
            let distinct: BTreeSet<&Point> = set.iter().collect();
            if distinct.len() != set.len() {
                return Err(Error::Validation(format!("duplicate point in {name}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Random instance with coordinates `p/q`, `|p| <= span`, `1 <= q <= denom`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, span: i64, denom: i64) -> Self {
        assert!(1 <= m && m <= n);
        let mut draw = |k: usize| {
            let mut set = BTreeSet::new();
            let mut out = Vec::new();
            while out.len() < k {
                let p = Point::new(
                    Scalar::new(rng.random_range(-span..=span).into(), rng.random_range(1..=denom).into()),
                    Scalar::new(rng.random_range(-span..=span).into(), rng.random_range(1..=denom).into()),
                );
                if set.insert(p.clone()) {
                    out.push(p);
                }
            }
            out
        };
        let a = draw(n);
        let b = draw(m);
        Instance { a, b }
    }
}

/// Injective map `b_i -> a_{assign[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matching {
    pub assign: Vec<usize>,
    pub matched_set: Vec<usize>,
}

impl Matching {
    pub fn new(assign: Vec<usize>) -> Self {
        let mut matched_set = assign.clone();
        matched_set.sort_unstable();
        debug_assert!(matched_set.windows(2).all(|w| w[0] < w[1]), "assignment not injective");
        Matching { assign, matched_set }
    }

    pub fn is_valid_for(&self, inst: &Instance) -> bool {
        self.assign.len() == inst.m()
            && self.assign.iter().all(|&j| j < inst.n())
            && self.matched_set.windows(2).all(|w| w[0] < w[1])
    }

    /// `Σ ‖b_i + t − a_{π(i)}‖²`.
    pub fn cost(&self, inst: &Instance, t: &Point) -> Scalar {
        self.assign
            .iter()
            .enumerate()
            .map(|(i, &j)| sq_dist(&(&inst.b[i] + t), &inst.a[j]))
            .sum()
    }
}

/// `f(t) = c + <t, d> + m‖t‖²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CostPlane {
    #[serde(with = "scalar_serde")]
    pub c: Scalar,
    pub d: Point,
    pub m: usize,
}

impl CostPlane {
    pub fn cost_at(&self, t: &Point) -> Scalar {
        &self.c + t.dot(&self.d) + int(self.m as i64) * t.norm2()
    }

    /// Unconstrained minimizer `−d / 2m` of the paraboloid.
    pub fn vertex(&self) -> Point {
        self.d.scale(&Scalar::new(BigInt::from(-1), BigInt::from(2 * self.m)))
    }

    /// Gradient `d + 2m t`.
    pub fn gradient(&self, t: &Point) -> Point {
        &self.d + &t.scale(&int(2 * self.m as i64))
    }

    /// Key identifying the affine part.
    pub fn key(&self) -> (Scalar, Point) {
        (self.c.clone(), self.d.clone())
    }
}

pub fn cost_plane(inst: &Instance, pi: &Matching) -> CostPlane {
    let mut c = Scalar::zero();
    let mut d = Point::origin();
    for (i, &j) in pi.assign.iter().enumerate() {
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

pub fn cost_at(plane: &CostPlane, t: &Point) -> Scalar {
    plane.cost_at(t)
}

/// The translation `t₀ + ε·dir` for infinitesimal `ε > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicPoint {
    pub base: Point,
    pub dir: Point,
}

impl SymbolicPoint {
    pub fn new(base: Point, dir: Point) -> Self {
        assert!(!dir.is_zero(), "perturbation direction must be nonzero");
        SymbolicPoint { base, dir }
    }
}

/// Lexicographically ordered vector weight with componentwise arithmetic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Lex(Vec<Scalar>);

impl Add for &Lex {
    type Output = Lex;
    fn add(self, o: &Lex) -> Lex {
        Lex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Lex {
    type Output = Lex;
    fn sub(self, o: &Lex) -> Lex {
        Lex(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

/// Minimum-weight assignment of `rows` rows into `cols >= rows` columns.
/// Returns `assign[row] = col`.
fn hungarian(rows: usize, cols: usize, w: impl Fn(usize, usize) -> Lex) -> Vec<usize> {
    let width = w(0, 0).0.len();
    let zero = Lex(vec![Scalar::zero(); width]);
    let mut u = vec![zero.clone(); rows + 1];
    let mut v = vec![zero.clone(); cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<Lex>> = vec![None; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<Lex> = None;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = &(&w(i0 - 1, j - 1) - &u[i0]) - &v[j];
                if minv[j].as_ref().is_none_or(|mv| cur < *mv) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("set above");
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("a free column exists while rows <= cols");
            for j in 0..=cols {
                if used[j] {
                    u[p[j]] = &u[p[j]] + &delta;
                    v[j] = &v[j] - &delta;
                } else if let Some(mv) = &minv[j] {
                    minv[j] = Some(mv - &delta);
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![usize::MAX; rows];
    for j in 1..=cols {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Weight making the lexicographically smallest assignment array the unique optimum
/// among cost-equal ones.
fn tie_weight(i: usize, j: usize, m: usize, n: usize) -> Scalar {
    big(BigInt::from(j) * num::pow(BigInt::from(n), m - 1 - i))
}

fn solve(inst: &Instance, cols: &[usize], cost: impl Fn(usize, usize) -> Vec<Scalar>) -> Matching {
    let m = inst.m();
    let n = cols.len();
    let assign = hungarian(m, n, |i, k| {
        let mut c = cost(i, cols[k]);
        c.push(tie_weight(i, k, m, n));
        Lex(c)
    });
    Matching::new(assign.into_iter().map(|k| cols[k]).collect())
}

/// An assignment minimizing `Σ ‖b_i + t − a_{π(i)}‖²`, lexicographically smallest among optima.
pub fn optimal_matching(inst: &Instance, t: &Point) -> Matching {
    let cols: Vec<usize> = (0..inst.n()).collect();
    solve(inst, &cols, |i, j| vec![sq_dist(&(&inst.b[i] + t), &inst.a[j])])
}

/// The assignment optimal at `base + ε·dir` for every sufficiently small `ε > 0`.
pub fn optimal_matching_perturbed(inst: &Instance, at: &SymbolicPoint) -> Matching {
    let cols: Vec<usize> = (0..inst.n()).collect();
    solve(inst, &cols, |i, j| {
        let diff = &(&inst.b[i] + &at.base) - &inst.a[j];
        vec![diff.norm2(), int(2) * diff.dot(&at.dir)]
    })
}

/// The optimal perfect matching of B onto the A-indices in `subset` (`|subset| = m`).
/// Its optimality does not depend on the translation.
pub fn optimal_onto_subset(inst: &Instance, subset: &[usize]) -> Matching {
    assert_eq!(subset.len(), inst.m(), "subset must have exactly m elements");
    solve(inst, subset, |i, j| vec![sq_dist(&inst.b[i], &inst.a[j])])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vertex {
    A(usize),
    B(usize),
}

/// A connected component of `π △ σ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingPath {
    pub vertices: Vec<Vertex>,
    pub is_cycle: bool,
    /// Contribution of this component to `d_π − d_σ`.
    pub d_gamma: Point,
    /// Contribution of this component to `c_π − c_σ`.
    #[serde(with = "scalar_serde")]
    pub c_gamma: Scalar,
}

impl AlternatingPath {
    pub fn b_indices(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter_map(|v| match v {
                Vertex::B(i) => Some(*i),
                Vertex::A(_) => None,
            })
            .collect()
    }
}

/// Decomposes `π △ σ` into alternating paths and cycles.
/// Paths start at the A-vertex used only by `π`.
pub fn symmetric_difference_paths(
    inst: &Instance,
    pi: &Matching,
    sigma: &Matching,
) -> Vec<AlternatingPath> {
    let m = pi.assign.len();
    let n = inst.n();
    let differs: Vec<bool> = (0..m).map(|i| pi.assign[i] != sigma.assign[i]).collect();
    let mut pi_inv = vec![None; n];
    let mut sigma_inv = vec![None; n];
    for i in 0..m {
        if differs[i] {
            pi_inv[pi.assign[i]] = Some(i);
            sigma_inv[sigma.assign[i]] = Some(i);
        }
    }
    let mut seen = vec![false; m];
    let mut out = Vec::new();
    let summarize = |bs: &[usize]| {
        let mut d = Point::origin();
        let mut c = Scalar::zero();
        for &i in bs {
            let ap = &inst.a[pi.assign[i]];
            let as_ = &inst.a[sigma.assign[i]];
            d = &d + &(as_ - ap).scale(&int(2));
            c += sq_dist(&inst.b[i], ap) - sq_dist(&inst.b[i], as_);
        }
        (d, c)
    };
    // Paths: start at an A-vertex matched by π but not by σ within the difference.
    for start in 0..n {
        if pi_inv[start].is_none() || sigma_inv[start].is_some() {
            continue;
        }
        let mut vertices = vec![Vertex::A(start)];
        let mut bs = Vec::new();
        let mut cur_a = start;
        while let Some(i) = pi_inv[cur_a] {
            seen[i] = true;
            bs.push(i);
            vertices.push(Vertex::B(i));
            cur_a = sigma.assign[i];
            vertices.push(Vertex::A(cur_a));
        }
        let (d_gamma, c_gamma) = summarize(&bs);
        out.push(AlternatingPath {
            vertices,
            is_cycle: false,
            d_gamma,
            c_gamma,
        });
    }
    for s in 0..m {
        if !differs[s] || seen[s] {
            continue;
        }
        let mut vertices = Vec::new();
        let mut bs = Vec::new();
        let mut i = s;
        loop {
            seen[i] = true;
            bs.push(i);
            vertices.push(Vertex::A(pi.assign[i]));
            vertices.push(Vertex::B(i));
            let next_a = sigma.assign[i];
            match pi_inv[next_a] {
                Some(k) if k != s => i = k,
                _ => break,
            }
        }
        let (d_gamma, c_gamma) = summarize(&bs);
        out.push(AlternatingPath {
            vertices,
            is_cycle: true,
            d_gamma,
            c_gamma,
        });
    }
    out
}

/// Applies `σ`'s choices on the B-vertices of the given components to `π`.
pub fn flip(pi: &Matching, sigma: &Matching, components: &[&AlternatingPath]) -> Matching {
    let mut assign = pi.assign.clone();
    for comp in components {
        for i in comp.b_indices() {
            assign[i] = sigma.assign[i];
        }
    }
    Matching::new(assign)
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
    fn cost_plane_examples() {
        let i1 = inst(&[(1, 2)], &[(0, 0)]);
        let p = cost_plane(&i1, &Matching::new(vec![0]));
        assert_eq!(p.c, int(5));
        assert_eq!(p.d, Point::from_ints(-2, -4));
        assert_eq!(p.cost_at(&Point::from_ints(1, 2)), int(0));
        let i2 = inst(&[(0, 0), (1, 0)], &[(0, 0), (2, 0)]);
        let p = cost_plane(&i2, &Matching::new(vec![0, 1]));
        assert_eq!(p.c, int(1));
        assert_eq!(p.d, Point::from_ints(2, 0));
    }

    #[test]
    fn optimal_matching_examples() {
        let i1 = inst(&[(0, 0), (1, 0), (4, 0)], &[(0, 0), (2, 0)]);
        let pi = optimal_matching(&i1, &Point::origin());
        assert_eq!(pi.assign, vec![0, 1]);
        assert_eq!(pi.cost(&i1, &Point::origin()), int(1));
        let i2 = inst(&[(0, 0), (4, 0)], &[(0, 0)]);
        assert_eq!(optimal_matching(&i2, &Point::from_ints(3, 0)).assign, vec![1]);
    }

    #[test]
    fn perturbed_examples() {
        let i2 = inst(&[(0, 0), (4, 0)], &[(0, 0)]);
        let right = SymbolicPoint::new(Point::from_ints(2, 0), Point::from_ints(1, 0));
        let left = SymbolicPoint::new(Point::from_ints(2, 0), Point::from_ints(-1, 0));
        assert_eq!(optimal_matching_perturbed(&i2, &right).assign, vec![1]);
        assert_eq!(optimal_matching_perturbed(&i2, &left).assign, vec![0]);
        // tie at the bisector resolves to the lexicographically smaller array
        assert_eq!(optimal_matching(&i2, &Point::from_ints(2, 0)).assign, vec![0]);
    }

    #[test]
    fn lexicographic_tie_break() {
        let i = inst(&[(-1, 0), (1, 0)], &[(0, 1), (0, -1)]);
        let t = Point::origin();
        let pi = optimal_matching(&i, &t);
        assert_eq!(pi.assign, vec![0, 1]);
        assert_eq!(Matching::new(vec![1, 0]).cost(&i, &t), pi.cost(&i, &t));
        let j = inst(&[(1, 0), (-1, 0)], &[(0, 1), (0, -1)]);
        assert_eq!(optimal_matching(&j, &t).assign, vec![0, 1]);
    }

    #[test]
    fn alternating_paths() {
        let i = inst(&[(0, 0), (4, 0)], &[(0, 0)]);
        let pi = Matching::new(vec![0]);
        let sigma = Matching::new(vec![1]);
        assert!(symmetric_difference_paths(&i, &pi, &pi).is_empty());
        let comps = symmetric_difference_paths(&i, &pi, &sigma);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].vertices, vec![Vertex::A(0), Vertex::B(0), Vertex::A(1)]);
        assert!(!comps[0].is_cycle);
        let diff = &cost_plane(&i, &pi).d - &cost_plane(&i, &sigma).d;
        assert_eq!(comps[0].d_gamma, diff);

        let i2 = inst(&[(0, 0), (3, 1)], &[(0, 0), (1, 1)]);
        let comps = symmetric_difference_paths(&i2, &Matching::new(vec![0, 1]), &Matching::new(vec![1, 0]));
        assert_eq!(comps.len(), 1);
        assert!(comps[0].is_cycle);
        assert!(comps[0].d_gamma.is_zero());
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(Instance::new(vec![Point::origin()], vec![Point::origin(), Point::from_ints(1, 1)]).is_err());
        assert!(Instance::new(vec![Point::origin(), Point::origin()], vec![Point::origin()]).is_err());
        assert!(Instance::new(vec![], vec![]).is_err());
    }
}
