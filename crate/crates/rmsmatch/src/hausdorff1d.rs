//! Hausdorff RMS distance on the real line: step functions, one-sided
//! derivatives, and the slab-shrinking local-minimum search.

use crate::error::{Error, Result};
use crate::numeric::algebraic::{quadratic_roots, QuadraticAlgebraic};
use crate::numeric::scalar::{int, opt_scalar_serde, scalar_serde, vec_scalar_serde, Scalar};
use num::traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Uni,
    L1,
    Linf,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uni" => Ok(Variant::Uni),
            "l1" => Ok(Variant::L1),
            "linf" => Ok(Variant::Linf),
            other => Err(Error::Parse(format!("unknown variant `{other}` (expected uni, l1 or linf)"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Uni => "uni",
            Variant::L1 => "l1",
            Variant::Linf => "linf",
        })
    }
}

/// Nearest-site map of a sorted set on the line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFunction {
    #[serde(with = "vec_scalar_serde")]
    pub sites: Vec<Scalar>,
    #[serde(with = "vec_scalar_serde")]
    pub breakpoints: Vec<Scalar>,
}

impl StepFunction {
    /// Index of the nearest site to `x`, ties to the larger site.
    pub fn index(&self, x: &Scalar) -> usize {
        self.breakpoints.partition_point(|mu| mu <= x)
    }

    /// Index of the nearest site just left of `x`.
    pub fn index_left(&self, x: &Scalar) -> usize {
        self.breakpoints.partition_point(|mu| mu < x)
    }

    pub fn evaluate(&self, x: &Scalar) -> &Scalar {
        &self.sites[self.index(x)]
    }

    pub fn evaluate_left(&self, x: &Scalar) -> &Scalar {
        &self.sites[self.index_left(x)]
    }
}

fn sorted_sites(xs: &[Scalar], name: &str) -> Result<Vec<Scalar>> {
    if xs.is_empty() {
        return Err(Error::Validation(format!("{name} must be nonempty")));
    }
    let mut v = xs.to_vec();
    v.sort();
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Validation(format!("{name} contains duplicate points")));
    }
    Ok(v)
}

pub fn step_function(a: &[Scalar]) -> Result<StepFunction> {
    let sites = sorted_sites(a, "A")?;
    let breakpoints = sites.windows(2).map(|w| (&w[0] + &w[1]) / int(2)).collect();
    Ok(StepFunction { sites, breakpoints })
}

/// `a2 t² + a1 t + a0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadratic {
    #[serde(with = "scalar_serde")]
    pub a2: Scalar,
    #[serde(with = "scalar_serde")]
    pub a1: Scalar,
    #[serde(with = "scalar_serde")]
    pub a0: Scalar,
}

impl Quadratic {
    pub fn eval(&self, t: &Scalar) -> Scalar {
        (&self.a2 * t + &self.a1) * t + &self.a0
    }

    pub fn derivative(&self, t: &Scalar) -> Scalar {
        int(2) * &self.a2 * t + &self.a1
    }

    pub fn eval_alg(&self, t: &QuadraticAlgebraic) -> QuadraticAlgebraic {
        t.eval_quadratic(&self.a2, &self.a1, &self.a0)
    }

    pub fn derivative_alg(&self, t: &QuadraticAlgebraic) -> QuadraticAlgebraic {
        t.scale(&(int(2) * &self.a2)).add_rational(&self.a1)
    }

    /// Minimizer, assuming `a2 > 0`.
    pub fn vertex(&self) -> Scalar {
        -&self.a1 / (int(2) * &self.a2)
    }

    pub fn add(&self, o: &Quadratic) -> Quadratic {
        Quadratic {
            a2: &self.a2 + &o.a2,
            a1: &self.a1 + &o.a1,
            a0: &self.a0 + &o.a0,
        }
    }

    pub fn sub(&self, o: &Quadratic) -> Quadratic {
        Quadratic {
            a2: &self.a2 - &o.a2,
            a1: &self.a1 - &o.a1,
            a0: &self.a0 - &o.a0,
        }
    }

    /// `Σ (t + off)²` over the offsets.
    fn sum_of_squares(offsets: impl Iterator<Item = Scalar>) -> Quadratic {
        let mut q = Quadratic {
            a2: Scalar::zero(),
            a1: Scalar::zero(),
            a0: Scalar::zero(),
        };
        for off in offsets {
            q.a2 += Scalar::one();
            q.a1 += int(2) * &off;
            q.a0 += &off * &off;
        }
        q
    }
}

/// One parabolic arc of the distance function; `None` bounds are infinite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece1D {
    #[serde(with = "opt_scalar_serde")]
    pub lo: Option<Scalar>,
    #[serde(with = "opt_scalar_serde")]
    pub hi: Option<Scalar>,
    pub quad: Quadratic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMin1D {
    pub t_star: QuadraticAlgebraic,
    pub value: QuadraticAlgebraic,
    pub variant: Variant,
    pub iteration_count: usize,
    /// The search interval after each shrink, `None` meaning unbounded.
    pub intervals: Vec<Interval>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "opt_scalar_serde")]
    pub lo: Option<Scalar>,
    #[serde(with = "opt_scalar_serde")]
    pub hi: Option<Scalar>,
}

impl Interval {
    fn contains_alg(&self, x: &QuadraticAlgebraic) -> bool {
        self.lo
            .as_ref()
            .is_none_or(|l| x.cmp_exact(&QuadraticAlgebraic::rational(l.clone())) == Ordering::Greater)
            && self
                .hi
                .as_ref()
                .is_none_or(|h| x.cmp_exact(&QuadraticAlgebraic::rational(h.clone())) == Ordering::Less)
    }

    fn sample(&self) -> Scalar {
        match (&self.lo, &self.hi) {
            (Some(l), Some(h)) => (l + h) / int(2),
            (Some(l), None) => l + Scalar::one(),
            (None, Some(h)) => h - Scalar::one(),
            (None, None) => Scalar::zero(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct H1Options {
    /// Weighted median of per-list medians; `false` runs the plain median search.
    pub weighted_median: bool,
}

impl Default for H1Options {
    fn default() -> Self {
        H1Options { weighted_median: true }
    }
}

/// Value and one-sided derivatives at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneSided {
    pub value: Scalar,
    pub left: Scalar,
    pub right: Scalar,
}

enum Decision {
    Left,
    Right,
    Here(Scalar),
}

struct Engine {
    a: StepFunction,
    b: StepFunction,
    variant: Variant,
}

impl Engine {
    fn new(a: &[Scalar], b: &[Scalar], variant: Variant) -> Result<Self> {
        let a = step_function(a)?;
        let b = step_function(b).map_err(|e| match e {
            Error::Validation(msg) => Error::Validation(msg.replacen('A', "B", 1)),
            other => other,
        })?;
        Ok(Engine { a, b, variant })
    }

    fn n(&self) -> usize {
        self.a.sites.len()
    }

    fn m(&self) -> usize {
        self.b.sites.len()
    }

    /// `Σ_b (b + t − N_A(b + t))²`.
    fn forward(&self, t: &Scalar) -> OneSided {
        let mut out = OneSided {
            value: Scalar::zero(),
            left: Scalar::zero(),
            right: Scalar::zero(),
        };
        for b in &self.b.sites {
            let q = b + t;
            let dr = &q - &self.a.sites[self.a.index(&q)];
            let dl = &q - &self.a.sites[self.a.index_left(&q)];
            out.value += &dr * &dr;
            out.left += int(2) * dl;
            out.right += int(2) * dr;
        }
        out
    }

    /// `Σ_a (a − t − N_B(a − t))²`; moving `t` right moves `a − t` left.
    fn reverse(&self, t: &Scalar) -> OneSided {
        let mut out = OneSided {
            value: Scalar::zero(),
            left: Scalar::zero(),
            right: Scalar::zero(),
        };
        for a in &self.a.sites {
            let s = a - t;
            let d_at = &s - &self.b.sites[self.b.index(&s)];
            let d_below = &s - &self.b.sites[self.b.index_left(&s)];
            out.value += &d_at * &d_at;
            out.left -= int(2) * d_at;
            out.right -= int(2) * d_below;
        }
        out
    }

    fn eval(&self, t: &Scalar) -> OneSided {
        let f = self.forward(t);
        if self.variant == Variant::Uni {
            return f;
        }
        let g = self.reverse(t);
        match self.variant {
            Variant::L1 => OneSided {
                value: f.value + g.value,
                left: f.left + g.left,
                right: f.right + g.right,
            },
            _ => match f.value.cmp(&g.value) {
                Ordering::Greater => f,
                Ordering::Less => g,
                Ordering::Equal => OneSided {
                    value: f.value,
                    left: f.left.min(g.left),
                    right: f.right.max(g.right),
                },
            },
        }
    }

    fn decide(&self, xi: &Scalar) -> Decision {
        let e = self.eval(xi);
        if e.left.is_positive() {
            Decision::Left
        } else if e.right.is_negative() {
            Decision::Right
        } else {
            Decision::Here(e.value)
        }
    }

    /// Sorted breakpoint lists: one per `b` for the forward term, one per `a` for the reverse.
    fn lists(&self) -> Vec<Vec<Scalar>> {
        let mut lists: Vec<Vec<Scalar>> = self
            .b
            .sites
            .iter()
            .map(|b| self.a.breakpoints.iter().map(|mu| mu - b).collect())
            .collect();
        if self.variant != Variant::Uni {
            lists.extend(
                self.a
                    .sites
                    .iter()
                    .map(|a| self.b.breakpoints.iter().rev().map(|nu| a - nu).collect()),
            );
        }
        lists.retain(|l| !l.is_empty());
        lists
    }

    /// Forward and reverse arcs through `t`, which must not be a breakpoint.
    fn arcs_at(&self, t: &Scalar) -> (Quadratic, Quadratic) {
        let f = Quadratic::sum_of_squares(self.b.sites.iter().map(|b| b - self.a.evaluate(&(b + t))));
        let g = Quadratic::sum_of_squares(self.a.sites.iter().map(|a| self.b.evaluate(&(a - t)) - a));
        (f, g)
    }

    fn arc_at(&self, t: &Scalar) -> Quadratic {
        let (f, g) = self.arcs_at(t);
        match self.variant {
            Variant::Uni => f,
            _ => f.add(&g),
        }
    }

    /// Minimum of the distance on an interval free of breakpoints whose ends
    /// certify a local minimum inside.
    fn finish(&self, iv: &Interval) -> Result<(QuadraticAlgebraic, QuadraticAlgebraic)> {
        let (f, g) = self.arcs_at(&iv.sample());
        let mut cands: Vec<(QuadraticAlgebraic, QuadraticAlgebraic)> = Vec::new();
        match self.variant {
            Variant::Uni | Variant::L1 => {
                let q = if self.variant == Variant::Uni { f } else { f.add(&g) };
                let v = q.vertex();
                cands.push((QuadraticAlgebraic::rational(v.clone()), QuadraticAlgebraic::rational(q.eval(&v))));
            }
            Variant::Linf => {
                for (p, o) in [(&f, &g), (&g, &f)] {
                    let v = p.vertex();
                    if p.eval(&v) >= o.eval(&v) {
                        cands.push((QuadraticAlgebraic::rational(v.clone()), QuadraticAlgebraic::rational(p.eval(&v))));
                    }
                }
                let d = f.sub(&g);
                for c in quadratic_roots(&d.a2, &d.a1, &d.a0) {
                    let val = f.eval_alg(&c);
                    cands.push((c, val));
                }
            }
        }
        cands
            .into_iter()
            .filter(|(t, _)| iv.contains_alg(t))
            .min_by(|x, y| x.1.cmp(&y.1).then_with(|| x.0.cmp(&y.0)))
            .ok_or_else(|| Error::Invariant("no minimum inside the final interval".into()))
    }
}

/// Value and one-sided derivatives of the chosen distance at `t`.
pub fn rms1d(a: &[Scalar], b: &[Scalar], t: &Scalar, variant: Variant) -> Result<OneSided> {
    Ok(Engine::new(a, b, variant)?.eval(t))
}

/// All breakpoints of the chosen distance (forward and reverse steps), sorted and deduplicated.
pub fn breakpoints_h1(a: &[Scalar], b: &[Scalar], variant: Variant) -> Result<Vec<Scalar>> {
    let mut all: Vec<Scalar> = Engine::new(a, b, variant)?.lists().into_iter().flatten().collect();
    all.sort();
    all.dedup();
    Ok(all)
}

/// Parabolic arcs of the uni or L1 distance.
pub fn pieces(a: &[Scalar], b: &[Scalar], variant: Variant) -> Result<Vec<Piece1D>> {
    if variant == Variant::Linf {
        return Err(Error::Validation("the linf distance is a maximum of two piecewise quadratics".into()));
    }
    let eng = Engine::new(a, b, variant)?;
    let bps = breakpoints_h1(a, b, variant)?;
    let mut out = Vec::with_capacity(bps.len() + 1);
    for k in 0..=bps.len() {
        let iv = Interval {
            lo: k.checked_sub(1).map(|i| bps[i].clone()),
            hi: bps.get(k).cloned(),
        };
        let quad = eng.arc_at(&iv.sample());
        out.push(Piece1D {
            lo: iv.lo,
            hi: iv.hi,
            quad,
        });
    }
    Ok(out)
}

pub fn local_min_h1(a: &[Scalar], b: &[Scalar], variant: Variant) -> Result<LocalMin1D> {
    local_min_h1_with(a, b, variant, H1Options::default())
}

pub fn local_min_h1_with(a: &[Scalar], b: &[Scalar], variant: Variant, opts: H1Options) -> Result<LocalMin1D> {
    let eng = Engine::new(a, b, variant)?;
    let lists = eng.lists();
    let mut iv = Interval { lo: None, hi: None };
    if let Some(first) = lists.iter().map(|l| &l[0]).min() {
        if eng.eval(first).right.is_negative() {
            iv.lo = Some(first.clone());
        }
    }
    if let Some(last) = lists.iter().map(|l| l.last().expect("nonempty")).max() {
        if eng.eval(last).left.is_positive() && iv.lo.as_ref().is_none_or(|l| l < last) {
            iv.hi = Some(last.clone());
        }
    }
    let mut intervals = vec![iv.clone()];
    let mut iterations = 0usize;
    let cap = eng.n().max(eng.m());

    let found = |t: Scalar, value: Scalar, iterations: usize, intervals: Vec<Interval>| LocalMin1D {
        t_star: QuadraticAlgebraic::rational(t),
        value: QuadraticAlgebraic::rational(value),
        variant,
        iteration_count: iterations,
        intervals,
    };

    loop {
        let windows: Vec<(usize, usize)> = lists
            .iter()
            .map(|l| {
                let s = iv.lo.as_ref().map_or(0, |x| l.partition_point(|v| v <= x));
                let e = iv.hi.as_ref().map_or(l.len(), |x| l.partition_point(|v| v < x));
                (s, e.max(s))
            })
            .collect();
        let total: usize = windows.iter().map(|(s, e)| e - s).sum();
        if total == 0 {
            break;
        }
        let mut probes: Vec<Scalar> = if opts.weighted_median && total <= cap {
            lists
                .iter()
                .zip(&windows)
                .flat_map(|(l, &(s, e))| l[s..e].iter().cloned())
                .collect()
        } else if opts.weighted_median {
            let mut meds: Vec<(&Scalar, usize)> = lists
                .iter()
                .zip(&windows)
                .filter(|(_, (s, e))| e > s)
                .map(|(l, &(s, e))| (&l[s + (e - s - 1) / 2], e - s))
                .collect();
            meds.sort();
            let mut acc = 0;
            let pick = meds
                .iter()
                .find(|(_, w)| {
                    acc += w;
                    2 * acc >= total
                })
                .expect("weights sum to total");
            vec![pick.0.clone()]
        } else {
            lists
                .iter()
                .zip(&windows)
                .filter(|(_, (s, e))| e > s)
                .map(|(l, &(s, e))| l[s + (e - s - 1) / 2].clone())
                .collect()
        };
        probes.sort();
        probes.dedup();
        // binary search over the probes
        let mut lo = 0usize;
        let mut hi = probes.len();
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let xi = &probes[mid];
            iterations += 1;
            match eng.decide(xi) {
                Decision::Left => {
                    iv.hi = Some(xi.clone());
                    hi = mid;
                }
                Decision::Right => {
                    iv.lo = Some(xi.clone());
                    lo = mid + 1;
                }
                Decision::Here(v) => {
                    intervals.push(Interval {
                        lo: Some(xi.clone()),
                        hi: Some(xi.clone()),
                    });
                    return Ok(found(xi.clone(), v, iterations, intervals));
                }
            }
            intervals.push(iv.clone());
        }
    }
    let (t_star, value) = eng.finish(&iv)?;
    Ok(LocalMin1D {
        t_star,
        value,
        variant,
        iteration_count: iterations,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::scalar::rat;

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn step_function_examples() {
        let s = step_function(&ints(&[0, 2, 6])).unwrap();
        assert_eq!(s.breakpoints, ints(&[1, 4]));
        assert_eq!(s.evaluate(&int(1)), &int(2));
        assert_eq!(s.evaluate_left(&int(1)), &int(0));
        assert_eq!(s.evaluate(&int(3)), &int(2));
        let single = step_function(&ints(&[5])).unwrap();
        assert!(single.breakpoints.is_empty());
        assert_eq!(single.evaluate(&int(-100)), &int(5));
        assert!(step_function(&ints(&[1, 1])).is_err());
    }

    #[test]
    fn rms1d_examples() {
        let r = rms1d(&ints(&[0]), &ints(&[0]), &int(0), Variant::Uni).unwrap();
        assert_eq!((r.value, r.left, r.right), (int(0), int(0), int(0)));
        let r = rms1d(&ints(&[0, 10]), &ints(&[0]), &int(5), Variant::Uni).unwrap();
        assert_eq!((r.value, r.left, r.right), (int(25), int(10), int(-10)));
        let r = rms1d(&ints(&[0, 10]), &ints(&[0]), &int(0), Variant::Uni).unwrap();
        assert_eq!((r.value, r.left, r.right), (int(0), int(0), int(0)));
    }

    #[test]
    fn local_min_examples() {
        let r = local_min_h1(&ints(&[0, 10]), &ints(&[0]), Variant::Uni).unwrap();
        assert!(r.t_star == QuadraticAlgebraic::rational(int(0)) || r.t_star == QuadraticAlgebraic::rational(int(10)));
        assert_eq!(r.value, QuadraticAlgebraic::rational(int(0)));
        for v in [Variant::Uni, Variant::L1, Variant::Linf] {
            let a = vec![int(-3), rat(1, 2), int(4), int(9)];
            let r = local_min_h1(&a, &a, v).unwrap();
            assert_eq!(r.t_star, QuadraticAlgebraic::rational(int(0)), "{v}");
            assert_eq!(r.value, QuadraticAlgebraic::rational(int(0)));
        }
        let r = local_min_h1(&ints(&[0, 10]), &ints(&[0, 10]), Variant::Linf).unwrap();
        assert_eq!(r.t_star, QuadraticAlgebraic::rational(int(0)));
    }

    #[test]
    fn pieces_are_continuous() {
        let a = ints(&[0, 3, 7, 8]);
        let b = ints(&[1, 2, 6]);
        for v in [Variant::Uni, Variant::L1] {
            let ps = pieces(&a, &b, v).unwrap();
            for w in ps.windows(2) {
                let t = w[0].hi.clone().unwrap();
                assert_eq!(w[0].quad.eval(&t), w[1].quad.eval(&t));
                assert_eq!(w[0].quad.eval(&t), rms1d(&a, &b, &t, v).unwrap().value);
            }
        }
    }
}
