//! Preference lists induced by distances, Pareto-efficient matchings,
//! and the combinatorial instance generators.

use crate::assignment::{Instance, Matching};
use crate::error::{Error, Result};
use crate::numeric::point::{sq_dist, Point};
use crate::numeric::scalar::{int, rat, Scalar};
use itertools::Itertools;
use num::traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceLists {
    pub m: usize,
    pub n: usize,
    /// `lists[i]` holds A-indices, most preferred first.
    pub lists: Vec<Vec<usize>>,
    /// True when some list order was decided by an exact distance tie.
    pub degenerate: bool,
}

impl PreferenceLists {
    pub fn new(n: usize, lists: Vec<Vec<usize>>) -> Result<Self> {
        let m = lists.len();
        let len = m.min(n);
        for l in &lists {
            if l.len() != len {
                return Err(Error::Validation(format!("each list must have {len} entries")));
            }
            if l.iter().any(|&j| j >= n) || l.iter().collect::<BTreeSet<_>>().len() != l.len() {
                return Err(Error::Validation("list entries must be distinct indices below n".into()));
            }
        }
        Ok(PreferenceLists {
            m,
            n,
            lists,
            degenerate: false,
        })
    }

    fn rank(&self, i: usize, a: usize) -> Option<usize> {
        self.lists[i].iter().position(|&x| x == a)
    }
}

/// The `min(m, n)` nearest A-indices to each `b_i + t`, ties to the smaller index.
pub fn preference_lists(inst: &Instance, t: &Point) -> PreferenceLists {
    let len = inst.m().min(inst.n());
    let mut degenerate = false;
    let lists = inst
        .b
        .iter()
        .map(|b| {
            let q = b + t;
            let mut order: Vec<(Scalar, usize)> =
                inst.a.iter().enumerate().map(|(j, a)| (sq_dist(&q, a), j)).collect();
            order.sort();
            if order[..len.min(order.len() - 1) + 1]
                .windows(2)
                .any(|w| w[0].0 == w[1].0)
            {
                degenerate = true;
            }
            order.into_iter().take(len).map(|(_, j)| j).collect()
        })
        .collect();
    PreferenceLists {
        m: inst.m(),
        n: inst.n(),
        lists,
        degenerate,
    }
}

/// Agents pick in `order` (a permutation of `0..m`) their best unclaimed entry.
pub fn serial_dictatorship(prefs: &PreferenceLists, order: &[usize]) -> Result<Matching> {
    let mut claimed = vec![false; prefs.n];
    let mut assign = vec![usize::MAX; prefs.m];
    for &i in order {
        let pick = prefs.lists[i]
            .iter()
            .copied()
            .find(|&a| !claimed[a])
            .ok_or(Error::ListExhausted)?;
        claimed[pick] = true;
        assign[i] = pick;
    }
    if assign.contains(&usize::MAX) {
        return Err(Error::Validation("order is not a permutation of the agents".into()));
    }
    Ok(Matching::new(assign))
}

/// Kuhn's augmenting-path test for a matching saturating every agent.
fn saturates(allowed: &[Vec<usize>], n: usize) -> bool {
    fn augment(i: usize, allowed: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &a in &allowed[i] {
            if seen[a] {
                continue;
            }
            seen[a] = true;
            if owner[a].is_none_or(|k| augment(k, allowed, seen, owner)) {
                owner[a] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n];
    (0..allowed.len()).all(|i| {
        let mut seen = vec![false; n];
        augment(i, allowed, &mut seen, &mut owner)
    })
}

/// Pareto efficiency of `pi`: no other matching is weakly preferred by all agents.
pub fn is_efficient(prefs: &PreferenceLists, pi: &Matching) -> bool {
    let ranks: Vec<usize> = match (0..prefs.m)
        .map(|i| prefs.rank(i, pi.assign[i]))
        .collect::<Option<Vec<_>>>()
    {
        Some(r) => r,
        None => return false,
    };
    (0..prefs.m).all(|strict| {
        let allowed: Vec<Vec<usize>> = (0..prefs.m)
            .map(|i| {
                let cut = if i == strict { ranks[i] } else { ranks[i] + 1 };
                prefs.lists[i][..cut].to_vec()
            })
            .collect();
        !saturates(&allowed, prefs.n)
    })
}

fn guard_enumeration(m: usize) -> Result<()> {
    if m > 9 {
        return Err(Error::BudgetExceeded(format!("m! enumeration refused for m = {m} > 9")));
    }
    Ok(())
}

/// All serial-dictatorship outcomes over the `m!` orders.
pub fn efficient_matchings(prefs: &PreferenceLists) -> Result<BTreeSet<Matching>> {
    guard_enumeration(prefs.m)?;
    (0..prefs.m)
        .permutations(prefs.m)
        .map(|order| serial_dictatorship(prefs, &order))
        .collect()
}

/// Matched sets of all efficient matchings.
pub fn efficient_images(prefs: &PreferenceLists) -> Result<BTreeSet<Vec<usize>>> {
    Ok(efficient_matchings(prefs)?
        .into_iter()
        .map(|pi| pi.matched_set)
        .collect())
}

/// Upper bound on `ln r` for a rational `1 <= r <= 2`, via `2 atanh((r−1)/(r+1))`
/// with the series tail bounded by a geometric sum.
fn ln_upper_small(r: &Scalar) -> Scalar {
    let z = (r - Scalar::one()) / (r + Scalar::one());
    let z2 = &z * &z;
    let tol = rat(1, 1_000_000_000_000_000_000);
    let mut sum = Scalar::zero();
    let mut power = z.clone();
    let mut k: i64 = 0;
    loop {
        sum += &power / int(2 * k + 1);
        power *= &z2;
        k += 1;
        let tail = &power / (int(2 * k + 1) * (Scalar::one() - &z2));
        if tail < tol {
            return int(2) * (sum + tail);
        }
    }
}

/// A rational upper bound on `ln x` for an integer `x >= 1`, within about `1e-17`.
pub fn ln_upper_bound(x: u64) -> Scalar {
    assert!(x >= 1);
    let e = 63 - x.leading_zeros() as i64;
    let r = Scalar::new(x.into(), (1u64 << e).into());
    int(e) * ln_upper_small(&int(2)) + ln_upper_small(&r)
}

/// `m (ln m + 1)` with `ln m` replaced by a certified upper bound.
pub fn union_bound(m: u64) -> Scalar {
    int(m as i64) * (ln_upper_bound(m) + Scalar::one())
}

/// Lower-bound instance with `(l(k−l))` distinct optimal matchings along a line
/// (`dim = 1`) or `(l(k−l))²` regions (`dim = 2`).
pub fn gen_lower_bound(l: u64, k: u64, dim: u8) -> Result<Instance> {
    if l < 2 || k <= l {
        return Err(Error::Validation("need l >= 2 and k > l".into()));
    }
    let (li, ki) = (l as i64, k as i64);
    let off = (li - 1) * (ki - 1);
    match dim {
        1 => {
            let a = (0..ki).map(|t| Point::from_ints(off + t, 0)).collect();
            let b = (0..li).map(|t| Point::from_ints(t * (ki - 1), 0)).collect();
            Instance::new(a, b)
        }
        2 => {
            // Extreme translation t₁ = l(k−1): compare squares of positive sides.
            let big_l = li * (ki - 1);
            let lhs = int(2 * big_l * big_l);
            let rhs_side = (3 * li - 1) * (ki - 1) - big_l;
            if rhs_side <= 0 || lhs >= int(rhs_side * rhs_side) {
                return Err(Error::SeparationViolated { l, k });
            }
            let shift = -2 * li * (ki - 1);
            let mut a: Vec<Point> = (1..=ki).map(|t| Point::from_ints(li * ki - li - ki + t, 0)).collect();
            a.extend((1..=ki).map(|t| Point::from_ints(0, li * ki - li - ki + t)));
            let mut b: Vec<Point> = (1..=li).map(|t| Point::from_ints((t - 1) * (ki - 1), shift)).collect();
            b.extend((1..=li).map(|t| Point::from_ints(shift, (t - 1) * (ki - 1))));
            Instance::new(a, b)
        }
        _ => Err(Error::Validation(format!("dim must be 1 or 2, got {dim}"))),
    }
}

/// Lists sharing a common prefix `S` of length `m/2` followed by distinct private entries.
pub fn gen_proposition_lists(m: usize, n: usize) -> Result<PreferenceLists> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::Validation("m must be even and at least 2".into()));
    }
    let h = m / 2;
    if n < h + m {
        return Err(Error::Validation(format!("need n >= {}", h + m)));
    }
    let lists = (0..m)
        .map(|i| {
            let mut l: Vec<usize> = (0..h).collect();
            l.push(h + i);
            let mut next = 0;
            while l.len() < m {
                if !l.contains(&next) {
                    l.push(next);
                }
                next += 1;
            }
            l
        })
        .collect();
    PreferenceLists::new(n, lists)
}
