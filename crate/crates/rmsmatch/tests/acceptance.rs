//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rmsmatch::assignment::{optimal_matching, Instance};
use rmsmatch::hausdorff1d::{breakpoints_h1, local_min_h1, rms1d, Variant};
use rmsmatch::hausdorff2d::{certificate_holds, icp, is_stationary, local_min_h2, voronoi, LocalMin2D};
use rmsmatch::numeric::algebraic::QuadraticAlgebraic;
use rmsmatch::numeric::geometry::Line;
use rmsmatch::numeric::point::{sq_dist, Point};
use rmsmatch::numeric::scalar::{int, Scalar};
use rmsmatch::oracles::{brute_line_trace, brute_matching, enumerate_h1_minima, enumerate_h2_minima, enumerate_pm_minima, Location};
use rmsmatch::preference::*;
use rmsmatch::subdivision::{build_subdivision, global_minimum_pm, local_minimum_pm, trace_line, LineTrace};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn qa(x: &Scalar) -> QuadraticAlgebraic {
    QuadraticAlgebraic::rational(x.clone())
}

fn random_t(rng: &mut ChaCha8Rng) -> Point {
    Point::new(
        Scalar::new(rng.random_range(-300..=300).into(), rng.random_range(1..=7).into()),
        Scalar::new(rng.random_range(-300..=300).into(), rng.random_range(1..=7).into()),
    )
}

fn random_line(rng: &mut ChaCha8Rng) -> Line {
    match rng.random_range(0..4) {
        0 => Line::vertical(Scalar::new(rng.random_range(-30..=30).into(), rng.random_range(1..=3).into())),
        1 => Line::horizontal(Scalar::new(rng.random_range(-30..=30).into(), rng.random_range(1..=3).into())),
        _ => loop {
            let p = Point::from_ints(rng.random_range(-20..=20), rng.random_range(-20..=20));
            let q = Point::from_ints(rng.random_range(-20..=20), rng.random_range(-20..=20));
            if let Some(l) = Line::through(&p, &q) {
                break l;
            }
        },
    }
}

fn same_trace(a: &LineTrace, b: &LineTrace) -> bool {
    a.breakpoints == b.breakpoints
        && a.cells.len() == b.cells.len()
        && a.cells.iter().zip(&b.cells).all(|(x, y)| {
            x.matching.matched_set == y.matching.matched_set && x.plane == y.plane && x.start == y.start && x.end == y.end
        })
        && a.line_min == b.line_min
        && a.descent == b.descent
}

fn random_set(rng: &mut ChaCha8Rng, k: usize, span: i64, denom: i64) -> Vec<Scalar> {
    let mut s = BTreeSet::new();
    while s.len() < k {
        s.insert(Scalar::new(rng.random_range(-span * denom..=span * denom).into(), denom.into()));
    }
    s.into_iter().collect()
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

fn reports_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../reports");
    std::fs::create_dir_all(&dir).expect("create reports directory");
    dir
}

/// Every row has the header's field count and every field parses as a number
/// (or a boolean/label in the named text columns).
fn well_formed(text: &str, text_cols: &[&str]) -> bool {
    let mut lines = text.lines();
    let Some(header) = lines.next() else { return false };
    let cols: Vec<&str> = header.split(',').collect();
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return false;
        }
        for (c, f) in cols.iter().zip(&fields) {
            if !text_cols.contains(c) && f.parse::<f64>().is_err() {
                return false;
            }
        }
        rows += 1;
    }
    rows > 0
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1001);
    for _ in 0..200 {
        let n = r.random_range(1..=8);
        let m = r.random_range(1..=n.min(5));
        let inst = Instance::random(&mut r, n, m, 30, 4);
        let t = random_t(&mut r);
        let fast = optimal_matching(&inst, &t);
        let brute = brute_matching(&inst, &t).map_err(|e| e.to_string())?;
        ensure!(fast.is_valid_for(&inst), "invalid matching on {inst:?}");
        ensure!(fast.cost(&inst, &t) == brute.cost(&inst, &t), "cost mismatch on {inst:?} at {t:?}");
    }
    let el = start.elapsed();
    ensure!(el < Duration::from_secs(10), "took {el:?}");
    Ok("200 instances, exact cost equality".into())
}

fn c2() -> Outcome {
    let mut r = rng(1002);
    let cases: Vec<_> = (0..100)
        .map(|_| {
            let n = r.random_range(2..=12);
            let m = r.random_range(1..=n.min(4));
            let inst = Instance::random(&mut r, n, m, 20, 2);
            let lines: Vec<Line> = (0..20).map(|_| random_line(&mut r)).collect();
            (inst, lines)
        })
        .collect();
    let counts = cases
        .par_iter()
        .map(|(inst, lines)| -> Result<(usize, usize), String> {
            let (n, m) = (inst.n(), inst.m());
            let (mut compared, mut max_cells) = (0, 0);
            for line in lines {
                let tr = trace_line(inst, line).map_err(|e| e.to_string())?;
                max_cells = max_cells.max(tr.cells.len());
                ensure!(tr.cells.len() <= m * (n - m) + 1, "{} cells on {inst:?} along {line}", tr.cells.len());
                if n <= 8 {
                    let oracle = brute_line_trace(inst, line).map_err(|e| e.to_string())?;
                    ensure!(same_trace(&tr, &oracle), "trace differs from brute force on {inst:?} along {line}");
                    compared += 1;
                }
            }
            Ok((compared, max_cells))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let compared: usize = counts.iter().map(|c| c.0).sum();
    let max_cells = counts.iter().map(|c| c.1).max().unwrap_or(0);
    Ok(format!("2000 traces within bound, {compared} match brute force cell for cell, max {max_cells} cells"))
}

fn c3() -> Outcome {
    let start = Instant::now();
    let inst = gen_lower_bound(2, 4, 1).map_err(|e| e.to_string())?;
    let tr = trace_line(&inst, &Line::horizontal(int(0))).map_err(|e| e.to_string())?;
    let sets: BTreeSet<Vec<usize>> = tr.cells.iter().map(|c| c.matching.matched_set.clone()).collect();
    ensure!(sets.len() >= 4, "only {} distinct matched sets along the axis", sets.len());
    let inst = gen_lower_bound(2, 4, 2).map_err(|e| e.to_string())?;
    let sub = build_subdivision(&inst).map_err(|e| e.to_string())?;
    ensure!(sub.regions.len() >= 16, "only {} regions", sub.regions.len());
    let el = start.elapsed();
    ensure!(el < Duration::from_secs(60), "took {el:?}");
    Ok(format!("{} matched sets on the line, {} regions in the plane", sets.len(), sub.regions.len()))
}

fn c4() -> Outcome {
    let mut r = rng(1004);
    let mut regions = 0;
    for _ in 0..30 {
        let n = r.random_range(2..=10);
        let m = r.random_range(1..=n.min(3));
        let inst = Instance::random(&mut r, n, m, 20, 1);
        let sub = build_subdivision(&inst).map_err(|e| e.to_string())?;
        let k = m * (n - m);
        regions += sub.regions.len();
        for reg in &sub.regions {
            ensure!(reg.edges.len() <= k, "region with {} edges, bound {k}", reg.edges.len());
            for e in &reg.edges {
                let parallel = (0..n).any(|i| (0..n).any(|j| i != j && (&inst.a[j] - &inst.a[i]).cross(&e.line.normal) == int(0)));
                ensure!(parallel, "edge {} not parallel to any a_j - a_i", e.line);
            }
        }
        for v in &sub.vertices {
            ensure!(v.degree <= 2 * k, "vertex of degree {}", v.degree);
        }
        ensure!(sub.unbounded_count <= 4 * k.max(1), "{} unbounded regions", sub.unbounded_count);
    }
    Ok(format!("30 subdivisions, {regions} regions, zero violations"))
}

fn c5() -> Outcome {
    let mut r = rng(1005);
    for _ in 0..100 {
        let n = r.random_range(1..=8);
        let m = r.random_range(1..=n.min(4));
        let inst = Instance::random(&mut r, n, m, 20, 1);
        let minima = enumerate_pm_minima(&inst).map_err(|e| e.to_string())?;
        let lm = local_minimum_pm(&inst).map_err(|e| e.to_string())?;
        ensure!(
            minima.contains(&Location::point(&lm.t_star), &qa(&lm.value)),
            "local minimum {:?} not enumerated for {inst:?}",
            lm.t_star
        );
        let gm = global_minimum_pm(&inst).map_err(|e| e.to_string())?;
        ensure!(Some(&qa(&gm.value)) == minima.min_value(), "global minimum differs on {inst:?}");
    }
    Ok("100 instances, exact rational equality".into())
}

fn c6() -> Outcome {
    let mut r = rng(1006);
    for _ in 0..50 {
        let n = r.random_range(1..=9);
        let inst = Instance::random(&mut r, n, 1, 25, 2);
        let sub = build_subdivision(&inst).map_err(|e| e.to_string())?;
        let shifted: Vec<Point> = inst.a.iter().map(|a| a - &inst.b[0]).collect();
        let vd = voronoi(&shifted).map_err(|e| e.to_string())?;
        ensure!(sub.regions.len() == n, "{} regions for {n} sites", sub.regions.len());
        let ours: BTreeSet<Line> = sub.regions.iter().flat_map(|reg| reg.edges.iter().map(|e| e.line.clone())).collect();
        let theirs: BTreeSet<Line> = vd.edges.iter().map(|e| e.line.clone()).collect();
        ensure!(ours == theirs, "edge lines differ on {inst:?}");
    }
    Ok("50 instances, identical cells and edges".into())
}

fn c7() -> Outcome {
    let mut r = rng(1007);
    let generic = |inst: &Instance, t: &Point| {
        inst.b.iter().all(|b| {
            let q = b + t;
            let d: Vec<Scalar> = inst.a.iter().map(|a| sq_dist(&q, a)).sorted().collect();
            d.windows(2).all(|w| w[0] != w[1])
        })
    };
    let rank = |inst: &Instance, t: &Point, i: usize, j: usize| {
        let q = &inst.b[i] + t;
        let d = sq_dist(&q, &inst.a[j]);
        inst.a.iter().filter(|a| sq_dist(&q, a) < d).count()
    };
    let mut checked = 0;
    while checked < 500 {
        let n = r.random_range(1..=9);
        let m = r.random_range(1..=n.min(5));
        let inst = Instance::random(&mut r, n, m, 30, 3);
        let t = random_t(&mut r);
        if !generic(&inst, &t) {
            continue;
        }
        checked += 1;
        let pi = optimal_matching(&inst, &t);
        for (i, &j) in pi.assign.iter().enumerate() {
            ensure!(rank(&inst, &t, i, j) < m, "b_{i} matched outside its {m} nearest");
        }
        ensure!(pi.assign.iter().enumerate().any(|(i, &j)| rank(&inst, &t, i, j) == 0), "nobody has its first choice");
        let mut left_b: Vec<usize> = (0..m).collect();
        let mut left_a: Vec<usize> = (0..n).collect();
        while !left_b.is_empty() {
            let pos = left_b.iter().position(|&i| {
                let q = &inst.b[i] + &t;
                let own = sq_dist(&q, &inst.a[pi.assign[i]]);
                left_a.iter().all(|&j| sq_dist(&q, &inst.a[j]) >= own)
            });
            let Some(pos) = pos else {
                return Err(format!("no greedy ordering for {inst:?} at {t:?}"));
            };
            let i = left_b.remove(pos);
            left_a.retain(|&j| j != pi.assign[i]);
        }
        ensure!(is_efficient(&preference_lists(&inst, &t), &pi), "optimal matching not efficient");
    }
    Ok("500 generic pairs, zero violations".into())
}

fn c8() -> Outcome {
    let images = efficient_images(&gen_proposition_lists(4, 6).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(images.len() == 6, "{} images, expected 6", images.len());
    let mut r = rng(1008);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let m = r.random_range(1..=7);
        let n = r.random_range(m..=m + 5);
        let lists = (0..m)
            .map(|_| {
                let mut all: Vec<usize> = (0..n).collect();
                all.shuffle(&mut r);
                all.truncate(m);
                all
            })
            .collect();
        let prefs = PreferenceLists::new(n, lists).map_err(|e| e.to_string())?;
        let union: BTreeSet<usize> = efficient_images(&prefs).map_err(|e| e.to_string())?.into_iter().flatten().collect();
        let bound = union_bound(m as u64);
        ensure!(int(union.len() as i64) <= bound, "union of size {} exceeds m(ln m + 1) for m = {m}", union.len());
        let ratio = union.len() as f64 / num::ToPrimitive::to_f64(&bound).unwrap_or(f64::INFINITY);
        worst = worst.max(ratio);
    }
    for m in 1..=6 {
        let prefs = PreferenceLists::new(m + 2, vec![(0..m).collect(); m]).map_err(|e| e.to_string())?;
        let count = efficient_matchings(&prefs).map_err(|e| e.to_string())?.len();
        let fact: usize = (1..=m).product();
        ensure!(count == fact, "{count} efficient matchings for identical lists, m = {m}");
    }
    Ok(format!("6 images; 200 systems within the union bound (max ratio {worst:.3}); m! for m <= 6"))
}

fn c9() -> Outcome {
    let mut r = rng(1009);
    let variants = [Variant::Uni, Variant::L1, Variant::Linf];
    let cases: Vec<_> = (0..200)
        .map(|round| {
            let n = r.random_range(1..=50);
            let m = r.random_range(1..=50);
            let denom = r.random_range(1..=3);
            let a = random_set(&mut r, n, 60, denom);
            let b = random_set(&mut r, m, 60, denom);
            (a, b, variants[round % 3])
        })
        .collect();
    let iters = cases
        .par_iter()
        .map(|(a, b, v)| -> Result<usize, String> {
            let v = *v;
            let (n, m) = (a.len(), b.len());
            let res = local_min_h1(a, b, v).map_err(|e| e.to_string())?;
            let oracle = enumerate_h1_minima(a, b, v).map_err(|e| e.to_string())?;
            ensure!(oracle.contains(&Location::OneD(res.t_star.clone()), &res.value), "{v}: {:?} is not a local minimum", res.t_star);
            let bound = (((n * m + 1) as f64).ln() / (4.0f64 / 3.0).ln()).ceil() as usize + 2;
            ensure!(res.iteration_count <= bound, "{} iterations, bound {bound}", res.iteration_count);
            for tau in breakpoints_h1(a, b, v).map_err(|e| e.to_string())? {
                let d = rms1d(a, b, &tau, v).map_err(|e| e.to_string())?;
                // linf: a step of the non-dominant term leaves the slope continuous
                let ok = if v == Variant::Linf { d.right <= d.left } else { d.right < d.left };
                ensure!(ok, "{v}: minimum-like kink at breakpoint {tau}");
            }
            Ok(res.iteration_count)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_iter = iters.into_iter().max().unwrap_or(0);
    Ok(format!("200 instances, all variants, max {max_iter} iterations"))
}

fn stage_bounds_ok(res: &LocalMin2D) -> bool {
    let log2 = |x: usize| x.max(1).next_power_of_two().trailing_zeros() as usize;
    let s = &res.stats;
    (s.stage1_candidates == 0 || s.stage1_calls <= log2(s.stage1_candidates) + 2)
        && s.stage2_calls <= log2(s.stage2_intersections + 1) + 2
}

fn c10() -> Outcome {
    let mut r = rng(1010);
    for round in 0..100 {
        let n = r.random_range(1..=10);
        let m = r.random_range(1..=n.min(4));
        let inst = Instance::random(&mut r, n, m, 12, 2);
        let v = if round % 2 == 0 { Variant::Uni } else { Variant::L1 };
        let res = local_min_h2(&inst, v).map_err(|e| e.to_string())?;
        let oracle = enumerate_h2_minima(&inst, v).map_err(|e| e.to_string())?;
        ensure!(oracle.contains(&Location::TwoD(res.t_star.clone()), &res.value), "{v}: {:?} not enumerated for {inst:?}", res.t_star);
        ensure!(certificate_holds(&inst, &res), "{v}: fixed-point certificate fails on {inst:?}");
        ensure!(stage_bounds_ok(&res), "{v}: call counts {:?}", res.stats);
    }
    let tiny = Scalar::new(1.into(), num::BigInt::from(1) << 64);
    let mut irrational = 0;
    for _ in 0..100 {
        let n = r.random_range(1..=10);
        let m = r.random_range(1..=n.min(4));
        let inst = Instance::random(&mut r, n, m, 12, 2);
        let res = local_min_h2(&inst, Variant::Linf).map_err(|e| e.to_string())?;
        let Some(e) = &res.enclosure else {
            return Err("linf result without enclosure".into());
        };
        ensure!(e.width() <= tiny, "enclosure width {}", e.width());
        ensure!(e.contains(&res.t_star), "enclosure misses the minimum");
        ensure!(is_stationary(&inst, &res.t_star, Variant::Linf), "linf signs fail on {inst:?}");
        ensure!(stage_bounds_ok(&res), "linf call counts {:?}", res.stats);
        if !res.t_star.x.is_rational() || !res.t_star.y.is_rational() {
            irrational += 1;
        }
    }
    Ok(format!("100 uni/L1 instances certified; 100 linf enclosures <= 2^-64 ({irrational} irrational)"))
}

fn on_axis(xs: &[i64]) -> Vec<Point> {
    xs.iter().map(|&x| Point::from_ints(x, 0)).collect()
}

fn c11() -> Outcome {
    let mut csv = String::from("family,k,n,m,icp_iterations,icp_converged,h1_iterations\n");
    let mut row = |family: &str, k: i64, inst: &Instance, start: i64| -> Outcome {
        let res = icp(inst, &Point::from_ints(start, 0), 1).map_err(|e| e.to_string())?;
        let xs = |p: &[Point]| p.iter().map(|q| q.x.clone()).collect::<Vec<_>>();
        let h1 = local_min_h1(&xs(&inst.a), &xs(&inst.b), Variant::Uni).map_err(|e| e.to_string())?;
        writeln!(csv, "{family},{k},{},{},{},{},{}", inst.n(), inst.m(), res.iterations, res.converged, h1.iteration_count).unwrap();
        Ok(String::new())
    };
    for k in [3, 4, 6, 8, 12, 16, 24, 32] {
        let inst = gen_lower_bound(2, k as u64, 1).map_err(|e| e.to_string())?;
        row("lower-bound", k, &inst, -10 * k * k)?;
    }
    for k in [2, 4, 8, 12, 16, 24, 32] {
        // a cluster walking along a unit grid, pulled by one anchored far point
        let (c, far) = (4 * k, 40 * k);
        let mut b: Vec<i64> = (0..k).collect();
        b.push(far);
        let mut a: Vec<i64> = (0..=k + c).collect();
        a.push(far + c);
        let inst = Instance::new(on_axis(&a), on_axis(&b)).map_err(|e| e.to_string())?;
        row("drift", k, &inst, 0)?;
    }
    let path = reports_dir().join("icp_vs_h1.csv");
    std::fs::write(&path, &csv).map_err(|e| e.to_string())?;
    let back = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    ensure!(well_formed(&back, &["family", "icp_converged"]), "malformed report");
    Ok(format!("wrote {} rows to reports/icp_vs_h1.csv", back.lines().count() - 1))
}

fn c12() -> Outcome {
    let mut csv = String::from("instance,n,m,regions,subset_bound,improved_bound\n");
    let e = std::f64::consts::E;
    let mut rows = 0;
    let mut emit = |name: &str, inst: &Instance| -> Outcome {
        let (n, m) = (inst.n(), inst.m());
        let sub = build_subdivision(inst).map_err(|e| e.to_string())?;
        let subsets = binomial(n, m);
        // one convex region per matched set at most
        ensure!(sub.regions.len() as u64 <= subsets, "{name}: {} regions exceed C({n},{m})", sub.regions.len());
        let (nf, mf) = (n as f64, m as f64);
        let improved = nf * nf * mf.powf(3.5) * (e * mf.ln() + e).powf(mf);
        writeln!(csv, "{name},{n},{m},{},{subsets},{improved:.1}", sub.regions.len()).unwrap();
        rows += 1;
        Ok(String::new())
    };
    for (l, k) in [(2, 4), (2, 5), (3, 5)] {
        if let Ok(inst) = gen_lower_bound(l, k, 2) {
            emit(&format!("lower-bound-{l}-{k}"), &inst)?;
        }
    }
    let mut r = rng(1012);
    for i in 0..24 {
        let n = r.random_range(3..=9);
        let m = r.random_range(1..=n.min(4));
        let inst = Instance::random(&mut r, n, m, 20, 1);
        emit(&format!("random-{i}"), &inst)?;
    }
    let path = reports_dir().join("region_counts.csv");
    std::fs::write(&path, &csv).map_err(|e| e.to_string())?;
    let back = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    ensure!(well_formed(&back, &["instance"]), "malformed report");
    Ok(format!("wrote {rows} rows to reports/region_counts.csv"))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 12] = [
        (1, c1),
        (2, c2),
        (3, c3),
        (4, c4),
        (5, c5),
        (6, c6),
        (7, c7),
        (8, c8),
        (9, c9),
        (10, c10),
        (11, c11),
        (12, c12),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {k:>2}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k:>2}: FAIL ({secs:.1}s) {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
