use proptest::prelude::*;
use rmsmatch::numeric::algebraic::QuadraticAlgebraic;
use rmsmatch::numeric::geometry::{halfplane_intersection, intersections_in_slab, kth_intersection_in_slab, Halfplane, Line, VerticalSlab};
use rmsmatch::numeric::point::{sq_dist, Point};
use rmsmatch::numeric::scalar::{int, Scalar};

fn scalar() -> impl Strategy<Value = Scalar> {
    (-10_000i64..10_000, 1i64..500).prop_map(|(p, q)| Scalar::new(p.into(), q.into()))
}

fn point() -> impl Strategy<Value = Point> {
    (scalar(), scalar()).prop_map(|(x, y)| Point::new(x, y))
}

fn small_point() -> impl Strategy<Value = Point> {
    (-20i64..20, -20i64..20).prop_map(|(x, y)| Point::from_ints(x, y))
}

fn line() -> impl Strategy<Value = Line> {
    (small_point(), small_point()).prop_filter_map("distinct points", |(p, q)| Line::through(&p, &q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn field_laws_are_exact(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
        prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
    }

    #[test]
    fn sq_dist_is_symmetric(p in point(), q in point()) {
        prop_assert_eq!(sq_dist(&p, &q), sq_dist(&q, &p));
    }

    #[test]
    fn quadratic_field_laws(p in scalar(), q in scalar(), r in scalar(), s in scalar(), d in 2i64..40) {
        let x = QuadraticAlgebraic::new(p, q, d.into());
        let y = QuadraticAlgebraic::new(r, s, d.into());
        let sum = x.try_add(&y).unwrap();
        prop_assert_eq!(sum.try_sub(&y).unwrap(), x.clone());
        let prod = x.try_mul(&y).unwrap();
        if y.sign() != std::cmp::Ordering::Equal {
            prop_assert_eq!(prod.try_div(&y).unwrap(), x.clone());
        }
        prop_assert_eq!(x.cmp(&y), x.try_sub(&y).unwrap().sign());
    }

    #[test]
    fn scaled_lines_are_equal(l in line(), k in scalar()) {
        prop_assume!(k != int(0));
        let scaled = Line::new(l.normal.scale(&k), &l.offset * &k).unwrap();
        prop_assert_eq!(&scaled, &l);
        let via = Line::through(&l.point_on(), &(&l.point_on() + &l.direction().scale(&k))).unwrap();
        prop_assert_eq!(via, l);
    }

    #[test]
    fn halfplane_intersection_is_idempotent(ls in prop::collection::vec(line(), 1..8), w in small_point()) {
        // orient every halfplane to contain the witness strictly
        let hs: Vec<Halfplane> = ls
            .iter()
            .filter(|l| !l.contains(&w))
            .map(|l| {
                let h = Halfplane::le(l.normal.clone(), l.offset.clone()).unwrap();
                if h.contains(&w) { h } else { h.complement() }
            })
            .collect();
        let poly = halfplane_intersection(&hs, &w).unwrap();
        let again = halfplane_intersection(&poly.halfplanes, &w).unwrap();
        prop_assert_eq!(again, poly.clone());
        prop_assert!(poly.contains_strictly(&w));
    }

    #[test]
    fn kth_intersection_matches_enumeration(ls in prop::collection::vec(line(), 2..50), l in -30i64..30, width in 1i64..40) {
        let slab = VerticalSlab::new(Some(int(l)), Some(int(l + width)));
        let mut all = Vec::new();
        for (i, a) in ls.iter().enumerate() {
            for b in &ls[i + 1..] {
                if let Some(p) = a.intersection(b) {
                    if p.x > int(l) && p.x < int(l + width) {
                        all.push(p);
                    }
                }
            }
        }
        all.sort();
        all.dedup();
        prop_assert_eq!(&intersections_in_slab(&ls, &slab), &all);
        let n = all.len();
        for k in [1, n.div_ceil(2), n].into_iter().filter(|&k| k >= 1 && k <= n) {
            prop_assert_eq!(&kth_intersection_in_slab(&ls, &slab, k).unwrap(), &all[k - 1]);
        }
        prop_assert!(kth_intersection_in_slab(&ls, &slab, all.len() + 1).is_err());
    }
}
