use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmsmatch::numeric::scalar::int;
use rmsmatch::preference::*;

fn random_lists(rng: &mut ChaCha8Rng, m: usize, n: usize) -> PreferenceLists {
    let lists = (0..m)
        .map(|_| {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            all.truncate(m.min(n));
            all
        })
        .collect();
    PreferenceLists::new(n, lists).unwrap()
}

/// Lists satisfying the three block conditions for `a = block`, index `j`.
fn block_lists(rng: &mut ChaCha8Rng, block: &[usize], j: usize, n: usize) -> PreferenceLists {
    let m = block.len();
    let lists = (0..m)
        .map(|i| {
            let mut head: Vec<usize> = if i < j {
                block[..j].to_vec()
            } else if i == j {
                vec![block[j]]
            } else {
                block[j + 1..].to_vec()
            };
            let mut rest: Vec<usize> = (0..n).filter(|x| !head.contains(x)).collect();
            rest.shuffle(rng);
            head.extend(rest);
            head.truncate(m);
            head
        })
        .collect();
    PreferenceLists::new(n, lists).unwrap()
}

#[test]
fn serial_dictatorship_is_efficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..200 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(m..=m + 4);
        let prefs = random_lists(&mut rng, m, n);
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);
        let pi = serial_dictatorship(&prefs, &order).unwrap();
        assert!(is_efficient(&prefs, &pi));
    }
}

#[test]
fn block_preferences_fix_the_image() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for _ in 0..60 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(m..=m + 4);
        let mut block: Vec<usize> = (0..n).collect();
        block.shuffle(&mut rng);
        block.truncate(m);
        let j = rng.random_range(0..m);
        let prefs = block_lists(&mut rng, &block, j, n);
        let mut expected = block.clone();
        expected.sort();
        for order in (0..m).permutations(m) {
            assert_eq!(serial_dictatorship(&prefs, &order).unwrap().matched_set, expected);
        }
    }
}

#[test]
fn union_of_images_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..200 {
        let m = rng.random_range(1..=7);
        let n = rng.random_range(m..=m + 5);
        let prefs = random_lists(&mut rng, m, n);
        let union: std::collections::BTreeSet<usize> = efficient_images(&prefs).unwrap().into_iter().flatten().collect();
        assert!(int(union.len() as i64) <= union_bound(m as u64));
    }
}

#[test]
fn identical_lists_give_every_bijection() {
    let factorial = |m: usize| (1..=m).product::<usize>();
    for m in 1..=6 {
        let list: Vec<usize> = (0..m).collect();
        let prefs = PreferenceLists::new(m + 2, vec![list; m]).unwrap();
        assert_eq!(efficient_matchings(&prefs).unwrap().len(), factorial(m));
    }
}

#[test]
fn proposition_lists_have_binomial_images() {
    let prefs = gen_proposition_lists(4, 6).unwrap();
    assert_eq!(efficient_images(&prefs).unwrap().len(), 6);
}
