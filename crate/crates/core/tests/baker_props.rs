use num_bigint::BigUint;
use proptest::prelude::*;

use qbmi_core::baker::{
    apply, apply_ms, count_admissible, enumerate_admissible, inverse, iterate, iterate_inverse, AdmissibleRanker,
};
use qbmi_core::{BakerPartition, Point};

// Geometric definition, written independently of the library: strip i of width 2^q
// starting at column s is stretched by 2^(n-q) horizontally and squeezed vertically.
fn oracle(n: u32, q: &[u32], x: u32, y: u32) -> (u32, u32) {
    let mut s = 0;
    for &qi in q {
        let w = 1u32 << qi;
        if x < s + w {
            let k = 1u32 << (n - qi);
            return ((x - s) * k + y % k, s + y / k);
        }
        s += w;
    }
    unreachable!("x outside the square")
}

fn partitions(max_n: u32) -> impl Strategy<Value = BakerPartition> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let count = count_admissible(n);
            let hi: u64 = count.try_into().unwrap_or(u64::MAX);
            (Just(n), 0..hi)
        })
        .prop_map(|(n, r)| AdmissibleRanker::new(n).unwrap().unrank(&BigUint::from(r)).unwrap())
}

#[test]
fn admissible_counts() {
    let want = [1u64, 2, 5, 26, 677, 458_330];
    for (n, &w) in want.iter().enumerate() {
        assert_eq!(count_admissible(n as u32), BigUint::from(w), "n={n}");
    }
    assert_eq!(count_admissible(6), BigUint::from(210_066_388_901u64));
}

#[test]
fn enumeration_matches_oracle_and_ranker() {
    for n in 1..=4 {
        let all = enumerate_admissible(n).unwrap();
        let ranker = AdmissibleRanker::new(n).unwrap();
        assert_eq!(BigUint::from(all.len()), *ranker.count());
        for (r, p) in all.iter().enumerate() {
            assert_eq!(&ranker.unrank(&BigUint::from(r)).unwrap(), p);
            for x in 0..1u32 << n {
                for y in 0..1u32 << n {
                    let got = apply(p, Point::new(x, y));
                    assert_eq!((got.x, got.y), oracle(n, p.exponents(), x, y), "{p} at ({x},{y})");
                }
            }
        }
        // strictly increasing in lexicographic order
        assert!(all.windows(2).all(|w| w[0].exponents() < w[1].exponents()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn is_a_bijection(p in partitions(6)) {
        let perm = p.permutation();
        let mut seen = vec![false; perm.len()];
        for &v in perm.table() {
            prop_assert!(!seen[v as usize]);
            seen[v as usize] = true;
        }
        prop_assert!(perm.then(&inverse(&p)).is_identity());
    }

    #[test]
    fn strips_follow_ms(p in partitions(7), x in any::<u32>(), y in any::<u32>()) {
        let n = p.n();
        let (x, y) = (x & ((1 << n) - 1), y & ((1 << n) - 1));
        let (i, start) = p.strip_of(x);
        let local = apply_ms(p.exponents()[i], n, Point::new(x - start, y));
        let got = apply(&p, Point::new(x, y));
        prop_assert_eq!(got.x, local.x);
        prop_assert_eq!(got.y, local.y + start);
    }

    #[test]
    fn strips_tile_the_square(p in partitions(8)) {
        let n = p.n();
        let starts = p.strip_starts();
        let total: u64 = p.exponents().iter().map(|&q| 1u64 << q).sum();
        prop_assert_eq!(total, 1u64 << n);
        for (s, &q) in starts.iter().zip(p.exponents()) {
            prop_assert_eq!(s % (1u64 << q), 0);
        }
    }

    #[test]
    fn iterates_invert(p in partitions(6), r in 0u32..16, x in any::<u32>(), y in any::<u32>()) {
        let n = p.n();
        let pt = Point::new(x & ((1 << n) - 1), y & ((1 << n) - 1));
        prop_assert_eq!(iterate_inverse(&p, r, iterate(&p, r, pt)), pt);
        let via_pow = p.permutation().pow(r).apply(pt.index(n));
        prop_assert_eq!(Point::from_index(n, via_pow), iterate(&p, r, pt));
    }

    #[test]
    fn order_returns_to_identity(p in partitions(4)) {
        let perm = p.permutation();
        let order: u32 = perm.order().try_into().unwrap();
        prop_assert!(perm.pow(order).is_identity());
        for k in 1..order {
            if order.is_multiple_of(k) {
                prop_assert!(!perm.pow(k).is_identity());
            }
        }
    }
}

#[test]
fn rejects_bad_partitions() {
    assert!(BakerPartition::new(3, vec![2, 1]).is_err());
    assert!(BakerPartition::admissible(2, vec![0, 1, 0]).is_err());
    assert!(BakerPartition::new(2, vec![0, 1, 0]).is_ok());
    assert!(BakerPartition::admissible(2, vec![1, 0, 0]).is_ok());
}
