use paramray::portrait::{blocks_unlinked, enumerate_portraits, quadratic_portrait, validate_portrait, EnumerationLimits};
use paramray::{Angle, PortraitBlock};
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = (u64, u64)> {
    (1u64..200).prop_flat_map(|q| (0..q, Just(q)))
}

proptest! {
    #[test]
    fn orbit_length_is_bounded_by_the_denominator((p, q) in angle(), d in 2u32..6) {
        let t = Angle::frac(p, q);
        let o = t.orbit(d);
        let den: u64 = t.den().try_into().unwrap();
        prop_assert!((o.preperiod + o.period) as u64 <= den);
        for w in o.orbit.windows(2) {
            prop_assert_eq!(w[0].times(d), w[1].clone());
        }
        // The orbit closes up: the last element maps back into it.
        let back = o.orbit.last().unwrap().times(d);
        prop_assert_eq!(&back, &o.orbit[o.preperiod]);
    }

    #[test]
    fn quadratic_portraits_are_valid((p, q) in angle()) {
        let t = Angle::frac(p, q);
        let portrait = quadratic_portrait(&t);
        prop_assert!(validate_portrait(&portrait).valid);
        let b = &portrait.blocks()[0].angles();
        prop_assert_eq!(b[0].times(2), t.clone());
        prop_assert_eq!(b[1].times(2), t);
    }

    #[test]
    fn unlinkedness_is_symmetric(a in prop::collection::btree_set(0u64..48, 2..5), b in prop::collection::btree_set(0u64..48, 2..5)) {
        prop_assume!(a.is_disjoint(&b));
        let block = |s: &std::collections::BTreeSet<u64>| PortraitBlock::new(s.iter().map(|&n| Angle::frac(n, 48)).collect()).unwrap();
        let (x, y) = (block(&a), block(&b));
        prop_assert_eq!(blocks_unlinked(&x, &y).unwrap(), blocks_unlinked(&y, &x).unwrap());
    }
}

#[test]
fn enumerated_portraits_validate() {
    for (d, max_den) in [(2, 12), (3, 8), (4, 4)] {
        let all = enumerate_portraits(d, max_den, EnumerationLimits::default()).unwrap();
        assert!(!all.is_empty());
        for p in &all {
            assert!(validate_portrait(p).valid, "{p}");
        }
    }
}

#[test]
fn quadratic_enumeration_matches_direct_generation() {
    for max_den in 1..=8u64 {
        let listed = enumerate_portraits(2, max_den, EnumerationLimits::default()).unwrap();
        let mut direct = Vec::new();
        for q in 1..=max_den {
            for p in 0..q {
                if num_gcd(p, q) != 1 {
                    continue;
                }
                let portrait = quadratic_portrait(&Angle::frac(p, q));
                let fits = portrait.blocks()[0].angles().iter().all(|a| a.den() <= &max_den.into());
                if fits && !direct.contains(&portrait) {
                    direct.push(portrait);
                }
            }
        }
        direct.sort_by_key(|p| p.to_string());
        let mut got = listed.clone();
        got.sort_by_key(|p| p.to_string());
        assert_eq!(got, direct, "max_den = {max_den}");
    }
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}
