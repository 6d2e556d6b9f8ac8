use proptest::prelude::*;

use psum::expsum::exponential_sum;
use psum::variety::{brute_force_points, fp_point_count, hensel_enumerate};
use psum::{Budget, PolySystem};

fn line(p: u64, a: u64, b: u64, k: u32) -> PolySystem {
    PolySystem::parse(p, 2, &[&format!("{a}*x1 + {b}*x2 + x2^2")], &format!("x2^{k} + x1")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hensel_matches_brute_force(p in prop::sample::select(vec![2u64, 3, 5]), a in 1u64..5, b in 0u64..5, m in 1u32..4) {
        prop_assume!(a % p != 0);
        let s = line(p, a, b, 2);
        let budget = Budget::new(50_000_000);
        let fp = fp_point_count(&s, &budget).unwrap();
        let h = hensel_enumerate(&s, m, &budget, 1).unwrap().count;
        let brute = brute_force_points(&s, m, &budget).unwrap().count;
        prop_assert_eq!(h, brute);
        prop_assert_eq!(h, fp * (p as u128).pow(m - 1));
    }

    #[test]
    fn sums_are_bounded_and_conjugate(a in 1u64..3, b in 0u64..3, k in 2u32..4, m in 1u32..5, u in 1u64..81) {
        let p = 3u64;
        let modulus = p.pow(m);
        let u = u % modulus;
        prop_assume!(u % p != 0);
        let s = line(p, a, b, k);
        let budget = Budget::new(50_000_000);
        let e = exponential_sum(&s, m, u, &budget).unwrap();
        let e_neg = exponential_sum(&s, m, modulus - u, &budget).unwrap();
        prop_assert!(e.norm() <= 1.0 + 1e-12);
        prop_assert!((e - e_neg.conj()).norm() < 1e-9);
    }
}
