//! Property tests for the cross-module invariants: characteristic counts and
//! bijections, the reduction sign against the series, Heisenberg action laws,
//! and theta parity/quasi-periodicity on randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use thetalocus::chars::{self, Characteristic, FundamentalSystem, SubsetTable};
use thetalocus::heisenberg::{act, admissible_pairs, q_poly, HeisenbergElement};
use thetalocus::sampling;
use thetalocus::theta::{theta1, theta1_nonreduced, PeriodMatrix, TruncationPolicy};

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn tau_from_seed(g: usize, seed: u64) -> PeriodMatrix {
    let mut rng = sampling::rng_from_seed(seed);
    sampling::random_tau(g, &mut rng)
}

fn z_from_seed(g: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = sampling::rng_from_seed(seed.wrapping_add(101));
    sampling::random_z(g, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// reduce() composed with evaluation reproduces the non-reduced series.
    #[test]
    fn reduce_sign_composes_with_theta(
        g in 1usize..=2,
        eps in proptest::collection::vec(-4i64..=4, 2),
        delta in proptest::collection::vec(-4i64..=4, 2),
        seed in 0u64..1000,
    ) {
        let eps = &eps[..g];
        let delta = &delta[..g];
        let tau = tau_from_seed(g, seed);
        let z = z_from_seed(g, seed);
        let (m, sign) = chars::reduce(eps, delta).unwrap();
        let reduced = theta1(&m, &tau, &z, &pol()).unwrap().value() * sign as f64;
        let non_reduced = theta1_nonreduced(eps, delta, &tau, &z, &pol()).unwrap().value();
        let scale = reduced.norm().max(1.0);
        prop_assert!((reduced - non_reduced).norm() < 1e-9 * scale);
    }

    /// The subset <-> characteristic maps are mutually inverse.
    #[test]
    fn subset_bijection_roundtrip(g in 1usize..=3, eps in 0u32..64, delta in 0u32..64) {
        let mask = (1u32 << g) - 1;
        let m = Characteristic::new(g, eps & mask, delta & mask).unwrap();
        let fs = FundamentalSystem::standard(g).unwrap();
        let table = SubsetTable::build(&fs);
        let t = table.char_to_subset(&m).unwrap();
        prop_assert_eq!(chars::subset_to_char(&t, &fs), m);
    }

    /// The Heisenberg group law and the polynomial action are compatible.
    #[test]
    fn heisenberg_action_compatible(
        g in 1usize..=3,
        t1 in prop::bool::ANY,
        x1 in 0u16..8,
        s1 in 0u16..8,
        t2 in prop::bool::ANY,
        x2 in 0u16..8,
        s2 in 0u16..8,
        pair_idx in 0usize..36,
    ) {
        let mask = (1u16 << g) - 1;
        let h1 = HeisenbergElement { t: if t1 { 1 } else { -1 }, x: x1 & mask, xstar: s1 & mask };
        let h2 = HeisenbergElement { t: if t2 { 1 } else { -1 }, x: x2 & mask, xstar: s2 & mask };
        let pairs = admissible_pairs(g);
        let (e, d) = pairs[pair_idx % pairs.len()];
        let q = q_poly(g, e, d).unwrap();
        prop_assert_eq!(act(&h1.compose(&h2), &q), act(&h1, &act(&h2, &q)));
    }

    /// theta[m](tau, -z) = (-1)^parity theta[m](tau, z).
    #[test]
    fn theta_parity_in_z(g in 1usize..=2, eps in 0u32..4, delta in 0u32..4, seed in 0u64..500) {
        let mask = (1u32 << g) - 1;
        let m = Characteristic::new(g, eps & mask, delta & mask).unwrap();
        let tau = tau_from_seed(g, seed);
        let z = z_from_seed(g, seed);
        let zn: Vec<Complex64> = z.iter().map(|&v| -v).collect();
        let a = theta1(&m, &tau, &z, &pol()).unwrap().value();
        let b = theta1(&m, &tau, &zn, &pol()).unwrap().value();
        let sgn = if m.is_even() { 1.0 } else { -1.0 };
        prop_assert!((a - sgn * b).norm() < 1e-9 * (1.0 + a.norm()));
    }

    /// Integer quasi-periodicity theta(z + b) = (-1)^{<eps, b>} theta(z).
    #[test]
    fn theta_integer_quasiperiodicity(
        g in 1usize..=2,
        eps in 0u32..4,
        delta in 0u32..4,
        shift in proptest::collection::vec(-2i64..=2, 2),
        seed in 0u64..500,
    ) {
        let mask = (1u32 << g) - 1;
        let m = Characteristic::new(g, eps & mask, delta & mask).unwrap();
        let tau = tau_from_seed(g, seed);
        let z = z_from_seed(g, seed);
        let b = &shift[..g];
        let zb: Vec<Complex64> = z.iter().zip(b).map(|(&zi, &bi)| zi + Complex64::new(bi as f64, 0.0)).collect();
        let base = theta1(&m, &tau, &z, &pol()).unwrap().value();
        let shifted = theta1(&m, &tau, &zb, &pol()).unwrap().value();
        let par: i64 = m.eps_bits().iter().zip(b).map(|(&e, &bi)| e as i64 * bi).sum();
        let sgn = if par.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        prop_assert!((shifted - sgn * base).norm() < 1e-9 * (1.0 + base.norm()));
    }
}

/// Even/odd counts for every supported small genus (exhaustive, not random).
#[test]
fn characteristic_counts() {
    for g in 1..=5usize {
        let even = Characteristic::all(g).filter(|m| m.is_even()).count();
        assert_eq!(even, (1 << (g - 1)) * ((1 << g) + 1));
    }
}
