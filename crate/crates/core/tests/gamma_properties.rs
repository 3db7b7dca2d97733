use gauge_lab::gamma::{gamma_estimate_seeded, gamma_lower_bound, parrot_block, transfer_lift, Budget, Poly2};
use gauge_lab::linalg::{cplx, from_real_rows, random_complex, DenseMatrix};
use gauge_lab::norms::{a_plus, dual_space, real_shadow, SpaceDescriptor, Vec2};
use gauge_lab::optimize::stream_rng;
use proptest::prelude::*;
use rand::Rng;

fn space() -> impl Strategy<Value = SpaceDescriptor> {
    prop_oneof![
        (1.0..6.0f64).prop_map(|p| SpaceDescriptor::lp(p).unwrap()),
        (1.0..6.0f64, 1.0..6.0f64).prop_map(|(p, q)| SpaceDescriptor::bpq(p, q).unwrap()),
    ]
}

fn complex_psd(seed: u64, k: u64) -> DenseMatrix {
    let m = random_complex(&mut stream_rng(seed, k), 2, 2);
    &m * m.adjoint()
}

fn random_poly(seed: u64, k: u64) -> Poly2 {
    let mut rng = stream_rng(seed, k);
    let deg = rng.random_range(0..=3usize);
    let coeffs = (0..=deg)
        .map(|_| {
            (0..=deg)
                .map(|_| cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    Poly2::new(coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parrot_block_is_multiplicative(seed in 0u64..1_000_000) {
        let (f, g) = (random_poly(seed, 1), random_poly(seed, 2));
        let mut rng = stream_rng(seed, 3);
        let w = Vec2::new(cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), cplx(rng.random_range(-1.0..1.0), 0.3));
        let (t1, t2) = (random_complex(&mut rng, 2, 2), random_complex(&mut rng, 2, 2));
        let lhs = parrot_block(&f.mul(&g), &w, &t1, &t2).unwrap();
        let rhs = parrot_block(&f, &w, &t1, &t2).unwrap() * parrot_block(&g, &w, &t1, &t2).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9);
    }

    #[test]
    fn a_plus_never_lowers_the_value(space in space(), seed in 0u64..1_000_000) {
        let (a, b) = (complex_psd(seed, 4), complex_psd(seed, 5));
        let before = gamma_lower_bound(&space, &a, &b).unwrap().value;
        let after = gamma_lower_bound(&space, &a_plus(&a).unwrap(), &a_plus(&b).unwrap()).unwrap().value;
        prop_assert!(after >= before - 1e-9, "{} < {}", after, before);
    }

    #[test]
    fn rank_one_pair_gives_at_least_one(space in space()) {
        let e11 = from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        prop_assert!(gamma_lower_bound(&space, &e11, &e11).unwrap().value >= 1.0 - 1e-6);
    }

    #[test]
    fn transfer_preserves_value_and_norms(space in space(), seed in 0u64..1_000_000) {
        let mut rng = stream_rng(seed, 6);
        let mut real_psd = || {
            let (x, y) = (rng.random_range(0.1..2.0f64), rng.random_range(0.1..2.0f64));
            let r = rng.random_range(0.0..1.0) * (x * y).sqrt();
            from_real_rows(&[&[x, r], &[r, y]])
        };
        let (a, b) = (real_psd(), real_psd());
        let w = gamma_lower_bound(&real_shadow(&space).unwrap(), &a, &b).unwrap();
        let lifted = transfer_lift(&space, &w).unwrap();
        prop_assert!((lifted.value - w.value).abs() <= 1e-12);
        prop_assert!((lifted.norm_a - w.norm_a).abs() <= 1e-12);
        prop_assert!((lifted.norm_b - w.norm_b).abs() <= 1e-12);
    }
}

#[test]
fn estimate_is_monotone_in_nested_starts() {
    let space = SpaceDescriptor::bpq(1.5, 4.0).unwrap();
    let mut last = f64::NEG_INFINITY;
    for starts in [2, 4, 8, 16] {
        let v = gamma_estimate_seeded(&space, Budget::new(starts, 200).unwrap(), 3)
            .unwrap()
            .value;
        assert!(v >= last - 1e-12, "{starts}: {v} < {last}");
        last = v;
    }
}

#[test]
fn estimate_matches_on_the_dual_space() {
    let budget = Budget::new(16, 300).unwrap();
    for space in [
        SpaceDescriptor::lp(3.0).unwrap(),
        SpaceDescriptor::bpq(1.0, 2.0).unwrap(),
    ] {
        let g = gamma_estimate_seeded(&space, budget, 1).unwrap().value;
        let h = gamma_estimate_seeded(&dual_space(&space).unwrap(), budget, 1)
            .unwrap()
            .value;
        assert!((g - h).abs() <= 2e-3, "{space}: {g} vs dual {h}");
    }
}
