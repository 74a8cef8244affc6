use cone_riccati::cones::{block_cross_positive, ConeSpec};
use cone_riccati::instances::{
    random_cone, random_cross_positive, random_k_nonnegative, random_metzler, seeded_rng,
    transport,
};
use cone_riccati::linalg::assemble_blocks;
use cone_riccati::riccati::BlockSystem;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn cone_for(seed: u64, n: usize, orthant: bool) -> ConeSpec {
    if orthant {
        ConeSpec::orthant(n).unwrap()
    } else {
        random_cone(&mut seeded_rng(seed ^ 0x5eed), n, 20.0).unwrap()
    }
}

fn random_member(rng: &mut impl Rng, cone: &ConeSpec) -> DVector<f64> {
    let lambda = DVector::from_fn(cone.dim(), |_, _| rng.random::<f64>());
    cone.generators() * lambda
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nonnegative_matrices_closed_under_sum_and_product(seed in any::<u64>(), n in 1usize..7, orthant in any::<bool>()) {
        let cone = cone_for(seed, n, orthant);
        let mut rng = seeded_rng(seed);
        let m1 = random_k_nonnegative(&mut rng, &cone);
        let m2 = random_k_nonnegative(&mut rng, &cone);
        prop_assert!(cone.matrix_nonneg(&(&m1 + &m2)).unwrap().in_cone());
        prop_assert!(cone.matrix_nonneg(&(&m1 * &m2)).unwrap().in_cone());
    }

    #[test]
    fn nonnegative_matrices_are_monotone_maps(seed in any::<u64>(), n in 1usize..7, orthant in any::<bool>()) {
        let cone = cone_for(seed, n, orthant);
        let mut rng = seeded_rng(seed);
        let m = random_k_nonnegative(&mut rng, &cone);
        let y = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
        let x = &y + random_member(&mut rng, &cone);
        // x ⪰ y ⇒ M x ⪰ M y
        prop_assert!(cone.leq_vec(&(&m * &y), &(&m * &x)).unwrap().in_cone());
        // M1 ⪰ M2, x ⪰ 0 ⇒ M1 x ⪰ M2 x
        let m1 = &m + random_k_nonnegative(&mut rng, &cone);
        let z = random_member(&mut rng, &cone);
        prop_assert!(cone.leq_vec(&(&m * &z), &(&m1 * &z)).unwrap().in_cone());
    }

    #[test]
    fn nonnegative_implies_cross_positive(seed in any::<u64>(), n in 1usize..7, orthant in any::<bool>()) {
        let cone = cone_for(seed, n, orthant);
        let m = random_k_nonnegative(&mut seeded_rng(seed), &cone);
        prop_assert!(cone.cross_positive(&m).unwrap().cross_positive);
    }

    #[test]
    fn cross_positive_closed_under_sum(seed in any::<u64>(), n in 1usize..7, orthant in any::<bool>()) {
        let cone = cone_for(seed, n, orthant);
        let mut rng = seeded_rng(seed);
        let a = random_cross_positive(&mut rng, &cone, (-3.0, 3.0));
        let b = random_cross_positive(&mut rng, &cone, (-3.0, 3.0));
        prop_assert!(cone.cross_positive(&(&a + &b)).unwrap().cross_positive);
    }

    #[test]
    fn double_dual_is_identity(seed in any::<u64>(), n in 1usize..7) {
        let cone = cone_for(seed, n, false);
        // dual computed from scratch on both levels
        let dual = ConeSpec::simplicial(cone.inverse_generators().transpose()).unwrap();
        let back = ConeSpec::simplicial(dual.inverse_generators().transpose()).unwrap();
        let g = cone.generators();
        prop_assert!((&back.generators() - &g).norm() <= 1e-10 * g.norm());
        prop_assert!((&cone.dual().dual().generators() - &g).norm() <= 1e-10 * g.norm());
    }

    #[test]
    fn cross_positivity_is_conjugation_covariant(seed in any::<u64>(), n in 2usize..7) {
        let cone = cone_for(seed, n, false);
        let mut rng = seeded_rng(seed);
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.2);
        a *= 3.0;
        let orthant = ConeSpec::orthant(n).unwrap();
        let coords = cone.inverse_generators() * &a * cone.generators();
        prop_assert_eq!(
            cone.cross_positive(&a).unwrap().cross_positive,
            orthant.cross_positive(&coords).unwrap().cross_positive
        );
    }

    #[test]
    fn orthant_equals_identity_simplicial(seed in any::<u64>(), n in 1usize..7) {
        let orthant = ConeSpec::orthant(n).unwrap();
        let ident = ConeSpec::simplicial(DMatrix::identity(n, n)).unwrap();
        let mut rng = seeded_rng(seed);
        let x = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.3);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.3);
        prop_assert_eq!(orthant.member(&x).unwrap(), ident.member(&x).unwrap());
        prop_assert_eq!(orthant.matrix_nonneg(&m).unwrap(), ident.matrix_nonneg(&m).unwrap());
        prop_assert_eq!(orthant.cross_positive(&m).unwrap(), ident.cross_positive(&m).unwrap());
        prop_assert_eq!(orthant.dual().generators(), ident.dual().generators());
    }
}

#[test]
fn block_decomposition_agrees_with_product_cone_test() {
    let mut rng = seeded_rng(2024);
    let mut positives = 0;
    for trial in 0..100u64 {
        let n = 1 + (trial as usize % 5);
        let cone = cone_for(trial, n, trial % 3 == 0);
        let metzler = random_metzler(&mut rng, 2 * n, (-2.0, 2.0));
        let mut l = metzler.clone();
        // knock out cross-positivity in a block for roughly half the trials
        if trial % 2 == 1 {
            let i = rng.random_range(0..2 * n);
            let j = (i + 1 + rng.random_range(0..2 * n - 1)) % (2 * n);
            l[(i, j)] = -0.5 - rng.random::<f64>();
        }
        let coords = |r: usize, c: usize| l.view((r * n, c * n), (n, n)).into_owned();
        let sys = BlockSystem::new(
            transport(&cone, &coords(0, 0)),
            transport(&cone, &coords(0, 1)),
            transport(&cone, &coords(1, 0)),
            transport(&cone, &coords(1, 1)),
        )
        .unwrap();
        let verdict = block_cross_positive(&cone, &sys).unwrap();
        assert!(verdict.consistent(), "trial {trial}: {verdict:?}");
        assert_eq!(verdict.verdict, trial % 2 == 0 || n == 0, "trial {trial}");
        positives += verdict.verdict as usize;
    }
    assert_eq!(positives, 50);
}

#[test]
fn product_cone_membership_is_factorwise() {
    let cone = cone_for(7, 3, false);
    let product = cone.product().as_cone();
    let mut rng = seeded_rng(8);
    let x = random_member(&mut rng, &cone);
    let y = random_member(&mut rng, &cone);
    let stacked = DVector::from_iterator(6, x.iter().chain(y.iter()).copied());
    assert!(product.member(&stacked).unwrap().in_cone());
    let bad = DVector::from_iterator(6, x.iter().chain((-&y).iter()).copied());
    assert!(!product.member(&bad).unwrap().in_cone());
    // block-diagonal maps of K-nonnegative blocks are (K×K)-nonnegative
    let a = random_k_nonnegative(&mut rng, &cone);
    let z = DMatrix::zeros(3, 3);
    assert!(product
        .matrix_nonneg(&assemble_blocks(&a, &z, &z, &a))
        .unwrap()
        .in_cone());
}
