use cone_riccati::cones::ConeSpec;
use cone_riccati::instances::{
    random_cone, random_cross_positive, random_k_nonnegative, seeded_rng,
};
use cone_riccati::sylvester::{
    default_truncation, integral_solution, kronecker_solve, check_nonneg_solution, solve_sylvester,
    sylvester_residual, SchurSylvester, SylvesterMethod, SylvesterProblem, QUADRATURE_NODES,
};
use cone_riccati::Error;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_dense(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

fn stable_dense(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = random_dense(rng, n);
    // shift by the Frobenius norm, which dominates every eigenvalue's real part
    let shift = m.norm() + 0.5;
    m - DMatrix::identity(n, n) * shift
}

#[test]
fn schur_matches_kronecker_oracle() {
    let mut rng = seeded_rng(21);
    for n in 1..=20 {
        let a = random_dense(&mut rng, n) * 3.0;
        let d = random_dense(&mut rng, n) * 3.0 - DMatrix::identity(n, n) * 2.0;
        let c = random_dense(&mut rng, n);
        let schur = SchurSylvester::new(&a, &d).unwrap().solve(&c).unwrap();
        let kron = kronecker_solve(&a, &d, &c).unwrap();
        let rel = (&schur - &kron).norm() / kron.norm();
        assert!(rel <= 1e-10, "n = {n}: relative gap {rel:e}");
    }
}

#[test]
fn schur_solution_is_linear_in_the_right_hand_side() {
    let mut rng = seeded_rng(22);
    let n = 7;
    let solver = SchurSylvester::new(&stable_dense(&mut rng, n), &stable_dense(&mut rng, n)).unwrap();
    let c1 = random_dense(&mut rng, n);
    let c2 = random_dense(&mut rng, n);
    let combined = solver.solve(&(&c1 * 2.5 - &c2)).unwrap();
    let parts = solver.solve(&c1).unwrap() * 2.5 - solver.solve(&c2).unwrap();
    assert!((&combined - &parts).norm() <= 1e-12 * parts.norm().max(1.0));
}

#[test]
fn schur_residual_is_small() {
    let mut rng = seeded_rng(23);
    for n in [1, 3, 10, 40] {
        let a = stable_dense(&mut rng, n);
        let d = stable_dense(&mut rng, n);
        let c = random_dense(&mut rng, n);
        let x = solve_sylvester(&SylvesterProblem {
            a: a.clone(),
            d: d.clone(),
            c: c.clone(),
            method: SylvesterMethod::SchurBased,
        })
        .unwrap();
        let scale = (a.norm() + d.norm()) * x.norm() + c.norm();
        assert!(sylvester_residual(&a, &d, &c, &x) <= 1e-13 * scale, "n = {n}");
    }
}

#[test]
fn quadrature_matches_schur_on_stable_instances() {
    let mut rng = seeded_rng(24);
    for n in 1..=8 {
        let a = stable_dense(&mut rng, n);
        let d = stable_dense(&mut rng, n);
        let c = random_dense(&mut rng, n);
        let schur = SchurSylvester::new(&a, &d).unwrap().solve(&c).unwrap();
        let t_max = default_truncation(&a, &d).unwrap();
        let quad = integral_solution(&a, &d, &c, t_max, QUADRATURE_NODES).unwrap();
        let rel = (&schur - &quad).norm() / schur.norm();
        assert!(rel <= 1e-6, "n = {n}: relative gap {rel:e}");
    }
}

#[test]
fn coinciding_spectra_are_rejected() {
    // spec(D) ∩ spec(-A) = {1}
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -3.0]);
    let d = DMatrix::from_row_slice(2, 2, &[1.0, 5.0, 0.0, 2.0]);
    assert!(matches!(
        SchurSylvester::new(&a, &d),
        Err(Error::IllPosedSylvester { .. })
    ));
}

#[test]
fn solution_stays_in_the_cone() {
    let mut rng = seeded_rng(25);
    for trial in 0..100u64 {
        let n = 1 + (trial as usize % 8);
        let cone = if trial % 2 == 0 {
            ConeSpec::orthant(n).unwrap()
        } else {
            random_cone(&mut rng, n, 20.0).unwrap()
        };
        let a = random_cross_positive(&mut rng, &cone, (-2.0, -0.05));
        let d = random_cross_positive(&mut rng, &cone, (-2.0, -0.05));
        let c = random_k_nonnegative(&mut rng, &cone);
        let order = check_nonneg_solution(&cone, &a, &d, &c).unwrap();
        assert!(order.in_cone(), "trial {trial}");
    }
}

#[test]
fn cone_check_reports_unmet_hypotheses() {
    let cone = ConeSpec::orthant(2).unwrap();
    let stable = DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 1.0, -2.0]);
    let unstable = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 2.0, -1.0]);
    let not_metzler = DMatrix::from_row_slice(2, 2, &[-2.0, -1.0, 1.0, -2.0]);
    let c = DMatrix::from_element(2, 2, 1.0);
    let hyp = |r| matches!(r, Err(Error::Hypothesis(_)));
    assert!(hyp(check_nonneg_solution(&cone, &unstable, &stable, &c)));
    assert!(hyp(check_nonneg_solution(&cone, &stable, &not_metzler, &c)));
    assert!(hyp(check_nonneg_solution(&cone, &stable, &stable, &-c)));
}
