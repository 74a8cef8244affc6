//! Eigenvalues and stability, the matrix exponential, and the stability equivalences for
//! cross-positive matrices.
//!
//! For `A` cross-positive on `K` the following coincide: `A` is stable, some `x ≻_K 0`
//! has `A x ≺_K 0`, and `-A⁻¹` is K-nonnegative. [`stable_cross_positive_checks`]
//! evaluates the three conditions independently and reports disagreement.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::cones::{block_cross_positive, ConeSpec, CrossPositivity};
use crate::error::{Error, Result};
use crate::linalg::{self, ensure_dim, ensure_finite, ensure_square};
use crate::riccati::BlockSystem;

pub const DEFAULT_MARGIN: f64 = 1e-9;

/// Three-way classification of the spectral abscissa against the margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    /// `|abscissa| <= margin`: too close to the imaginary axis to decide.
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    pub spectral_abscissa: f64,
    pub stable: bool,
    pub margin_tol: f64,
}

impl StabilityReport {
    pub fn classification(&self) -> Stability {
        if self.stable {
            Stability::Stable
        } else if self.spectral_abscissa <= self.margin_tol {
            Stability::Marginal
        } else {
            Stability::Unstable
        }
    }

    /// Eigenvalues ordered by real part, then imaginary part.
    pub fn sorted_eigenvalues(&self) -> Vec<Complex64> {
        let mut out = self.eigenvalues.clone();
        sort_complex(&mut out);
        out
    }

    /// Eigenvalues with nonnegative-or-marginal real part, the ones that prevent stability.
    pub fn offending_eigenvalues(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|z| z.re >= -self.margin_tol)
            .collect()
    }
}

pub fn sort_complex(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Result<StabilityReport> {
    eigenvalues_with_margin(m, DEFAULT_MARGIN)
}

/// Eigenvalues through a real Schur reduction; `stable` iff abscissa `< -margin`.
pub fn eigenvalues_with_margin(m: &DMatrix<f64>, margin: f64) -> Result<StabilityReport> {
    let n = ensure_square(m)?;
    ensure_finite(m, "eigenvalue input")?;
    let eigenvalues: Vec<Complex64> = if n == 0 {
        Vec::new()
    } else {
        let schur = Schur::try_new(m.clone(), f64::EPSILON, 200 * n + 200)
            .ok_or(Error::EigenSolverFailed(n))?;
        schur.complex_eigenvalues().iter().copied().collect()
    };
    if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenSolverFailed(n));
    }
    let spectral_abscissa = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        stable: spectral_abscissa < -margin,
        eigenvalues,
        spectral_abscissa,
        margin_tol: margin,
    })
}

pub fn spectral_abscissa(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.spectral_abscissa)
}

// Padé coefficients and 1-norm thresholds for the scaling-and-squaring method.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(f64, usize); 4] = [
    (1.495585217958292e-2, 3),
    (2.539_398_330_063_23e-1, 5),
    (9.504178996162932e-1, 7),
    (2.097847961257068e0, 9),
];
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Numerator/denominator pair `(V + U, V - U)` of a low-degree diagonal Padé approximant.
fn pade_low(a: &DMatrix<f64>, coeffs: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let mut even = &ident * coeffs[0];
    let mut odd = &ident * coeffs[1];
    let mut power = ident.clone();
    for k in 1..coeffs.len() / 2 {
        power = &power * &a2;
        even += &power * coeffs[2 * k];
        odd += &power * coeffs[2 * k + 1];
    }
    let u = a * odd;
    (&even + &u, &even - &u)
}

fn pade13(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &PADE13;
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a * (&a6 * inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    (&v + &u, &v - &u)
}

/// `e^{M t}` by scaling and squaring with a diagonal Padé approximant.
pub fn expm(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let n = ensure_square(m)?;
    ensure_finite(m, "matrix exponential input")?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "exponential time must be finite and nonnegative, got {t}"
        )));
    }
    let a = m * t;
    let norm = norm1(&a);
    if !norm.is_finite() {
        return Err(Error::ExpmOverflow(norm));
    }
    if n == 0 || norm == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }

    let coeffs: Option<&[f64]> = THETA.iter().find(|(theta, _)| norm <= *theta).map(
        |&(_, degree)| match degree {
            3 => &PADE3[..],
            5 => &PADE5[..],
            7 => &PADE7[..],
            _ => &PADE9[..],
        },
    );

    let (numer, denom, squarings) = match coeffs {
        Some(c) => {
            let (p, q) = pade_low(&a, c);
            (p, q, 0)
        }
        None => {
            let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
            let scaled = &a * 2f64.powi(-s);
            let (p, q) = pade13(&scaled);
            (p, q, s)
        }
    };

    let lu = denom.lu();
    let mut result = lu
        .solve(&numer)
        .ok_or(Error::Singular("Padé denominator"))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|v| !v.is_finite()) {
        return Err(Error::ExpmOverflow(norm));
    }
    Ok(result)
}

/// The three stability conditions for a cross-positive matrix, evaluated separately.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityEquivalence {
    pub cross_positivity: CrossPositivity,
    pub stability: StabilityReport,
    /// `x = -A⁻¹ w` with `x ≻_K 0` and `A x ≺_K 0`, when such a point was found.
    pub interior_witness: Option<DVector<f64>>,
    /// `None` when `A` is singular and `-A⁻¹` does not exist.
    pub neg_inverse_nonneg: Option<bool>,
}

impl StabilityEquivalence {
    pub fn cross_positive(&self) -> bool {
        self.cross_positivity.cross_positive
    }

    pub fn stable(&self) -> bool {
        self.stability.stable
    }

    pub fn witness_exists(&self) -> bool {
        self.interior_witness.is_some()
    }

    /// All three verdicts coincide (vacuous when `A` is singular).
    pub fn verdicts_agree(&self) -> bool {
        match self.neg_inverse_nonneg {
            Some(inv) => self.stable() == self.witness_exists() && inv == self.stable(),
            None => true,
        }
    }
}

pub fn stable_cross_positive_checks(cone: &ConeSpec, a: &DMatrix<f64>) -> Result<StabilityEquivalence> {
    stable_cross_positive_checks_with(cone, a, DEFAULT_MARGIN, None)
}

/// As [`stable_cross_positive_checks`] with an explicit margin and interior point `w`
/// (defaults to the sum of the generators).
///
/// A cross-positive `A` whose verdicts disagree yields [`Error::NumericalConsistency`],
/// unless the spectral abscissa lies inside the margin dead-band.
pub fn stable_cross_positive_checks_with(
    cone: &ConeSpec,
    a: &DMatrix<f64>,
    margin: f64,
    w: Option<&DVector<f64>>,
) -> Result<StabilityEquivalence> {
    let n = ensure_square(a)?;
    ensure_dim(cone.dim(), n, "matrix vs cone")?;
    let w = match w {
        Some(w) => {
            ensure_dim(n, w.len(), "interior point")?;
            if !cone.member(w)?.in_interior() {
                return Err(Error::NotInterior {
                    margin: cone.member(w)?.margin,
                });
            }
            w.clone()
        }
        None => cone.interior_point(),
    };

    let cross_positivity = cone.cross_positive(a)?;
    let stability = eigenvalues_with_margin(a, margin)?;

    let (interior_witness, neg_inverse_nonneg) = match linalg::inverse(a, "A") {
        Ok(inv) => {
            let neg_inv = -inv;
            let x = &neg_inv * &w;
            let ax = a * &x;
            let witness =
                (cone.member(&x)?.in_interior() && cone.member(&(-ax))?.in_interior()).then_some(x);
            let nonneg = cone.matrix_nonneg(&neg_inv)?.in_cone();
            (witness, Some(nonneg))
        }
        Err(Error::Singular(_)) => (None, None),
        Err(e) => return Err(e),
    };

    let report = StabilityEquivalence {
        cross_positivity,
        stability,
        interior_witness,
        neg_inverse_nonneg,
    };
    if report.cross_positive()
        && report.stability.classification() != Stability::Marginal
        && !report.verdicts_agree()
    {
        return Err(Error::NumericalConsistency(format!(
            "stability verdicts disagree for a cross-positive matrix: stable={}, witness={}, -A^-1 nonnegative={:?}",
            report.stable(),
            report.witness_exists(),
            report.neg_inverse_nonneg
        )));
    }
    Ok(report)
}

/// Interior vectors certifying stability of a cross-positive `L`:
/// `A v1 + B v2 = u1 ≺_K 0` and `C v1 + D v2 = u2 ≺_K 0` with `v1, v2 ≻_K 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub v1: DVector<f64>,
    pub v2: DVector<f64>,
    pub u1: DVector<f64>,
    pub u2: DVector<f64>,
    /// The interior point `w` of `K × K` with `v = -L⁻¹ w`.
    pub source_w: DVector<f64>,
    pub a_stability: StabilityReport,
    pub d_stability: StabilityReport,
}

impl Witness {
    pub fn v(&self) -> DVector<f64> {
        linalg::stack(&self.v1, &self.v2)
    }

    pub fn u(&self) -> DVector<f64> {
        linalg::stack(&self.u1, &self.u2)
    }

    /// `‖L v - u‖ / (‖L‖ ‖v‖)`.
    pub fn relative_residual(&self, sys: &BlockSystem) -> f64 {
        let v = self.v();
        let denom = (sys.l().norm() * v.norm()).max(f64::MIN_POSITIVE);
        (sys.l() * &v - self.u()).norm() / denom
    }
}

pub const WITNESS_RESIDUAL_TOL: f64 = 1e-10;

pub fn witness(cone: &ConeSpec, sys: &BlockSystem) -> Result<Witness> {
    witness_with(cone, sys, DEFAULT_MARGIN, None)
}

/// Builds the witness as `v = -L⁻¹ w`, `u = -w` for an interior `w` of `K × K`
/// (default: stacked generator sums) and verifies every invariant.
pub fn witness_with(
    cone: &ConeSpec,
    sys: &BlockSystem,
    margin: f64,
    w: Option<&DVector<f64>>,
) -> Result<Witness> {
    let n = sys.n();
    let blocks = block_cross_positive(cone, sys)?;
    if !blocks.verdict {
        return Err(Error::Hypothesis(format!(
            "L is not cross-positive on K x K: {}",
            blocks.failing_blocks().join(", ")
        )));
    }
    let l_report = eigenvalues_with_margin(sys.l(), margin)?;
    if !l_report.stable {
        return Err(Error::Hypothesis(format!(
            "L is not stable (spectral abscissa {:.6e})",
            l_report.spectral_abscissa
        )));
    }

    let product = cone.product();
    let product_cone = product.as_cone();
    let w = match w {
        Some(w) => {
            ensure_dim(2 * n, w.len(), "interior point of K x K")?;
            let order = product_cone.member(w)?;
            if !order.in_interior() {
                return Err(Error::NotInterior {
                    margin: order.margin,
                });
            }
            w.clone()
        }
        None => product.interior_point(),
    };

    let v = -linalg::solve(sys.l(), &w, "L")?;
    let u = -&w;
    let split = |x: &DVector<f64>| (x.rows(0, n).into_owned(), x.rows(n, n).into_owned());
    let (v1, v2) = split(&v);
    let (u1, u2) = split(&u);

    let out = Witness {
        v1,
        v2,
        u1,
        u2,
        source_w: w,
        a_stability: eigenvalues_with_margin(sys.a(), margin)?,
        d_stability: eigenvalues_with_margin(sys.d(), margin)?,
    };

    let residual = out.relative_residual(sys);
    if residual > WITNESS_RESIDUAL_TOL {
        return Err(Error::NumericalConsistency(format!(
            "witness residual {residual:.3e} exceeds {WITNESS_RESIDUAL_TOL:e}"
        )));
    }
    for (name, x) in [
        ("v1", out.v1.clone()),
        ("v2", out.v2.clone()),
        ("-u1", -&out.u1),
        ("-u2", -&out.u2),
    ] {
        let order = cone.member(&x)?;
        if !order.in_interior() {
            return Err(Error::NumericalConsistency(format!(
                "witness vector {name} is not interior: {order}"
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(n: usize, xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, xs)
    }

    fn one(x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x)
    }

    #[test]
    fn symmetric_two_by_two() {
        // det(λI - M) = (λ + 2)² - 1 = (λ + 1)(λ + 3)
        let report = eigenvalues(&m(2, &[-2.0, 1.0, 1.0, -2.0])).unwrap();
        let ev = report.sorted_eigenvalues();
        assert_relative_eq!(ev[0].re, -3.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1].re, -1.0, epsilon = 1e-12);
        assert!(report.stable);
        assert_relative_eq!(report.spectral_abscissa, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_and_rotation_are_not_stable() {
        let id = eigenvalues(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.spectral_abscissa, 1.0);
        assert!(!id.stable);
        assert_eq!(id.classification(), Stability::Unstable);

        let rot = eigenvalues(&m(2, &[0.0, 1.0, -1.0, 0.0])).unwrap();
        assert!(!rot.stable);
        assert!(rot.spectral_abscissa.abs() < 1e-14);
        assert_eq!(rot.classification(), Stability::Marginal);
        let ev = rot.sorted_eigenvalues();
        assert_relative_eq!(ev[0].im, -1.0, epsilon = 1e-14);
        assert_relative_eq!(ev[1].im, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        assert_eq!(
            eigenvalues(&m(2, &[f64::NAN, 0.0, 0.0, 1.0])),
            Err(Error::NonFinite("eigenvalue input"))
        );
    }

    #[test]
    fn expm_closed_forms() {
        let zero = DMatrix::zeros(3, 3);
        assert_eq!(expm(&zero, 2.5).unwrap(), DMatrix::identity(3, 3));

        let diag = m(2, &[-1.0, 0.0, 0.0, -2.0]);
        let e = expm(&diag, 1.0).unwrap();
        assert_relative_eq!(e[(0, 0)], (-1.0f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(e[(1, 1)], (-2.0f64).exp(), max_relative = 1e-13);
        assert_eq!(e[(0, 1)], 0.0);

        let nil = m(2, &[0.0, 1.0, 0.0, 0.0]);
        for t in [0.0, 0.3, 7.0, 120.0] {
            assert_relative_eq!(expm(&nil, t).unwrap(), m(2, &[1.0, t, 0.0, 1.0]), epsilon = 1e-12 * t.max(1.0));
        }
    }

    #[test]
    fn expm_uses_every_pade_degree() {
        // rotation generator: e^{Jt} = [[cos t, sin t], [-sin t, cos t]]
        let j = m(2, &[0.0, 1.0, -1.0, 0.0]);
        for t in [0.005, 0.1, 0.5, 1.5, 4.0, 30.0] {
            let e = expm(&j, t).unwrap();
            let exact = m(2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
            assert_relative_eq!(e, exact, epsilon = 1e-13 * t.max(1.0));
        }
    }

    #[test]
    fn expm_rejects_bad_time_and_overflow() {
        let a = m(2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(expm(&a, -1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(expm(&a, 1e6), Err(Error::ExpmOverflow(_))));
    }

    #[test]
    fn stability_checks_stable_example() {
        let k = ConeSpec::orthant(2).unwrap();
        let r = stable_cross_positive_checks(&k, &m(2, &[-2.0, 1.0, 1.0, -2.0])).unwrap();
        assert!(r.cross_positive() && r.stable() && r.witness_exists());
        assert_eq!(r.neg_inverse_nonneg, Some(true));
        // -A⁻¹ (1,1) = (1,1) and A (1,1) = (-1,-1)
        assert_relative_eq!(
            r.interior_witness.unwrap(),
            DVector::from_element(2, 1.0),
            epsilon = 1e-14
        );
    }

    #[test]
    fn stability_checks_unstable_examples() {
        let k = ConeSpec::orthant(2).unwrap();
        let r = stable_cross_positive_checks(&k, &DMatrix::identity(2, 2)).unwrap();
        assert!(r.cross_positive());
        assert!(!r.stable() && !r.witness_exists());
        assert_eq!(r.neg_inverse_nonneg, Some(false));

        // eigenvalues -4 and 2
        let r = stable_cross_positive_checks(&k, &m(2, &[-1.0, 3.0, 3.0, -1.0])).unwrap();
        assert!(r.cross_positive() && !r.stable());
        assert_relative_eq!(r.stability.spectral_abscissa, 2.0, epsilon = 1e-12);
        assert!(r.verdicts_agree());
    }

    #[test]
    fn stability_checks_singular_is_inconclusive() {
        let k = ConeSpec::orthant(2).unwrap();
        let r = stable_cross_positive_checks(&k, &m(2, &[-1.0, 1.0, 1.0, -1.0])).unwrap();
        assert_eq!(r.neg_inverse_nonneg, None);
        assert!(!r.stable());
        assert!(!r.witness_exists());
    }

    #[test]
    fn scalar_witness() {
        let k = ConeSpec::orthant(1).unwrap();
        let sys = BlockSystem::new(one(-2.0), one(1.0), one(1.0), one(-2.0)).unwrap();
        let w = witness(&k, &sys).unwrap();
        assert_relative_eq!(w.v1[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(w.v2[0], 1.0, epsilon = 1e-15);
        assert_eq!(w.u1[0], -1.0);
        assert_eq!(w.u2[0], -1.0);
        assert!(w.a_stability.stable && w.d_stability.stable);
    }

    #[test]
    fn witness_requires_hypotheses() {
        let k = ConeSpec::orthant(1).unwrap();
        let unstable = BlockSystem::new(one(0.0), one(1.0), one(1.0), one(0.0)).unwrap();
        assert!(matches!(witness(&k, &unstable), Err(Error::Hypothesis(_))));
        let not_cp = BlockSystem::new(one(-2.0), one(-1.0), one(1.0), one(-2.0)).unwrap();
        assert!(matches!(witness(&k, &not_cp), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn expm_matches_nalgebra() {
        let a = m(3, &[-1.0, 0.4, 2.0, 0.1, -3.0, 0.0, 1.0, 1.0, -0.5]);
        for t in [0.01, 1.0, 10.0] {
            let ours = expm(&a, t).unwrap();
            let theirs = (&a * t).exp();
            assert!(linalg::relative_diff(&ours, &theirs) < 1e-12);
        }
    }
}
