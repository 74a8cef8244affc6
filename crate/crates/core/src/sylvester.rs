//! The Sylvester equation `D X + X A + C = 0`.
//!
//! The production path is a Bartels–Stewart style solver on the real Schur forms of `D`
//! and `A` ([`SchurSylvester`]); it factors once and can then be reused for many
//! right-hand sides, which is how the fixed-point Riccati iteration calls it. Two oracles
//! are kept next to it: the dense Kronecker system and the integral
//! `X = ∫₀^∞ e^{Dt} C e^{At} dt`, valid when `A` and `D` are stable.

use nalgebra::{DMatrix, Schur};

use crate::cones::{ConeOrder, ConeSpec};
use crate::error::{Error, Result};
use crate::linalg::{ensure_dim, ensure_finite, ensure_square};
use crate::spectral::{self, expm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SylvesterMethod {
    #[default]
    SchurBased,
    Kronecker,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SylvesterProblem {
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub method: SylvesterMethod,
}

/// Ill-posedness threshold, relative to `‖A‖ + ‖D‖`.
pub const SEPARATION_TOL: f64 = 1e-8;
/// Largest `n` accepted by the Kronecker oracle.
pub const KRONECKER_MAX_N: usize = 20;
pub const QUADRATURE_NODES: usize = 200;
const NODES_PER_PANEL: usize = 20;
const TRUNCATION_TARGET: f64 = 1e-10;

pub fn solve_sylvester(p: &SylvesterProblem) -> Result<DMatrix<f64>> {
    match p.method {
        SylvesterMethod::SchurBased => SchurSylvester::new(&p.a, &p.d)?.solve(&p.c),
        SylvesterMethod::Kronecker => kronecker_solve(&p.a, &p.d, &p.c),
        SylvesterMethod::Quadrature => {
            let t_max = default_truncation(&p.a, &p.d)?;
            integral_solution(&p.a, &p.d, &p.c, t_max, QUADRATURE_NODES)
        }
    }
}

/// `‖D X + X A + C‖_F`.
pub fn sylvester_residual(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    c: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> f64 {
    (d * x + x * a + c).norm()
}

fn check_shapes(a: &DMatrix<f64>, d: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<usize> {
    let n = ensure_square(a)?;
    ensure_dim(n, ensure_square(d)?, "D vs A")?;
    ensure_dim(n, ensure_square(c)?, "C vs A")?;
    ensure_finite(a, "A")?;
    ensure_finite(d, "D")?;
    ensure_finite(c, "C")?;
    Ok(n)
}

/// Diagonal blocks `(start, size)` of a quasi-upper-triangular matrix.
fn diagonal_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            out.push((i, 2));
            i += 2;
        } else {
            out.push((i, 1));
            i += 1;
        }
    }
    out
}

/// Factored solver for `D X + X A + C = 0` with fixed `A`, `D`.
#[derive(Debug, Clone)]
pub struct SchurSylvester {
    n: usize,
    q_d: DMatrix<f64>,
    t_d: DMatrix<f64>,
    q_a: DMatrix<f64>,
    t_a: DMatrix<f64>,
    blocks_d: Vec<(usize, usize)>,
    blocks_a: Vec<(usize, usize)>,
    min_separation: f64,
}

impl SchurSylvester {
    pub fn new(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<Self> {
        let n = ensure_square(a)?;
        ensure_dim(n, ensure_square(d)?, "D vs A")?;
        ensure_finite(a, "A")?;
        ensure_finite(d, "D")?;
        let max_iter = 200 * n + 200;
        let schur_a = Schur::try_new(a.clone(), f64::EPSILON, max_iter)
            .ok_or(Error::EigenSolverFailed(n))?;
        let schur_d = Schur::try_new(d.clone(), f64::EPSILON, max_iter)
            .ok_or(Error::EigenSolverFailed(n))?;
        let eig_a = schur_a.complex_eigenvalues();
        let eig_d = schur_d.complex_eigenvalues();
        let (q_a, t_a) = schur_a.unpack();
        let (q_d, t_d) = schur_d.unpack();

        let min_separation = eig_d
            .iter()
            .flat_map(|ld| eig_a.iter().map(move |la| (ld + la).norm()))
            .fold(f64::INFINITY, f64::min);
        let threshold = SEPARATION_TOL * (a.norm() + d.norm());
        if n > 0 && (min_separation.is_nan() || min_separation < threshold) {
            return Err(Error::IllPosedSylvester {
                min_sum: min_separation,
                threshold,
            });
        }

        Ok(SchurSylvester {
            n,
            blocks_d: diagonal_blocks(&t_d),
            blocks_a: diagonal_blocks(&t_a),
            q_d,
            t_d,
            q_a,
            t_a,
            min_separation,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest `|λ_D + λ_A|` over all eigenvalue pairs.
    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn solve(&self, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.n;
        ensure_dim(n, ensure_square(c)?, "C vs A")?;
        ensure_finite(c, "C")?;
        // S Y + Y T = F with S = T_d, T = T_a, F = -Q_dᵀ C Q_a, X = Q_d Y Q_aᵀ
        let f = -(self.q_d.transpose() * c * &self.q_a);
        let s = &self.t_d;
        let t = &self.t_a;
        let mut y = DMatrix::<f64>::zeros(n, n);

        for &(j0, q) in &self.blocks_a {
            for &(i0, p) in self.blocks_d.iter().rev() {
                let mut rhs = f.view((i0, j0), (p, q)).into_owned();
                let below = i0 + p;
                if below < n {
                    rhs -= s.view((i0, below), (p, n - below)) * y.view((below, j0), (n - below, q));
                }
                if j0 > 0 {
                    rhs -= y.view((i0, 0), (p, j0)) * t.view((0, j0), (j0, q));
                }
                let block = solve_small(
                    &s.view((i0, i0), (p, p)).into_owned(),
                    &t.view((j0, j0), (q, q)).into_owned(),
                    &rhs,
                )?;
                y.view_mut((i0, j0), (p, q)).copy_from(&block);
            }
        }
        Ok(&self.q_d * y * self.q_a.transpose())
    }
}

/// Solves `S Z + Z T = R` for blocks of size at most 2 through the Kronecker form.
fn solve_small(s: &DMatrix<f64>, t: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (p, q) = (s.nrows(), t.nrows());
    if p == 1 && q == 1 {
        let denom = s[(0, 0)] + t[(0, 0)];
        if denom == 0.0 {
            return Err(Error::IllPosedSylvester {
                min_sum: 0.0,
                threshold: 0.0,
            });
        }
        return Ok(DMatrix::from_element(1, 1, rhs[(0, 0)] / denom));
    }
    let k = kronecker_operator(t, s);
    let b = nalgebra::DVector::from_column_slice(rhs.as_slice());
    let z = k.lu().solve(&b).ok_or(Error::IllPosedSylvester {
        min_sum: 0.0,
        threshold: 0.0,
    })?;
    Ok(DMatrix::from_column_slice(p, q, z.as_slice()))
}

/// `I ⊗ D + Aᵀ ⊗ I`, the matrix of `X ↦ D X + X A` on column-major `vec(X)`.
fn kronecker_operator(a: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, q) = (d.nrows(), a.nrows());
    let mut k = DMatrix::<f64>::zeros(p * q, p * q);
    for j in 0..q {
        k.view_mut((j * p, j * p), (p, p)).copy_from(d);
        for l in 0..q {
            let alj = a[(l, j)];
            if alj != 0.0 {
                for i in 0..p {
                    k[(j * p + i, l * p + i)] += alj;
                }
            }
        }
    }
    k
}

/// Dense Kronecker-system oracle, `O(n⁶)`; limited to `n <= KRONECKER_MAX_N`.
pub fn kronecker_solve(a: &DMatrix<f64>, d: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = check_shapes(a, d, c)?;
    if n > KRONECKER_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "Kronecker oracle is limited to n <= {KRONECKER_MAX_N}, got {n}"
        )));
    }
    let k = kronecker_operator(a, d);
    let rhs = -nalgebra::DVector::from_column_slice(c.as_slice());
    let x = crate::linalg::solve(&k, &rhs, "Kronecker Sylvester operator").map_err(|_| {
        Error::IllPosedSylvester {
            min_sum: 0.0,
            threshold: SEPARATION_TOL * (a.norm() + d.norm()),
        }
    })?;
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}

/// Truncation time with `e^{(α_A + α_D) t_max} = 1e-10` from the spectral abscissas.
pub fn default_truncation(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<f64> {
    let alpha_a = spectral::spectral_abscissa(a)?;
    let alpha_d = spectral::spectral_abscissa(d)?;
    if alpha_a >= 0.0 {
        return Err(Error::NotStable("A"));
    }
    if alpha_d >= 0.0 {
        return Err(Error::NotStable("D"));
    }
    Ok(TRUNCATION_TARGET.ln() / (alpha_a + alpha_d))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_order and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = (p1, p0);
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫₀^{t_max} e^{Dt} C e^{At} dt` by composite Gauss–Legendre on geometrically growing
/// panels `[0, h], [h, 2h], [2h, 4h], …, [t_max/2, t_max]`.
///
/// `steps` is the node budget; the panel count grows past it when the first panel
/// would be wider than `1 / (‖A‖₁ + ‖D‖₁)`.
pub fn integral_solution(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    c: &DMatrix<f64>,
    t_max: f64,
    steps: usize,
) -> Result<DMatrix<f64>> {
    let n = check_shapes(a, d, c)?;
    if spectral::spectral_abscissa(a)? >= 0.0 {
        return Err(Error::NotStable("A"));
    }
    if spectral::spectral_abscissa(d)? >= 0.0 {
        return Err(Error::NotStable("D"));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let rate = (norm1(a) + norm1(d)).max(f64::MIN_POSITIVE);
    let mut panels = steps.div_ceil(NODES_PER_PANEL).max(2);
    while t_max * 2f64.powi(-(panels as i32 - 1)) * rate > 1.0 && panels < 200 {
        panels += 1;
    }

    let (nodes, weights) = gauss_legendre(NODES_PER_PANEL);
    let mut edges = vec![0.0];
    edges.extend((0..panels).map(|k| t_max * 2f64.powi(k as i32 + 1 - panels as i32)));

    let mut x = DMatrix::<f64>::zeros(n, n);
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (node, weight) in nodes.iter().zip(&weights) {
            let t = mid + half * node;
            let integrand = expm(d, t)? * c * expm(a, t)?;
            x += integrand * (weight * half);
        }
    }
    Ok(x)
}

/// Solves `D X + X A + C = 0` under stable, cross-positive `A`, `D` and K-nonnegative
/// `C`, and returns the K-nonnegativity verdict of the solution.
///
/// Unmet hypotheses are an [`Error::Hypothesis`]. A solution outside `π(K)` contradicts
/// the theory and is reported as [`Error::NumericalConsistency`].
pub fn check_nonneg_solution(
    cone: &ConeSpec,
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<ConeOrder> {
    let n = check_shapes(a, d, c)?;
    ensure_dim(cone.dim(), n, "matrices vs cone")?;
    for (name, m) in [("A", a), ("D", d)] {
        if !cone.cross_positive(m)?.cross_positive {
            return Err(Error::Hypothesis(format!("{name} is not cross-positive on K")));
        }
        let report = spectral::eigenvalues(m)?;
        if !report.stable {
            return Err(Error::Hypothesis(format!(
                "{name} is not stable (spectral abscissa {:.3e})",
                report.spectral_abscissa
            )));
        }
    }
    let c_order = cone.matrix_nonneg(c)?;
    if !c_order.in_cone() {
        return Err(Error::Hypothesis(format!("C is not K-nonnegative: {c_order}")));
    }
    let x = SchurSylvester::new(a, d)?.solve(c)?;
    let order = cone.matrix_nonneg(&x)?;
    if !order.in_cone() {
        return Err(Error::NumericalConsistency(format!(
            "Sylvester solution left the cone: {order}"
        )));
    }
    Ok(order)
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

    fn all_methods(a: &DMatrix<f64>, d: &DMatrix<f64>, c: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        [
            SylvesterMethod::SchurBased,
            SylvesterMethod::Kronecker,
            SylvesterMethod::Quadrature,
        ]
        .into_iter()
        .map(|method| {
            solve_sylvester(&SylvesterProblem {
                a: a.clone(),
                d: d.clone(),
                c: c.clone(),
                method,
            })
            .unwrap()
        })
        .collect()
    }

    #[test]
    fn scalar_closed_form() {
        for x in all_methods(&one(-2.0), &one(-2.0), &one(1.0)) {
            assert_relative_eq!(x[(0, 0)], 0.25, max_relative = 1e-9);
        }
        for x in all_methods(&one(-1.0), &one(-1.0), &one(1.0)) {
            assert_relative_eq!(x[(0, 0)], 0.5, max_relative = 1e-9);
        }
    }

    #[test]
    fn zero_right_hand_side() {
        let a = m(2, &[-3.0, 1.0, 0.5, -2.0]);
        let d = m(2, &[-1.0, 0.2, 0.0, -4.0]);
        for x in all_methods(&a, &d, &DMatrix::zeros(2, 2)) {
            assert_eq!(x.norm(), 0.0);
        }
    }

    #[test]
    fn complex_eigenvalues_use_two_by_two_blocks() {
        let a = m(3, &[-1.0, 2.0, 0.0, -2.0, -1.0, 0.3, 0.1, 0.0, -0.5]);
        let d = m(3, &[-0.2, 1.5, 0.4, -1.5, -0.2, 0.0, 0.0, 0.7, -3.0]);
        let c = m(3, &[1.0, -2.0, 0.5, 0.0, 3.0, 1.0, -1.0, 0.25, 2.0]);
        let solver = SchurSylvester::new(&a, &d).unwrap();
        assert!(solver.blocks_a.iter().any(|b| b.1 == 2));
        assert!(solver.blocks_d.iter().any(|b| b.1 == 2));
        let x = solver.solve(&c).unwrap();
        assert!(sylvester_residual(&a, &d, &c, &x) < 1e-13 * x.norm());
        let oracle = kronecker_solve(&a, &d, &c).unwrap();
        assert!(crate::linalg::relative_diff(&x, &oracle) < 1e-12);
    }

    #[test]
    fn ill_posed_is_rejected() {
        // λ_D = 1, λ_A = -1
        let err = SchurSylvester::new(&one(-1.0), &one(1.0)).unwrap_err();
        assert!(matches!(err, Error::IllPosedSylvester { .. }));
        assert!(kronecker_solve(&one(-1.0), &one(1.0), &one(1.0)).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let err = SchurSylvester::new(&DMatrix::identity(2, 2), &DMatrix::identity(3, 3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn quadrature_needs_stability() {
        let err = integral_solution(&one(1.0), &one(-3.0), &one(1.0), 10.0, 200).unwrap_err();
        assert_eq!(err, Error::NotStable("A"));
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(20);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        // ∫ x^38 over [-1, 1] = 2/39
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert_relative_eq!(integral, 2.0 / 39.0, max_relative = 1e-13);
        let (x, w) = gauss_legendre(3);
        assert_relative_eq!(x[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn nonneg_solution_orthant_example() {
        let k = ConeSpec::orthant(2).unwrap();
        let a = m(2, &[-3.0, 1.0, 1.0, -3.0]);
        let c = DMatrix::from_element(2, 2, 1.0);
        assert!(check_nonneg_solution(&k, &a, &a, &c).unwrap().in_cone());
        // Kronecker oracle: the symmetric system has X = ones / 4
        let x = kronecker_solve(&a, &a, &c).unwrap();
        assert_relative_eq!(x, DMatrix::from_element(2, 2, 0.25), epsilon = 1e-14);
    }

    #[test]
    fn nonneg_solution_scalar_and_hypotheses() {
        let k = ConeSpec::orthant(1).unwrap();
        assert!(check_nonneg_solution(&k, &one(-2.0), &one(-2.0), &one(1.0)).unwrap().in_cone());
        assert!(matches!(
            check_nonneg_solution(&k, &one(-2.0), &one(-2.0), &one(-1.0)),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            check_nonneg_solution(&k, &one(2.0), &one(-3.0), &one(1.0)),
            Err(Error::Hypothesis(_))
        ));
    }
}
