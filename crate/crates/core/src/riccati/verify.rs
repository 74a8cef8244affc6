//! Independent re-verification of both directions of the equivalence from stored data.

use nalgebra::DMatrix;

use super::solve::Certificate;
use super::system::{residual, residual_scale, BlockSystem};
use crate::cones::{ConeOrder, ConeSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, ensure_dim};
use crate::spectral::{self, StabilityReport, DEFAULT_MARGIN};

/// Residual tolerance for re-verification, relative to [`residual_scale`].
pub const VERIFY_TOL: f64 = 1e-10;
/// Agreement required between `-L⁻¹` and its block expression.
pub const INVERSE_MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyReport {
    pub residual: f64,
    pub residual_scale: f64,
    pub residual_ok: bool,
    pub x_nonneg: ConeOrder,
    pub closed_loop_a_cross_positive: bool,
    pub closed_loop_d_cross_positive: bool,
    pub closed_loop_a_stability: StabilityReport,
    pub closed_loop_d_stability: StabilityReport,
}

impl SufficiencyReport {
    pub fn holds(&self) -> bool {
        self.residual_ok
            && self.x_nonneg.in_cone()
            && self.closed_loop_a_cross_positive
            && self.closed_loop_d_cross_positive
            && self.closed_loop_a_stability.stable
            && self.closed_loop_d_stability.stable
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.residual_ok {
            out.push(format!(
                "residual {:.3e} exceeds {:.3e}",
                self.residual,
                VERIFY_TOL * self.residual_scale
            ));
        }
        if !self.x_nonneg.in_cone() {
            out.push(format!("X is not K-nonnegative: {}", self.x_nonneg));
        }
        if !self.closed_loop_a_cross_positive {
            out.push("A + BX is not cross-positive".into());
        }
        if !self.closed_loop_d_cross_positive {
            out.push("D + XB is not cross-positive".into());
        }
        if !self.closed_loop_a_stability.stable {
            out.push(format!(
                "A + BX is not stable (abscissa {:.3e})",
                self.closed_loop_a_stability.spectral_abscissa
            ));
        }
        if !self.closed_loop_d_stability.stable {
            out.push(format!(
                "D + XB is not stable (abscissa {:.3e})",
                self.closed_loop_d_stability.spectral_abscissa
            ));
        }
        out
    }
}

/// Checks that `x` is a K-nonnegative solution with stable, cross-positive closed loops.
pub fn check_sufficiency(
    cone: &ConeSpec,
    sys: &BlockSystem,
    x: &DMatrix<f64>,
    tol: f64,
    margin: f64,
) -> Result<SufficiencyReport> {
    ensure_dim(sys.n(), x.nrows(), "solution rows")?;
    ensure_dim(sys.n(), x.ncols(), "solution columns")?;
    ensure_dim(cone.dim(), sys.n(), "system vs cone")?;
    let fa = sys.a() + sys.b() * x;
    let fd = sys.d() + x * sys.b();
    let res = residual(sys, x);
    let scale = residual_scale(sys, x);
    Ok(SufficiencyReport {
        residual: res,
        residual_scale: scale,
        residual_ok: res <= tol * scale,
        x_nonneg: cone.matrix_nonneg(x)?,
        closed_loop_a_cross_positive: cone.cross_positive(&fa)?.cross_positive,
        closed_loop_d_cross_positive: cone.cross_positive(&fd)?.cross_positive,
        closed_loop_a_stability: spectral::eigenvalues_with_margin(&fa, margin)?,
        closed_loop_d_stability: spectral::eigenvalues_with_margin(&fd, margin)?,
    })
}

/// Re-checks a certificate against `cone` without trusting any stored verdict.
pub fn verify_sufficiency(cone: &ConeSpec, cert: &Certificate) -> bool {
    check_sufficiency(
        cone,
        &cert.system,
        &cert.solution.x_star,
        VERIFY_TOL,
        cert.l_stability.margin_tol,
    )
    .is_ok_and(|r| r.holds())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessityCheck {
    /// Stability of `L` recomputed from its eigenvalues.
    pub l_stable_implied: bool,
    /// The block expression for `-L⁻¹` is `(K × K)`-nonnegative.
    pub block_inverse_nonneg: bool,
    pub block_order: ConeOrder,
    /// `‖assembled + L⁻¹‖ / ‖L⁻¹‖`
    pub relative_mismatch: f64,
    pub matches_inverse: bool,
    pub assembled: DMatrix<f64>,
}

impl NecessityCheck {
    pub fn holds(&self) -> bool {
        self.l_stable_implied && self.block_inverse_nonneg && self.matches_inverse
    }
}

/// Builds `-L⁻¹` from a stabilizing solution `x`:
///
/// ```text
/// -L⁻¹ = [[I, 0], [X, I]] · [[P X - F_A⁻¹, P], [-F_D⁻¹ X, -F_D⁻¹]]
/// F_A = A + B X,  F_D = D + X B,  P = F_A⁻¹ B F_D⁻¹
/// ```
///
/// and checks it against the directly computed inverse and the product cone.
pub fn verify_necessity(
    cone: &ConeSpec,
    sys: &BlockSystem,
    x: &DMatrix<f64>,
    margin: f64,
) -> Result<NecessityCheck> {
    let pre = check_sufficiency(cone, sys, x, VERIFY_TOL, margin)?;
    if !pre.holds() {
        return Err(Error::Hypothesis(format!(
            "X is not a stabilizing K-nonnegative solution: {}",
            pre.failures().join("; ")
        )));
    }
    let n = sys.n();
    let fa = sys.a() + sys.b() * x;
    let fd = sys.d() + x * sys.b();
    let fa_inv = linalg::inverse(&fa, "A + BX")?;
    let fd_inv = linalg::inverse(&fd, "D + XB")?;
    let p = &fa_inv * sys.b() * &fd_inv;

    let inner = linalg::assemble_blocks(
        &(&p * x - &fa_inv),
        &p,
        &(-(&fd_inv * x)),
        &(-&fd_inv),
    );
    let ident = DMatrix::<f64>::identity(n, n);
    let lower = linalg::assemble_blocks(&ident, &DMatrix::zeros(n, n), x, &ident);
    let assembled = lower * inner;

    let neg_l_inv = -linalg::inverse(sys.l(), "L")?;
    let relative_mismatch =
        (&assembled - &neg_l_inv).norm() / neg_l_inv.norm().max(f64::MIN_POSITIVE);
    let block_order = cone.product().as_cone().matrix_nonneg(&assembled)?;
    let l_report = spectral::eigenvalues_with_margin(sys.l(), margin)?;

    Ok(NecessityCheck {
        l_stable_implied: l_report.stable,
        block_inverse_nonneg: block_order.in_cone(),
        block_order,
        relative_mismatch,
        matches_inverse: relative_mismatch <= INVERSE_MATCH_TOL,
        assembled,
    })
}

/// [`verify_necessity`] with the default margin.
pub fn verify_necessity_default(cone: &ConeSpec, sys: &BlockSystem, x: &DMatrix<f64>) -> Result<NecessityCheck> {
    verify_necessity(cone, sys, x, DEFAULT_MARGIN)
}
