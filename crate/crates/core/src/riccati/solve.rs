//! Fixed-point iteration `D X_{i+1} + X_{i+1} A = -X_i B X_i - C`, `X_0 = 0`.
//!
//! Under cross-positivity of `L` on `K × K` and stability of `L` every step is a
//! well-posed Sylvester equation with K-nonnegative data, the iterates increase in the
//! order of `π(K)`, and `X_i v1 ⪯_K v2 - D⁻¹ u2` for the witness `(v, u)` of `L`. The
//! solver checks all of this along the way and packages it in a [`Certificate`].

use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::system::{residual, residual_scale, BlockSystem};
use super::verify::{verify_necessity, NecessityCheck};
use crate::cones::{block_cross_positive, BlockCrossPositivity, ConeOrder, ConeSpec, CrossPositivity};
use crate::error::Error;
use crate::linalg::{self, ensure_dim};
use crate::monotone::{MatrixSequenceMonitor, SequenceCertificate, DEFAULT_GAP_TOL};
use crate::spectral::{self, Stability, StabilityReport, Witness, DEFAULT_MARGIN};
use crate::sylvester::SchurSylvester;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Relative residual tolerance, see [`residual_scale`].
    pub tol: f64,
    pub record_trace: bool,
    /// Stability dead-band for the spectral abscissa.
    pub margin: f64,
    pub gap_tol: f64,
    /// Interior point of `K × K` for the witness; stacked generator sums when `None`.
    pub interior_point: Option<DVector<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            record_trace: false,
            margin: DEFAULT_MARGIN,
            gap_tol: DEFAULT_GAP_TOL,
            interior_point: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x_star: DMatrix<f64>,
    /// `A + B X*`
    pub closed_loop_a: DMatrix<f64>,
    /// `D + X* B`
    pub closed_loop_d: DMatrix<f64>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeVerdicts {
    /// `X* ⪰_K 0`
    pub x_nonneg: ConeOrder,
    pub closed_loop_a: CrossPositivity,
    pub closed_loop_d: CrossPositivity,
    /// `X* v1 ⪯_K v2`
    pub limit_bound: ConeOrder,
}

impl ConeVerdicts {
    pub fn all_hold(&self) -> bool {
        self.x_nonneg.in_cone()
            && self.closed_loop_a.cross_positive
            && self.closed_loop_d.cross_positive
            && self.limit_bound.in_cone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub system: BlockSystem,
    pub solution: Solution,
    pub verdicts: ConeVerdicts,
    pub l_stability: StabilityReport,
    pub closed_loop_a_stability: StabilityReport,
    pub closed_loop_d_stability: StabilityReport,
    pub witness: Witness,
    /// `s = v2 - D⁻¹ u2`, the bound on `X_i v1`.
    pub bound_s: DVector<f64>,
    pub trace: SequenceCertificate,
    /// Every iterate `X_0, X_1, …` when tracing was requested.
    pub iterates: Option<Vec<DMatrix<f64>>>,
    pub necessity: NecessityCheck,
    pub tol: f64,
}

impl Certificate {
    pub fn x_star(&self) -> &DMatrix<f64> {
        &self.solution.x_star
    }

    pub fn necessity_check(&self) -> bool {
        self.necessity.holds()
    }
}

/// Outcomes of [`solve`] other than a certificate.
#[derive(Debug, Clone)]
pub enum SolveError {
    /// `L` is not cross-positive on `K × K`.
    HypothesisFailure(Box<BlockCrossPositivity>),
    /// `L` is cross-positive but unstable: no stabilizing K-nonnegative solution exists.
    EquivalenceNegative(StabilityReport),
    /// The spectral abscissa of `L` lies inside the margin dead-band.
    InconclusiveAtMargin(StabilityReport),
    NonConverged {
        iterations: usize,
        residual: f64,
        trace: Box<SequenceCertificate>,
        iterates: Option<Vec<DMatrix<f64>>>,
    },
    Numerical(Error),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::HypothesisFailure(blocks) => write!(
                f,
                "L is not cross-positive on K x K; violated blocks: {}",
                blocks.failing_blocks().join(", ")
            ),
            SolveError::EquivalenceNegative(report) => write!(
                f,
                "L is cross-positive but not stable (spectral abscissa {:.6e}); no stabilizing K-nonnegative solution exists",
                report.spectral_abscissa
            ),
            SolveError::InconclusiveAtMargin(report) => write!(
                f,
                "spectral abscissa of L ({:.3e}) is within the margin {:.1e}",
                report.spectral_abscissa, report.margin_tol
            ),
            SolveError::NonConverged {
                iterations,
                residual,
                ..
            } => write!(
                f,
                "iteration did not converge after {iterations} steps (residual {residual:.3e})"
            ),
            SolveError::Numerical(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<Error> for SolveError {
    fn from(e: Error) -> Self {
        SolveError::Numerical(e)
    }
}

/// The hypotheses needed by [`solve`]: block cross-positivity and stability of `L`.
pub fn check_hypotheses(
    cone: &ConeSpec,
    sys: &BlockSystem,
    margin: f64,
) -> Result<StabilityReport, SolveError> {
    ensure_dim(cone.dim(), sys.n(), "system vs cone")?;
    let blocks = block_cross_positive(cone, sys)?;
    if !blocks.verdict {
        return Err(SolveError::HypothesisFailure(Box::new(blocks)));
    }
    let l_stability = spectral::eigenvalues_with_margin(sys.l(), margin)?;
    match l_stability.classification() {
        Stability::Stable => Ok(l_stability),
        Stability::Marginal => Err(SolveError::InconclusiveAtMargin(l_stability)),
        Stability::Unstable => Err(SolveError::EquivalenceNegative(l_stability)),
    }
}

/// One step of the recursion: the solution of `D Y + Y A = -X B X - C`.
pub fn fixed_point_step(sys: &BlockSystem, x: &DMatrix<f64>) -> Result<DMatrix<f64>, Error> {
    let solver = SchurSylvester::new(sys.a(), sys.d())?;
    solver.solve(&(x * sys.b() * x + sys.c()))
}

pub fn solve(cone: &ConeSpec, sys: &BlockSystem, opts: &SolveOptions) -> Result<Certificate, SolveError> {
    let l_stability = check_hypotheses(cone, sys, opts.margin)?;
    let witness = spectral::witness_with(cone, sys, opts.margin, opts.interior_point.as_ref())?;
    let n = sys.n();

    let d_inv_u2 = linalg::solve(sys.d(), &witness.u2, "D")?;
    let bound_s = &witness.v2 - d_inv_u2;

    let solver = SchurSylvester::new(sys.a(), sys.d()).map_err(|e| match e {
        Error::IllPosedSylvester { .. } => Error::NumericalConsistency(format!(
            "Sylvester step is ill-posed although A and D are stable: {e}"
        )),
        other => other,
    })?;

    let mut monitor =
        MatrixSequenceMonitor::new(cone, witness.v1.clone(), bound_s.clone(), opts.gap_tol)?;
    let mut iterates = opts.record_trace.then(Vec::new);
    let mut x = DMatrix::<f64>::zeros(n, n);
    monitor.push(&x)?;
    if let Some(it) = iterates.as_mut() {
        it.push(x.clone());
    }

    // at least one step, so a zero `C` reports the fixed point X_1 = X_0 = 0
    let mut res = residual(sys, &x);
    let mut iterations = 0;
    let mut done = false;
    while !done {
        if iterations >= opts.max_iter {
            return Err(SolveError::NonConverged {
                iterations,
                residual: res,
                trace: Box::new(monitor.finish()),
                iterates,
            });
        }
        let rhs = &x * sys.b() * &x + sys.c();
        x = solver.solve(&rhs)?;
        iterations += 1;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalConsistency(format!(
                "non-finite iterate at step {iterations}"
            ))
            .into());
        }
        monitor.push(&x)?;
        if let Some(it) = iterates.as_mut() {
            it.push(x.clone());
        }
        res = residual(sys, &x);
        let small = res <= opts.tol * residual_scale(sys, &x);
        if small && (monitor.converged() || monitor.stalled()) {
            done = true;
        } else if monitor.stalled() && !small {
            return Err(SolveError::NonConverged {
                iterations,
                residual: res,
                trace: Box::new(monitor.finish()),
                iterates,
            });
        }
    }

    let trace = monitor.finish();
    let closed_loop_a = sys.a() + sys.b() * &x;
    let closed_loop_d = sys.d() + &x * sys.b();
    let verdicts = ConeVerdicts {
        x_nonneg: cone.matrix_nonneg(&x)?,
        closed_loop_a: cone.cross_positive(&closed_loop_a)?,
        closed_loop_d: cone.cross_positive(&closed_loop_d)?,
        limit_bound: cone.leq_vec(&(&x * &witness.v1), &witness.v2)?,
    };
    let closed_loop_a_stability = spectral::eigenvalues_with_margin(&closed_loop_a, opts.margin)?;
    let closed_loop_d_stability = spectral::eigenvalues_with_margin(&closed_loop_d, opts.margin)?;

    if !verdicts.all_hold() || !closed_loop_a_stability.stable || !closed_loop_d_stability.stable {
        return Err(Error::NumericalConsistency(format!(
            "limit fails its conclusions: X>=0 {}, A+BX cross-positive {}, D+XB cross-positive {}, X v1 <= v2 {}, A+BX stable {}, D+XB stable {}",
            verdicts.x_nonneg.in_cone(),
            verdicts.closed_loop_a.cross_positive,
            verdicts.closed_loop_d.cross_positive,
            verdicts.limit_bound.in_cone(),
            closed_loop_a_stability.stable,
            closed_loop_d_stability.stable
        ))
        .into());
    }
    if !trace.passes() {
        return Err(Error::NumericalConsistency(format!(
            "iterates broke monotonicity at {} or the bound at {} (of {})",
            trace.monotone_up_to, trace.bound_holds_up_to, trace.len
        ))
        .into());
    }

    let necessity = verify_necessity(cone, sys, &x, opts.margin)?;
    let solution = Solution {
        x_star: x,
        closed_loop_a,
        closed_loop_d,
        residual: res,
        iterations,
    };
    Ok(Certificate {
        system: sys.clone(),
        solution,
        verdicts,
        l_stability,
        closed_loop_a_stability,
        closed_loop_d_stability,
        witness,
        bound_s,
        trace,
        iterates,
        necessity,
        tol: opts.tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransposeDuality {
    pub x_star: DMatrix<f64>,
    pub z_star: DMatrix<f64>,
    /// `‖Z* - X*ᵀ‖_F`
    pub mismatch: f64,
    pub matches_transpose: bool,
}

pub const TRANSPOSE_TOL: f64 = 1e-8;

/// Solves the system and its transposed counterpart on the dual cone and compares
/// `Z*` with `X*ᵀ`.
pub fn transpose_dual_solve(
    cone: &ConeSpec,
    sys: &BlockSystem,
    opts: &SolveOptions,
) -> Result<TransposeDuality, SolveError> {
    let primal = solve(cone, sys, opts)?;
    let dual_opts = SolveOptions {
        interior_point: None,
        ..opts.clone()
    };
    let dual = solve(&cone.dual(), &sys.transpose_dual(), &dual_opts)?;
    let x_star = primal.solution.x_star;
    let z_star = dual.solution.x_star;
    let mismatch = (&z_star - x_star.transpose()).norm();
    Ok(TransposeDuality {
        matches_transpose: mismatch <= TRANSPOSE_TOL * x_star.norm().max(1.0),
        x_star,
        z_star,
        mismatch,
    })
}
