//! Certificates for monotone, cone-bounded sequences.
//!
//! A sequence `0 ⪯ X_1 ⪯ X_2 ⪯ …` of K-nonnegative matrices with `X_i r ⪯_K s` for some
//! interior `r` converges. The checkers here verify those hypotheses term by term and
//! detect numerical convergence; they certify what was observed, they do not prove
//! anything about terms that were never computed.

use nalgebra::{DMatrix, DVector};

use crate::cones::ConeSpec;
use crate::error::{Error, Result};
use crate::linalg::ensure_dim;

pub const DEFAULT_GAP_TOL: f64 = 1e-12;
/// Iterations without a new smallest gap before a run counts as stalled.
pub const STALL_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceCertificate {
    pub len: usize,
    /// Terms `0..monotone_up_to` form a valid chain; equals `len` when nothing broke.
    pub monotone_up_to: usize,
    /// `r` for matrix sequences, absent for vector sequences.
    pub bound_direction: Option<DVector<f64>>,
    /// `s` (matrix sequences) or `t` (vector sequences).
    pub bound: DVector<f64>,
    pub bound_holds_up_to: usize,
    /// Monotonicity steps whose margin was negative but within tolerance.
    pub within_noise: usize,
    /// Relative gap between consecutive terms, one entry per step.
    pub gaps: Vec<f64>,
    pub converged: bool,
    pub stalled: bool,
    pub limit_estimate: DMatrix<f64>,
    pub cauchy_tail: f64,
    pub gap_tol: f64,
}

impl SequenceCertificate {
    pub fn monotone(&self) -> bool {
        self.monotone_up_to == self.len
    }

    pub fn bounded(&self) -> bool {
        self.bound_holds_up_to == self.len
    }

    /// Monotone and bounded over the whole sequence.
    pub fn passes(&self) -> bool {
        self.monotone() && self.bounded()
    }
}

/// Incremental checker for matrix sequences; feeds [`check_matrix_sequence`] and the
/// Riccati iteration, which does not keep its iterates unless asked to.
#[derive(Debug, Clone)]
pub struct MatrixSequenceMonitor {
    cone: ConeSpec,
    r: DVector<f64>,
    s: DVector<f64>,
    gap_tol: f64,
    len: usize,
    last: Option<DMatrix<f64>>,
    monotone_up_to: Option<usize>,
    bound_holds_up_to: Option<usize>,
    within_noise: usize,
    gaps: Vec<f64>,
    best_gap: f64,
    since_best: usize,
}

impl MatrixSequenceMonitor {
    /// Fails with [`Error::NotInterior`] unless `r ≻_K 0`.
    pub fn new(cone: &ConeSpec, r: DVector<f64>, s: DVector<f64>, gap_tol: f64) -> Result<Self> {
        ensure_dim(cone.dim(), r.len(), "bound direction r")?;
        ensure_dim(cone.dim(), s.len(), "bound s")?;
        let order = cone.member(&r)?;
        if !order.in_interior() {
            return Err(Error::NotInterior {
                margin: order.margin,
            });
        }
        Ok(MatrixSequenceMonitor {
            cone: cone.clone(),
            r,
            s,
            gap_tol,
            len: 0,
            last: None,
            monotone_up_to: None,
            bound_holds_up_to: None,
            within_noise: 0,
            gaps: Vec::new(),
            best_gap: f64::INFINITY,
            since_best: 0,
        })
    }

    pub fn push(&mut self, x: &DMatrix<f64>) -> Result<()> {
        ensure_dim(self.cone.dim(), x.nrows(), "sequence term")?;
        ensure_dim(self.cone.dim(), x.ncols(), "sequence term")?;
        let index = self.len;

        if self.monotone_up_to.is_none() {
            let order = match &self.last {
                None => self.cone.matrix_nonneg(x)?,
                Some(prev) => self.cone.matrix_leq(prev, x)?,
            };
            if !order.in_cone() {
                self.monotone_up_to = Some(index);
            } else if order.margin < 0.0 {
                self.within_noise += 1;
            }
        }
        if self.bound_holds_up_to.is_none()
            && !self.cone.leq_vec(&(x * &self.r), &self.s)?.in_cone()
        {
            self.bound_holds_up_to = Some(index);
        }

        if let Some(prev) = &self.last {
            let gap = (x - prev).norm() / x.norm().max(1.0);
            self.gaps.push(gap);
            if gap < self.best_gap {
                self.best_gap = gap;
                self.since_best = 0;
            } else {
                self.since_best += 1;
            }
        }
        self.last = Some(x.clone());
        self.len += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn last_gap(&self) -> Option<f64> {
        self.gaps.last().copied()
    }

    pub fn converged(&self) -> bool {
        self.last_gap().is_some_and(|g| g <= self.gap_tol)
    }

    /// No new smallest gap for [`STALL_WINDOW`] steps.
    pub fn stalled(&self) -> bool {
        self.since_best >= STALL_WINDOW
    }

    pub fn passing(&self) -> bool {
        self.monotone_up_to.is_none() && self.bound_holds_up_to.is_none()
    }

    pub fn finish(self) -> SequenceCertificate {
        let n = self.cone.dim();
        SequenceCertificate {
            len: self.len,
            monotone_up_to: self.monotone_up_to.unwrap_or(self.len),
            bound_holds_up_to: self.bound_holds_up_to.unwrap_or(self.len),
            within_noise: self.within_noise,
            converged: self.last_gap().is_some_and(|g| g <= self.gap_tol),
            stalled: self.since_best >= STALL_WINDOW,
            cauchy_tail: self.last_gap().unwrap_or(f64::INFINITY),
            limit_estimate: self.last.unwrap_or_else(|| DMatrix::zeros(n, n)),
            bound_direction: Some(self.r),
            bound: self.s,
            gaps: self.gaps,
            gap_tol: self.gap_tol,
        }
    }
}

/// Checks `0 ⪯_K X_i ⪯_K X_{i+1}` and `X_i r ⪯_K s` along `seq`.
pub fn check_matrix_sequence(
    cone: &ConeSpec,
    seq: &[DMatrix<f64>],
    r: &DVector<f64>,
    s: &DVector<f64>,
    gap_tol: f64,
) -> Result<SequenceCertificate> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let mut monitor = MatrixSequenceMonitor::new(cone, r.clone(), s.clone(), gap_tol)?;
    for x in seq {
        monitor.push(x)?;
    }
    Ok(monitor.finish())
}

/// Checks `s_i ⪯_K s_{i+1}` and `s_i ⪯_K t`; convergence from the last relative
/// sup-norm gap.
pub fn check_vector_sequence(
    cone: &ConeSpec,
    seq: &[DVector<f64>],
    t: &DVector<f64>,
    gap_tol: f64,
) -> Result<SequenceCertificate> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    ensure_dim(cone.dim(), t.len(), "bound t")?;
    let mut monotone_up_to = None;
    let mut bound_holds_up_to = None;
    let mut within_noise = 0;
    let mut gaps = Vec::with_capacity(seq.len() - 1);
    for (i, x) in seq.iter().enumerate() {
        ensure_dim(cone.dim(), x.len(), "sequence term")?;
        if i > 0 && monotone_up_to.is_none() {
            let order = cone.leq_vec(&seq[i - 1], x)?;
            if !order.in_cone() {
                monotone_up_to = Some(i);
            } else if order.margin < 0.0 {
                within_noise += 1;
            }
        }
        if bound_holds_up_to.is_none() && !cone.leq_vec(x, t)?.in_cone() {
            bound_holds_up_to = Some(i);
        }
        if i > 0 {
            gaps.push((x - &seq[i - 1]).amax() / x.amax().max(1.0));
        }
    }
    let cauchy_tail = gaps.last().copied().unwrap_or(f64::INFINITY);
    let last = seq.last().expect("non-empty");
    Ok(SequenceCertificate {
        len: seq.len(),
        monotone_up_to: monotone_up_to.unwrap_or(seq.len()),
        bound_direction: None,
        bound: t.clone(),
        bound_holds_up_to: bound_holds_up_to.unwrap_or(seq.len()),
        within_noise,
        converged: cauchy_tail <= gap_tol,
        stalled: false,
        limit_estimate: DMatrix::from_column_slice(last.len(), 1, last.as_slice()),
        cauchy_tail,
        gaps,
        gap_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthant(n: usize) -> ConeSpec {
        ConeSpec::orthant(n).unwrap()
    }

    #[test]
    fn geometric_vector_sequence() {
        let seq: Vec<_> = (0..60)
            .map(|i| DVector::from_element(2, 1.0 - 0.5f64.powi(i)))
            .collect();
        let cert =
            check_vector_sequence(&orthant(2), &seq, &DVector::from_element(2, 1.0), 1e-12).unwrap();
        assert!(cert.passes());
        assert!(cert.converged);
        assert!(cert.cauchy_tail <= 1e-12);
    }

    #[test]
    fn constant_vector_sequence() {
        let seq = vec![DVector::from_element(3, 2.0); 4];
        let cert =
            check_vector_sequence(&orthant(3), &seq, &DVector::from_element(3, 2.0), 1e-12).unwrap();
        assert!(cert.monotone() && cert.converged);
        assert_eq!(cert.within_noise, 0);
    }

    #[test]
    fn decreasing_step_is_located() {
        let seq: Vec<_> = [0.0, 0.5, 0.75, 0.6, 0.9]
            .iter()
            .map(|&x| DVector::from_element(1, x))
            .collect();
        let cert =
            check_vector_sequence(&orthant(1), &seq, &DVector::from_element(1, 1.0), 1e-12).unwrap();
        assert_eq!(cert.monotone_up_to, 3);
        assert!(cert.bounded());
        assert!(!cert.passes());
    }

    #[test]
    fn scaled_identity_sequence() {
        let seq: Vec<_> = (0..60)
            .map(|i| DMatrix::identity(3, 3) * (1.0 - 0.5f64.powi(i)))
            .collect();
        let one = DVector::from_element(3, 1.0);
        let cert = check_matrix_sequence(&orthant(3), &seq, &one, &one, 1e-12).unwrap();
        assert!(cert.passes());
        assert!(cert.converged);
        assert!((&cert.limit_estimate - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn boundary_direction_is_rejected() {
        // X_i = i e1 e2ᵀ has X_i e1 = 0 for every i although the sequence diverges;
        // the bound only sees what r touches, hence r must be interior.
        let seq: Vec<_> = (0..5)
            .map(|i| {
                let mut x = DMatrix::zeros(2, 2);
                x[(0, 1)] = i as f64;
                x
            })
            .collect();
        let e1 = DVector::from_column_slice(&[1.0, 0.0]);
        let err = check_matrix_sequence(&orthant(2), &seq, &e1, &DVector::zeros(2), 1e-12)
            .unwrap_err();
        assert!(matches!(err, Error::NotInterior { .. }));
    }

    #[test]
    fn bound_violation_is_located() {
        let seq: Vec<_> = (0..4).map(|i| DMatrix::identity(1, 1) * i as f64).collect();
        let one = DVector::from_element(1, 1.0);
        let cert =
            check_matrix_sequence(&orthant(1), &seq, &one, &DVector::from_element(1, 2.0), 1e-12)
                .unwrap();
        assert!(cert.monotone());
        assert_eq!(cert.bound_holds_up_to, 3);
    }

    #[test]
    fn noise_level_decrease_is_tolerated() {
        let a = DMatrix::from_element(2, 2, 0.5);
        let b = &a - DMatrix::from_element(2, 2, 1e-13);
        let one = DVector::from_element(2, 1.0);
        let cert = check_matrix_sequence(&orthant(2), &[a, b], &one, &one, 1e-12).unwrap();
        assert!(cert.monotone());
        assert_eq!(cert.within_noise, 1);
    }

    #[test]
    fn stall_detection() {
        let one = DVector::from_element(1, 1.0);
        let mut monitor =
            MatrixSequenceMonitor::new(&orthant(1), one.clone(), one, 1e-12).unwrap();
        let mut x = 0.0;
        for k in 0..(STALL_WINDOW + 5) {
            x += 1e-3 * (1.0 + k as f64);
            monitor.push(&DMatrix::from_element(1, 1, x)).unwrap();
        }
        assert!(monitor.stalled());
        assert!(!monitor.converged());
    }
}
