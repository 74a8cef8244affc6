//! Small dense helpers shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) fn ensure_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_dim(expected: usize, found: usize, context: &'static str) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            expected,
            found,
            context,
        });
    }
    Ok(())
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Largest absolute entry, at least one. Used as the magnitude in relative tolerances.
pub fn scale_of<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(1.0_f64, |acc, v| acc.max(v.abs()))
}

/// Inverse via partial-pivot LU, rejecting numerically singular input.
pub fn inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let lu = m.clone().lu();
    let u = lu.u();
    let max_piv = u.diagonal().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min_piv = u.diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if max_piv == 0.0 || min_piv <= max_piv * (n as f64) * f64::EPSILON {
        return Err(Error::Singular(what));
    }
    lu.try_inverse().ok_or(Error::Singular(what))
}

/// Solves `m x = b` with the same singularity guard as [`inverse`].
pub fn solve(m: &DMatrix<f64>, b: &DVector<f64>, what: &'static str) -> Result<DVector<f64>> {
    let n = ensure_square(m)?;
    ensure_dim(n, b.len(), "right-hand side")?;
    let lu = m.clone().lu();
    let u = lu.u();
    let max_piv = u.diagonal().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min_piv = u.diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if max_piv == 0.0 || min_piv <= max_piv * (n as f64) * f64::EPSILON {
        return Err(Error::Singular(what));
    }
    lu.solve(b).ok_or(Error::Singular(what))
}

/// 2-norm condition number from the singular values; infinite when singular.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, v| a.max(*v));
    let min = sv.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Assembles `[[a, b], [c, d]]` from equally sized square blocks.
pub fn assemble_blocks(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

pub fn stack(top: &DVector<f64>, bottom: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        top.len() + bottom.len(),
        top.iter().chain(bottom.iter()).copied(),
    )
}

pub fn relative_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Row-major nested vectors, the layout used by the file formats.
pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: ncols,
            found: bad.len(),
            context: "ragged row",
        });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(inverse(&m, "m"), Err(Error::Singular("m")));
    }

    #[test]
    fn rows_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let rows = to_rows(&m);
        assert_eq!(rows[0], vec![1.0, 2.0, 3.0]);
        assert_eq!(from_rows(&rows).unwrap(), m);
        assert!(from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn assembled_blocks_are_bit_identical() {
        let a = DMatrix::from_element(2, 2, 1.0);
        let b = DMatrix::from_element(2, 2, 2.0);
        let c = DMatrix::from_element(2, 2, 3.0);
        let d = DMatrix::from_element(2, 2, 4.0);
        let l = assemble_blocks(&a, &b, &c, &d);
        assert_eq!(l.view((0, 2), (2, 2)), b);
        assert_eq!(l.view((2, 0), (2, 2)), c);
    }
}
