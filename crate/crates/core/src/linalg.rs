//! Thin wrappers over the dense `faer` kernels.

use faer::prelude::Solve;
use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues and right eigenvectors (columns) of a general complex matrix.
pub(crate) fn eig(m: &Mat<c64>) -> Result<(Vec<Complex64>, Mat<c64>)> {
    let evd = m
        .eigen()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let n = m.nrows();
    let values = (0..n).map(|i| evd.S()[i]).collect();
    Ok((values, evd.U().to_owned()))
}

pub(crate) fn column(m: &Mat<c64>, j: usize) -> Vec<Complex64> {
    m.col_as_slice(j).to_vec()
}

/// Inverse via partial-pivoting LU; fails when the pivots degenerate.
pub(crate) fn inverse(m: &Mat<c64>) -> Result<Mat<c64>> {
    let n = m.nrows();
    let lu = m.partial_piv_lu();
    let mut out = Mat::<c64>::identity(n, n);
    lu.solve_in_place(out.as_mut());
    for j in 0..n {
        if out
            .col_as_slice(j)
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Singular("LU produced non-finite entries".into()));
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) fn max_abs_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

pub(crate) fn frobenius(a: &Mat<c64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.col_as_slice(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}
