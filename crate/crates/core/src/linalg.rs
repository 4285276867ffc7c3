//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GncError, Result};
use crate::scalar::Real;

/// Eigenvalue/eigenvector pair for a symmetric matrix, eigenvalues sorted
/// descending. Each eigenvector's largest-magnitude entry is made positive.
pub struct SortedEigen<T: Real> {
    pub values: DVector<T>,
    pub vectors: DMatrix<T>,
}

pub const EIGEN_MAX_ITER: usize = 10_000;

/// Eigenvalues of a symmetric matrix, descending.
pub fn symmetric_eigenvalues<T: Real>(m: &DMatrix<T>) -> Result<DVector<T>> {
    if m.nrows() != m.ncols() {
        return Err(GncError::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(GncError::NonFinite("symmetric matrix"));
    }
    let mut values: Vec<T> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(DVector::from_vec(values))
}

pub fn symmetric_eigen<T: Real>(m: &DMatrix<T>) -> Result<SortedEigen<T>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(GncError::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            n,
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(GncError::NonFinite("symmetric matrix"));
    }
    let eig = SymmetricEigen::try_new(m.clone(), T::eps(), EIGEN_MAX_ITER)
        .ok_or(GncError::EigenNoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < T::zero() { -T::one() } else { T::one() };
        for i in 0..n {
            vectors[(i, dst)] = col[i] * sign;
        }
    }
    Ok(SortedEigen { values, vectors })
}

/// Largest absolute entry.
pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

pub fn is_symmetric<T: Real>(m: &DMatrix<T>, tol: T) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::lit(0.5);
    (m + m.transpose()) * half
}

/// Inverse of a symmetric positive-definite matrix through Cholesky.
pub fn spd_inverse<T: Real>(m: &DMatrix<T>, what: &'static str) -> Result<DMatrix<T>> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or(GncError::NotPositiveDefinite(what))?;
    Ok(chol.inverse())
}

pub fn log_det_spd<T: Real>(m: &DMatrix<T>, what: &'static str) -> Result<T> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or(GncError::NotPositiveDefinite(what))?;
    let l = chol.l_dirty();
    let two = T::lit(2.0);
    Ok((0..m.nrows()).fold(T::zero(), |acc, i| acc + two * l[(i, i)].ln()))
}

/// `n` points log-spaced from `lo` to `hi` inclusive, increasing.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (llo + step * T::from_usize_lossy(i)).exp()
            }
        })
        .collect()
}
