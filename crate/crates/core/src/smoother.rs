//! Stage one: Laplacian-penalized mean estimation.
//!
//! Each column of `X` is smoothed independently by solving
//! `(I + alpha L_s) m = x`. With `L_s = U diag(tau) U^T` this is a diagonal
//! shrinkage of the coefficients `U^T x` by `1 / (1 + alpha tau_i)`, so a
//! whole grid of `alpha` values costs one eigendecomposition.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GncError, Result};
use crate::graph::{SpectralBasis, StandardizedLaplacian};
use crate::linalg;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct MeanFit<T: Real> {
    /// Smoothed means, `n x p`.
    pub m_hat: DMatrix<T>,
    /// Coefficients in the Laplacian eigenbasis, `m_hat = U b_hat`.
    pub b_hat: DMatrix<T>,
    pub alpha: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuningMethod {
    Gcv,
    Cv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningCurve<T> {
    pub method: TuningMethod,
    pub alphas: Vec<T>,
    pub scores: Vec<T>,
    pub chosen_index: usize,
    pub chosen_alpha: T,
}

/// 40 points log-spaced over `[1e-2, 1e4]`.
pub fn default_alpha_grid<T: Real>() -> Vec<T> {
    linalg::log_grid(T::lit(1e-2), T::lit(1e4), 40)
}

fn check_rows<T: Real>(x: &DMatrix<T>, n: usize) -> Result<()> {
    if x.nrows() != n {
        return Err(GncError::DimensionMismatch(format!(
            "data has {} rows but the network has {} nodes",
            x.nrows(),
            n
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(GncError::NonFinite("data matrix"));
    }
    Ok(())
}

pub fn smooth_means<T: Real>(x: &DMatrix<T>, basis: &SpectralBasis<T>, alpha: T) -> Result<MeanFit<T>> {
    check_rows(x, basis.n())?;
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(GncError::InvalidParameter(format!(
            "alpha must be finite and >= 0, got {}",
            alpha.as_f64()
        )));
    }
    let mut b_hat = basis.u.transpose() * x;
    if alpha == T::zero() {
        // U U^T x is only x up to round-off; return the data unchanged.
        return Ok(MeanFit {
            m_hat: x.clone(),
            b_hat,
            alpha,
        });
    }
    for (i, mut row) in b_hat.row_iter_mut().enumerate() {
        let shrink = T::one() / (T::one() + alpha * basis.tau[i]);
        row *= shrink;
    }
    let m_hat = &basis.u * &b_hat;
    Ok(MeanFit { m_hat, b_hat, alpha })
}

/// `(1/n) sum_i 1 / (1 + alpha tau_i)`, the normalized trace of the smoother.
pub fn smoother_trace<T: Real>(basis: &SpectralBasis<T>, alpha: T) -> T {
    let n = T::from_usize_lossy(basis.n());
    basis
        .tau
        .iter()
        .fold(T::zero(), |acc, &t| acc + T::one() / (T::one() + alpha * t))
        / n
}

pub fn gcv<T: Real>(x: &DMatrix<T>, basis: &SpectralBasis<T>, alpha: T) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(GncError::InvalidParameter(format!(
            "GCV needs alpha > 0, got {}",
            alpha.as_f64()
        )));
    }
    let fit = smooth_means(x, basis, alpha)?;
    let denom = T::one() - smoother_trace(basis, alpha);
    let denom2 = denom * denom;
    if denom2 < T::lit(1e-12) {
        return Err(GncError::DegenerateGcv(alpha.as_f64()));
    }
    let np = T::from_usize_lossy(x.nrows() * x.ncols());
    let rss = (x - &fit.m_hat).norm_squared();
    Ok(rss / np / denom2)
}

fn check_grid<T: Real>(alphas: &[T]) -> Result<()> {
    if alphas.is_empty() {
        return Err(GncError::InvalidParameter("alpha grid is empty".into()));
    }
    if alphas.iter().any(|&a| !(a > T::zero()) || !a.is_finite()) {
        return Err(GncError::InvalidParameter("alpha grid values must be positive".into()));
    }
    if alphas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(GncError::InvalidParameter("alpha grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Index of the minimum score; scores within `tie` of each other count as
/// equal and the smallest alpha wins.
fn argmin_first<T: Real>(scores: &[T], tie: T) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] - tie {
            best = i;
        }
    }
    best
}

/// Absolute tie tolerance relative to the data's energy per entry.
fn tie_tolerance<T: Real>(x: &DMatrix<T>) -> T {
    T::lit(1e-12) * x.norm_squared().max(T::eps())
}

pub fn gcv_curve<T: Real>(x: &DMatrix<T>, basis: &SpectralBasis<T>, alphas: &[T]) -> Result<TuningCurve<T>> {
    check_grid(alphas)?;
    let scores = alphas
        .iter()
        .map(|&a| gcv(x, basis, a))
        .collect::<Result<Vec<_>>>()?;
    let tie = tie_tolerance(x) / T::from_usize_lossy(x.len().max(1));
    let chosen_index = argmin_first(&scores, tie);
    Ok(TuningCurve {
        method: TuningMethod::Gcv,
        alphas: alphas.to_vec(),
        scores,
        chosen_index,
        chosen_alpha: alphas[chosen_index],
    })
}

/// Seeded partition of `0..n` into `folds` groups of near-equal size.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut fold_of = vec![0; n];
    for (pos, &node) in order.iter().enumerate() {
        fold_of[node] = pos % folds;
    }
    fold_of
}

/// Fit using only the rows flagged in `train`: solves
/// `(P + alpha L_s) M = P X` with `P` the diagonal training mask.
pub fn masked_smooth<T: Real>(
    x: &DMatrix<T>,
    laplacian: &StandardizedLaplacian<T>,
    train: &[bool],
    alpha: T,
) -> Result<DMatrix<T>> {
    let n = laplacian.n();
    check_rows(x, n)?;
    if train.len() != n {
        return Err(GncError::DimensionMismatch("training mask length".into()));
    }
    let mut system = &laplacian.matrix * alpha;
    let mut rhs = x.clone();
    for i in 0..n {
        if train[i] {
            system[(i, i)] += T::one();
        } else {
            rhs.row_mut(i).fill(T::zero());
        }
    }
    let chol = system
        .cholesky()
        .ok_or_else(|| GncError::Singular(format!("masked smoothing system at alpha = {}", alpha.as_f64())))?;
    Ok(chol.solve(&rhs))
}

/// K-fold cross-validation of `alpha` over a node partition.
///
/// Held-out rows drop out of the fidelity term but stay in the Laplacian
/// penalty, so their fitted means are interpolated from their neighbours.
pub fn cross_validate_alpha<T: Real>(
    x: &DMatrix<T>,
    laplacian: &StandardizedLaplacian<T>,
    alphas: &[T],
    folds: usize,
    seed: u64,
) -> Result<TuningCurve<T>> {
    check_grid(alphas)?;
    let n = laplacian.n();
    check_rows(x, n)?;
    if folds < 2 || folds > n {
        return Err(GncError::InvalidParameter(format!(
            "need 2 <= folds <= n, got folds = {folds}, n = {n}"
        )));
    }
    let fold_of = fold_assignment(n, folds, seed);
    let mut scores = vec![T::zero(); alphas.len()];
    for f in 0..folds {
        let train: Vec<bool> = fold_of.iter().map(|&g| g != f).collect();
        for (k, &alpha) in alphas.iter().enumerate() {
            let m = masked_smooth(x, laplacian, &train, alpha)?;
            let mut err = T::zero();
            for i in (0..n).filter(|&i| !train[i]) {
                for j in 0..x.ncols() {
                    let d = x[(i, j)] - m[(i, j)];
                    err += d * d;
                }
            }
            scores[k] += err;
        }
    }
    let folds_t = T::from_usize_lossy(folds);
    for s in scores.iter_mut() {
        *s /= folds_t;
    }
    let chosen_index = argmin_first(&scores, tie_tolerance(x));
    Ok(TuningCurve {
        method: TuningMethod::Cv,
        alphas: alphas.to_vec(),
        scores,
        chosen_index,
        chosen_alpha: alphas[chosen_index],
    })
}

/// `(1/n) (X - M)^T (X - M)`, exactly symmetric.
pub fn residual_covariance<T: Real>(x: &DMatrix<T>, m_hat: &DMatrix<T>) -> Result<DMatrix<T>> {
    if x.shape() != m_hat.shape() {
        return Err(GncError::DimensionMismatch(format!(
            "data {:?} vs means {:?}",
            x.shape(),
            m_hat.shape()
        )));
    }
    let n = x.nrows();
    if n == 0 {
        return Err(GncError::DimensionMismatch("no rows".into()));
    }
    let r = x - m_hat;
    let mut s = r.transpose() * &r / T::from_usize_lossy(n);
    let p = s.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            s[(j, i)] = s[(i, j)];
        }
    }
    Ok(s)
}

/// Covariance around the column means (the i.i.d. estimate).
pub fn sample_covariance<T: Real>(x: &DMatrix<T>) -> Result<DMatrix<T>> {
    residual_covariance(x, &column_mean_matrix(x))
}

/// `n x p` matrix whose every row is the vector of column means.
pub fn column_mean_matrix<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    let n = x.nrows();
    let mut m = DMatrix::zeros(n, x.ncols());
    for j in 0..x.ncols() {
        let mean = x.column(j).sum() / T::from_usize_lossy(n);
        m.column_mut(j).fill(mean);
    }
    m
}

/// Centers each column and scales it to unit sample standard deviation.
pub fn standardize_columns<T: Real>(x: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = x.nrows();
    if n < 2 {
        return Err(GncError::InvalidParameter("standardization needs at least two rows".into()));
    }
    let mut out = x.clone();
    for j in 0..x.ncols() {
        let mut col = out.column_mut(j);
        let mean = col.sum() / T::from_usize_lossy(n);
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / T::from_usize_lossy(n - 1)).sqrt();
        if !(sd > T::zero()) {
            return Err(GncError::InvalidParameter(format!("column {j} is constant")));
        }
        col /= sd;
    }
    Ok(out)
}
