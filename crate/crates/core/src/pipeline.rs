//! Estimators assembled from the two stages: the two-stage fit, the
//! alternating joint estimator, the oracle mean fit and its error equations,
//! and the k-means + glasso baseline.
//!
//! The joint mean step with a fixed precision `Theta` solves
//!
//! ```text
//! B Theta + alpha Lambda B = U^T X Theta
//! ```
//!
//! for the basis coefficients `B` (`M = U B`). Diagonalizing
//! `Theta = Q D Q^T` decouples it into scalar equations
//! `C_ij (d_j + alpha tau_i) = (R Q)_ij` with `C = B Q`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GncError, Result};
use crate::glasso::{self, GlassoOptions, PrecisionFit};
use crate::graph::{Network, SpectralBasis};
use crate::kmeans;
use crate::linalg;
use crate::scalar::Real;
use crate::smoother::{self, MeanFit};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    pub alpha: f64,
    pub lambda: f64,
    /// How alpha was chosen: "fixed", "gcv", "cv", "oracle".
    pub alpha_method: String,
    /// How lambda was chosen: "fixed", "target-edges".
    pub lambda_method: String,
}

impl ModelConfig {
    pub fn fixed(alpha: f64, lambda: f64) -> Self {
        ModelConfig {
            alpha,
            lambda,
            alpha_method: "fixed".into(),
            lambda_method: "fixed".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GncModel<T: Real> {
    pub mean_fit: MeanFit<T>,
    pub precision_fit: PrecisionFit<T>,
    pub config: ModelConfig,
}

fn require_spd<T: Real>(theta: &DMatrix<T>, what: &'static str) -> Result<()> {
    if theta.nrows() != theta.ncols() {
        return Err(GncError::DimensionMismatch(format!("{what} must be square")));
    }
    if !linalg::is_symmetric(theta, T::lit(1e-10) * linalg::max_abs(theta).max(T::one())) {
        return Err(GncError::NotPositiveDefinite(what));
    }
    theta
        .clone()
        .cholesky()
        .map(|_| ())
        .ok_or(GncError::NotPositiveDefinite(what))
}

/// Residual covariance with an explicit degeneracy check: a zero diagonal
/// entry means some column was fitted exactly and the glasso has no finite
/// solution.
pub fn checked_residual_covariance<T: Real>(x: &DMatrix<T>, m_hat: &DMatrix<T>) -> Result<DMatrix<T>> {
    let s = smoother::residual_covariance(x, m_hat)?;
    let scale = x.iter().fold(T::zero(), |a, &v| a.max(v.abs())).max(T::one());
    let floor = T::lit(1e-14) * scale * scale;
    for j in 0..s.nrows() {
        if s[(j, j)] <= floor {
            return Err(GncError::DegenerateCovariance(format!(
                "residual variance of column {j} is {:e}",
                s[(j, j)].as_f64()
            )));
        }
    }
    Ok(s)
}

/// Mean smoothing followed by the graphical lasso on the residuals.
pub fn fit_two_stage<T: Real>(
    x: &DMatrix<T>,
    basis: &SpectralBasis<T>,
    alpha: T,
    lambda: T,
    opts: &GlassoOptions<T>,
) -> Result<GncModel<T>> {
    let mean_fit = smoother::smooth_means(x, basis, alpha)?;
    let s = checked_residual_covariance(x, &mean_fit.m_hat)?;
    let precision_fit = glasso::fit_glasso(&s, lambda, opts)?;
    Ok(GncModel {
        mean_fit,
        precision_fit,
        config: ModelConfig::fixed(alpha.as_f64(), lambda.as_f64()),
    })
}

pub fn fit_two_stage_on_network<T: Real>(
    x: &DMatrix<T>,
    net: &Network,
    alpha: T,
    lambda: T,
    opts: &GlassoOptions<T>,
) -> Result<GncModel<T>> {
    let basis = SpectralBasis::from_network(net)?;
    fit_two_stage(x, &basis, alpha, lambda, opts)
}

/// Solves `W Theta + alpha diag(tau) W = rhs` for `W` (`n x p`).
pub fn solve_mean_equation<T: Real>(
    rhs: &DMatrix<T>,
    theta: &DMatrix<T>,
    tau: &nalgebra::DVector<T>,
    alpha: T,
) -> Result<DMatrix<T>> {
    let (n, p) = rhs.shape();
    if theta.shape() != (p, p) || tau.len() != n {
        return Err(GncError::DimensionMismatch(format!(
            "rhs {:?}, theta {:?}, {} eigenvalues",
            rhs.shape(),
            theta.shape(),
            tau.len()
        )));
    }
    require_spd(theta, "precision matrix")?;
    let eig = linalg::symmetric_eigen(theta)?;
    let q = &eig.vectors;
    let mut c = rhs * q;
    for i in 0..n {
        for j in 0..p {
            let denom = eig.values[j] + alpha * tau[i];
            if !(denom > T::zero()) {
                return Err(GncError::Singular("mean equation".into()));
            }
            c[(i, j)] /= denom;
        }
    }
    Ok(c * q.transpose())
}

/// Mean step of the joint estimator with `Theta` held fixed.
pub fn mean_step<T: Real>(
    x: &DMatrix<T>,
    basis: &SpectralBasis<T>,
    theta: &DMatrix<T>,
    alpha: T,
) -> Result<MeanFit<T>> {
    if x.nrows() != basis.n() {
        return Err(GncError::DimensionMismatch(format!(
            "data has {} rows, basis has {}",
            x.nrows(),
            basis.n()
        )));
    }
    if !(alpha >= T::zero()) {
        return Err(GncError::InvalidParameter("alpha must be >= 0".into()));
    }
    let rhs = basis.u.transpose() * x * theta;
    let b_hat = solve_mean_equation(&rhs, theta, &basis.tau, alpha)?;
    let m_hat = &basis.u * &b_hat;
    Ok(MeanFit { m_hat, b_hat, alpha })
}

/// Mean fit that uses the true precision matrix.
pub fn oracle_mean_fit<T: Real>(
    x: &DMatrix<T>,
    basis: &SpectralBasis<T>,
    alpha: T,
    theta_true: &DMatrix<T>,
) -> Result<MeanFit<T>> {
    mean_step(x, basis, theta_true, alpha)
}

/// Relative residual `|B Theta + alpha Lambda B - U^T X Theta|_F / |U^T X Theta|_F`,
/// computed by direct multiplication.
pub fn mean_equation_residual<T: Real>(
    b: &DMatrix<T>,
    x: &DMatrix<T>,
    basis: &SpectralBasis<T>,
    theta: &DMatrix<T>,
    alpha: T,
) -> T {
    let rhs = basis.u.transpose() * x * theta;
    let mut lhs = b * theta;
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            lhs[(i, j)] += alpha * basis.tau[i] * b[(i, j)];
        }
    }
    let denom = rhs.norm().max(T::eps());
    (lhs - rhs).norm() / denom
}

/// `log det Theta - (1/n) tr(Theta R^T R) - lambda |Theta|_{1,off} - (alpha/n) tr(M^T L_s M)`.
pub fn joint_objective<T: Real>(
    x: &DMatrix<T>,
    mean_fit: &MeanFit<T>,
    basis: &SpectralBasis<T>,
    theta: &DMatrix<T>,
    alpha: T,
    lambda: T,
) -> Result<T> {
    let s = smoother::residual_covariance(x, &mean_fit.m_hat)?;
    let likelihood = glasso::penalized_objective(&s, theta, lambda)?;
    let b = basis.u.transpose() * &mean_fit.m_hat;
    let mut smooth = T::zero();
    for i in 0..b.nrows() {
        smooth += basis.tau[i] * b.row(i).norm_squared();
    }
    let n = T::from_usize_lossy(x.nrows());
    Ok(likelihood - alpha / n * smooth)
}

#[derive(Debug, Clone)]
pub struct JointFit<T: Real> {
    pub model: GncModel<T>,
    /// Joint objective after each outer iteration.
    pub objective_trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternates the mean step and the glasso step, starting from `Theta = I`.
/// Stops when the joint objective changes by at most `tol * (1 + |obj|)`.
pub fn fit_iterative_joint<T: Real>(
    x: &DMatrix<T>,
    basis: &SpectralBasis<T>,
    alpha: T,
    lambda: T,
    outer_iters: usize,
    tol: T,
    opts: &GlassoOptions<T>,
) -> Result<JointFit<T>> {
    if !(alpha > T::zero()) || !(lambda > T::zero()) {
        return Err(GncError::InvalidParameter(
            "joint estimation needs alpha > 0 and lambda > 0".into(),
        ));
    }
    let p = x.ncols();
    let mut mean_fit = mean_step(x, basis, &DMatrix::identity(p, p), alpha)?;
    let s = checked_residual_covariance(x, &mean_fit.m_hat)?;
    let mut precision_fit = glasso::fit_glasso(&s, lambda, opts)?;
    let mut trace = vec![joint_objective(x, &mean_fit, basis, &precision_fit.theta, alpha, lambda)?];
    let mut converged = false;
    let mut iterations = 1;
    while iterations < outer_iters {
        iterations += 1;
        mean_fit = mean_step(x, basis, &precision_fit.theta, alpha)?;
        let s = checked_residual_covariance(x, &mean_fit.m_hat)?;
        precision_fit = glasso::fit_glasso_from(&s, lambda, opts, &precision_fit)?;
        let obj = joint_objective(x, &mean_fit, basis, &precision_fit.theta, alpha, lambda)?;
        let prev = *trace.last().expect("nonempty trace");
        trace.push(obj);
        if (obj - prev).abs() <= tol * (T::one() + obj.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("joint estimation stopped after {iterations} outer iterations");
    }
    Ok(JointFit {
        model: GncModel {
            mean_fit,
            precision_fit,
            config: ModelConfig::fixed(alpha.as_f64(), lambda.as_f64()),
        },
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// Estimation errors in the eigenbasis for the four mean estimators compared
/// in the oracle analysis, each defined by a linear equation in `W`.
#[derive(Debug, Clone)]
pub struct OracleErrorSet<T: Real> {
    /// `W + alpha Lambda W = alpha Lambda B - U^T E`.
    pub w1: DMatrix<T>,
    /// `W Theta + alpha Lambda W = alpha Lambda B + E_dot`.
    pub w2: DMatrix<T>,
    /// `W + alpha Lambda W = alpha Lambda B + E_dot`.
    pub w3: DMatrix<T>,
    /// `W diag(Theta) + alpha Lambda W = alpha Lambda B + E_dot`.
    pub w4: DMatrix<T>,
    /// `E_dot = -U^T E Theta`.
    pub e_dot: DMatrix<T>,
}

pub fn compute_oracle_errors<T: Real>(
    b: &DMatrix<T>,
    e: &DMatrix<T>,
    theta: &DMatrix<T>,
    alpha: T,
    basis: &SpectralBasis<T>,
) -> Result<OracleErrorSet<T>> {
    let (n, p) = b.shape();
    if e.shape() != (n, p) || theta.shape() != (p, p) || basis.n() != n {
        return Err(GncError::DimensionMismatch(format!(
            "B {:?}, E {:?}, Theta {:?}, basis {}",
            b.shape(),
            e.shape(),
            theta.shape(),
            basis.n()
        )));
    }
    require_spd(theta, "precision matrix")?;
    let ute = basis.u.transpose() * e;
    let e_dot = -(&ute * theta);
    let mut signal = b.clone();
    for i in 0..n {
        let s = alpha * basis.tau[i];
        signal.row_mut(i).scale_mut(s);
    }
    let rhs_dot = &signal + &e_dot;
    let rhs_tilde = &signal - &ute;
    let w1 = DMatrix::from_fn(n, p, |i, j| rhs_tilde[(i, j)] / (T::one() + alpha * basis.tau[i]));
    let w3 = DMatrix::from_fn(n, p, |i, j| rhs_dot[(i, j)] / (T::one() + alpha * basis.tau[i]));
    let w4 = DMatrix::from_fn(n, p, |i, j| rhs_dot[(i, j)] / (theta[(j, j)] + alpha * basis.tau[i]));
    let w2 = solve_mean_equation(&rhs_dot, theta, &basis.tau, alpha)?;
    Ok(OracleErrorSet { w1, w2, w3, w4, e_dot })
}

/// Largest row-wise ratio `sum_{k != j} |Theta_jk| / Theta_jj`.
pub fn diagonal_dominance<T: Real>(theta: &DMatrix<T>) -> T {
    let p = theta.nrows();
    let mut worst = T::zero();
    for j in 0..p {
        let off = (0..p)
            .filter(|&k| k != j)
            .fold(T::zero(), |a, k| a + theta[(j, k)].abs());
        worst = worst.max(off / theta[(j, j)]);
    }
    worst
}

#[derive(Debug, Clone)]
pub struct ClusterGlassoModel<T: Real> {
    pub labels: Vec<usize>,
    /// Each row's cluster mean.
    pub m_hat: DMatrix<T>,
    pub precision_fit: PrecisionFit<T>,
}

/// Residual covariance after centering each k-means cluster on its own mean.
pub fn cluster_residual_covariance<T: Real>(
    x: &DMatrix<T>,
    k_clusters: usize,
    seed: u64,
) -> Result<(Vec<usize>, DMatrix<T>, DMatrix<T>)> {
    let km = kmeans::kmeans(x, k_clusters, kmeans::DEFAULT_RESTARTS, seed)?;
    let m_hat = kmeans::assigned_centers(&km);
    let s = checked_residual_covariance(x, &m_hat)?;
    Ok((km.labels, m_hat, s))
}

pub fn fit_cluster_glasso<T: Real>(
    x: &DMatrix<T>,
    k_clusters: usize,
    lambda: T,
    seed: u64,
    opts: &GlassoOptions<T>,
) -> Result<ClusterGlassoModel<T>> {
    let (labels, m_hat, s) = cluster_residual_covariance(x, k_clusters, seed)?;
    let precision_fit = glasso::fit_glasso(&s, lambda, opts)?;
    Ok(ClusterGlassoModel {
        labels,
        m_hat,
        precision_fit,
    })
}
