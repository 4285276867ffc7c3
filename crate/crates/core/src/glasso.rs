//! Stage two: sparse precision estimation by the graphical lasso.
//!
//! Maximizes `log det(Theta) - tr(S Theta) - lambda * sum_{j != k} |Theta_jk|`
//! over symmetric positive-definite `Theta`. The diagonal is not penalized,
//! so at the optimum `W = Theta^{-1}` matches `S` on the diagonal and stays
//! within `lambda` of it elsewhere.
//!
//! The solver is block coordinate ascent over the columns of `W`; each block
//! is a lasso in the column's regression coefficients, solved by cyclic
//! coordinate descent.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GncError, Result};
use crate::linalg;
use crate::scalar::Real;

/// Off-diagonal magnitudes at or below this count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct GlassoOptions<T> {
    /// Relative tolerance on the mean absolute change of `W` off-diagonals,
    /// and absolute tolerance on the KKT residual at exit.
    pub tol: T,
    /// Cap on outer sweeps.
    pub max_iter: usize,
    /// Cap on coordinate-descent passes per column.
    pub max_inner_iter: usize,
    /// Record `log det W` after every sweep.
    pub record_trace: bool,
}

impl<T: Real> Default for GlassoOptions<T> {
    fn default() -> Self {
        GlassoOptions {
            tol: T::lit(1e-5),
            max_iter: 200,
            max_inner_iter: 10_000,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlassoDiagnostics<T> {
    /// Penalized log-likelihood at the returned `Theta`.
    pub objective: T,
    pub kkt_residual: T,
    pub iterations: usize,
    pub converged: bool,
    /// Input had negative eigenvalues and was clipped to PSD.
    pub repaired_input: bool,
    /// `log det W` after each sweep when requested; block ascent keeps it
    /// non-decreasing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dual_trace: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct PrecisionFit<T: Real> {
    pub theta: DMatrix<T>,
    /// Covariance iterate `W`, approximately `theta^{-1}`.
    pub sigma_hat: DMatrix<T>,
    pub lambda: T,
    /// Unordered pairs `(j, k)`, `j < k`, with `|theta_jk| > SUPPORT_THRESHOLD`.
    pub support: Vec<(usize, usize)>,
    pub diagnostics: GlassoDiagnostics<T>,
    /// Lasso coefficients per column, kept for warm starts.
    coef: DMatrix<T>,
}

impl<T: Real> PrecisionFit<T> {
    pub fn p(&self) -> usize {
        self.theta.nrows()
    }
}

/// Largest off-diagonal magnitude of `s`; any `lambda` at or above it gives a
/// diagonal estimate.
pub fn lambda_max<T: Real>(s: &DMatrix<T>) -> T {
    let p = s.nrows();
    let mut m = T::zero();
    for i in 0..p {
        for j in 0..p {
            if i != j {
                m = m.max(s[(i, j)].abs());
            }
        }
    }
    m
}

/// `count` values log-spaced from `lambda_max(s)` down to `lambda_max * ratio`.
pub fn lambda_grid<T: Real>(s: &DMatrix<T>, count: usize, ratio: T) -> Vec<T> {
    let hi = lambda_max(s);
    if hi == T::zero() {
        return vec![T::zero()];
    }
    let mut g = linalg::log_grid(hi * ratio, hi, count);
    g.reverse();
    g
}

pub fn support_of<T: Real>(theta: &DMatrix<T>) -> Vec<(usize, usize)> {
    let thr = T::lit(SUPPORT_THRESHOLD);
    let p = theta.nrows();
    let mut out = Vec::new();
    for j in 0..p {
        for k in (j + 1)..p {
            if theta[(j, k)].abs() > thr {
                out.push((j, k));
            }
        }
    }
    out
}

/// `log det(theta) - tr(s theta) - lambda * ||theta||_{1,off}`.
pub fn penalized_objective<T: Real>(s: &DMatrix<T>, theta: &DMatrix<T>, lambda: T) -> Result<T> {
    let logdet = linalg::log_det_spd(theta, "precision estimate")?;
    let p = s.nrows();
    let mut trace = T::zero();
    let mut l1 = T::zero();
    for i in 0..p {
        for j in 0..p {
            trace += s[(i, j)] * theta[(j, i)];
            if i != j {
                l1 += theta[(i, j)].abs();
            }
        }
    }
    Ok(logdet - trace - lambda * l1)
}

/// Maximum violation of the optimality conditions at `theta`, measured
/// against `theta^{-1}` computed here (not against any solver iterate).
pub fn kkt_residual<T: Real>(s: &DMatrix<T>, theta: &DMatrix<T>, lambda: T) -> Result<T> {
    let sigma = linalg::spd_inverse(&linalg::symmetrize(theta), "precision estimate")?;
    let thr = T::lit(SUPPORT_THRESHOLD);
    let p = s.nrows();
    let mut worst = T::zero();
    for j in 0..p {
        worst = worst.max((s[(j, j)] - sigma[(j, j)]).abs());
        for k in 0..p {
            if j == k {
                continue;
            }
            let gap = sigma[(j, k)] - s[(j, k)];
            let t = theta[(j, k)];
            let v = if t.abs() > thr {
                (gap - lambda * t.signum()).abs()
            } else {
                (gap.abs() - lambda).max(T::zero())
            };
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

fn validate_input<T: Real>(s: &DMatrix<T>, lambda: T) -> Result<()> {
    if s.nrows() != s.ncols() || s.nrows() == 0 {
        return Err(GncError::DimensionMismatch(format!(
            "covariance must be square and nonempty, got {:?}",
            s.shape()
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(GncError::NonFinite("covariance"));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(GncError::InvalidParameter(format!(
            "lambda must be finite and >= 0, got {}",
            lambda.as_f64()
        )));
    }
    let scale = linalg::max_abs(s).max(T::one());
    if !linalg::is_symmetric(s, T::lit(1e-10) * scale) {
        return Err(GncError::InvalidParameter("covariance is not symmetric".into()));
    }
    for j in 0..s.nrows() {
        if !(s[(j, j)] > T::zero()) {
            return Err(GncError::DegenerateCovariance(format!(
                "diagonal entry {j} is {} (must be positive)",
                s[(j, j)].as_f64()
            )));
        }
    }
    Ok(())
}

/// Clips negative eigenvalues of a symmetric matrix at zero. Returns the
/// input untouched when it is already PSD to round-off.
pub fn repair_psd<T: Real>(s: &DMatrix<T>) -> Result<(DMatrix<T>, bool)> {
    let eig = linalg::symmetric_eigen(s)?;
    let p = s.nrows();
    let scale = linalg::max_abs(s).max(T::one());
    let floor = -T::lit(1e-10) * scale;
    if eig.values[p - 1] >= floor {
        return Ok((s.clone(), false));
    }
    log::warn!(
        "covariance input has eigenvalue {:e}; clipping to PSD",
        eig.values[p - 1].as_f64()
    );
    let clipped = eig.values.map(|v| v.max(T::zero()));
    let repaired = &eig.vectors * DMatrix::from_diagonal(&clipped) * eig.vectors.transpose();
    Ok((linalg::symmetrize(&repaired), true))
}

fn soft_threshold<T: Real>(x: T, lambda: T) -> T {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        T::zero()
    }
}

fn mean_abs_offdiag<T: Real>(m: &DMatrix<T>) -> T {
    let p = m.nrows();
    if p < 2 {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..p {
        for j in 0..p {
            if i != j {
                acc += m[(i, j)].abs();
            }
        }
    }
    acc / T::from_usize_lossy(p * (p - 1))
}

struct WarmStart<T: Real> {
    w: DMatrix<T>,
    coef: DMatrix<T>,
}

/// Fits the graphical lasso at one `lambda`.
///
/// Hitting `max_iter` is not an error: the last iterate is returned with
/// `diagnostics.converged == false`.
pub fn fit_glasso<T: Real>(s: &DMatrix<T>, lambda: T, opts: &GlassoOptions<T>) -> Result<PrecisionFit<T>> {
    validate_input(s, lambda)?;
    let (s, repaired) = repair_psd(s)?;
    let mut fit = solve(&s, lambda, opts, None)?;
    fit.diagnostics.repaired_input = repaired;
    Ok(fit)
}

/// Warm-started fits along a strictly decreasing `lambda` grid.
pub fn glasso_path<T: Real>(s: &DMatrix<T>, lambdas: &[T], opts: &GlassoOptions<T>) -> Result<Vec<PrecisionFit<T>>> {
    if lambdas.is_empty() {
        return Err(GncError::InvalidParameter("lambda grid is empty".into()));
    }
    if lambdas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(GncError::InvalidParameter("lambda grid must be strictly decreasing".into()));
    }
    for &l in lambdas {
        validate_input(s, l)?;
    }
    let (s, repaired) = repair_psd(s)?;
    let mut out: Vec<PrecisionFit<T>> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let warm = out.last().map(|f| WarmStart {
            w: f.sigma_hat.clone(),
            coef: f.coef.clone(),
        });
        let mut fit = solve(&s, lambda, opts, warm)?;
        fit.diagnostics.repaired_input = repaired;
        out.push(fit);
    }
    Ok(out)
}

/// Warm-started single fit from a previous solution (used by the joint
/// estimator, whose covariance input drifts slowly between iterations).
pub fn fit_glasso_from<T: Real>(
    s: &DMatrix<T>,
    lambda: T,
    opts: &GlassoOptions<T>,
    previous: &PrecisionFit<T>,
) -> Result<PrecisionFit<T>> {
    validate_input(s, lambda)?;
    if previous.p() != s.nrows() {
        return Err(GncError::DimensionMismatch("warm start size".into()));
    }
    let (s, repaired) = repair_psd(s)?;
    // carry the previous correlation structure onto the new diagonal
    let old = &previous.sigma_hat;
    let p = s.nrows();
    let w = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            s[(i, i)]
        } else {
            old[(i, j)] * (s[(i, i)] * s[(j, j)] / (old[(i, i)] * old[(j, j)])).sqrt()
        }
    });
    let mut fit = solve(
        &s,
        lambda,
        opts,
        Some(WarmStart {
            w,
            coef: previous.coef.clone(),
        }),
    )?;
    fit.diagnostics.repaired_input = repaired;
    Ok(fit)
}

/// Fit whose support size is as close as possible to `target` edges. A
/// 30-point path brackets the target, then the bracket is bisected in log
/// lambda. Ties in distance go to the larger lambda.
pub fn fit_target_edges<T: Real>(s: &DMatrix<T>, target: usize, opts: &GlassoOptions<T>) -> Result<PrecisionFit<T>> {
    let grid = lambda_grid(s, 30, T::lit(0.01));
    let path = glasso_path(s, &grid, opts)?;
    let dist = |f: &PrecisionFit<T>| f.support.len().abs_diff(target);
    let mut best = path
        .iter()
        .min_by_key(|f| dist(f))
        .cloned()
        .expect("nonempty path");
    if dist(&best) == 0 {
        return Ok(best);
    }
    // last fit below the target and first fit above it
    let Some(hi_idx) = path.iter().position(|f| f.support.len() > target) else {
        log::warn!("support tops out at {} edges; target {target} not reachable", best.support.len());
        return Ok(best);
    };
    if hi_idx == 0 {
        return Ok(best);
    }
    let mut lo = path[hi_idx - 1].clone();
    let mut hi_lambda = path[hi_idx].lambda;
    for _ in 0..40 {
        let mid = (lo.lambda.ln() + hi_lambda.ln()) * T::lit(0.5);
        let fit = fit_glasso_from(s, mid.exp(), opts, &lo)?;
        let d = dist(&fit);
        if d < dist(&best) || (d == dist(&best) && fit.lambda > best.lambda) {
            best = fit.clone();
        }
        if d == 0 {
            break;
        }
        if fit.support.len() > target {
            hi_lambda = fit.lambda;
        } else {
            lo = fit;
        }
    }
    Ok(best)
}

/// Moves a positive definite `base` (with the diagonal of `s`) towards `s`
/// just far enough that every off-diagonal lies within `lambda` of `s`.
/// Block updates started from such a point keep `W` positive definite.
fn feasible_start<T: Real>(base: DMatrix<T>, s: &DMatrix<T>, lambda: T) -> DMatrix<T> {
    let p = s.nrows();
    let mut gap = T::zero();
    for i in 0..p {
        for j in 0..p {
            if i != j {
                gap = gap.max((base[(i, j)] - s[(i, j)]).abs());
            }
        }
    }
    if gap <= lambda {
        return base;
    }
    let t = T::one() - lambda / gap;
    let mut w = &base + (s - &base) * t;
    for j in 0..p {
        w[(j, j)] = s[(j, j)];
    }
    w
}

fn solve<T: Real>(
    s: &DMatrix<T>,
    lambda: T,
    opts: &GlassoOptions<T>,
    warm: Option<WarmStart<T>>,
) -> Result<PrecisionFit<T>> {
    let p = s.nrows();
    let (base, mut coef) = match warm {
        Some(ws) => (ws.w, ws.coef),
        None => (DMatrix::from_diagonal(&s.diagonal()), DMatrix::zeros(p, p)),
    };
    let mut w = feasible_start(base, s, lambda);
    let s_scale = mean_abs_offdiag(s);
    let diag_scale = (0..p).fold(T::zero(), |a, j| a + s[(j, j)]) / T::from_usize_lossy(p);
    let inner_tol = opts.tol * T::lit(1e-3) * diag_scale;
    let mut wb = vec![T::zero(); p];
    let mut dual_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut last: Option<(DMatrix<T>, T)> = None;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut total_change = T::zero();
        for j in 0..p {
            solve_column(&w, s, &mut coef, j, lambda, inner_tol, opts.max_inner_iter, &mut wb);
            for m in 0..p {
                if m == j {
                    continue;
                }
                total_change += (wb[m] - w[(m, j)]).abs();
                w[(m, j)] = wb[m];
                w[(j, m)] = wb[m];
            }
        }
        if opts.record_trace {
            dual_trace.push(linalg::log_det_spd(&w, "covariance iterate")?);
        }
        let mean_change = if p > 1 {
            total_change / T::from_usize_lossy(p * (p - 1))
        } else {
            T::zero()
        };
        if mean_change <= opts.tol * s_scale {
            let theta = recover_theta(&w, s, &mut coef, lambda, inner_tol, opts.max_inner_iter)?;
            let kkt = kkt_residual(s, &theta, lambda)?;
            if kkt <= opts.tol {
                converged = true;
                last = Some((theta, kkt));
                break;
            }
            last = Some((theta, kkt));
        } else {
            last = None;
        }
    }
    let (theta, kkt) = match last {
        Some(v) => v,
        None => {
            let theta = recover_theta(&w, s, &mut coef, lambda, inner_tol, opts.max_inner_iter)?;
            let kkt = kkt_residual(s, &theta, lambda)?;
            (theta, kkt)
        }
    };
    if !converged {
        log::warn!(
            "glasso at lambda = {:e} stopped after {} sweeps (KKT residual {:e})",
            lambda.as_f64(),
            iterations,
            kkt.as_f64()
        );
    }
    let objective = penalized_objective(s, &theta, lambda)?;
    Ok(PrecisionFit {
        support: support_of(&theta),
        theta,
        sigma_hat: w,
        lambda,
        diagnostics: GlassoDiagnostics {
            objective,
            kkt_residual: kkt,
            iterations,
            converged,
            repaired_input: false,
            dual_trace,
        },
        coef,
    })
}

/// Solves the lasso for column `j` against the current `W`, warm-started
/// from `coef[.., j]`. On return `wb[m] = sum_k W[m, k] coef[k, j]` for
/// `m != j`.
#[allow(clippy::too_many_arguments)]
fn solve_column<T: Real>(
    w: &DMatrix<T>,
    s: &DMatrix<T>,
    coef: &mut DMatrix<T>,
    j: usize,
    lambda: T,
    inner_tol: T,
    max_inner: usize,
    wb: &mut [T],
) {
    let p = w.nrows();
    for m in 0..p {
        if m == j {
            continue;
        }
        let mut acc = T::zero();
        for k in 0..p {
            if k != j {
                acc += w[(m, k)] * coef[(k, j)];
            }
        }
        wb[m] = acc;
    }
    for _ in 0..max_inner {
        let mut max_delta = T::zero();
        for k in 0..p {
            if k == j {
                continue;
            }
            let wkk = w[(k, k)];
            let old = coef[(k, j)];
            let partial = s[(k, j)] - (wb[k] - wkk * old);
            let new = soft_threshold(partial, lambda) / wkk;
            let delta = new - old;
            if delta != T::zero() {
                coef[(k, j)] = new;
                for m in 0..p {
                    if m != j {
                        wb[m] += w[(m, k)] * delta;
                    }
                }
                max_delta = max_delta.max(delta.abs() * wkk);
            }
        }
        if max_delta <= inner_tol {
            break;
        }
    }
}

/// Refreshes every column's coefficients against the current `W`, then
/// `theta_jj = 1 / (w_jj - beta^T W_11 beta)`, `theta_12 = -beta theta_jj`,
/// averaged with its transpose.
fn recover_theta<T: Real>(
    w: &DMatrix<T>,
    s: &DMatrix<T>,
    coef: &mut DMatrix<T>,
    lambda: T,
    inner_tol: T,
    max_inner: usize,
) -> Result<DMatrix<T>> {
    let p = w.nrows();
    let mut theta = DMatrix::zeros(p, p);
    let mut wb = vec![T::zero(); p];
    for j in 0..p {
        solve_column(w, s, coef, j, lambda, inner_tol, max_inner, &mut wb);
        let mut q = T::zero();
        for k in 0..p {
            if k != j {
                q += wb[k] * coef[(k, j)];
            }
        }
        let schur = w[(j, j)] - q;
        if !(schur > T::zero()) {
            return Err(GncError::NotPositiveDefinite("covariance iterate"));
        }
        let tjj = T::one() / schur;
        theta[(j, j)] = tjj;
        for k in 0..p {
            // `+ 0` turns the -0.0 of a zero coefficient into +0.0
            if k != j {
                theta[(k, j)] = -coef[(k, j)] * tjj + T::zero();
            }
        }
    }
    Ok(linalg::symmetrize(&theta))
}
