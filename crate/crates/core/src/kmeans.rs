//! Seeded Lloyd's k-means on the rows of a matrix.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GncError, Result};
use crate::scalar::Real;

pub const DEFAULT_RESTARTS: usize = 10;
const MAX_LLOYD_ITER: usize = 300;
const EMPTY_RETRY_CAP: usize = 10;

#[derive(Debug, Clone)]
pub struct KMeansResult<T: Real> {
    pub labels: Vec<usize>,
    /// `k x p`.
    pub centers: DMatrix<T>,
    /// Sum of squared distances to assigned centers.
    pub inertia: T,
}

fn sq_dist<T: Real>(x: &DMatrix<T>, i: usize, c: &DMatrix<T>, k: usize) -> T {
    let mut d = T::zero();
    for j in 0..x.ncols() {
        let v = x[(i, j)] - c[(k, j)];
        d += v * v;
    }
    d
}

/// k-means++ seeding.
fn seed_centers<T: Real>(x: &DMatrix<T>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<T> {
    let (n, p) = x.shape();
    let mut centers = DMatrix::zeros(k, p);
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from(&x.row(first));
    let mut best = vec![T::zero(); n];
    for (i, b) in best.iter_mut().enumerate() {
        *b = sq_dist(x, i, &centers, 0);
    }
    for c in 1..k {
        let total = best.iter().fold(0.0, |a, &d| a + d.as_f64());
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in best.iter().enumerate() {
                target -= d.as_f64();
                if target <= 0.0 && d > T::zero() {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from(&x.row(pick));
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.min(sq_dist(x, i, &centers, c));
        }
    }
    centers
}

/// One Lloyd run; `None` if a cluster empties.
fn lloyd<T: Real>(x: &DMatrix<T>, k: usize, rng: &mut ChaCha8Rng) -> Option<KMeansResult<T>> {
    let (n, p) = x.shape();
    let mut centers = seed_centers(x, k, rng);
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITER {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let mut best = 0;
            let mut best_d = sq_dist(x, i, &centers, 0);
            for c in 1..k {
                let d = sq_dist(x, i, &centers, c);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        let mut sums = DMatrix::<T>::zeros(k, p);
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for j in 0..p {
                sums[(c, j)] += x[(i, j)];
            }
        }
        if counts.contains(&0) {
            return None;
        }
        for c in 0..k {
            let cnt = T::from_usize_lossy(counts[c]);
            for j in 0..p {
                centers[(c, j)] = sums[(c, j)] / cnt;
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = labels
        .iter()
        .enumerate()
        .fold(T::zero(), |a, (i, &c)| a + sq_dist(x, i, &centers, c));
    Some(KMeansResult {
        labels,
        centers,
        inertia,
    })
}

/// Best of `restarts` seeded runs by inertia. A run whose cluster empties is
/// re-seeded, up to a fixed retry cap.
pub fn kmeans<T: Real>(x: &DMatrix<T>, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult<T>> {
    let n = x.nrows();
    if k == 0 || k > n {
        return Err(GncError::InvalidParameter(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult<T>> = None;
    for _ in 0..restarts.max(1) {
        let mut run = None;
        for _ in 0..EMPTY_RETRY_CAP {
            run = lloyd(x, k, &mut rng);
            if run.is_some() {
                break;
            }
        }
        let run = run.ok_or(GncError::EmptyCluster(EMPTY_RETRY_CAP))?;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// `n x p` matrix of each row's cluster center.
pub fn assigned_centers<T: Real>(result: &KMeansResult<T>) -> DMatrix<T> {
    let n = result.labels.len();
    let p = result.centers.ncols();
    DMatrix::from_fn(n, p, |i, j| result.centers[(result.labels[i], j)])
}
