//! Observation network: construction, standardized Laplacian, spectrum and
//! the cohesion diagnostics built on it.
//!
//! Eigenvalues are indexed the way the estimators use them: `tau[0]` is the
//! largest, `tau[n - 1]` the smallest (zero on every network with edges).

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{GncError, Result};
use crate::linalg;
use crate::scalar::Real;

/// Undirected simple graph on `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    /// Canonical edges, `i < j`, sorted.
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
}

impl Network {
    /// Builds a network from an arbitrary list of node pairs. Duplicate and
    /// reversed pairs collapse to one undirected edge.
    pub fn from_edges(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(GncError::EmptyNetwork);
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edge_list {
            for index in [a, b] {
                if index >= n {
                    return Err(GncError::NodeOutOfRange { index, n });
                }
            }
            if a == b {
                return Err(GncError::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut degrees = vec![0; n];
        for &(a, b) in &edges {
            degrees[a] += 1;
            degrees[b] += 1;
        }
        Ok(Network { n, edges, degrees })
    }

    /// `side x side` grid with 4-neighbour adjacency; node `(r, c)` has index
    /// `r * side + c`.
    pub fn lattice(side: usize) -> Result<Self> {
        if side < 2 {
            return Err(GncError::InvalidParameter(format!(
                "lattice side must be >= 2, got {side}"
            )));
        }
        let mut edges = Vec::with_capacity(2 * side * (side - 1));
        for r in 0..side {
            for c in 0..side {
                let i = r * side + c;
                if c + 1 < side {
                    edges.push((i, i + 1));
                }
                if r + 1 < side {
                    edges.push((i, i + side));
                }
            }
        }
        Network::from_edges(side * side, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Network::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Average degree `(1/n) * sum(d_i)`.
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    /// Number of connected components, isolated nodes included.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut count = self.n;
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                count -= 1;
            }
        }
        count
    }

    pub fn adjacency<T: Real>(&self) -> DMatrix<T> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = T::one();
            a[(j, i)] = T::one();
        }
        a
    }
}

/// `(D - A) / mean_degree`.
#[derive(Debug, Clone)]
pub struct StandardizedLaplacian<T: Real> {
    pub matrix: DMatrix<T>,
    pub mean_degree: T,
}

impl<T: Real> StandardizedLaplacian<T> {
    pub fn new(net: &Network) -> Result<Self> {
        if net.edges().is_empty() {
            return Err(GncError::NoEdges);
        }
        let dbar = T::lit(net.mean_degree());
        let n = net.n();
        let mut l = DMatrix::zeros(n, n);
        for &(i, j) in net.edges() {
            l[(i, j)] -= T::one();
            l[(j, i)] -= T::one();
        }
        for (i, &d) in net.degrees().iter().enumerate() {
            l[(i, i)] = T::from_usize_lossy(d);
        }
        Ok(StandardizedLaplacian {
            matrix: l / dbar,
            mean_degree: dbar,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Eigen-decomposition `L_s = U diag(tau) U^T`, `tau` descending.
#[derive(Debug, Clone)]
pub struct SpectralBasis<T: Real> {
    pub tau: DVector<T>,
    pub u: DMatrix<T>,
    /// Eigenvalues clamped to exactly zero; equals the component count.
    pub zero_count: usize,
}

/// Absolute tolerance under which an eigenvalue is treated as zero.
pub fn zero_eigen_tolerance<T: Real>(largest: T) -> T {
    let scaled = T::lit(100.0) * T::eps() * largest.abs().max(T::one());
    T::lit(1e-10).max(scaled)
}

/// Clamps near-zero eigenvalues to exactly zero and returns how many there
/// are; a clearly negative eigenvalue means the input was not a Laplacian.
fn clamp_spectrum<T: Real>(tau: &mut DVector<T>) -> Result<usize> {
    let tol = zero_eigen_tolerance(tau[0]);
    let mut zero_count = 0;
    for t in tau.iter_mut() {
        if t.abs() <= tol {
            *t = T::zero();
            zero_count += 1;
        } else if *t < T::zero() {
            return Err(GncError::InvalidParameter(format!(
                "Laplacian has negative eigenvalue {}",
                t.as_f64()
            )));
        }
    }
    Ok(zero_count)
}

fn effective_dimension_of<T: Real>(tau: &DVector<T>) -> Result<usize> {
    let n = tau.len();
    (1..n)
        .find(|&m| tau[n - 1 - m] >= T::one() / T::from_usize_lossy(m).sqrt())
        .ok_or_else(|| GncError::InvalidParameter("no m satisfies the effective-dimension condition".into()))
}

/// Eigenvalues of `L_s` without eigenvectors, for diagnostics on networks
/// too large to need a basis.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum<T: Real> {
    /// Descending, clamped as in [`SpectralBasis`].
    pub tau: DVector<T>,
    pub zero_count: usize,
}

impl<T: Real> LaplacianSpectrum<T> {
    pub fn from_laplacian(l: &StandardizedLaplacian<T>) -> Result<Self> {
        let mut tau = linalg::symmetric_eigenvalues(&l.matrix)?;
        let zero_count = clamp_spectrum(&mut tau)?;
        Ok(LaplacianSpectrum { tau, zero_count })
    }

    pub fn from_network(net: &Network) -> Result<Self> {
        Self::from_laplacian(&StandardizedLaplacian::new(net)?)
    }

    pub fn is_connected(&self) -> bool {
        self.zero_count == 1
    }

    pub fn algebraic_connectivity(&self) -> Result<T> {
        if !self.is_connected() {
            return Err(GncError::Disconnected(self.zero_count));
        }
        Ok(self.tau[self.tau.len() - 2])
    }

    pub fn effective_dimension(&self) -> Result<usize> {
        if !self.is_connected() {
            return Err(GncError::Disconnected(self.zero_count));
        }
        effective_dimension_of(&self.tau)
    }
}

impl<T: Real> SpectralBasis<T> {
    pub fn from_laplacian(l: &StandardizedLaplacian<T>) -> Result<Self> {
        let eig = linalg::symmetric_eigen(&l.matrix)?;
        let mut tau = eig.values;
        let zero_count = clamp_spectrum(&mut tau)?;
        Ok(SpectralBasis {
            tau,
            u: eig.vectors,
            zero_count,
        })
    }

    pub fn from_network(net: &Network) -> Result<Self> {
        Self::from_laplacian(&StandardizedLaplacian::new(net)?)
    }

    pub fn n(&self) -> usize {
        self.tau.len()
    }

    pub fn is_connected(&self) -> bool {
        self.zero_count == 1
    }

    /// Smallest nonzero eigenvalue of a connected network.
    pub fn algebraic_connectivity(&self) -> Result<T> {
        self.require_connected()?;
        Ok(self.tau[self.n() - 2])
    }

    fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(GncError::Disconnected(self.zero_count))
        }
    }

    /// Smallest `m` in `1..n` with `tau_{n-m} >= 1/sqrt(m)`, where
    /// `tau_{n-m}` is the `(m+1)`-th smallest eigenvalue.
    pub fn effective_dimension(&self) -> Result<usize> {
        self.require_connected()?;
        effective_dimension_of(&self.tau)
    }

    /// Coordinates `U^T v`.
    pub fn coefficients(&self, v: &DVector<T>) -> Result<DVector<T>> {
        if v.len() != self.n() {
            return Err(GncError::DimensionMismatch(format!(
                "vector of length {} against basis of size {}",
                v.len(),
                self.n()
            )));
        }
        Ok(self.u.transpose() * v)
    }

    /// Checks `tau_i^2 beta_i^2 / |beta|^2 <= n^{-2(1+delta)/3 - 1}` for all i.
    pub fn cohesion_check(&self, v: &DVector<T>, delta: T) -> Result<CohesionReport<T>> {
        if delta <= T::zero() {
            return Err(GncError::InvalidParameter("cohesion rate must be positive".into()));
        }
        let beta = self.coefficients(v)?;
        let norm2 = beta.norm_squared();
        if norm2 == T::zero() {
            return Err(GncError::ZeroVector);
        }
        let n = T::from_usize_lossy(self.n());
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let bound = n.powf(-(two * (T::one() + delta) / three) - T::one());
        let ratios: Vec<T> = beta
            .iter()
            .zip(self.tau.iter())
            .map(|(&b, &t)| t * t * b * b / norm2)
            .collect();
        // Relative slack for round-off in U^T v; vectors built on the boundary
        // must still classify as cohesive.
        let slack = bound * T::lit(1e-9);
        let cohesive = ratios.iter().all(|&r| r <= bound + slack);
        Ok(CohesionReport {
            cohesive,
            bound,
            ratios,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CohesionReport<T> {
    pub cohesive: bool,
    pub bound: T,
    /// Per-eigenvector ratios in basis order.
    pub ratios: Vec<T>,
}

impl<T: Real> CohesionReport<T> {
    /// `bound - max ratio`; nonnegative iff cohesive (up to round-off).
    pub fn margin(&self) -> T {
        let worst = self.ratios.iter().fold(T::zero(), |a, &r| a.max(r));
        self.bound - worst
    }
}

/// Sample variance over squared sample mean; `+inf` when the mean is zero.
pub fn trivial_cohesion_ratio<T: Real>(v: &DVector<T>) -> Result<T> {
    if v.iter().all(|&x| x == T::zero()) {
        return Err(GncError::ZeroVector);
    }
    let n = v.len();
    if n < 2 {
        return Err(GncError::InvalidParameter(
            "sample variance needs at least two entries".into(),
        ));
    }
    let mean = v.sum() / T::from_usize_lossy(n);
    let var = v.iter().map(|&x| (x - mean) * (x - mean)).fold(T::zero(), |a, b| a + b)
        / T::from_usize_lossy(n - 1);
    if mean == T::zero() {
        return Ok(T::lit(f64::INFINITY));
    }
    Ok(var / (mean * mean))
}
