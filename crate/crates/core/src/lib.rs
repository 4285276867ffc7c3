//! Gaussian graphical model estimation with network cohesion.
//!
//! Observations sit on the nodes of a known network and each node has its own
//! mean vector. Means are estimated by Laplacian smoothing over the network,
//! then a sparse precision matrix is fitted to the residuals with the
//! graphical lasso.
//!
//! The numerical core is generic over the scalar type through [`Real`]
//! (implemented for `f32` and `f64`). The aliases at the crate root fix the
//! scalar to `f64`, which is what the CLI and the tolerances in the test
//! suite assume.

pub mod error;
pub mod glasso;
pub mod graph;
pub mod io;
pub mod kmeans;
pub mod linalg;
pub mod pipeline;
pub mod scalar;
pub mod sim;
pub mod smoother;

pub use error::{GncError, Result};
pub use graph::Network;
pub use scalar::Real;

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;

pub type StandardizedLaplacian = graph::StandardizedLaplacian<f64>;
pub type SpectralBasis = graph::SpectralBasis<f64>;
pub type LaplacianSpectrum = graph::LaplacianSpectrum<f64>;
pub type CohesionReport = graph::CohesionReport<f64>;
pub type MeanFit = smoother::MeanFit<f64>;
pub type TuningCurve = smoother::TuningCurve<f64>;
pub type PrecisionFit = glasso::PrecisionFit<f64>;
pub type GlassoOptions = glasso::GlassoOptions<f64>;
pub type GncModel = pipeline::GncModel<f64>;
pub type OracleErrorSet = pipeline::OracleErrorSet<f64>;
pub type SimulatedPrecision = sim::SimulatedPrecision<f64>;
pub type RocCurve = sim::RocCurve<f64>;

pub type SpectralBasisF32 = graph::SpectralBasis<f32>;
pub type MeanFitF32 = smoother::MeanFit<f32>;
pub type PrecisionFitF32 = glasso::PrecisionFit<f32>;
