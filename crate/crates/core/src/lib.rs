//! Decorrelated ensembles of stochastic configuration networks (SCNs) over
//! heterogeneous feature groups.
//!
//! The library grows randomized single-hidden-layer base models node by node
//! under a data-dependent acceptance inequality, couples them through a
//! negative-correlation penalty on the ensemble mean, and evaluates the
//! stacked output weights by four interchangeable methods: naive averaging,
//! analytic pseudo-inverse, block Jacobi, and block Gauss-Seidel (all
//! optionally ridge-regularized).
//!
//! Module map:
//!
//! - [`numkit`] — dense linear-algebra kernel (least squares, ridge solves,
//!   symmetric eigendecomposition, spectral radius, scalar metrics)
//! - [`dataio`] — CSV ingestion, 0-1 normalization, splitting, feature-group
//!   partitioning, synthetic generators
//! - [`scn`] — stochastic configuration base models plus an RVFL baseline
//! - [`ncl`] — the negative-correlation block system and its four solvers
//! - [`diagnostics`] — solver-agreement studies, construction-time benches,
//!   and the bias/variance/covariance decomposition

pub mod dataio;
pub mod diagnostics;
pub mod ncl;
pub mod numkit;
pub mod scn;

pub use dataio::{Dataset, FeatureGroupSpec, NormParams, SplitSpec, TargetNorm};
pub use ncl::{EnsembleModel, NclSystem, SolveMethod, SolveReport, SolverConfig};
pub use numkit::Matrix;
pub use scn::{Activation, RvflConfig, ScnConfig, ScnModel};
