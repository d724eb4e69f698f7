//! Short-time geodesic propagators on rank-one symmetric manifolds.
//!
//! The short-time operator `U(t)` integrates a function against the kernel
//! `(2πi)^{-n/2} χ(d) √V e^{i d²/2t}`, built from the geodesic action, the
//! van Vleck amplitude and a smooth cutoff `χ`. On two-point homogeneous
//! spaces the kernel depends only on the distance, so `U(t)` is diagonal in
//! the Laplace eigenbasis. Time-sliced products `U(t/N)^N` then reduce to
//! scalar powers and can be compared against the exact curvature-corrected
//! group `exp(it(Δ - R/6)/2)`.
//!
//! Modules:
//! - [`manifold`]: circle, flat torus and round 2-sphere geometry.
//! - [`spectral`]: Laplace eigen-data, spectral states, the exact propagator.
//! - [`kernel`]: cutoff, action, van Vleck amplitude, kernel values.
//! - [`quadrature`]: multipliers, the dense-grid oracle, stationary phase.
//! - [`propagator`]: time slicing and convergence studies.
//! - [`experiment`]: configurable studies with CSV/JSON output.
//! - [`acceptance`]: the numerical acceptance criteria.

pub mod acceptance;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod manifold;
pub mod propagator;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use kernel::CutoffProfile;
pub use manifold::{ManifoldKind, ManifoldModel, Point};
pub use num_complex::Complex64;
pub use propagator::{ConvergenceRecord, ProjectorPolicy, SlicingPlan};
pub use quadrature::{MultiplierCache, MultiplierTable, QuadratureSettings};
pub use spectral::{EigenLevel, Generator, SpectralState, Spectrum};
