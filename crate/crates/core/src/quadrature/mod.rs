//! Oscillation-aware quadrature for the short-time operator.
//!
//! On a two-point homogeneous space the kernel depends only on the distance,
//! so each Laplace eigenspace is invariant and `U(t)` acts on it as a scalar
//! `λ_j(t)`. [`multiplier`] computes that scalar as a one-dimensional radial
//! integral against the zonal profile of the level. [`dense`] applies the
//! full double integral on a grid and serves as an independent oracle.

pub mod dense;
pub mod gauss;
pub mod radial;
pub mod stationary;

pub use dense::{dense_apply, dense_apply_at, dense_rayleigh_quotient, DenseGrid, GridFunction};
pub use radial::{
    multiplier, operator_norm_estimate, zonal_profile, LevelMultiplier, MultiplierCache, MultiplierTable,
    QuadratureSettings, RadialRule, RefinementStep,
};
pub use stationary::{flat_patch_cutoff, oscillatory_radial_integral, stationary_phase_expansion, GaussianBump};
