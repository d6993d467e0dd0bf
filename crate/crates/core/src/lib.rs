//! Simulator and analysis toolkit for one-dimensional flux-saturated
//! chemotaxis with finite propagation speed.
//!
//! The solver works in Lagrangian mass coordinates: instead of the density
//! `u(t, x)` on a moving support, it evolves the reciprocal density
//! `v(t, eta) = 1/u` on the fixed mass interval `(0, M)`. The free boundaries
//! (fronts) become ordinary differential equations driven by the mass-average
//! of `v`, and the support length obeys an exact linear law that the scheme
//! reproduces to roundoff.
//!
//! Modules:
//! - [`flux`]: the saturated flux nonlinearity, its inverse and primitive,
//!   plus a numerical hypothesis validator.
//! - [`dual`]: the explicit conservative finite-volume solver for the
//!   mass-coordinate equation, with regularized saturation boundary fluxes.
//! - [`front`]: physical-space reconstruction, front ODEs, support forecast,
//!   center-of-mass diagnostics, Rankine-Hugoniot residuals.
//! - [`wave`]: traveling-wave profile construction (continuous and jump
//!   families) with admissibility audits.
//! - [`validate`]: invariant suites and grid-convergence studies.

pub mod dual;
pub mod error;
pub mod flux;
pub mod front;
mod quad;
pub mod validate;
pub mod wave;

pub use error::CoreError;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
