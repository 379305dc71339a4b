//! Numerical laboratory for the low-lying spectrum of randomly wiggled
//! waveguide segments.
//!
//! The crate covers the full chain from geometry to verified estimates:
//!
//! * [`geometry`] — bump profiles, disorder configurations, derived scalars;
//! * [`assembly`] — bilinear finite elements for the sheared quadratic form
//!   on the reference rectangle, with Neumann segment splitting;
//! * [`eigensolve`] — shift-invert subspace iteration for the lowest
//!   eigenpairs, resolvent application, block resolvent norms, and the
//!   reduced (ground-mode-deflated) resolvent of the straight guide;
//! * [`perturbation`] — Fourier expansion of the boundary profile and the
//!   analytic second-order expansion of the ground-state shift;
//! * [`probability`] — disorder sampling, exact binomial tails, the
//!   weak-disorder coupling window, and Monte Carlo estimates with exact
//!   confidence intervals;
//! * [`greens`] — the exponential weight function and resolvent decay
//!   bounds measured against the discrete operator.

pub mod assembly;
pub mod error;
pub mod eigensolve;
pub mod geometry;
pub mod greens;
pub mod linalg;
pub mod perturbation;
pub mod probability;

pub use error::{Error, Result};
