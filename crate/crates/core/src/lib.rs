//! Numerical verification of curvature identities for metrics on the closed
//! unit ball in dimensions 4 and 6.
//!
//! The crate is organized bottom-up:
//!
//! * [`grid`] discretizes the ball (radial Gauss-Legendre times tensorized
//!   hyperspherical Gauss rules) and provides a fourth-order finite-difference
//!   engine used by every curvature computation.
//! * [`curvature`] turns a metric callback into pointwise curvature data
//!   (Christoffel symbols, Riemann, Ricci, Weyl, trace-free Ricci) and checks
//!   the tensor identities that hold for locally conformally flat metrics.
//! * [`boundary`] handles the extrinsic geometry of the unit sphere and the
//!   Gauss-Bonnet boundary integrand.
//! * [`conformal`] implements conformal rescaling, the transformation laws of
//!   scalar and mean curvature, the invariant `F2` and the Yamabe quotient.
//! * [`spectral`] computes the first Robin eigenvalue of the conformal
//!   Laplacian for radial metrics in dimension 4.
//! * [`verify`] assembles the integral identities into [`verify::CheckReport`]s
//!   and [`report`] serializes them.

pub mod boundary;
pub mod conformal;
pub mod curvature;
mod error;
pub mod grid;
pub mod report;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};

pub use curvature::models::model;
pub use curvature::{MetricKind, MetricSpec};
pub use grid::BallGrid;
