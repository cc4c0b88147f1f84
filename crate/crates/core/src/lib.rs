//! Numerical core for checking Neumann Li-Yau gradient estimates on
//! warped-product surfaces with boundary.
//!
//! Everything here is a pure function of its inputs and runs without `std`:
//! surface geometry and geodesic distances, hypothesis audits (integral
//! Ricci bounds, volume doubling, rolling balls), the cutoff function and
//! the estimate's constants, a spectral/Crank-Nicolson Neumann heat solver,
//! the auxiliary `J` problem, and the pointwise verification of the
//! estimates themselves. File formats, configuration and the command line
//! live in the companion `liyau-harness` crate.
#![no_std]
#![deny(unsafe_code)]
// `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod audit;
pub mod constants;
pub mod cutoff;
mod diff;
pub mod eikonal;
pub mod error;
mod fft;
pub mod geometry;
pub mod grid;
pub mod heat;
pub mod jsolver;
pub mod kernel;
pub mod report;
mod tridiag;
pub mod verify;
pub mod volume;

pub use error::{Error, Result};
pub use geometry::{BoundaryCurvature, Warp, WarpedSurface};
pub use grid::{FieldOnGrid, Grid, Node, Units};
pub use report::{Location, Provenance, VerifyReport};

/// Topological dimension of every surface handled by this crate.
pub const DIM: usize = 2;
