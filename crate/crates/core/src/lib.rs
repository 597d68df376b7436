//! Euler characteristic, directional perimeter and area of digitized
//! excursion sets of planar scalar fields.
//!
//! The central estimator counts two families of three-point lattice
//! configurations: a set pixel whose right and upper neighbours are unset
//! (`N+`), and an unset pixel whose left and lower neighbours are set (`N-`).
//! Their difference equals the Euler characteristic of the Gauss
//! digitization whenever the digitization has no anti-diagonal
//! checkerboard cells, and converges to the Euler characteristic of the
//! excursion set of a `C^{1,1}` field as the lattice is refined.
//!
//! The crate is `no_std` (with `alloc`). Field synthesis, file formats and
//! the Monte Carlo harness live in the `exctop` crate.
//!
//! Lattice convention used throughout: values are stored row-major, the
//! row index is the `y` index (increasing upward, direction `u2`) and the
//! column index is the `x` index (direction `u1`).
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod closed_form;
pub mod covariance;
pub mod excursion;
pub mod field;
pub mod topology;
pub mod union_find;
pub mod window;

pub use closed_form::{ExpectedFunctionals, GaussianDensities, PhiConvention};
pub use covariance::{CovarianceKind, CovarianceModel, RegularityError};
pub use excursion::{BinaryImage, ExcursionError};
pub use field::{BoundaryMode, FieldSample};
pub use topology::{ConfigCounts, TopologyReport};
pub use window::{Rect, Window, WindowError};
