//! Exact construction and measurement of Brillouin zones of the planar
//! integer lattice and its perturbations.
//!
//! The `k`-th Brillouin zone of the origin is the union of the chambers of
//! the Bragg-line arrangement that lie beyond exactly `k - 1` lines. All
//! combinatorics here is exact rational arithmetic; floats appear only in
//! reported lengths and closed-form bounds.
//!
//! ```
//! use brillouin_core::{arrangement::Arrangement, lattice::integer_window, metrics::zone_report};
//!
//! let g = integer_window(3).unwrap();
//! let arr = Arrangement::build_default(&g).unwrap();
//! let z2 = zone_report(&arr, 2).unwrap();
//! assert_eq!(z2.n_chambers, 4);
//! assert_eq!(z2.area, brillouin_core::geom::rat(1));
//! ```

pub mod arrangement;
pub mod error;
pub mod export;
pub mod geom;
pub mod lattice;
pub mod metrics;
pub mod verify;

pub use error::{Error, Result};
