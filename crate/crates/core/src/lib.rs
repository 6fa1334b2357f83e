//! Well-rounded lattices on diagonal orbits.
//!
//! * [`lattice`]: unimodular lattices, short-vector enumeration and the
//!   graded invariants `Min_delta`, `dim_delta`, well-roundedness.
//! * [`exterior`]: Plücker coordinates, characters `chi_J`, stabilizers and
//!   nested multi-indices for flags.
//! * [`orbit`]: closed orbits from real quadratic orders and the search for
//!   well-rounded points on them.
//! * [`covering`]: grid realizations of covers of `simplex x R^t` and the
//!   multiplicity certificate.
//! * [`report`]: rounded JSON/CSV output.

pub mod covering;
pub mod error;
pub mod exterior;
pub mod lattice;
pub mod linalg;
pub mod orbit;
pub mod report;

pub use error::{Error, Result};
pub use lattice::{DiagonalElement, Lattice};
