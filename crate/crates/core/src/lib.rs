//! Two-dimensional discrete-time quantum walk with linear and domain-wall coin
//! profiles.
//!
//! The walk is `U = S_y C_y S_x C_x` on a periodic `L_x x L_y` lattice with
//! four internal states per site, ordered `LD, RD, LU, RU`. Alongside the
//! time stepping the crate provides momentum-resolved quasi-energy spectra,
//! bulk bands, a matrix-free near-unit eigensolver for corner states, and the
//! lattice Dirac Hamiltonians whose Trotter product the walk is.

pub mod continuum;
pub mod error;
pub mod evolution;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod spectral;
pub mod symmetry;

pub use error::{Error, Result};
pub use faer::c64;
pub use lattice::{Component, LatticeSpec, ObservableRecord, ObservableSeries, SpinorField2D};
pub use operators::{AngleProfile, Axis, StepOperator1D, StepOperator2D};

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
