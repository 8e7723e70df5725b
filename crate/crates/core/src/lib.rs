//! Radial pseudospectral solver for the d-dimensional mass-critical nonlinear
//! Schrödinger equation `i u_t + Δu = μ |u|^{4/d} u`, together with the
//! harmonic-analysis diagnostics used to study its almost-periodic solutions:
//! Littlewood-Paley band norms, virial dynamics, localization radii,
//! Strichartz norms and a checker for the dyadic recursive-control lemma.
//!
//! The crate is `no_std` with `alloc`; IO, file formats and the command line
//! live in the companion `radnls` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bessel;
pub mod corpus;
pub mod diagnostics;
pub mod dyadic;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod lp;
pub mod norms;
pub mod recurrence;

pub use dyadic::DyadicScale;
pub use error::{Error, Result};
pub use evolution::{SimulationConfig, Snapshot, Trajectory};
pub use norms::Coupling;
pub use field::{RadialField, SpectralField};
pub use grid::RadialGrid;
pub use groundstate::GroundState;

pub use num_complex::Complex64;
