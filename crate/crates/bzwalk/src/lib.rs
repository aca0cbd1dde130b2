//! Discrete-time quantum walks of a two-component (spinor) Bose-Einstein
//! condensate in the Brillouin zone of a 1-D optical lattice.
//!
//! The crate has two legs that are meant to be compared against each other:
//!
//! - a continuum leg ([`propagator`], [`protocol`]) that integrates the full
//!   spinor Schrödinger / Gross-Pitaevskii dynamics on a position grid with a
//!   split-step spectral method, including the experimental sequence that
//!   prepares, walks, and reads out the condensate; and
//! - an ideal leg ([`band`], [`idealwalk`]) that solves the Bloch problem of
//!   the sin^2 lattice and evolves the exact n-site ring walk decorated with
//!   Peierls phases and twisted boundary conditions.
//!
//! [`observables`] measures and compares the two (site distributions, walk
//! fidelity, Zeeman-distortion overlap), and [`decoherence`] carries the
//! magnetic-noise analytics plus a Monte-Carlo noisy-walk engine validating
//! them.
//!
//! All modules work in rescaled units (lengths in lattice constants d_L,
//! energies in recoil energies E_R, times in hbar/E_R); [`units`] converts at
//! the boundary.

pub mod band;
pub mod decoherence;
pub mod error;
pub mod grid;
pub mod idealwalk;
pub mod numerics;
pub mod observables;
pub mod propagator;
pub mod protocol;
pub mod units;

pub use error::{Error, Result};
pub use units::{LatticeConfig, PhysicalConstants, RescaledParams, WalkGeometry};
