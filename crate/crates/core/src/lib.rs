//! Semiclassical scattering off smooth repulsive central potentials in the plane.
//!
//! The crate computes the radial action difference `ΔW(l, p)` between scattered and free
//! motion, its derivatives (deflection angle, time delay), the WKB phase shift
//! `δ = ΔW / 2ħ`, and the two monodromy diagnostics that follow from the non-smoothness of
//! `ΔW` at `l = 0`:
//!
//! * classical: the deflection angle, continued along a loop of `(l, p)` values that encircles
//!   the critical point `(0, p_c)`, comes back shifted by `2π` ([`orbits::loop_holonomy`]);
//! * quantum: a unit cell of the lattice of phase-shift zeros, transported around
//!   `(0, p_c / ħ)`, comes back sheared by a unipotent integer matrix
//!   ([`lattice::transport_cell`]).
//!
//! [`quantum`] solves the exact radial wave equation per partial wave and measures how far
//! the WKB phase is from it.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and parallel drivers
//! live in the `monoscat` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod math;

pub mod actions;
pub mod bessel;
pub mod error;
pub mod lattice;
pub mod ode;
pub mod orbits;
pub mod potential;
pub mod quadrature;
pub mod quantum;
pub mod roots;

pub use actions::{ActionValue, Branch, Side};
pub use error::{Error, Result};
pub use potential::{CriticalData, PotentialKind, PotentialModel, RadialProfile, ScatterPoint};
pub use quadrature::QuadratureSpec;

/// Default reduced mass.
pub const DEFAULT_MU: f64 = 1.0;
/// Default Planck constant; the lattice figures are drawn with this value.
pub const DEFAULT_HBAR: f64 = 0.25;
