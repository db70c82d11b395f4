//! Numerical core for the strongly-driven one-atom laser.
//!
//! A three-level Λ atom in a single-mode cavity, driven off-resonantly by
//! three lasers, behaves like a two-level atom coupled to the cavity through
//! `-(g_eff/2)(a† + a)(S₊ + S₋)`. With cavity damping the effective master
//! equation has a closed-form solution. This crate provides:
//!
//! - [`fock`]: truncated Fock-space linear algebra (bosonic operators,
//!   coherent states, displacements, partial traces, Wigner functions);
//! - [`models`]: dimensionless parameters and the full/effective Hamiltonians;
//! - [`analytic`]: the closed-form solution and everything derived from it;
//! - [`observables`]: photon statistics, populations and entropies of states;
//! - [`dynamics`]: a dense Lindblad integrator and a Monte Carlo
//!   wave-function (quantum trajectory) engine.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel ensembles live in the `sdoal` companion crate.
//!
//! Conventions used throughout:
//! - frequencies are dimensionless (units of the detuning Δ for the
//!   three-level model, arbitrary but consistent units for the effective
//!   model); ħ = 1;
//! - product spaces are indexed atom-major: `index = level * fock_dim + n`
//!   with atomic levels numbered from 1 in the public API (`|1⟩`, `|2⟩`, `|3⟩`);
//! - `S^{ij}₊ = |j⟩⟨i|` and `S^{ij}₋ = |i⟩⟨j|`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod dynamics;
mod error;
pub mod fock;
mod math;
pub mod models;
pub mod observables;
pub mod sparse;

pub use error::{Error, Result};

/// Complex scalar used for all amplitudes and matrix elements.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

pub use math::{binary_entropy_bits, poisson_pmf, poisson_tail};
