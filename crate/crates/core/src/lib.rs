//! Decoherence of a bismuth donor in silicon coupled to a ²⁹Si nuclear spin bath.
//!
//! The crate is organised around the pipeline used to study optimal working
//! points (OWPs) of the Si:Bi system:
//!
//! * [`spin`] builds and diagonalises the 20-level donor Hamiltonian and exposes
//!   the doublet mixing parameters `γ_m`, transition frequencies and `df/dB`.
//! * [`lattice`] generates diamond-cubic lattices, samples ²⁹Si occupancy and
//!   computes Fermi-contact and dipolar couplings.
//! * [`endor`] evaluates closed-form ENDOR line positions, synthesises spectra and
//!   extracts superhyperfine couplings from measured spectra.
//! * [`cce`] computes the Hahn-echo decay with the cluster correlation expansion,
//!   with an exact donor ⊗ cluster propagator as oracle.
//! * [`analysis`] fits stretched exponentials, locates OWPs and `df/dB` extrema and
//!   drives `T_SD` field sweeps.
//! * [`cli`] holds the configuration handling and file emission behind the `sibi`
//!   binary.
//!
//! All energies are stored internally as angular frequencies (rad/s).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cce;
pub mod cli;
pub mod endor;
mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod spin;

pub use error::{Error, Result};

/// Crate version written into every output file header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
