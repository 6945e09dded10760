//! Electrodynamics from two Weyl fields.
//!
//! Dynamics use c-number bilinears of single-particle amplitudes; the
//! Bosonic commutation estimate uses an exact sparse Fock space.

mod field;
mod fock;

pub use field::*;
pub use fock::*;
