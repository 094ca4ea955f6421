//! Long-range interaction curves between a ground-state homonuclear dimer and
//! an excited atom.
//!
//! The perturbation operator `W(R) = B N² + K5/R⁵ + K6/R⁶` couples dimer
//! rotational levels once the electrostatic energy becomes comparable to the
//! rotational spacing. This crate builds the symmetry blocks of `W`, follows
//! its adiabatic eigenvalues across `R`, constructs the fixed-`N` diabatic
//! representation, and analyses the diabatic crossings (Landau-Zener
//! probabilities, normalized couplings, validity radii of the `1/Rⁿ` series).
//!
//! All quantities are in atomic units (hartree, bohr, electron masses);
//! [`units`] converts at the I/O boundary.

pub mod angular;
pub mod blocks;
pub mod crossings;
pub mod curves;
pub mod diabatic;
pub mod error;
pub mod operators;
pub mod quadrature;
pub mod species;
pub mod units;

pub use blocks::{build_block, Parity, Reflection, Symmetry, SymmetryBlock};
pub use curves::{assemble_w, convergence_study, eigensweep, BlockKernels, CurveSweep};
pub use diabatic::{build_diabatic, diabatic_matrix, DiabaticBasis};
pub use error::{Error, Result};
pub use operators::{BasisState, DispersionIntegrals};
pub use species::SpeciesData;
