//! Two-channel quantum-scattering workbench.
//!
//! Computes bound states and predissociation resonances of a coupled
//! two-channel diatomic model by two independent routes:
//!
//! * direct diagonalization of the coupled Hamiltonian on a mapped Fourier
//!   grid, with an optional complex absorbing potential and box-size
//!   stabilization to extract resonance widths ([`mfgh`], [`resonance`]);
//! * quantum-defect analysis built on single-channel reference functions
//!   (Milne envelopes) and a short-range interaction matrix obtained from
//!   renormalized-Numerov propagation ([`milne`], [`numerov`], [`qdt`]).
//!
//! Internal units are atomic (hartree, bohr, electron mass). The public
//! energy windows and outputs are expressed in wavenumbers relative to the
//! lower (open-channel) threshold; see [`units`].

pub mod error;
pub mod grid;
pub mod interp;
pub mod mat2;
pub mod mfgh;
pub mod milne;
pub mod numerov;
pub mod ode;
pub mod potential;
pub mod qdt;
pub mod resonance;
pub mod units;

pub use error::{Error, Result};
