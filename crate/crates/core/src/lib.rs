//! Infinite-system density matrix renormalization group for one-dimensional
//! quantum chains, together with the quantum-information and
//! information-geometry measures used to analyse its truncation, and two
//! independent references for its entanglement spectra: the corner transfer
//! matrix of a small 2D Ising lattice and the exact Gaussian half-chain
//! spectrum of the harmonic-oscillator chain.
//!
//! Module map:
//!
//! - [`numerics`]: dense symmetric eigensolver, SVD, Lanczos, PSD square root.
//! - [`models`]: chain Hamiltonians and small-`N` exact diagonalization.
//! - [`dmrg`]: blocks, superblocks, density-matrix truncation, the infinite
//!   algorithm and its mixed-state variant.
//! - [`qinfo`]: density matrices, entropies, Schmidt decomposition, fidelity
//!   and Bures distance.
//! - [`infogeo`]: classical α-divergences and the Fisher metric.
//! - [`angular`]: Gaussian half-chain spectra and imaginary-order Bessel waves.
//! - [`ctm`]: corner transfer matrices of the isotropic Ising lattice.
//! - [`oracles`]: brute-force references for tests and acceptance runs.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod ctm;
pub mod dmrg;
pub mod error;
pub mod infogeo;
pub mod models;
pub mod numerics;
#[doc(hidden)]
pub mod oracles;
pub mod qinfo;

pub use error::{Error, Result};
pub use numerics::DenseMatrix;
