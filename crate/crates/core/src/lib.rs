//! Tau functions of Gelfand-Dickey hierarchies as block Toeplitz determinants.
//!
//! The crate is organized bottom-up:
//!
//! - [`gradedpoly`]: truncated graded polynomials in the times, Schur
//!   polynomials, characters, the KdV bilinear residual and the Sato shift.
//! - [`laurent`]: matrix Laurent series on the unit circle and their samples.
//! - [`symbols`]: Λ, exp(ξ(t,Λ)), the built-in symbol families, the Ξ map.
//! - [`toeplitz`]: T_N, D_N, the Plemelj operator in Fourier and quadrature
//!   form, Fredholm determinants, Szegő-Widom limits, Borodin-Okounkov.
//! - [`tau`]: numeric and graded τ_{W,N}, character expansion, Wronskians,
//!   the Δ operator and recursion checks, the wave function.
//! - [`factorization`]: Wiener-Hopf factorization and the wave matrix.
//! - [`algebro`]: Burchnall-Chaundy spectral matrices and reconstruction.
//! - [`cli`], [`config`], [`verify`]: the command-line front end.

pub mod algebro;
pub mod cli;
pub mod config;
pub mod error;
pub mod factorization;
pub mod gradedpoly;
pub mod laurent;
pub mod linalg;
pub mod report;
pub mod ring;
pub mod symbols;
pub mod tau;
pub mod toeplitz;
pub mod verify;

pub use error::{Error, Result};
