//! Spectral perturbation theory for the Steklov problem on nearly-spherical
//! domains in `R^{d+1}`.
//!
//! The crate computes first-order Steklov eigenvalue perturbations for a
//! boundary `r = 1 + eps * rho(theta)`, where `rho` is a finite real
//! combination of hyperspherical harmonics. Two independent assemblies of the
//! perturbation matrix are provided (quadrature and closed-form Wigner 3j
//! products), along with a Galerkin Dirichlet-to-Neumann solver used to
//! cross-check the slopes.

pub mod dtn;
pub mod error;
pub mod harmonics;
pub mod linalg;
pub mod perturbation;
pub mod quadrature;
pub mod special;
pub mod wigner;

pub use error::{Error, Result};
