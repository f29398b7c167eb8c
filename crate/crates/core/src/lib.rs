//! Verification toolkit for a-priori Rayleigh-Ritz eigenvalue error bounds.
//!
//! The crate computes Ritz values, principal angles between subspaces, and
//! weak/strong majorization relations; evaluates a family of spread-times-
//! trigonometric error bounds with applicability routing; and runs seeded
//! fuzz campaigns that hunt for counterexamples to the sharp sin^2 bound
//! conjectured for invariant trial subspaces.

pub mod bounds;
pub mod config;
pub mod error;
pub mod io;
pub mod majorize;
pub mod numkern;
pub mod ritz;
pub mod subspace;

pub use error::{Error, Result};
