//! Numerical tolerances shared across the crate.
//!
//! Defaults sit comfortably above double-precision roundoff for dense
//! problems up to a few hundred rows, and every consumer that accepts a
//! `Tolerances` can be handed looser values for imported data.

/// Tolerance bundle used by constructors and decomposition wrappers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Orthonormality deviation allowed in basis-carrying types.
    pub orth: f64,
    /// Relative reconstruction residual allowed for eigen/singular factorizations.
    pub eig: f64,
    /// Rank cutoff relative to the largest singular value.
    pub rank_rel: f64,
    /// Relative residual below which a subspace counts as invariant.
    pub invariance: f64,
}

/// Default tolerances: orth 1e-10, eig 1e-9, rank 1e-12 (relative), invariance 1e-8.
pub const DEFAULT: Tolerances = Tolerances {
    orth: 1e-10,
    eig: 1e-9,
    rank_rel: 1e-12,
    invariance: 1e-8,
};

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT
    }
}

/// Default relative tolerance for bound checks and majorization verdicts.
pub const DEFAULT_CHECK_TOL: f64 = 1e-9;
