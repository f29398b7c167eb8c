//! Seeded fuzz campaigns over random instances, counterexample shrinking,
//! canonical reproductions of the sharp and proof-path examples, and the
//! classical majorization property suites.

mod campaign;
mod generate;
mod properties;
mod repro;
mod shrink;

pub use campaign::{
    run_campaign, run_campaign_with_jobs, BoundCounter, CampaignReport, ShrunkFinding,
    SkipRecord, Violation, ViolationKind,
};
pub use generate::{generate_instance, GeneratedInstance, Instance};
pub use properties::{property_suites, SuiteOutcome, SuiteReport};
pub use repro::{repro_intermediate_counterexample, repro_sharp, IntermediateRecord};
pub use shrink::{canonicalize, shrink, CanonicalInstance, ShrinkResult};

use serde::{Deserialize, Serialize};

use crate::bounds::BoundId;
use crate::error::{Error, Result};

/// Eigenvalue distribution of the random test matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumModel {
    /// Independent uniform values in [-1, 1].
    UniformInterval,
    /// A few cluster centers with optional tiny jitter; stresses degenerate
    /// eigenvalues.
    Clustered,
    /// Integers in [-3, 3].
    Integer,
    /// Values +1 and -1 only, the sharp-example family.
    TwoPoint,
}

/// Distribution of the prescribed principal angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleModel {
    /// Uniform in [0, pi/2].
    Uniform,
    /// Geometric decay theta_i = base * ratio^i.
    GradedPowers,
    /// Log-uniform in [1e-7, 1e-3]; stresses the sin^2 regime.
    NearZero,
    /// A mix of exact right angles, uniform angles, and small angles.
    MixedWithRightAngles,
}

/// How the X subspace is chosen relative to the spectrum of A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvarianceMode {
    /// Span of eigenvectors at an arbitrary set of spectrum positions.
    InvariantX,
    /// A Haar-random subspace, invariant only with probability zero.
    #[serde(rename = "none")]
    NonInvariant,
    /// Eigenvectors of a contiguous run of the largest or smallest eigenvalues.
    ContiguousExtreme,
    /// Eigenvectors whose eigenvalues all sit in the top or bottom half of
    /// the spectrum (midpoint inclusive).
    HalfSpectrum,
}

/// Campaign configuration; fully determines the campaign outcome together
/// with the crate version (wall time aside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub trials: usize,
    /// Inclusive range of ambient dimensions.
    pub n_range: (usize, usize),
    /// Inclusive range of subspace dimensions.
    pub k_range: (usize, usize),
    pub spectrum_model: SpectrumModel,
    pub angle_model: AngleModel,
    pub invariance_mode: InvarianceMode,
    pub seed: u64,
    /// Relative tolerance for the bound comparisons.
    pub tolerance: f64,
    pub bounds: Vec<BoundId>,
}

impl FuzzConfig {
    /// Sensible defaults everywhere except the seed.
    pub fn new(seed: u64) -> Self {
        Self {
            trials: 1000,
            n_range: (2, 12),
            k_range: (1, 6),
            spectrum_model: SpectrumModel::UniformInterval,
            angle_model: AngleModel::Uniform,
            invariance_mode: InvarianceMode::InvariantX,
            seed,
            tolerance: crate::config::DEFAULT_CHECK_TOL,
            bounds: BoundId::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Contract("trials must be at least 1".into()));
        }
        let (n_lo, n_hi) = self.n_range;
        let (k_lo, k_hi) = self.k_range;
        if n_lo < 1 || n_lo > n_hi {
            return Err(Error::Contract(format!(
                "invalid n range [{n_lo}, {n_hi}]"
            )));
        }
        if k_lo < 1 || k_lo > k_hi || k_hi > n_hi {
            return Err(Error::Contract(format!(
                "invalid k range [{k_lo}, {k_hi}] for n up to {n_hi}"
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::Contract(format!(
                "tolerance {} must be finite and nonnegative",
                self.tolerance
            )));
        }
        if self.bounds.is_empty() {
            return Err(Error::Contract("at least one bound must be selected".into()));
        }
        Ok(())
    }
}
