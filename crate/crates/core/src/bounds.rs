//! Evaluation of the Ritz-value perturbation bounds: the left-hand
//! difference vector, every right-hand side formula, applicability routing,
//! and full verdicts with slack reporting.
//!
//! Bound identifiers are a stable string contract; so are the field names of
//! the serialized report.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::config;
use crate::error::{Error, Result};
use crate::majorize::{self, MajorizationMode, MajorizationVerdict};
use crate::numkern::{HermitianMatrix, OrthonormalBasis};
use crate::ritz::{self, InvariantClass};
use crate::subspace::{self, AlignedPair, AngleVector};

/// The bounds under test. Serialized names are stable and exactly as listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundId {
    /// `spr(A) sin(theta)` for one-dimensional subspaces; no invariance needed.
    Sin1D,
    /// `spr(A) sin^2(theta)` for one-dimensional subspaces, one side invariant.
    Sin2_1D,
    /// Weak majorization by `spr(A) sin(theta)`; no invariance needed.
    SinGeneral,
    /// Largest error at most `spr(A) gap`; no invariance needed.
    MaxGeneral,
    /// Largest error at most `spr(A) gap^2`; invariant side with a
    /// contiguous extreme spectrum.
    MaxInvariantExtreme,
    /// Weak majorization by `spr(A) sin^2(theta)`, one side invariant: the
    /// open conjecture.
    ConjectureSin2,
    /// Weak majorization by `spr(A) [e - cos(theta) + sin^2(theta)/2]`.
    ThmECos,
    /// Weak majorization by `spr(A) [sin^2(theta) + sin^4(theta)/2]`.
    Sin2PlusSin4,
    /// Weak majorization by `(3/2) spr(A) sin^2(theta)`.
    ThreeHalvesSin2,
    /// Weak majorization by `spr(A) tan^2(theta)`.
    Tan2,
}

impl BoundId {
    /// All bounds in their fixed reporting order.
    pub const ALL: [BoundId; 10] = [
        BoundId::Sin1D,
        BoundId::Sin2_1D,
        BoundId::SinGeneral,
        BoundId::MaxGeneral,
        BoundId::MaxInvariantExtreme,
        BoundId::ConjectureSin2,
        BoundId::ThmECos,
        BoundId::Sin2PlusSin4,
        BoundId::ThreeHalvesSin2,
        BoundId::Tan2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Sin1D => "SIN_1D",
            BoundId::Sin2_1D => "SIN2_1D",
            BoundId::SinGeneral => "SIN_GENERAL",
            BoundId::MaxGeneral => "MAX_GENERAL",
            BoundId::MaxInvariantExtreme => "MAX_INVARIANT_EXTREME",
            BoundId::ConjectureSin2 => "CONJECTURE_SIN2",
            BoundId::ThmECos => "THM_ECOS",
            BoundId::Sin2PlusSin4 => "SIN2_PLUS_SIN4",
            BoundId::ThreeHalvesSin2 => "THREE_HALVES_SIN2",
            BoundId::Tan2 => "TAN2",
        }
    }

    /// True for every bound backed by a proof; a violation of one of these
    /// is an implementation bug, never a finding.
    pub fn is_theorem_status(self) -> bool {
        self != BoundId::ConjectureSin2
    }

    /// Whether the bound needs an A-invariant side to apply.
    pub fn requires_invariance(self) -> bool {
        matches!(
            self,
            BoundId::Sin2_1D
                | BoundId::MaxInvariantExtreme
                | BoundId::ConjectureSin2
                | BoundId::ThmECos
                | BoundId::Sin2PlusSin4
                | BoundId::ThreeHalvesSin2
                | BoundId::Tan2
        )
    }

    /// Whether the bound additionally needs a contiguous extreme spectrum.
    pub fn requires_contiguous_extreme(self) -> bool {
        self == BoundId::MaxInvariantExtreme
    }

    /// Whether the bound is stated for one-dimensional subspaces only.
    pub fn requires_one_dim(self) -> bool {
        matches!(self, BoundId::Sin1D | BoundId::Sin2_1D)
    }

    pub fn relation(self) -> BoundRelation {
        match self {
            BoundId::Sin1D | BoundId::Sin2_1D | BoundId::MaxGeneral | BoundId::MaxInvariantExtreme => {
                BoundRelation::ScalarMax
            }
            _ => BoundRelation::WeakMajorization,
        }
    }
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        BoundId::ALL
            .iter()
            .copied()
            .find(|b| b.as_str() == upper)
            .ok_or_else(|| Error::Contract(format!("unknown bound id {s:?}")))
    }
}

impl Serialize for BoundId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for BoundId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the two sides of a bound are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundRelation {
    #[serde(rename = "weak-majorization")]
    WeakMajorization,
    #[serde(rename = "scalar-max")]
    ScalarMax,
}

/// Which of the two subspaces is A-invariant within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvariantSide {
    X,
    Y,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "none")]
    None,
}

impl InvariantSide {
    pub fn any(self) -> bool {
        self != InvariantSide::None
    }
}

/// Verdict of a scalar `lhs <= rhs` comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarVerdict {
    pub holds: bool,
    /// `rhs - lhs`; negative means violation.
    pub slack: f64,
    pub tolerance_used: f64,
}

/// Verdict payload, present when the bound is applicable.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundVerdict {
    Majorization(MajorizationVerdict),
    Scalar(ScalarVerdict),
}

impl BoundVerdict {
    pub fn holds(&self) -> bool {
        match self {
            BoundVerdict::Majorization(v) => v.holds,
            BoundVerdict::Scalar(v) => v.holds,
        }
    }

    /// Smallest slack observed (the whole story for scalar bounds).
    pub fn min_slack(&self) -> f64 {
        match self {
            BoundVerdict::Majorization(v) => v.min_slack(),
            BoundVerdict::Scalar(v) => v.slack,
        }
    }
}

/// Full record of one bound evaluation on one instance.
#[derive(Debug, Clone)]
pub struct BoundCheckReport {
    pub bound: BoundId,
    pub relation: BoundRelation,
    /// Sorted descending `|lambda(X^H A X) - lambda(Y^H A Y)|`; a single
    /// entry (the max) for scalar bounds.
    pub lhs: Vec<f64>,
    /// Right-hand side formula values, nonincreasing.
    pub rhs: Vec<f64>,
    /// `None` reason means the bound applies.
    pub inapplicable_reason: Option<String>,
    pub verdict: Option<BoundVerdict>,
    pub invariant_side: InvariantSide,
    pub angles: AngleVector,
    pub spread: f64,
    pub tolerance: f64,
    /// Set when an exact right angle drives a TAN2 entry to infinity.
    pub unbounded_rhs: bool,
}

impl BoundCheckReport {
    pub fn applicable(&self) -> bool {
        self.inapplicable_reason.is_none()
    }

    pub fn holds(&self) -> Option<bool> {
        self.verdict.as_ref().map(BoundVerdict::holds)
    }

    /// Applicable and failing.
    pub fn is_violation(&self) -> bool {
        self.holds() == Some(false)
    }

    pub fn prefix_slacks(&self) -> Vec<f64> {
        match &self.verdict {
            Some(BoundVerdict::Majorization(v)) => v.prefix_slacks.clone(),
            Some(BoundVerdict::Scalar(v)) => vec![v.slack],
            None => Vec::new(),
        }
    }

    pub fn worst_prefix(&self) -> Option<usize> {
        match &self.verdict {
            Some(BoundVerdict::Majorization(v)) => Some(v.worst_prefix),
            Some(BoundVerdict::Scalar(_)) => Some(1),
            None => None,
        }
    }
}

// The serialized field names are a stable external contract.
impl Serialize for BoundCheckReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BoundCheckReport", 12)?;
        st.serialize_field("bound", self.bound.as_str())?;
        st.serialize_field("applicable", &self.applicable())?;
        st.serialize_field("reason", &self.inapplicable_reason)?;
        st.serialize_field("holds", &self.holds())?;
        st.serialize_field("lhs", &self.lhs)?;
        st.serialize_field("rhs", &self.rhs)?;
        st.serialize_field("prefix_slacks", &self.prefix_slacks())?;
        st.serialize_field("worst_prefix", &self.worst_prefix())?;
        st.serialize_field("angles_rad", &self.angles.values())?;
        st.serialize_field("spread", &self.spread)?;
        st.serialize_field("invariant_side", &self.invariant_side)?;
        st.serialize_field("tolerance", &self.tolerance)?;
        st.serialize_field("relation", &self.relation)?;
        st.serialize_field("unbounded_rhs", &self.unbounded_rhs)?;
        st.end()
    }
}

/// Knobs for a bound check. `rhs_scale` deliberately weakens every bound and
/// exists so the shrinking and exit-code paths can be exercised end to end;
/// leave it at 1.0 for real checks.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    /// Relative tolerance for the comparison itself.
    pub tolerance: f64,
    /// Relative residual below which a side counts as invariant.
    pub invariance_tol: f64,
    /// Multiplier applied to the right-hand side.
    pub rhs_scale: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tolerance: config::DEFAULT_CHECK_TOL,
            invariance_tol: config::DEFAULT.invariance,
            rhs_scale: 1.0,
        }
    }
}

impl CheckOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// `|lambda(X^H A X) - lambda(Y^H A Y)|` sorted descending: the vector of
/// absolute Ritz value changes.
pub fn lhs_ritz_diff(
    a: &HermitianMatrix,
    x: &OrthonormalBasis,
    y: &OrthonormalBasis,
) -> Result<Vec<f64>> {
    if x.subspace_dim() != y.subspace_dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "subspace dimensions differ: {} vs {}",
                x.subspace_dim(),
                y.subspace_dim()
            ),
        });
    }
    let rx = ritz::ritz_values(a, x)?;
    let ry = ritz::ritz_values(a, y)?;
    let diffs: Vec<f64> = rx
        .values()
        .iter()
        .zip(ry.values())
        .map(|(u, v)| (u - v).abs())
        .collect();
    Ok(majorize::sort_desc(&diffs))
}

/// Evaluates the right-hand side formula of a bound for the given spread and
/// descending angles. Scalar-max bounds yield a single entry built from the
/// largest angle; a right angle makes the TAN2 entry infinite.
pub fn rhs_vector(bound: BoundId, spread: f64, angles: &AngleVector) -> Vec<f64> {
    let theta = angles.values();
    let half_pi = std::f64::consts::FRAC_PI_2;
    // 1 - cos(t) computed as 2 sin^2(t/2) keeps full relative accuracy for
    // small angles.
    let one_minus_cos = |t: f64| 2.0 * (0.5 * t).sin().powi(2);
    let sin2 = |t: f64| t.sin().powi(2);
    match bound {
        BoundId::Sin1D | BoundId::SinGeneral => theta.iter().map(|&t| spread * t.sin()).collect(),
        BoundId::Sin2_1D | BoundId::ConjectureSin2 => {
            theta.iter().map(|&t| spread * sin2(t)).collect()
        }
        BoundId::MaxGeneral => vec![spread * theta[0].sin()],
        BoundId::MaxInvariantExtreme => vec![spread * sin2(theta[0])],
        BoundId::ThmECos => theta
            .iter()
            .map(|&t| spread * (one_minus_cos(t) + 0.5 * sin2(t)))
            .collect(),
        BoundId::Sin2PlusSin4 => theta
            .iter()
            .map(|&t| spread * (sin2(t) + 0.5 * sin2(t) * sin2(t)))
            .collect(),
        BoundId::ThreeHalvesSin2 => theta.iter().map(|&t| 1.5 * spread * sin2(t)).collect(),
        BoundId::Tan2 => theta
            .iter()
            .map(|&t| {
                if t >= half_pi {
                    f64::INFINITY
                } else {
                    spread * t.tan().powi(2)
                }
            })
            .collect(),
    }
}

fn invariant_side_of(cx: &InvariantClass, cy: &InvariantClass) -> InvariantSide {
    match (cx.tag.is_invariant(), cy.tag.is_invariant()) {
        (true, true) => InvariantSide::Both,
        (true, false) => InvariantSide::X,
        (false, true) => InvariantSide::Y,
        (false, false) => InvariantSide::None,
    }
}

fn applicability_reason(
    bound: BoundId,
    k: usize,
    side: InvariantSide,
    cx: &InvariantClass,
    cy: &InvariantClass,
) -> Option<String> {
    if bound.requires_one_dim() && k != 1 {
        return Some(format!(
            "bound is stated for one-dimensional subspaces (k = {k})"
        ));
    }
    if bound.requires_invariance() && !side.any() {
        return Some("neither subspace is A-invariant within tolerance".into());
    }
    if bound.requires_contiguous_extreme() {
        let ok = (cx.tag.is_invariant() && cx.tag.is_contiguous_extreme())
            || (cy.tag.is_invariant() && cy.tag.is_contiguous_extreme());
        if !ok {
            return Some(
                "no invariant side carries a contiguous set of extreme eigenvalues".into(),
            );
        }
    }
    None
}

/// Weak-majorization verdict that tolerates infinite right-hand entries
/// (which make the relation vacuously true).
fn weak_verdict_allowing_inf(lhs: &[f64], rhs: &[f64], tol: f64) -> Result<MajorizationVerdict> {
    if rhs.iter().all(|v| v.is_finite()) {
        return majorize::weakly_majorized(lhs, rhs, tol);
    }
    let len = lhs.len().max(rhs.len());
    let xd = majorize::sort_desc(&majorize::pad_to(lhs, len)?);
    let yd = majorize::sort_desc(&majorize::pad_to(rhs, len)?);
    let mut prefix_slacks = Vec::with_capacity(len);
    let (mut sx, mut sy) = (0.0_f64, 0.0_f64);
    let mut scale = 1.0_f64;
    for i in 0..len {
        sx += xd[i];
        sy += yd[i];
        if sx.is_finite() {
            scale = scale.max(sx.abs());
        }
        prefix_slacks.push(sy - sx);
    }
    Ok(MajorizationVerdict {
        holds: true,
        mode: MajorizationMode::Weak,
        prefix_slacks,
        total_gap: sx - sy,
        worst_prefix: 1,
        tolerance_used: tol * scale,
    })
}

fn scalar_verdict(lhs: f64, rhs: f64, tol: f64) -> ScalarVerdict {
    let finite_rhs = if rhs.is_finite() { rhs.abs() } else { 0.0 };
    let scale = 1.0_f64.max(lhs.abs()).max(finite_rhs);
    let slack = rhs - lhs;
    ScalarVerdict {
        holds: slack >= -tol * scale,
        slack,
        tolerance_used: tol * scale,
    }
}

/// Checks a single bound with default options.
pub fn check_bound(
    bound: BoundId,
    a: &HermitianMatrix,
    x: &OrthonormalBasis,
    y: &OrthonormalBasis,
    tol: f64,
) -> Result<BoundCheckReport> {
    check_bound_with(bound, a, x, y, &CheckOptions::with_tolerance(tol))
}

/// Checks a single bound: applicability is decided first (never an error),
/// then the relation is evaluated and a full verdict returned.
pub fn check_bound_with(
    bound: BoundId,
    a: &HermitianMatrix,
    x: &OrthonormalBasis,
    y: &OrthonormalBasis,
    opts: &CheckOptions,
) -> Result<BoundCheckReport> {
    let k = x.subspace_dim();
    let angles = subspace::principal_angles(x, y)?;
    let spread = ritz::spread(a)?;
    let cx = ritz::classify_invariant(a, x, opts.invariance_tol)?;
    let cy = ritz::classify_invariant(a, y, opts.invariance_tol)?;
    let side = invariant_side_of(&cx, &cy);

    let lhs_full = lhs_ritz_diff(a, x, y)?;
    let lhs = match bound.relation() {
        BoundRelation::ScalarMax => vec![lhs_full[0]],
        BoundRelation::WeakMajorization => lhs_full,
    };
    let mut rhs = rhs_vector(bound, spread, &angles);
    if opts.rhs_scale != 1.0 {
        for v in rhs.iter_mut() {
            *v *= opts.rhs_scale;
        }
    }
    let unbounded_rhs = rhs.iter().any(|v| v.is_infinite());

    let reason = applicability_reason(bound, k, side, &cx, &cy);
    let verdict = if reason.is_some() {
        None
    } else {
        Some(match bound.relation() {
            BoundRelation::WeakMajorization => {
                BoundVerdict::Majorization(weak_verdict_allowing_inf(&lhs, &rhs, opts.tolerance)?)
            }
            BoundRelation::ScalarMax => {
                BoundVerdict::Scalar(scalar_verdict(lhs[0], rhs[0], opts.tolerance))
            }
        })
    };

    Ok(BoundCheckReport {
        bound,
        relation: bound.relation(),
        lhs,
        rhs,
        inapplicable_reason: reason,
        verdict,
        invariant_side: side,
        angles,
        spread,
        tolerance: opts.tolerance,
        unbounded_rhs,
    })
}

/// Runs every bound in the fixed `BoundId::ALL` order.
pub fn check_all(
    a: &HermitianMatrix,
    x: &OrthonormalBasis,
    y: &OrthonormalBasis,
    tol: f64,
) -> Result<Vec<BoundCheckReport>> {
    check_all_with(a, x, y, &CheckOptions::with_tolerance(tol))
}

pub fn check_all_with(
    a: &HermitianMatrix,
    x: &OrthonormalBasis,
    y: &OrthonormalBasis,
    opts: &CheckOptions,
) -> Result<Vec<BoundCheckReport>> {
    BoundId::ALL
        .iter()
        .map(|&b| check_bound_with(b, a, x, y, opts))
        .collect()
}

/// The proof-path intermediate vector
/// `[lambda(A11) - lambda(C A11 C)]_desc + lambda(-S^H A22 S)` for an
/// aligned pair with an A-invariant X side. The absolute Ritz difference is
/// strongly majorized by it, but its own absolute value can escape the
/// sin^2 right-hand side.
pub fn intermediate_majorant(a: &HermitianMatrix, pair: &AlignedPair) -> Result<Vec<f64>> {
    let residual = ritz::invariance_residual(a, pair.x_aligned())?;
    let spr = ritz::spread(a)?;
    let threshold = config::DEFAULT.invariance * spr + 1e-13 * (1.0 + a.frobenius_norm());
    if residual > threshold {
        return Err(Error::Contract(format!(
            "intermediate majorant requires an A-invariant X side: residual {residual:.3e} exceeds {threshold:.3e}"
        )));
    }

    let k = pair.subspace_dim();
    let am = a.to_matrix();
    let xa = pair.x_aligned().as_matrix();
    let a11 = xa.adjoint() * &am * xa;
    let c = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            crate::numkern::C64::new(pair.cos_diag()[i], 0.0)
        } else {
            crate::numkern::C64::new(0.0, 0.0)
        }
    });
    let ca11c = &c * &a11 * &c;

    let lam_a11 = crate::numkern::eigh(&HermitianMatrix::symmetrize(&a11))?;
    let lam_ca11c = crate::numkern::eigh(&HermitianMatrix::symmetrize(&ca11c))?;
    let diff: Vec<f64> = lam_a11
        .0
        .values()
        .iter()
        .zip(lam_ca11c.0.values())
        .map(|(u, v)| u - v)
        .collect();
    let diff_desc = majorize::sort_desc(&diff);

    let lam_neg_s = match pair.x_perp() {
        Some(perp) => {
            let xp = perp.as_matrix();
            let a22 = xp.adjoint() * &am * xp;
            let s = pair.s_block().as_matrix();
            let m = -(s.adjoint() * a22 * s);
            crate::numkern::eigh(&HermitianMatrix::symmetrize(&m))?
                .0
                .values()
                .to_vec()
        }
        None => vec![0.0; k],
    };

    Ok(diff_desc
        .iter()
        .zip(&lam_neg_s)
        .map(|(d, l)| d + l)
        .collect())
}
