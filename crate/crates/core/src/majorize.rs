//! Weak and strong majorization: sorting and padding conventions, the
//! prefix-sum predicates with explicit slack reporting, and the `t^p`
//! consequence of a weak majorization bound.
//!
//! Vectors of different lengths are compared after zero-padding the shorter
//! one; an empty-vs-empty comparison holds vacuously.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which relation a verdict was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MajorizationMode {
    Weak,
    Strong,
}

/// Outcome of a majorization test, with enough detail to see where and by
/// how much a prefix failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizationVerdict {
    pub holds: bool,
    pub mode: MajorizationMode,
    /// `sum(y_desc[..k]) - sum(x_desc[..k])` for each prefix length k = 1..=len.
    pub prefix_slacks: Vec<f64>,
    /// `sum(x) - sum(y)`; must vanish (within tolerance) for the strong relation.
    pub total_gap: f64,
    /// 1-based prefix length attaining the minimum slack; 0 for empty input.
    pub worst_prefix: usize,
    /// Absolute slack tolerance actually applied: `tol * max(1, largest |prefix sum|)`.
    pub tolerance_used: f64,
}

impl MajorizationVerdict {
    /// Smallest prefix slack; +inf for empty input.
    pub fn min_slack(&self) -> f64 {
        self.prefix_slacks
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Elements rearranged in nonincreasing order.
pub fn sort_desc(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Elementwise absolute value.
pub fn abs_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.abs()).collect()
}

/// Appends zeros until `x` has length `len`.
pub fn pad_to(x: &[f64], len: usize) -> Result<Vec<f64>> {
    if len < x.len() {
        return Err(Error::Contract(format!(
            "pad_to target {len} is shorter than the vector length {}",
            x.len()
        )));
    }
    let mut v = x.to_vec();
    v.resize(len, 0.0);
    Ok(v)
}

fn check_finite(x: &[f64], context: &'static str) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context });
    }
    Ok(())
}

fn majorized(x: &[f64], y: &[f64], tol: f64, mode: MajorizationMode) -> Result<MajorizationVerdict> {
    check_finite(x, "left majorization input")?;
    check_finite(y, "right majorization input")?;
    let len = x.len().max(y.len());
    let xd = sort_desc(&pad_to(x, len)?);
    let yd = sort_desc(&pad_to(y, len)?);

    let mut prefix_slacks = Vec::with_capacity(len);
    let (mut sx, mut sy) = (0.0_f64, 0.0_f64);
    let mut scale = 1.0_f64;
    for k in 0..len {
        sx += xd[k];
        sy += yd[k];
        scale = scale.max(sx.abs()).max(sy.abs());
        prefix_slacks.push(sy - sx);
    }
    let total_gap = sx - sy;
    let tolerance_used = tol * scale;

    let (worst_prefix, min_slack) = prefix_slacks
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &s)| (i + 1, s))
        .unwrap_or((0, f64::INFINITY));

    let mut holds = min_slack >= -tolerance_used;
    if mode == MajorizationMode::Strong {
        holds = holds && total_gap.abs() <= tolerance_used;
    }
    Ok(MajorizationVerdict {
        holds,
        mode,
        prefix_slacks,
        total_gap,
        worst_prefix,
        tolerance_used,
    })
}

/// Tests `x` weakly (sub-)majorized by `y`: every descending prefix sum of
/// `x` at most the matching prefix sum of `y`, up to the relative tolerance.
pub fn weakly_majorized(x: &[f64], y: &[f64], tol: f64) -> Result<MajorizationVerdict> {
    majorized(x, y, tol, MajorizationMode::Weak)
}

/// Tests `x` (strongly) majorized by `y`: weak majorization plus equality of
/// the total sums.
pub fn strongly_majorized(x: &[f64], y: &[f64], tol: f64) -> Result<MajorizationVerdict> {
    majorized(x, y, tol, MajorizationMode::Strong)
}

fn pnorm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().cloned().fold(0.0_f64, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * x
        .iter()
        .map(|&v| (v / m).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// The `phi(t) = t^p` consequence for nonnegative vectors: checks
/// `(sum x_i^p)^(1/p) <= (sum y_i^p)^(1/p)` with relative tolerance.
pub fn pnorm_consequence(x: &[f64], y: &[f64], p: f64, tol: f64) -> Result<bool> {
    if !(p >= 1.0) {
        return Err(Error::Contract(format!("p-norm exponent {p} must be >= 1")));
    }
    check_finite(x, "left p-norm input")?;
    check_finite(y, "right p-norm input")?;
    if x.iter().chain(y.iter()).any(|&v| v < 0.0) {
        return Err(Error::Contract(
            "p-norm consequence is stated for nonnegative vectors".into(),
        ));
    }
    let lx = pnorm(x, p);
    let ly = pnorm(y, p);
    Ok(lx <= ly + tol * lx.abs().max(ly.abs()).max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sort_desc_basic() {
        assert_eq!(sort_desc(&[1.0, 3.0, 2.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(sort_desc(&[]), Vec::<f64>::new());
        assert_eq!(sort_desc(&[-1.0, -1.0]), vec![-1.0, -1.0]);
    }

    #[test]
    fn pad_to_appends_zeros() {
        assert_eq!(pad_to(&[1.0, 2.0], 4).unwrap(), vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(pad_to(&[1.0], 1).unwrap(), vec![1.0]);
        assert!(pad_to(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn abs_vec_examples() {
        assert_eq!(sort_desc(&abs_vec(&[1.0, -2.0])), vec![2.0, 1.0]);
        assert_eq!(abs_vec(&[0.0]), vec![0.0]);
        assert_eq!(abs_vec(&[-3.0, 3.0]), vec![3.0, 3.0]);
    }

    #[test]
    fn weak_holds_for_zero_one_vs_two_zero() {
        let v = weakly_majorized(&[0.0, 1.0], &[2.0, 0.0], 1e-12).unwrap();
        assert!(v.holds);
        assert_eq!(v.prefix_slacks, vec![1.0, 1.0]);
    }

    #[test]
    fn weak_fails_at_second_prefix() {
        let v = weakly_majorized(&[2.0, 1.0], &[2.0, 0.0], 1e-12).unwrap();
        assert!(!v.holds);
        assert_eq!(v.worst_prefix, 2);
        assert_eq!(v.prefix_slacks[1], -1.0);
    }

    #[test]
    fn weak_is_reflexive_with_zero_slack() {
        let x = [0.3, -1.0, 2.5];
        let v = weakly_majorized(&x, &x, 0.0).unwrap();
        assert!(v.holds);
        assert!(v.prefix_slacks.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn strong_example_from_definitions() {
        let v = strongly_majorized(&[0.0, 0.0, 0.0], &[2.0, -1.0, -1.0], 1e-12).unwrap();
        assert!(v.holds);
        assert_eq!(v.total_gap, 0.0);
    }

    #[test]
    fn strong_majorization_is_not_shift_stable() {
        // x = (0,0,0) < y = (2,-1,-1), but adding z = (-2,0,0) breaks it.
        let xz = [-2.0, 0.0, 0.0];
        let yz = [0.0, -1.0, -1.0];
        let v = strongly_majorized(&xz, &yz, 1e-12).unwrap();
        assert!(!v.holds);
        assert_eq!(v.worst_prefix, 2);
    }

    #[test]
    fn strong_requires_equal_sums() {
        let v = strongly_majorized(&[1.0, 0.0], &[2.0, 0.0], 1e-12).unwrap();
        assert!(!v.holds);
        assert_eq!(v.total_gap, -1.0);
        assert!(weakly_majorized(&[1.0, 0.0], &[2.0, 0.0], 1e-12).unwrap().holds);
    }

    #[test]
    fn mismatched_lengths_are_padded() {
        // (1,2) against (3,): pad y to (3,0); prefixes: 3-2=1, 3-3=0.
        let v = weakly_majorized(&[1.0, 2.0], &[3.0], 1e-12).unwrap();
        assert!(v.holds);
        assert_eq!(v.prefix_slacks, vec![1.0, 0.0]);
    }

    #[test]
    fn empty_vectors_hold_vacuously() {
        let v = strongly_majorized(&[], &[], 0.0).unwrap();
        assert!(v.holds);
        assert_eq!(v.worst_prefix, 0);
        assert!(v.prefix_slacks.is_empty());
    }

    #[test]
    fn rejects_non_finite_input() {
        assert!(weakly_majorized(&[f64::NAN], &[1.0], 1e-12).is_err());
        assert!(strongly_majorized(&[1.0], &[f64::INFINITY], 1e-12).is_err());
    }

    #[test]
    fn pnorm_consequence_examples() {
        assert!(pnorm_consequence(&[0.0, 1.0], &[2.0, 0.0], 1.0, 1e-12).unwrap());
        let x = [0.5, 0.25];
        assert!(pnorm_consequence(&x, &x, 3.0, 1e-12).unwrap());
        assert!(!pnorm_consequence(&[2.0, 1.0], &[2.0, 0.0], 1.0, 1e-12).unwrap());
    }

    #[test]
    fn pnorm_consequence_rejects_negatives_and_bad_p() {
        assert!(pnorm_consequence(&[-1.0], &[1.0], 2.0, 1e-12).is_err());
        assert!(pnorm_consequence(&[1.0], &[1.0], 0.5, 1e-12).is_err());
    }

    #[test]
    fn tolerance_scales_with_prefix_magnitude() {
        // Slack -1e-6 against prefix sums of order 1e6 passes at 1e-9 relative.
        let x = [1e6 + 1e-6];
        let y = [1e6];
        let v = weakly_majorized(&x, &y, 1e-9).unwrap();
        assert!(v.holds);
        // The same absolute slack on order-one data fails.
        let v = weakly_majorized(&[1.0 + 1e-6], &[1.0], 1e-9).unwrap();
        assert!(!v.holds);
    }
}
