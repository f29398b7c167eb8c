//! Canonicalization of a violating instance and greedy shrinking.
//!
//! Any pair of k-dimensional subspaces is unitarily equivalent to the
//! canonical configuration `X = span(e_1..e_k)`,
//! `y_i = cos(theta_i) e_i + sin(theta_i) e_{k+i}`, so an instance is fully
//! described by a Hermitian matrix in the rotated coordinates plus the angle
//! vector. Shrinking works on that form: drop spectator coordinates, drop
//! angles, snap cosines to eighths, snap the spectrum to integers, keeping a
//! move only while the violation persists.

use nalgebra::{DMatrix, DVector};

use crate::bounds::{check_bound_with, BoundCheckReport, BoundId, CheckOptions};
use crate::error::{Error, Result};
use crate::majorize;
use crate::numkern::{eigh, C64, HermitianMatrix, OrthonormalBasis};
use crate::subspace::{align_bases, AngleVector};

/// Angles below this are treated as exact zeros during canonicalization;
/// far below any deliberately sampled angle (the near-zero model floors at
/// 1e-7) but above alignment roundoff.
const ANGLE_SNAP: f64 = 1e-12;

/// A violating instance in canonical coordinates.
#[derive(Debug, Clone)]
pub struct CanonicalInstance {
    pub a: HermitianMatrix,
    pub x: OrthonormalBasis,
    pub y: OrthonormalBasis,
    /// Prescribed principal angles, descending.
    pub thetas: Vec<f64>,
    pub n: usize,
    pub k: usize,
}

/// Result of a shrink run: the smallest instance found, its report, and the
/// number of accepted shrinking moves.
#[derive(Debug, Clone)]
pub struct ShrinkResult {
    pub instance: CanonicalInstance,
    pub report: BoundCheckReport,
    pub steps: usize,
}

/// Internal mutable state: the rotated matrix plus the angles.
#[derive(Clone)]
struct Canon {
    a: DMatrix<C64>,
    thetas: Vec<f64>,
}

impl Canon {
    fn n(&self) -> usize {
        self.a.nrows()
    }

    fn k(&self) -> usize {
        self.thetas.len()
    }

    fn nonzero_angles(&self) -> usize {
        self.thetas.iter().filter(|&&t| t > 0.0).count()
    }

    fn to_instance(&self) -> Result<CanonicalInstance> {
        let (n, k, m) = (self.n(), self.k(), self.nonzero_angles());
        if k == 0 || k + m > n {
            return Err(Error::Contract(format!(
                "canonical shape invalid: n = {n}, k = {k}, nonzero angles = {m}"
            )));
        }
        let x = OrthonormalBasis::identity_embedding(n, k);
        let mut y = DMatrix::<C64>::zeros(n, k);
        for (i, &t) in self.thetas.iter().enumerate() {
            if t > 0.0 {
                y[(i, i)] = C64::new(t.cos(), 0.0);
                y[(k + i, i)] = C64::new(t.sin(), 0.0);
            } else {
                y[(i, i)] = C64::new(1.0, 0.0);
            }
        }
        Ok(CanonicalInstance {
            a: HermitianMatrix::symmetrize(&self.a),
            x,
            y: OrthonormalBasis::new(y)?,
            thetas: self.thetas.clone(),
            n,
            k,
        })
    }

    /// Removes the given coordinates (sorted, distinct) from the matrix.
    fn drop_coords(&self, coords: &[usize]) -> DMatrix<C64> {
        let keep: Vec<usize> = (0..self.n()).filter(|i| !coords.contains(i)).collect();
        DMatrix::from_fn(keep.len(), keep.len(), |r, c| self.a[(keep[r], keep[c])])
    }
}

/// Orthonormal columns extended by pivoted Gram-Schmidt over a candidate set.
fn extend_orthonormal(
    mut cols: Vec<DVector<C64>>,
    candidates: &[DVector<C64>],
    target: usize,
) -> Vec<DVector<C64>> {
    let mut residuals: Vec<DVector<C64>> = candidates
        .iter()
        .map(|cand| {
            let mut r = cand.clone();
            for c in &cols {
                let coef = c.dotc(&r);
                r -= c * coef;
            }
            r
        })
        .collect();
    let mut used = vec![false; residuals.len()];
    while cols.len() < target {
        let (best, _) = residuals
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, r)| (j, r.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("enough candidates to complete the basis");
        used[best] = true;
        let mut v = residuals[best].clone();
        for c in &cols {
            let coef = c.dotc(&v);
            v -= c * coef;
        }
        let norm = v.norm();
        debug_assert!(norm > 1e-8, "candidate collapsed during extension");
        v /= C64::new(norm, 0.0);
        for (j, r) in residuals.iter_mut().enumerate() {
            if !used[j] {
                let coef = v.dotc(r);
                *r -= &v * coef;
            }
        }
        cols.push(v);
    }
    cols
}

/// Rotates an arbitrary instance into canonical coordinates, preserving all
/// checked quantities up to roundoff.
pub fn canonicalize(
    a: &HermitianMatrix,
    x: &OrthonormalBasis,
    y: &OrthonormalBasis,
) -> Result<CanonicalInstance> {
    let n = x.ambient_dim();
    let k = x.subspace_dim();
    if a.order() != n {
        return Err(Error::DimensionMismatch {
            context: format!(
                "matrix order {} does not match ambient dimension {n}",
                a.order()
            ),
        });
    }
    let pair = align_bases(x, y)?;

    // Per-position angles from the aligned data, small ones through the
    // sine side (the S column norms), then snapped to exact zeros.
    let s = pair.s_block().as_matrix();
    let mut thetas = Vec::with_capacity(k);
    for i in 0..k {
        let c = pair.cos_diag()[i];
        let snorm = if s.nrows() > 0 {
            s.column(i).norm().min(1.0)
        } else {
            0.0
        };
        let t = if c > std::f64::consts::FRAC_1_SQRT_2 {
            snorm.asin()
        } else {
            c.acos()
        };
        thetas.push(if t < ANGLE_SNAP { 0.0 } else { t });
    }
    // Aligned cosines ascend, so the angles descend already; enforce exactly.
    thetas.sort_by(|p, q| q.total_cmp(p));
    let m = thetas.iter().filter(|&&t| t > 0.0).count();

    // Rotation: aligned x columns, then the normalized S columns (the sine
    // directions), then a completion of the remaining perp space.
    let xa = pair.x_aligned().as_matrix();
    let mut cols: Vec<DVector<C64>> = (0..k).map(|i| xa.column(i).into_owned()).collect();
    if m > 0 {
        let perp = pair
            .x_perp()
            .expect("nonzero angles require a complement")
            .as_matrix();
        for i in 0..m {
            let sc = s.column(i);
            let norm = sc.norm();
            if norm <= ANGLE_SNAP {
                return Err(Error::Contract(
                    "sine direction collapsed during canonicalization".into(),
                ));
            }
            let z = perp * (sc.into_owned() / C64::new(norm, 0.0));
            // Reorthogonalize against everything accepted so far.
            let mut z = z;
            for c in &cols {
                let coef = c.dotc(&z);
                z -= c * coef;
            }
            let zn = z.norm();
            z /= C64::new(zn, 0.0);
            cols.push(z);
        }
    }
    let candidates: Vec<DVector<C64>> = match pair.x_perp() {
        Some(perp) => (0..perp.as_matrix().ncols())
            .map(|i| perp.as_matrix().column(i).into_owned())
            .collect(),
        None => Vec::new(),
    };
    let cols = extend_orthonormal(cols, &candidates, n);
    let mut u = DMatrix::<C64>::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        u.set_column(j, c);
    }

    let rotated = u.adjoint() * a.to_matrix() * &u;
    Canon {
        a: rotated,
        thetas,
    }
    .to_instance()
}

fn violates(
    canon: &Canon,
    bound: BoundId,
    opts: &CheckOptions,
) -> Result<Option<(CanonicalInstance, BoundCheckReport)>> {
    let inst = match canon.to_instance() {
        Ok(inst) => inst,
        Err(_) => return Ok(None),
    };
    let report = check_bound_with(bound, &inst.a, &inst.x, &inst.y, opts)?;
    if report.is_violation() {
        Ok(Some((inst, report)))
    } else {
        Ok(None)
    }
}

/// Greedily minimizes a violating instance: ambient dimension first, then
/// subspace dimension, then cosines snapped to multiples of 1/8 and the
/// spectrum snapped to integers. Every accepted move re-verifies the
/// violation; the result is replayable through `check_bound_with` as-is.
pub fn shrink(
    a: &HermitianMatrix,
    x: &OrthonormalBasis,
    y: &OrthonormalBasis,
    bound: BoundId,
    opts: &CheckOptions,
) -> Result<ShrinkResult> {
    let initial = check_bound_with(bound, a, x, y, opts)?;
    if !initial.is_violation() {
        return Err(Error::Contract(
            "shrink requires an instance that violates the bound".into(),
        ));
    }
    let start = canonicalize(a, x, y)?;
    let mut canon = Canon {
        a: start.a.to_matrix(),
        thetas: start.thetas.clone(),
    };
    let (_, mut report) = violates(&canon, bound, opts)?.ok_or_else(|| {
        Error::Contract("canonicalization did not preserve the violation".into())
    })?;

    let mut steps = 0usize;
    for _pass in 0..64 {
        let mut improved = false;

        // Drop spectator coordinates (untouched by X and Y).
        loop {
            let first_spectator = canon.k() + canon.nonzero_angles();
            let mut dropped = false;
            for j in (first_spectator..canon.n()).rev() {
                let cand = Canon {
                    a: canon.drop_coords(&[j]),
                    thetas: canon.thetas.clone(),
                };
                if let Some((_, rep)) = violates(&cand, bound, opts)? {
                    canon = cand;
                    report = rep;
                    steps += 1;
                    improved = true;
                    dropped = true;
                    break;
                }
            }
            if !dropped {
                break;
            }
        }

        // Drop whole angles (one X direction and its sine partner).
        loop {
            let mut dropped = false;
            if canon.k() > 1 {
                for i in (0..canon.k()).rev() {
                    let mut coords = vec![i];
                    if canon.thetas[i] > 0.0 {
                        coords.push(canon.k() + i);
                    }
                    coords.sort_unstable();
                    let mut thetas = canon.thetas.clone();
                    thetas.remove(i);
                    let cand = Canon {
                        a: canon.drop_coords(&coords),
                        thetas,
                    };
                    if let Some((_, rep)) = violates(&cand, bound, opts)? {
                        canon = cand;
                        report = rep;
                        steps += 1;
                        improved = true;
                        dropped = true;
                        break;
                    }
                }
            }
            if !dropped {
                break;
            }
        }

        // Snap cosines to multiples of 1/8 (coordinates permuted to keep the
        // canonical layout when angles reorder or vanish).
        for i in 0..canon.k() {
            let t = canon.thetas[i];
            if t == 0.0 {
                continue;
            }
            let snapped_cos = (t.cos() * 8.0).round().clamp(0.0, 8.0) / 8.0;
            let snapped = snapped_cos.acos();
            if (snapped - t).abs() <= f64::EPSILON {
                continue;
            }
            if let Some(cand) = reangle(&canon, i, snapped) {
                if let Some((_, rep)) = violates(&cand, bound, opts)? {
                    canon = cand;
                    report = rep;
                    steps += 1;
                    improved = true;
                }
            }
        }

        // Snap the spectrum to integers.
        if let Ok((lam, v)) = eigh(&HermitianMatrix::symmetrize(&canon.a)) {
            let rounded: Vec<f64> = lam.values().iter().map(|x| x.round()).collect();
            if rounded
                .iter()
                .zip(lam.values())
                .any(|(r, l)| (r - l).abs() > 1e-12)
            {
                let d = DMatrix::from_fn(canon.n(), canon.n(), |r, c| {
                    if r == c {
                        C64::new(rounded[r], 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                let cand = Canon {
                    a: v.as_matrix() * d * v.as_matrix().adjoint(),
                    thetas: canon.thetas.clone(),
                };
                if let Some((_, rep)) = violates(&cand, bound, opts)? {
                    canon = cand;
                    report = rep;
                    steps += 1;
                    improved = true;
                }
            }
        }

        if !improved {
            break;
        }
    }

    let instance = canon.to_instance()?;
    Ok(ShrinkResult {
        instance,
        report,
        steps,
    })
}

/// Produces the canonical state with angle `i` changed to `new_theta`,
/// permuting coordinates so the layout stays canonical (angles descending,
/// sine partners contiguous).
fn reangle(canon: &Canon, i: usize, new_theta: f64) -> Option<Canon> {
    let k = canon.k();
    let n = canon.n();
    let old_m = canon.nonzero_angles();
    let mut thetas = canon.thetas.clone();
    let was_nonzero = thetas[i] > 0.0;
    let new_theta = if new_theta < ANGLE_SNAP { 0.0 } else { new_theta };
    thetas[i] = new_theta;

    // Stable descending order of the new angles.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&p, &q| {
        thetas[q]
            .total_cmp(&thetas[p])
            .then_with(|| p.cmp(&q))
    });
    let sorted: Vec<f64> = order.iter().map(|&p| thetas[p]).collect();

    // New coordinate order: x block by `order`, then the sine partners of
    // the surviving nonzero angles, then freed partners and old spectators.
    let mut coords: Vec<usize> = order.clone();
    let mut tail: Vec<usize> = Vec::new();
    for &p in &order {
        let had_partner = if p == i { was_nonzero } else { canon.thetas[p] > 0.0 };
        let has_partner = sorted[coords.iter().position(|&c| c == p).unwrap()] > 0.0;
        if had_partner && p < old_m {
            if has_partner {
                coords.push(k + p);
            } else {
                tail.push(k + p);
            }
        } else if has_partner && !had_partner {
            // A zero angle cannot become nonzero under snapping.
            return None;
        }
    }
    coords.extend(tail);
    coords.extend(k + old_m..n);
    debug_assert_eq!(coords.len(), n);

    let a = DMatrix::from_fn(n, n, |r, c| canon.a[(coords[r], coords[c])]);
    Some(Canon { a, thetas: sorted })
}

/// Convenience access to the spectrum of a shrunk matrix.
pub(crate) fn spectrum_of(a: &HermitianMatrix) -> Result<Vec<f64>> {
    Ok(eigh(a)?.0.values().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{check_bound_with, BoundId};
    use crate::numkern::hermitian_from_spectrum;
    use crate::ritz::invariant_subspace;
    use crate::subspace::perturb_subspace;

    fn weakened() -> CheckOptions {
        CheckOptions {
            rhs_scale: 0.4,
            ..CheckOptions::default()
        }
    }

    fn violating_instance() -> (HermitianMatrix, OrthonormalBasis, OrthonormalBasis) {
        // Sharp two-block instance: equality at scale 1.0, violation at 0.4.
        let a = HermitianMatrix::diagonal(&[1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 0.3, -0.2]);
        let x = invariant_subspace(&a, &[0, 1, 2]).unwrap();
        let t = AngleVector::new(vec![1.2, 0.7, 0.2]).unwrap();
        let y = perturb_subspace(&x, &t, 5).unwrap();
        (a, x, y)
    }

    #[test]
    fn canonicalize_preserves_the_check() {
        let (a, x, y) = violating_instance();
        let before = check_bound_with(
            BoundId::ConjectureSin2,
            &a,
            &x,
            &y,
            &CheckOptions::default(),
        )
        .unwrap();
        let canon = canonicalize(&a, &x, &y).unwrap();
        let after = check_bound_with(
            BoundId::ConjectureSin2,
            &canon.a,
            &canon.x,
            &canon.y,
            &CheckOptions::default(),
        )
        .unwrap();
        assert_eq!(before.holds(), after.holds());
        for (u, v) in before.lhs.iter().zip(&after.lhs) {
            assert!((u - v).abs() <= 1e-9, "lhs changed: {u} vs {v}");
        }
        for (u, v) in before.rhs.iter().zip(&after.rhs) {
            assert!((u - v).abs() <= 1e-9, "rhs changed: {u} vs {v}");
        }
    }

    #[test]
    fn shrink_rejects_non_violating_input() {
        let (a, x, y) = violating_instance();
        let res = shrink(&a, &x, &y, BoundId::ConjectureSin2, &CheckOptions::default());
        assert!(matches!(res, Err(Error::Contract(_))));
    }

    #[test]
    fn shrink_reduces_a_weakened_bound_violation() {
        let (a, x, y) = violating_instance();
        let res = shrink(&a, &x, &y, BoundId::ConjectureSin2, &weakened()).unwrap();
        assert!(res.instance.n <= 4, "n = {} after shrinking", res.instance.n);
        assert!(res.instance.k <= 2, "k = {} after shrinking", res.instance.k);
        assert!(res.report.is_violation());
        // The result still violates when rechecked from scratch.
        let recheck = check_bound_with(
            BoundId::ConjectureSin2,
            &res.instance.a,
            &res.instance.x,
            &res.instance.y,
            &weakened(),
        )
        .unwrap();
        assert!(recheck.is_violation());
        assert!(res.steps > 0);
    }

    #[test]
    fn shrink_keeps_an_already_minimal_instance() {
        // Minimal 1-angle sharp instance; violates only the weakened bound.
        let a = HermitianMatrix::diagonal(&[1.0, -1.0]);
        let x = invariant_subspace(&a, &[0]).unwrap();
        let t = AngleVector::new(vec![0.9]).unwrap();
        let y = perturb_subspace(&x, &t, 3).unwrap();
        let res = shrink(&a, &x, &y, BoundId::ConjectureSin2, &weakened()).unwrap();
        assert_eq!(res.instance.n, 2);
        assert_eq!(res.instance.k, 1);
        assert!(res.report.is_violation());
    }

    #[test]
    fn shrunk_cosines_land_on_the_grid() {
        let (a, x, y) = violating_instance();
        let res = shrink(&a, &x, &y, BoundId::ConjectureSin2, &weakened()).unwrap();
        for &t in &res.instance.thetas {
            let c = t.cos() * 8.0;
            assert!(
                (c - c.round()).abs() <= 1e-9,
                "cosine {} not on the 1/8 grid",
                t.cos()
            );
        }
    }

    #[test]
    fn canonicalize_handles_full_space_pairs() {
        let a = hermitian_from_spectrum(&[1.0, 0.0, -1.0], 2);
        let q = crate::numkern::random_unitary(3, 4);
        let canon = canonicalize(&a, &q, &q).unwrap();
        assert_eq!(canon.k, 3);
        assert!(canon.thetas.iter().all(|&t| t == 0.0));
    }
}
