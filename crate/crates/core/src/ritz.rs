//! Ritz values, spectral spread, invariant-subspace construction, and
//! classification of invariant subspaces by where their eigenvalues sit in
//! the spectrum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{Error, Result};
use crate::numkern::{
    self, C64, HermitianMatrix, OrthonormalBasis, SpectrumVector, spectral_norm_of,
};
use crate::subspace::AlignedPair;

/// Where the eigenvalues carried by an invariant subspace sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantTag {
    /// The k largest eigenvalues, as a contiguous block.
    ContiguousTop,
    /// The k smallest eigenvalues, as a contiguous block.
    ContiguousBottom,
    /// All carried eigenvalues at or above the spectrum midpoint.
    HalfTop,
    /// All carried eigenvalues at or below the spectrum midpoint.
    HalfBottom,
    /// Invariant, but in none of the special positions above.
    General,
    /// Residual too large: not an invariant subspace at this tolerance.
    NotInvariant,
}

impl InvariantTag {
    pub fn is_invariant(self) -> bool {
        self != InvariantTag::NotInvariant
    }

    pub fn is_contiguous_extreme(self) -> bool {
        matches!(self, InvariantTag::ContiguousTop | InvariantTag::ContiguousBottom)
    }
}

/// Classification result: the most specific tag plus the half-spectrum
/// flags, which can hold even when a contiguous tag wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantClass {
    pub tag: InvariantTag,
    /// `||A X - X (X^H A X)||` in the spectral norm.
    pub residual: f64,
    pub half_top: bool,
    pub half_bottom: bool,
}

/// Eigenvalues of the compression `X^H A X`, descending. Independent of the
/// basis chosen for the span of `x`.
pub fn ritz_values(a: &HermitianMatrix, x: &OrthonormalBasis) -> Result<SpectrumVector> {
    check_dims(a, x)?;
    let m = x.as_matrix().adjoint() * a.to_matrix() * x.as_matrix();
    let compressed = HermitianMatrix::symmetrize(&m);
    let (values, _) = numkern::eigh(&compressed)?;
    Ok(values)
}

/// Spectral spread `lambda_1 - lambda_n >= 0`.
pub fn spread(a: &HermitianMatrix) -> Result<f64> {
    let (lam, _) = numkern::eigh(a)?;
    let v = lam.values();
    Ok(v[0] - v[v.len() - 1])
}

/// `||A X - X (X^H A X)||` in the spectral norm; zero exactly when the span
/// of `x` is A-invariant.
pub fn invariance_residual(a: &HermitianMatrix, x: &OrthonormalBasis) -> Result<f64> {
    check_dims(a, x)?;
    let am = a.to_matrix();
    let ax = &am * x.as_matrix();
    let compressed = x.as_matrix().adjoint() * &ax;
    Ok(spectral_norm_of(&(ax - x.as_matrix() * compressed)))
}

/// Span of the selected eigenvectors of `a`. Positions are zero-based into
/// the descending spectrum; with eigenvalue multiplicities straddling the
/// selection boundary the subspace is not unique, but any returned choice
/// satisfies the invariance contract.
pub fn invariant_subspace(a: &HermitianMatrix, indices: &[usize]) -> Result<OrthonormalBasis> {
    let n = a.order();
    if indices.is_empty() {
        return Err(Error::Contract(
            "invariant_subspace requires at least one eigenvalue position".into(),
        ));
    }
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if seen[i] {
            return Err(Error::Contract(format!(
                "duplicate eigenvalue position {i}"
            )));
        }
        seen[i] = true;
    }
    let mut sorted: Vec<usize> = indices.to_vec();
    sorted.sort_unstable();
    let (_, vectors) = numkern::eigh(a)?;
    let m = DMatrix::from_fn(n, sorted.len(), |r, c| vectors.as_matrix()[(r, sorted[c])]);
    OrthonormalBasis::new(m)
}

/// Absolute comparison floor: keeps classification sane when the spectrum
/// collapses to a point (spread zero) and everything is pure roundoff.
fn abs_floor(a: &HermitianMatrix) -> f64 {
    1e-13 * (1.0 + a.frobenius_norm())
}

/// Classifies the span of `x` against the spectrum of `a`.
///
/// `not-invariant` if the residual exceeds `tol * spr(A)`; otherwise the
/// Ritz multiset is matched against the eigenvalues: a contiguous run of
/// the largest/smallest eigenvalues wins the contiguous tag, then the
/// half-spectrum positions are tried (midpoint inclusive), else `general`.
pub fn classify_invariant(
    a: &HermitianMatrix,
    x: &OrthonormalBasis,
    tol: f64,
) -> Result<InvariantClass> {
    let residual = invariance_residual(a, x)?;
    let (lam, _) = numkern::eigh(a)?;
    let spectrum = lam.values();
    let n = a.order();
    let spr = spectrum[0] - spectrum[n - 1];
    let tol_abs = tol * spr + abs_floor(a);

    if residual > tol_abs {
        return Ok(InvariantClass {
            tag: InvariantTag::NotInvariant,
            residual,
            half_top: false,
            half_bottom: false,
        });
    }

    let ritz = ritz_values(a, x)?;
    let ritz = ritz.values();
    let k = ritz.len();

    let matches = |selected: &[f64]| -> bool {
        ritz.iter()
            .zip(selected)
            .all(|(r, s)| (r - s).abs() <= tol_abs)
    };
    let contiguous_top = matches(&spectrum[..k]);
    let contiguous_bottom = matches(&spectrum[n - k..]);

    let midpoint = 0.5 * (spectrum[0] + spectrum[n - 1]);
    let half_top = ritz.iter().all(|&r| r >= midpoint - tol_abs);
    let half_bottom = ritz.iter().all(|&r| r <= midpoint + tol_abs);

    let tag = if contiguous_top {
        InvariantTag::ContiguousTop
    } else if contiguous_bottom {
        InvariantTag::ContiguousBottom
    } else if half_top {
        InvariantTag::HalfTop
    } else if half_bottom {
        InvariantTag::HalfBottom
    } else {
        InvariantTag::General
    };

    Ok(InvariantClass {
        tag,
        residual,
        half_top,
        half_bottom,
    })
}

/// Discrepancy `||Y^H A Y - (C A11 C + S^H A22 S)||` for an aligned pair
/// whose X side is A-invariant; the identity makes this pure roundoff.
pub fn block_ritz_identity(a: &HermitianMatrix, pair: &AlignedPair) -> Result<f64> {
    let n = a.order();
    if pair.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            context: format!(
                "aligned pair ambient dimension {} does not match matrix order {n}",
                pair.ambient_dim()
            ),
        });
    }
    let residual = invariance_residual(a, pair.x_aligned())?;
    let spr = spread(a)?;
    let threshold = config::DEFAULT.invariance * spr + abs_floor(a);
    if residual > threshold {
        return Err(Error::Contract(format!(
            "block identity requires an A-invariant X side: residual {residual:.3e} exceeds {threshold:.3e}"
        )));
    }

    let am = a.to_matrix();
    let k = pair.subspace_dim();
    let xa = pair.x_aligned().as_matrix();
    let ya = pair.y_aligned().as_matrix();
    let c = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            C64::new(pair.cos_diag()[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });

    let a11 = xa.adjoint() * &am * xa;
    let mut rhs = &c * a11 * &c;
    if let Some(perp) = pair.x_perp() {
        let xp = perp.as_matrix();
        let a22 = xp.adjoint() * &am * xp;
        let s = pair.s_block().as_matrix();
        rhs += s.adjoint() * a22 * s;
    }
    let lhs = ya.adjoint() * &am * ya;
    Ok(spectral_norm_of(&(lhs - rhs)))
}

fn check_dims(a: &HermitianMatrix, x: &OrthonormalBasis) -> Result<()> {
    if a.order() != x.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "matrix order {} does not match basis ambient dimension {}",
                a.order(),
                x.ambient_dim()
            ),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkern::{hermitian_from_spectrum, random_unitary};
    use crate::subspace::align_bases;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn two_block_sharp(m: usize, thetas: &[f64]) -> (HermitianMatrix, OrthonormalBasis, OrthonormalBasis) {
        let mut diag = vec![1.0; m];
        diag.extend(std::iter::repeat(-1.0).take(m));
        let a = HermitianMatrix::diagonal(&diag);
        let x = OrthonormalBasis::identity_embedding(2 * m, m);
        let mut y = DMatrix::<C64>::zeros(2 * m, m);
        for (i, &t) in thetas.iter().enumerate() {
            y[(i, i)] = C64::new(t.cos(), 0.0);
            y[(m + i, i)] = C64::new(t.sin(), 0.0);
        }
        (a, x, OrthonormalBasis::new(y).unwrap())
    }

    #[test]
    fn ritz_values_of_sharp_example_blocks() {
        let thetas = [1.0, 0.4];
        let (a, x, y) = two_block_sharp(2, &thetas);
        // X^H A X = I, so all Ritz values are one.
        let rx = ritz_values(&a, &x).unwrap();
        for &v in rx.values() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
        // Y^H A Y = 2C^2 - I: values 2cos^2(theta) - 1 sorted descending.
        let ry = ritz_values(&a, &y).unwrap();
        let mut want: Vec<f64> = thetas.iter().map(|t| 2.0 * t.cos().powi(2) - 1.0).collect();
        want.sort_by(|p, q| q.total_cmp(p));
        for (got, want) in ry.values().iter().zip(want) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn rayleigh_quotient_of_an_eigenvector() {
        let a = hermitian_from_spectrum(&[3.0, 1.0, -2.0], 5);
        let (lam, v) = numkern::eigh(&a).unwrap();
        let x1 = OrthonormalBasis::new(v.as_matrix().columns(1, 1).into_owned()).unwrap();
        let r = ritz_values(&a, &x1).unwrap();
        assert_relative_eq!(r.values()[0], lam.values()[1], epsilon = 1e-12);
    }

    #[test]
    fn spread_examples() {
        assert_relative_eq!(
            spread(&HermitianMatrix::diagonal(&[1.0, 1.0, -1.0, -1.0])).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            spread(&HermitianMatrix::diagonal(&[0.7, 0.7, 0.7])).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        let a = hermitian_from_spectrum(&[2.5, 0.0, -1.0, 0.5], 9);
        assert_relative_eq!(spread(&a).unwrap(), 3.5, epsilon = 1e-12);
    }

    #[test]
    fn spread_is_shift_and_negation_invariant() {
        let a = hermitian_from_spectrum(&[1.7, 0.2, -0.9], 31);
        let s = spread(&a).unwrap();
        assert_relative_eq!(spread(&a.affine(1.0, 5.0)).unwrap(), s, epsilon = 1e-12);
        assert_relative_eq!(spread(&a.affine(-1.0, 0.0)).unwrap(), s, epsilon = 1e-12);
    }

    #[test]
    fn invariant_subspace_of_diagonal_matrix() {
        let a = HermitianMatrix::diagonal(&[4.0, 3.0, 1.0, 0.0]);
        let x = invariant_subspace(&a, &[0, 1]).unwrap();
        // Spanned by e1, e2.
        for i in 2..4 {
            for j in 0..2 {
                assert!(x.as_matrix()[(i, j)].norm() <= 1e-12);
            }
        }
        let r = ritz_values(&a, &x).unwrap();
        assert_eq!(r.values(), &[4.0, 3.0]);
    }

    #[test]
    fn invariant_subspace_round_trips_selected_eigenvalues() {
        let a = hermitian_from_spectrum(&[5.0, 2.0, 1.0, -1.0, -4.0], 13);
        let (lam, _) = numkern::eigh(&a).unwrap();
        let idx = [0, 2, 4];
        let x = invariant_subspace(&a, &idx).unwrap();
        let r = ritz_values(&a, &x).unwrap();
        let mut want: Vec<f64> = idx.iter().map(|&i| lam.values()[i]).collect();
        want.sort_by(|p, q| q.total_cmp(p));
        for (got, want) in r.values().iter().zip(want) {
            assert!((got - want).abs() <= 1e-10);
        }
        let spr = spread(&a).unwrap();
        assert!(invariance_residual(&a, &x).unwrap() <= config::DEFAULT.invariance * spr);
    }

    #[test]
    fn invariant_subspace_rejects_bad_indices() {
        let a = HermitianMatrix::diagonal(&[1.0, 0.0]);
        assert!(invariant_subspace(&a, &[]).is_err());
        assert!(matches!(
            invariant_subspace(&a, &[2]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(invariant_subspace(&a, &[0, 0]).is_err());
    }

    #[test]
    fn classify_contiguous_top() {
        let a = HermitianMatrix::diagonal(&[4.0, 3.0, 1.0, 0.0]);
        let x = invariant_subspace(&a, &[0, 1]).unwrap();
        let c = classify_invariant(&a, &x, config::DEFAULT.invariance).unwrap();
        assert_eq!(c.tag, InvariantTag::ContiguousTop);
        assert!(c.half_top);
        assert!(!c.half_bottom);
    }

    #[test]
    fn classify_general_interior_selection() {
        // Ritz {4, 1}, midpoint 2: 1 < 2, not contiguous, not half.
        let a = HermitianMatrix::diagonal(&[4.0, 3.0, 1.0, 0.0]);
        let x = invariant_subspace(&a, &[0, 2]).unwrap();
        let c = classify_invariant(&a, &x, config::DEFAULT.invariance).unwrap();
        assert_eq!(c.tag, InvariantTag::General);
        assert!(!c.half_top && !c.half_bottom);
    }

    #[test]
    fn classify_half_top_includes_the_midpoint() {
        // Ritz {4, 2} with midpoint exactly 2: inclusive boundary.
        let a = HermitianMatrix::diagonal(&[4.0, 3.0, 2.0, 0.0]);
        let x = invariant_subspace(&a, &[0, 2]).unwrap();
        let c = classify_invariant(&a, &x, config::DEFAULT.invariance).unwrap();
        assert_eq!(c.tag, InvariantTag::HalfTop);
    }

    #[test]
    fn classify_rejects_random_subspace() {
        let a = hermitian_from_spectrum(&[2.0, 1.0, -1.0, -2.0], 3);
        let q = random_unitary(4, 99);
        let x = OrthonormalBasis::new(q.as_matrix().columns(0, 2).into_owned()).unwrap();
        let c = classify_invariant(&a, &x, config::DEFAULT.invariance).unwrap();
        assert_eq!(c.tag, InvariantTag::NotInvariant);
    }

    #[test]
    fn classify_scalar_matrix_is_invariant() {
        // spread 0: every subspace is invariant; contiguous via multiplicity.
        let a = HermitianMatrix::diagonal(&[0.5, 0.5, 0.5]);
        let q = random_unitary(3, 12);
        let x = OrthonormalBasis::new(q.as_matrix().columns(0, 2).into_owned()).unwrap();
        let c = classify_invariant(&a, &x, config::DEFAULT.invariance).unwrap();
        assert_eq!(c.tag, InvariantTag::ContiguousTop);
    }

    #[test]
    fn ritz_values_are_basis_invariant() {
        let a = hermitian_from_spectrum(&[1.0, 0.3, -0.7, -1.1, 2.2], 8);
        let q = random_unitary(5, 44);
        let x = OrthonormalBasis::new(q.as_matrix().columns(0, 3).into_owned()).unwrap();
        let rot = random_unitary(3, 45);
        let xr = OrthonormalBasis::new(x.as_matrix() * rot.as_matrix()).unwrap();
        let r1 = ritz_values(&a, &x).unwrap();
        let r2 = ritz_values(&a, &xr).unwrap();
        let spr = spread(&a).unwrap();
        for (u, v) in r1.values().iter().zip(r2.values()) {
            assert!((u - v).abs() <= 1e-10 * spr.max(1.0));
        }
    }

    #[test]
    fn ritz_values_shift_with_the_matrix() {
        let a = hermitian_from_spectrum(&[1.4, -0.2, 0.8], 19);
        let q = random_unitary(3, 20);
        let x = OrthonormalBasis::new(q.as_matrix().columns(0, 2).into_owned()).unwrap();
        let alpha = -0.6;
        let r = ritz_values(&a, &x).unwrap();
        let rs = ritz_values(&a.affine(1.0, alpha), &x).unwrap();
        for (u, v) in r.values().iter().zip(rs.values()) {
            assert!((u + alpha - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn ritz_values_interlace_into_the_spectrum_range() {
        let a = hermitian_from_spectrum(&[3.0, 1.0, 0.0, -2.0, -3.5], 71);
        let q = random_unitary(5, 72);
        let x = OrthonormalBasis::new(q.as_matrix().columns(0, 2).into_owned()).unwrap();
        let r = ritz_values(&a, &x).unwrap();
        for &v in r.values() {
            assert!(v <= 3.0 + 1e-10 && v >= -3.5 - 1e-10);
        }
    }

    #[test]
    fn block_identity_holds_on_invariant_instances() {
        let a = hermitian_from_spectrum(&[2.0, 1.0, -0.5, -1.5, 0.3, 1.1], 7);
        let x = invariant_subspace(&a, &[0, 2, 4]).unwrap();
        let target = crate::subspace::AngleVector::new(vec![0.9, 0.3, 0.05]).unwrap();
        let y = crate::subspace::perturb_subspace(&x, &target, 4).unwrap();
        let pair = align_bases(&x, &y).unwrap();
        let d = block_ritz_identity(&a, &pair).unwrap();
        assert!(d <= 1e-10 * a.to_matrix().norm(), "discrepancy {d}");
    }

    #[test]
    fn block_identity_trivial_when_x_equals_y() {
        let a = hermitian_from_spectrum(&[1.0, 0.5, -1.0, 2.0], 2);
        let x = invariant_subspace(&a, &[0, 1]).unwrap();
        let pair = align_bases(&x, &x).unwrap();
        let d = block_ritz_identity(&a, &pair).unwrap();
        assert!(d <= 1e-11);
    }

    #[test]
    fn block_identity_rejects_non_invariant_x() {
        let a = hermitian_from_spectrum(&[1.0, -1.0, 0.5, 2.0], 6);
        let q = random_unitary(4, 123);
        let x = OrthonormalBasis::new(q.as_matrix().columns(0, 2).into_owned()).unwrap();
        let y = OrthonormalBasis::new(q.as_matrix().columns(2, 2).into_owned()).unwrap();
        let pair = align_bases(&x, &y).unwrap();
        assert!(matches!(
            block_ritz_identity(&a, &pair),
            Err(Error::Contract(_))
        ));
    }
}
