//! Geometry of pairs of equidimensional subspaces: principal angles, gap,
//! and the canonical alignment that exposes the cosine and sine blocks.
//!
//! Angles are kept to full relative accuracy down to ~1e-8 radians by
//! switching from the cosine definition to a sine-based computation where
//! the cosine is large; the bounds checked downstream are O(sin^2), so this
//! accuracy is load-bearing, not cosmetic.

use nalgebra::{DMatrix, DVector};

use crate::config;
use crate::error::{Error, Result};
use crate::numkern::{
    self, C64, DenseMatrix, OrthonormalBasis, singular_values_of, unitary_completion,
};

/// Principal angles in radians, nonincreasing, each within [0, pi/2].
#[derive(Debug, Clone, PartialEq)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    /// Sorts descending; clamps roundoff-level excursions outside [0, pi/2]
    /// and rejects anything materially outside.
    pub fn new(mut angles: Vec<f64>) -> Result<Self> {
        const SLOP: f64 = 1e-9;
        for a in angles.iter_mut() {
            if !a.is_finite() {
                return Err(Error::NonFinite { context: "angles" });
            }
            if *a < -SLOP || *a > std::f64::consts::FRAC_PI_2 + SLOP {
                return Err(Error::Contract(format!(
                    "angle {a} outside [0, pi/2]"
                )));
            }
            *a = a.clamp(0.0, std::f64::consts::FRAC_PI_2);
        }
        angles.sort_by(|x, y| y.total_cmp(x));
        Ok(Self(angles))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sines(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.sin()).collect()
    }

    pub fn cosines(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.cos()).collect()
    }
}

/// A pair of bases rotated so that `X^H Y` is real, diagonal, and
/// nondecreasing, together with a completion of X to a unitary matrix and
/// the complement block `S = X_perp^H Y`.
#[derive(Debug, Clone)]
pub struct AlignedPair {
    x_aligned: OrthonormalBasis,
    y_aligned: OrthonormalBasis,
    /// `None` exactly when k = n and there is no complement.
    x_perp: Option<OrthonormalBasis>,
    /// Nondecreasing cosines in [0, 1].
    c_diag: Vec<f64>,
    /// `(n - k) x k`; zero rows when k = n.
    s_block: DenseMatrix,
}

impl AlignedPair {
    pub fn x_aligned(&self) -> &OrthonormalBasis {
        &self.x_aligned
    }

    pub fn y_aligned(&self) -> &OrthonormalBasis {
        &self.y_aligned
    }

    pub fn x_perp(&self) -> Option<&OrthonormalBasis> {
        self.x_perp.as_ref()
    }

    pub fn cos_diag(&self) -> &[f64] {
        &self.c_diag
    }

    pub fn s_block(&self) -> &DenseMatrix {
        &self.s_block
    }

    pub fn ambient_dim(&self) -> usize {
        self.x_aligned.ambient_dim()
    }

    pub fn subspace_dim(&self) -> usize {
        self.x_aligned.subspace_dim()
    }

    /// Principal angles recovered from the aligned cosines (descending).
    pub fn angles(&self) -> AngleVector {
        let mut a: Vec<f64> = self.c_diag.iter().map(|c| c.acos()).collect();
        a.reverse();
        AngleVector::new(a).expect("cosines are clamped")
    }

    fn validate(&self) -> Result<()> {
        let tol = config::DEFAULT.orth;
        let k = self.subspace_dim();
        let cross = self.x_aligned.as_matrix().adjoint() * self.y_aligned.as_matrix();
        let c = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                C64::new(self.c_diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let dev_diag = (&cross - &c).norm();
        let s = self.s_block.as_matrix();
        let dev_cs = (&c * &c + s.adjoint() * s - DMatrix::<C64>::identity(k, k)).norm();
        if dev_diag > tol || dev_cs > tol {
            return Err(Error::Contract(format!(
                "aligned pair inconsistent: diag deviation {dev_diag:.3e}, CS deviation {dev_cs:.3e}"
            )));
        }
        Ok(())
    }
}

fn check_pair(x: &OrthonormalBasis, y: &OrthonormalBasis) -> Result<()> {
    if x.ambient_dim() != y.ambient_dim() || x.subspace_dim() != y.subspace_dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "subspace pair must share shape: {}x{} vs {}x{}",
                x.ambient_dim(),
                x.subspace_dim(),
                y.ambient_dim(),
                y.subspace_dim()
            ),
        });
    }
    Ok(())
}

/// Threshold above which a cosine is considered "large" and the angle is
/// recomputed through the sine path.
const LARGE_COS: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Principal angles between two equidimensional subspaces, descending.
///
/// Large angles come from the singular values of `X^H Y` (cosines); angles
/// with cosine above `1/sqrt(2)` are recomputed from the singular values of
/// `(I - X X^H) Y` (sines), which stay accurate as the angle approaches 0.
pub fn principal_angles(x: &OrthonormalBasis, y: &OrthonormalBasis) -> Result<AngleVector> {
    check_pair(x, y)?;
    let k = x.subspace_dim();

    let cross = x.as_matrix().adjoint() * y.as_matrix();
    let mut cos_desc = singular_values_of(&cross);
    for c in cos_desc.iter_mut() {
        *c = c.clamp(0.0, 1.0);
    }

    // Residual of Y against the X projector; its singular values are the
    // sines of the principal angles.
    let resid = y.as_matrix() - x.as_matrix() * &cross;
    let mut sin_asc = singular_values_of(&resid);
    sin_asc.reverse();
    for s in sin_asc.iter_mut() {
        *s = s.clamp(0.0, 1.0);
    }

    // Position i (ascending angles): i-th largest cosine, i-th smallest sine.
    let mut angles = Vec::with_capacity(k);
    for i in 0..k {
        let theta = if cos_desc[i] > LARGE_COS {
            sin_asc[i].asin()
        } else {
            cos_desc[i].acos()
        };
        angles.push(theta);
    }
    AngleVector::new(angles)
}

/// Sine of the largest principal angle.
pub fn gap(x: &OrthonormalBasis, y: &OrthonormalBasis) -> Result<f64> {
    let angles = principal_angles(x, y)?;
    Ok(angles.values()[0].sin())
}

/// Rotates the two bases so `X^H Y` becomes real, diagonal, and
/// nondecreasing, and completes X to a unitary matrix.
pub fn align_bases(x: &OrthonormalBasis, y: &OrthonormalBasis) -> Result<AlignedPair> {
    check_pair(x, y)?;
    let n = x.ambient_dim();
    let k = x.subspace_dim();

    let cross = DenseMatrix::from_inner(x.as_matrix().adjoint() * y.as_matrix());
    let f = numkern::svd(&cross)?;

    // Reverse the descending SVD order so the cosines come out nondecreasing.
    let u = f.u.as_matrix();
    let v = f.v.as_matrix();
    let u_asc = DMatrix::from_fn(k, k, |i, j| u[(i, k - 1 - j)]);
    let v_asc = DMatrix::from_fn(k, k, |i, j| v[(i, k - 1 - j)]);
    let mut c_diag: Vec<f64> = f.singular_values.values().to_vec();
    c_diag.reverse();
    for c in c_diag.iter_mut() {
        *c = c.clamp(0.0, 1.0);
    }

    let x_aligned = OrthonormalBasis::new(x.as_matrix() * &u_asc)?;
    let y_aligned = OrthonormalBasis::new(y.as_matrix() * &v_asc)?;

    let (x_perp, s_block) = if k == n {
        (None, DenseMatrix::from_inner(DMatrix::zeros(0, k)))
    } else {
        let full = unitary_completion(&x_aligned);
        let perp = OrthonormalBasis::new(full.columns(k, n - k).into_owned())?;
        let s = perp.as_matrix().adjoint() * y_aligned.as_matrix();
        (Some(perp), DenseMatrix::from_inner(s))
    };

    let pair = AlignedPair {
        x_aligned,
        y_aligned,
        x_perp,
        c_diag,
        s_block,
    };
    pair.validate()?;
    Ok(pair)
}

/// The sine vector read off the aligned S block: its singular values
/// descending, zero-padded on the right to length k. Coincides with the
/// sines of the principal angles.
pub fn sines_padded(pair: &AlignedPair) -> Vec<f64> {
    let k = pair.subspace_dim();
    let mut s = singular_values_of(pair.s_block.as_matrix());
    s.truncate(k);
    s.resize(k, 0.0);
    s
}

/// Builds a basis `Y` with prescribed principal angles against `x`:
/// `y_i = x_i cos(theta_i) + z_i sin(theta_i)` with a seeded orthonormal set
/// `{z_i}` inside the orthogonal complement of `x`.
///
/// Each nonzero target angle consumes one complement direction, so the
/// number of nonzero targets must not exceed `n - k`.
pub fn perturb_subspace(
    x: &OrthonormalBasis,
    target: &AngleVector,
    seed: u64,
) -> Result<OrthonormalBasis> {
    let n = x.ambient_dim();
    let k = x.subspace_dim();
    if target.len() != k {
        return Err(Error::DimensionMismatch {
            context: format!(
                "target angle count {} does not match subspace dimension {k}",
                target.len()
            ),
        });
    }
    let thetas = target.values(); // descending
    let nonzero = thetas.iter().filter(|&&t| t > 0.0).count();
    if nonzero > n - k {
        return Err(Error::CapacityExceeded {
            requested: nonzero,
            available: n - k,
        });
    }
    if nonzero == 0 {
        return Ok(x.clone());
    }

    let full = unitary_completion(x);
    let w = full.columns(k, n - k).into_owned();
    // Seeded rotation inside the complement makes the z directions generic.
    let mix = numkern::random_unitary(n - k, seed);
    let z = w * mix.as_matrix().columns(0, nonzero).into_owned();

    let mut y = DMatrix::<C64>::zeros(n, k);
    for i in 0..k {
        let mut col: DVector<C64> = x.as_matrix().column(i).into_owned();
        if thetas[i] > 0.0 {
            let (s, c) = thetas[i].sin_cos();
            col = col * C64::new(c, 0.0) + z.column(i) * C64::new(s, 0.0);
        }
        y.set_column(i, &col);
    }
    OrthonormalBasis::new(y)
}
