//! Dense numerical kernels: Hermitian eigendecomposition, SVD,
//! orthonormalization, and seeded random generators.
//!
//! Scalars are complex throughout; real inputs are just complex values with
//! zero imaginary parts. Everything targets small-to-moderate dimensions
//! (up to a few hundred rows), where dense O(n^3) factorizations are cheap.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::config;
use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Identifier of the seeded random generator, recorded in reports so any
/// finding can be replayed bit-for-bit.
pub const RNG_ALGORITHM: &str = "chacha20";

/// Iteration cap passed to the iterative factorizations.
const MAX_FACTOR_ITER: usize = 100_000;

/// Seeded generator with the documented algorithm.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn all_finite(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

// ---------------------------------------------------------------------------
// DenseMatrix
// ---------------------------------------------------------------------------

/// General complex matrix. Construction is row-major to match the text
/// format; storage is delegated to `nalgebra`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<C64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries. Requires at least one row and
    /// one column and rejects non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape {
                rows,
                cols,
                context: "matrix must have at least one row and one column",
            });
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidShape {
                rows,
                cols,
                context: "entry count does not match rows * cols",
            });
        }
        let inner = DMatrix::from_row_iterator(rows, cols, entries);
        if !all_finite(&inner) {
            return Err(Error::NonFinite {
                context: "matrix entries",
            });
        }
        Ok(Self { inner })
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    /// Wraps an already-computed matrix. Internal blocks (such as the S block
    /// of an aligned pair with k = n) may legitimately be empty, which the
    /// public constructor forbids.
    pub(crate) fn from_inner(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    /// Largest singular value (zero for an empty matrix).
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm_of(&self.inner)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.inner.iter().all(|z| z.im == 0.0)
    }
}

// ---------------------------------------------------------------------------
// HermitianMatrix
// ---------------------------------------------------------------------------

/// Hermitian matrix with symmetry exact by construction: only the lower
/// triangle is stored (diagonal forced real) and the upper triangle is
/// derived by conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    /// Packed row-major lower triangle, `lower[i * (i + 1) / 2 + j]` for `i >= j`.
    lower: Vec<C64>,
}

/// Relative deviation from exact Hermitian symmetry tolerated when
/// importing a full matrix.
const HERMITIAN_IMPORT_TOL: f64 = 1e-12;

impl HermitianMatrix {
    /// Imports a full square matrix, checking that it equals its conjugate
    /// transpose to within representation exactness; symmetric pairs are
    /// averaged into the stored lower triangle.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::InvalidShape {
                rows: m.rows(),
                cols: m.cols(),
                context: "Hermitian matrix must be square",
            });
        }
        let inner = m.as_matrix();
        let scale = inner
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let mut deviation = 0.0_f64;
        for i in 0..m.rows() {
            for j in 0..=i {
                deviation = deviation.max((inner[(i, j)] - inner[(j, i)].conj()).norm());
            }
        }
        let tolerance = HERMITIAN_IMPORT_TOL * scale;
        if deviation > tolerance {
            return Err(Error::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(Self::symmetrize(inner))
    }

    /// Builds from full row-major entries (convenience over `from_dense`).
    pub fn from_entries(n: usize, entries: Vec<C64>) -> Result<Self> {
        Self::from_dense(&DenseMatrix::new(n, n, entries)?)
    }

    /// Builds from full real row-major entries.
    pub fn from_real_entries(n: usize, entries: &[f64]) -> Result<Self> {
        Self::from_dense(&DenseMatrix::from_real(n, n, entries)?)
    }

    /// Stores `(M + M^H) / 2` without a symmetry check. Used for computed
    /// compressions whose asymmetry is pure roundoff.
    pub(crate) fn symmetrize(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        debug_assert_eq!(n, m.ncols());
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * C64::new(0.5, 0.0);
                lower.push(if i == j { C64::new(avg.re, 0.0) } else { avg });
            }
        }
        Self { n, lower }
    }

    /// Diagonal matrix with the given real diagonal.
    ///
    /// Panics if `values` is empty or contains a non-finite entry.
    pub fn diagonal(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "diagonal requires at least one value");
        assert!(
            values.iter().all(|x| x.is_finite()),
            "diagonal requires finite values"
        );
        let n = values.len();
        let mut lower = vec![C64::new(0.0, 0.0); n * (n + 1) / 2];
        for (i, &v) in values.iter().enumerate() {
            lower[i * (i + 1) / 2 + i] = C64::new(v, 0.0);
        }
        Self { n, lower }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        if row >= col {
            self.lower[row * (row + 1) / 2 + col]
        } else {
            self.lower[col * (col + 1) / 2 + row].conj()
        }
    }

    /// Materializes the full matrix.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_inner(self.to_matrix())
    }

    /// `scale * A + shift * I`, still exactly Hermitian.
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        let mut lower: Vec<C64> = self
            .lower
            .iter()
            .map(|&z| z * C64::new(scale, 0.0))
            .collect();
        for i in 0..self.n {
            let idx = i * (i + 1) / 2 + i;
            lower[idx] = C64::new(lower[idx].re + shift, 0.0);
        }
        Self {
            n: self.n,
            lower,
        }
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm_of(&self.to_matrix())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_matrix().norm()
    }

    /// Raw packed lower triangle (row-major, `i >= j`).
    pub fn packed_lower(&self) -> &[C64] {
        &self.lower
    }
}

// ---------------------------------------------------------------------------
// Spectrum and singular value vectors
// ---------------------------------------------------------------------------

/// Real eigenvalues sorted in nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVector(Vec<f64>);

impl SpectrumVector {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "spectrum values",
            });
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
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
}

/// Nonnegative singular values sorted in nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValueVector(Vec<f64>);

impl SingularValueVector {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "singular values",
            });
        }
        let scale = values.iter().cloned().fold(0.0_f64, f64::max).max(1.0);
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-12 * scale {
                    return Err(Error::Contract(format!(
                        "singular value {v} is negative beyond roundoff"
                    )));
                }
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
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
}

// ---------------------------------------------------------------------------
// OrthonormalBasis
// ---------------------------------------------------------------------------

/// Matrix with orthonormal columns spanning a subspace of dimension k in
/// ambient dimension n, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    cols: DMatrix<C64>,
}

impl OrthonormalBasis {
    /// Validates against the default orthonormality tolerance.
    pub fn new(cols: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(cols, config::DEFAULT.orth)
    }

    /// Validates `1 <= k <= n`, finiteness, and `||Q^H Q - I|| <= tol`.
    pub fn with_tolerance(cols: DMatrix<C64>, tol: f64) -> Result<Self> {
        let (n, k) = (cols.nrows(), cols.ncols());
        if k == 0 || k > n {
            return Err(Error::InvalidShape {
                rows: n,
                cols: k,
                context: "basis needs 1 <= k <= n columns",
            });
        }
        if !all_finite(&cols) {
            return Err(Error::NonFinite {
                context: "basis columns",
            });
        }
        let gram = cols.adjoint() * &cols;
        let deviation = (gram - DMatrix::<C64>::identity(k, k)).norm();
        if deviation > tol {
            return Err(Error::NotOrthonormal {
                deviation,
                tolerance: tol,
            });
        }
        Ok(Self { cols })
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        Self::new(m.as_matrix().clone())
    }

    /// The first k columns of the n-by-n identity, i.e. the subspace of the
    /// leading k coordinate directions.
    pub fn identity_embedding(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "identity embedding needs 1 <= k <= n");
        Self {
            cols: DMatrix::identity(n, k),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.cols.nrows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.cols.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.cols
    }

    pub fn column(&self, i: usize) -> DVector<C64> {
        self.cols.column(i).into_owned()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_inner(self.cols.clone())
    }
}

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

/// Hermitian eigendecomposition `A = V diag(lambda) V^H`, eigenvalues
/// descending and eigenvector columns in matching order. Ties between equal
/// eigenvalues are broken arbitrarily; consumers must not rely on
/// eigenvector pairing across calls.
pub fn eigh(a: &HermitianMatrix) -> Result<(SpectrumVector, OrthonormalBasis)> {
    let m = a.to_matrix();
    let n = a.order();
    let se = m
        .try_symmetric_eigen(f64::EPSILON, MAX_FACTOR_ITER)
        .ok_or(Error::NonConvergence {
            iterations: MAX_FACTOR_ITER,
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Ok((SpectrumVector::new(values)?, OrthonormalBasis::new(vectors)?))
}

/// Singular value decomposition `B = U diag(s) V^H` with `r = min(rows, cols)`
/// columns in U and V and singular values descending.
pub struct Svd {
    pub u: OrthonormalBasis,
    pub singular_values: SingularValueVector,
    pub v: OrthonormalBasis,
}

pub fn svd(b: &DenseMatrix) -> Result<Svd> {
    let f = b
        .as_matrix()
        .clone()
        .try_svd(true, true, f64::EPSILON, MAX_FACTOR_ITER)
        .ok_or(Error::NonConvergence {
            iterations: MAX_FACTOR_ITER,
        })?;
    let u = f.u.expect("u requested");
    let v = f.v_t.expect("v_t requested").adjoint();
    Ok(Svd {
        u: OrthonormalBasis::new(u)?,
        singular_values: SingularValueVector::new(f.singular_values.iter().cloned().collect())?,
        v: OrthonormalBasis::new(v)?,
    })
}

/// Singular values only, descending; tolerates empty inputs (no values).
pub(crate) fn singular_values_of(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value; zero for an empty matrix.
pub(crate) fn spectral_norm_of(m: &DMatrix<C64>) -> f64 {
    singular_values_of(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis for the column space of a full-column-rank matrix.
pub fn orthonormalize(b: &DenseMatrix) -> Result<OrthonormalBasis> {
    let (rows, cols) = (b.rows(), b.cols());
    if cols > rows {
        return Err(Error::RankDeficient {
            smallest: 0.0,
            tolerance: 0.0,
        });
    }
    let f = svd(b)?;
    let s = f.singular_values.values();
    let cutoff = config::DEFAULT.rank_rel * s[0];
    let smallest = s[cols - 1];
    if smallest <= cutoff {
        return Err(Error::RankDeficient {
            smallest,
            tolerance: cutoff,
        });
    }
    Ok(f.u)
}

// ---------------------------------------------------------------------------
// Seeded random generators
// ---------------------------------------------------------------------------

/// Matrix with independent standard complex Gaussian entries.
pub(crate) fn complex_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(
            scale * rng.sample::<f64, _>(StandardNormal),
            scale * rng.sample::<f64, _>(StandardNormal),
        )
    })
}

fn haar_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    // QR of a complex Ginibre matrix with the R-diagonal phase fix gives the
    // rotation-invariant (Haar) distribution.
    let g = complex_gaussian(rng, n, n);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d / C64::new(d.norm(), 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed n-by-n unitary, deterministic for a given seed.
///
/// Panics if `n == 0`.
pub fn random_unitary(n: usize, seed: u64) -> OrthonormalBasis {
    assert!(n >= 1, "random_unitary requires n >= 1");
    let mut rng = seeded_rng(seed);
    OrthonormalBasis::new(haar_unitary(&mut rng, n)).expect("Haar unitary is orthonormal")
}

/// `Q D Q^H` for a Haar-random `Q = random_unitary(len, seed)` and the given
/// real diagonal; the eigendecomposition of the result recovers the sorted
/// spectrum.
///
/// Panics if `spectrum` is empty or contains a non-finite value.
pub fn hermitian_from_spectrum(spectrum: &[f64], seed: u64) -> HermitianMatrix {
    assert!(
        !spectrum.is_empty(),
        "hermitian_from_spectrum requires a nonempty spectrum"
    );
    assert!(
        spectrum.iter().all(|x| x.is_finite()),
        "hermitian_from_spectrum requires finite values"
    );
    let n = spectrum.len();
    let q = random_unitary(n, seed);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        spectrum.iter().map(|&x| C64::new(x, 0.0)),
    ));
    let a = q.as_matrix() * d * q.as_matrix().adjoint();
    HermitianMatrix::symmetrize(&a)
}

// ---------------------------------------------------------------------------
// Orthonormal completion
// ---------------------------------------------------------------------------

/// Extends orthonormal columns to a full unitary matrix `[Q, Q_perp]` by
/// pivoted Gram-Schmidt over the coordinate directions, with one
/// reorthogonalization pass per accepted column.
pub fn unitary_completion(basis: &OrthonormalBasis) -> DMatrix<C64> {
    let n = basis.ambient_dim();
    let k = basis.subspace_dim();
    let mut full = DMatrix::<C64>::zeros(n, n);
    full.view_mut((0, 0), (n, k)).copy_from(basis.as_matrix());

    if k == n {
        return full;
    }

    // Residuals of the coordinate directions against the accepted columns.
    let mut residuals: Vec<DVector<C64>> = (0..n)
        .map(|j| {
            let mut e = DVector::<C64>::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            for c in 0..k {
                let col = full.column(c);
                let coef = col.dotc(&e);
                e -= col * coef;
            }
            e
        })
        .collect();
    let mut used = vec![false; n];

    for next in k..n {
        let (best, _) = residuals
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, r)| (j, r.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("candidates remain");
        used[best] = true;
        let mut v = residuals[best].clone();
        // Second orthogonalization pass for numerical safety.
        for c in 0..next {
            let col = full.column(c);
            let coef = col.dotc(&v);
            v -= col * coef;
        }
        let norm = v.norm();
        debug_assert!(norm > 1e-8, "completion candidate collapsed");
        v /= C64::new(norm, 0.0);
        full.set_column(next, &v);
        for (j, r) in residuals.iter_mut().enumerate() {
            if !used[j] {
                let coef = v.dotc(r);
                *r -= &v * coef;
            }
        }
    }
    full
}

/// Orthonormal basis of the orthogonal complement; `None` when the subspace
/// already fills the ambient space.
pub fn complement(basis: &OrthonormalBasis) -> Option<OrthonormalBasis> {
    let n = basis.ambient_dim();
    let k = basis.subspace_dim();
    if k == n {
        return None;
    }
    let full = unitary_completion(basis);
    let perp = full.columns(k, n - k).into_owned();
    Some(OrthonormalBasis::new(perp).expect("completion columns are orthonormal"))
}
