//! Dense complex linear-algebra primitives with explicit tolerance contracts.
//!
//! Every rank, kernel, and subspace decision in this crate routes through the
//! operations here, so the tolerance semantics are centralized: ranks are
//! counts of singular values above a relative threshold, subspace
//! intersections are principal-angle thresholds on the cross-Gram matrix, and
//! Hermitian eigendecompositions come back in a deterministic order with a
//! fixed phase convention.

use nalgebra::linalg::{SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// The universal carrier: a dense, dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;

/// Default relative threshold for rank/kernel decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Default principal-angle threshold (radians) for subspace intersections.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-7;
/// Orthonormality certificate carried by every [`SubspaceBasis`].
pub const ORTHO_TOL: f64 = 1e-12;

pub fn complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Checks that every entry is finite (no NaN or infinity).
pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Frobenius norm.
pub fn fro_norm(m: &CMatrix) -> f64 {
    m.norm()
}

/// Operator (spectral) norm: the largest singular value. Zero for empty matrices.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let svd = SVD::new(m.clone(), false, false);
    svd.singular_values.iter().copied().collect()
}

/// Thin singular value decomposition `M = U diag(s) V^*`.
pub struct Svd {
    pub u: CMatrix,
    /// Non-increasing.
    pub s: Vec<f64>,
    /// `V^*`, of shape `min(r,c) x c`.
    pub v_t: CMatrix,
}

pub fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: CMatrix::zeros(rows, 0),
            s: Vec::new(),
            v_t: CMatrix::zeros(0, cols),
        };
    }
    let svd = SVD::new(m.clone(), true, true);
    Svd {
        u: svd.u.expect("SVD requested U"),
        s: svd.singular_values.iter().copied().collect(),
        v_t: svd.v_t.expect("SVD requested V^t"),
    }
}

/// Smallest singular value of a square matrix; zero for empty matrices.
pub fn sigma_min(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Hermitian eigendecomposition with the crate's deterministic conventions:
/// eigenvalues non-increasing, each eigenvector's first entry of modulus
/// above `1/sqrt(dim)` made real positive, ties broken lexicographically on
/// the normalized eigenvector entries.
pub struct HermitianEigen {
    /// Non-increasing.
    pub values: Vec<f64>,
    /// Columns aligned with `values`; unitary.
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermitian_eigen requires a square matrix");
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut vectors = eig.eigenvectors;
    for j in 0..n {
        normalize_column_phase(&mut vectors, j);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| compare_columns(&vectors, i, j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut sorted = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    HermitianEigen {
        values,
        vectors: sorted,
    }
}

fn normalize_column_phase(m: &mut CMatrix, col: usize) {
    let n = m.nrows();
    let floor = 1.0 / (n as f64).sqrt() * 0.5;
    let pivot = (0..n).find(|&i| m[(i, col)].norm() > floor);
    if let Some(i) = pivot {
        let z = m[(i, col)];
        let phase = z / z.norm();
        let factor = phase.conj();
        for r in 0..n {
            m[(r, col)] *= factor;
        }
    }
}

fn compare_columns(m: &CMatrix, i: usize, j: usize) -> std::cmp::Ordering {
    for r in 0..m.nrows() {
        let a = m[(r, i)];
        let b = m[(r, j)];
        match a.re.partial_cmp(&b.re) {
            Some(std::cmp::Ordering::Equal) | None => {}
            Some(ord) => return ord,
        }
        match a.im.partial_cmp(&b.im) {
            Some(std::cmp::Ordering::Equal) | None => {}
            Some(ord) => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// `exp(iX)` for Hermitian `X`, via the eigendecomposition. The result is
/// unitary to machine precision.
pub fn unitary_exp_i(x: &CMatrix) -> CMatrix {
    let eig = hermitian_eigen(x);
    let n = x.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, lambda);
        let col = eig.vectors.column(k);
        // out += phase * v v^*
        for r in 0..n {
            let vr = col[r] * phase;
            for c in 0..n {
                out[(r, c)] += vr * col[c].conj();
            }
        }
    }
    out
}

/// An orthonormal set of columns spanning a subspace of `C^ambient_dim`.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    columns: CMatrix,
}

impl SubspaceBasis {
    /// Wraps columns that are already orthonormal within [`ORTHO_TOL`].
    pub fn new(columns: CMatrix) -> Result<Self> {
        ensure_finite(&columns)?;
        let residual = ortho_residual(&columns);
        if residual > ORTHO_TOL {
            return Err(Error::NotOrthonormal {
                residual,
                tol: ORTHO_TOL,
            });
        }
        Ok(SubspaceBasis {
            ambient_dim: columns.nrows(),
            columns,
        })
    }

    /// Accepts columns orthonormal within `accept_tol` and re-orthonormalizes
    /// them (thin QR) so the stored basis meets the [`ORTHO_TOL`] certificate.
    /// The column span is preserved.
    pub fn orthonormalized(columns: CMatrix, accept_tol: f64) -> Result<Self> {
        ensure_finite(&columns)?;
        if columns.ncols() == 0 {
            return SubspaceBasis::new(columns);
        }
        let residual = ortho_residual(&columns);
        if residual > accept_tol {
            return Err(Error::NotOrthonormal {
                residual,
                tol: accept_tol,
            });
        }
        if residual <= ORTHO_TOL * 0.5 {
            return Ok(SubspaceBasis {
                ambient_dim: columns.nrows(),
                columns,
            });
        }
        let qr = columns.qr();
        SubspaceBasis::new(qr.q())
    }

    pub fn empty(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            columns: CMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn standard(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            columns: identity(ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }

    /// The orthogonal projection `B B^*` onto the spanned subspace.
    pub fn projector(&self) -> CMatrix {
        &self.columns * self.columns.adjoint()
    }

    /// Orthonormal basis of the orthogonal complement, from the spectral
    /// decomposition of `I - B B^*`.
    pub fn complement(&self) -> SubspaceBasis {
        let n = self.ambient_dim;
        let k = self.dim();
        if k == 0 {
            return SubspaceBasis::standard(n);
        }
        if k == n {
            return SubspaceBasis::empty(n);
        }
        let eig = hermitian_eigen(&(identity(n) - self.projector()));
        let keep = eig.values.iter().filter(|&&v| v > 0.5).count();
        debug_assert_eq!(keep, n - k);
        let cols = eig.vectors.columns(0, keep).into_owned();
        SubspaceBasis::orthonormalized(cols, 1e-8).expect("complement basis is orthonormal")
    }
}

pub fn ortho_residual(columns: &CMatrix) -> f64 {
    let k = columns.ncols();
    if k == 0 {
        return 0.0;
    }
    let gram = columns.adjoint() * columns;
    op_norm(&(gram - identity(k)))
}

/// Number of singular values exceeding `rel_tol * s_max`; zero for the zero
/// (or empty) matrix.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> Result<usize> {
    ensure_finite(m)?;
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    if m.is_empty() {
        return Ok(0);
    }
    let s = singular_values(m);
    let s_max = s[0];
    if s_max == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rel_tol * s_max).count())
}

/// Principal logarithm of a unitary matrix: the Hermitian `X` with spectrum
/// in `(-pi, pi]` and `exp(iX) = U`.
///
/// Computed through the Cayley transform `W = i (I - U)(I + U)^{-1}`, which
/// is Hermitian for unitary `U`, followed by `X = 2 atan(W)` in the
/// eigenbasis of `W`. Refuses matrices with an eigenvalue within `tol` of
/// `-1`, where the principal branch breaks down.
pub fn principal_unitary_log(u: &CMatrix, tol: f64) -> Result<CMatrix> {
    ensure_finite(u)?;
    let n = u.nrows();
    if n != u.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            n,
            u.ncols()
        )));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let unitary_residual = op_norm(&(u.adjoint() * u - identity(n)));
    if unitary_residual > tol {
        return Err(Error::NotUnitary {
            residual: unitary_residual,
            tol,
        });
    }
    let shifted = u + identity(n);
    let distance = sigma_min(&shifted);
    if distance <= tol {
        return Err(Error::BranchCut { distance, tol });
    }
    let inv = shifted
        .try_inverse()
        .ok_or(Error::SingularInput {
            sigma_min: distance,
            floor: tol,
        })?;
    let cayley = (identity(n) - u) * inv * complex(0.0, 1.0);
    let eig = hermitian_eigen(&hermitian_part(&cayley));
    let mut x = CMatrix::zeros(n, n);
    for (k, &w) in eig.values.iter().enumerate() {
        let theta = 2.0 * w.atan();
        let col = eig.vectors.column(k);
        for r in 0..n {
            let vr = col[r] * theta;
            for c in 0..n {
                x[(r, c)] += vr * col[c].conj();
            }
        }
    }
    Ok(hermitian_part(&x))
}

/// Unitary factor of the polar decomposition `B = U |B|`, via the SVD
/// (`U = W V^*` for `B = W diag(s) V^*`). Requires the smallest singular
/// value to exceed `sigma_min_floor`.
pub fn polar_unitary(b: &CMatrix, sigma_min_floor: f64) -> Result<CMatrix> {
    ensure_finite(b)?;
    let n = b.nrows();
    if n != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            n,
            b.ncols()
        )));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let dec = svd(b);
    let smallest = dec.s.last().copied().unwrap_or(0.0);
    if smallest <= sigma_min_floor {
        return Err(Error::SingularInput {
            sigma_min: smallest,
            floor: sigma_min_floor,
        });
    }
    Ok(dec.u * dec.v_t)
}

/// Orthonormal basis of the intersection of two subspaces, computed from the
/// principal angles: the returned dimension is the count of singular values
/// of `A^* B` exceeding `cos(angle_tol)`, and the basis consists of the
/// corresponding left principal vectors.
pub fn subspace_intersection(
    a: &SubspaceBasis,
    b: &SubspaceBasis,
    angle_tol: f64,
) -> Result<SubspaceBasis> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    if !(angle_tol > 0.0 && angle_tol < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "angle_tol must lie in (0, pi/2), got {angle_tol}"
        )));
    }
    if a.dim() == 0 || b.dim() == 0 {
        return Ok(SubspaceBasis::empty(a.ambient_dim()));
    }
    let gram = a.columns().adjoint() * b.columns();
    let dec = svd(&gram);
    let threshold = angle_tol.cos();
    let count = dec.s.iter().filter(|&&s| s > threshold).count();
    if count == 0 {
        return Ok(SubspaceBasis::empty(a.ambient_dim()));
    }
    let left = dec.u.columns(0, count).into_owned();
    let cols = a.columns() * left;
    SubspaceBasis::orthonormalized(cols, 1e-8)
}

/// Principal angles (radians, non-decreasing) between two subspaces:
/// `arccos` of the singular values of the cross-Gram matrix, clamped to
/// `[0, pi/2]`.
pub fn principal_angles(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<Vec<f64>> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    let gram = a.columns().adjoint() * b.columns();
    Ok(singular_values(&gram)
        .iter()
        .map(|s| s.clamp(0.0, 1.0).acos())
        .collect())
}
