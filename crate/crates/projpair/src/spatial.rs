//! Biorthogonal bases for a pair of subspaces and the product-of-projections
//! test.
//!
//! An operator `T` is a product of two orthogonal projections exactly when
//! `T^2 = T T^* T`; for such `T` the factors can be recovered as the
//! projections onto `R(T)` and `N(T)^perp`. The singular value decomposition
//! of `P_S P_T` yields orthonormal bases of `S` and `T` whose cross inner
//! products are diagonal and non-negative.

use crate::error::{Error, Result};
use crate::numkit::{self, CMatrix, SubspaceBasis};
use crate::projcore::Projection;

/// `|T^2 - T T^* T|` in operator norm.
pub fn crimmins_residual(t: &CMatrix) -> f64 {
    assert_eq!(
        t.nrows(),
        t.ncols(),
        "crimmins_residual expects square input"
    );
    numkit::op_norm(&(t * t - t * t.adjoint() * t))
}

/// Orthonormal bases `xi` of `S` and `psi` of `T` with
/// `<xi_n, psi_k> = s_n delta_nk`, `s_n >= 0`.
///
/// The leading columns (the common prefix) are the singular vectors of
/// `P_S P_T`; the remaining columns extend them to full bases of `S` and `T`
/// by Gram-Schmidt over the input basis columns in index order, so repeated
/// runs produce identical output.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    pub xi: SubspaceBasis,
    pub psi: SubspaceBasis,
    /// Aligned diagonal inner products, zero-padded to `min(dim S, dim T)`.
    pub s: Vec<f64>,
    /// Length of the SVD prefix (number of nonzero `s` entries).
    pub prefix: usize,
}

impl BiorthogonalSystem {
    /// The cross-Gram matrix `G_nk = <xi_n, psi_k>`.
    pub fn gram(&self) -> CMatrix {
        self.xi.columns().adjoint() * self.psi.columns()
    }
}

pub fn biorthogonal_bases(
    s_space: &SubspaceBasis,
    t_space: &SubspaceBasis,
    rank_tol: f64,
) -> Result<BiorthogonalSystem> {
    if s_space.ambient_dim() != t_space.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            s_space.ambient_dim(),
            t_space.ambient_dim()
        )));
    }
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rank_tol must lie in (0, 1), got {rank_tol}"
        )));
    }
    let product = s_space.projector() * t_space.projector();
    let dec = numkit::svd(&product);
    let s_max = dec.s.first().copied().unwrap_or(0.0);
    let prefix = if s_max == 0.0 {
        0
    } else {
        dec.s.iter().filter(|&&v| v > rank_tol * s_max).count()
    };
    let xi_prefix = dec.u.columns(0, prefix).into_owned();
    let psi_prefix = dec.v_t.adjoint().columns(0, prefix).into_owned();
    let xi = complete_within(&xi_prefix, s_space)?;
    let psi = complete_within(&psi_prefix, t_space)?;
    let mut s: Vec<f64> = dec.s.iter().take(prefix).copied().collect();
    s.resize(s_space.dim().min(t_space.dim()), 0.0);
    Ok(BiorthogonalSystem { xi, psi, s, prefix })
}

/// Extends orthonormal `prefix` columns (contained in `space`) to a full
/// orthonormal basis of `space`, deterministically: the space's own basis
/// columns are orthogonalized against the accumulated set in index order and
/// kept whenever anything survives.
fn complete_within(prefix: &CMatrix, space: &SubspaceBasis) -> Result<SubspaceBasis> {
    let target = space.dim();
    let n = space.ambient_dim();
    let mut acc = CMatrix::zeros(n, target);
    let mut count = 0;
    for j in 0..prefix.ncols() {
        acc.set_column(count, &prefix.column(j));
        count += 1;
    }
    for j in 0..space.dim() {
        if count >= target {
            break;
        }
        let mut v = space.columns().column(j).into_owned();
        // two Gram-Schmidt sweeps
        for _ in 0..2 {
            for k in 0..count {
                let coeff = acc.column(k).dotc(&v);
                v -= acc.column(k) * coeff;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            acc.set_column(count, &v.unscale(norm));
            count += 1;
        }
    }
    if count != target {
        return Err(Error::Inconsistent(format!(
            "basis completion found {count} of {target} vectors"
        )));
    }
    SubspaceBasis::orthonormalized(acc, 1e-8)
}

/// Recovers the two projection factors of a product `T = P_S P_T`:
/// the projections onto `R(T)` and `N(T)^perp`. Refuses inputs whose
/// Crimmins residual exceeds `tol`.
pub fn projections_from_product(t: &CMatrix, tol: f64) -> Result<(Projection, Projection)> {
    numkit::ensure_finite(t)?;
    if t.nrows() != t.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    let residual = crimmins_residual(t);
    if residual > tol {
        return Err(Error::NotAProduct { residual, tol });
    }
    let dec = numkit::svd(t);
    let s_max = dec.s.first().copied().unwrap_or(0.0);
    let rank = if s_max == 0.0 {
        0
    } else {
        dec.s
            .iter()
            .filter(|&&v| v > numkit::DEFAULT_RANK_TOL * s_max)
            .count()
    };
    let range = SubspaceBasis::orthonormalized(dec.u.columns(0, rank).into_owned(), 1e-8)?;
    let coker =
        SubspaceBasis::orthonormalized(dec.v_t.adjoint().columns(0, rank).into_owned(), 1e-8)?;
    let p_r = Projection::from_basis(&range);
    let p_n = Projection::from_basis(&coker);
    let rebuilt = p_r.matrix() * p_n.matrix();
    let rebuild_residual = numkit::op_norm(&(rebuilt - t));
    if rebuild_residual > 10.0 * tol {
        return Err(Error::Inconsistent(format!(
            "recovered factors miss the product by {rebuild_residual:.3e}"
        )));
    }
    Ok((p_r, p_n))
}
