//! The five-space decomposition of a projection pair and its angle model.
//!
//! The space splits into the four corner subspaces
//! `R(P) cap R(Q)`, `N(P) cap N(Q)`, `R(P) cap N(Q)`, `N(P) cap R(Q)` and the
//! generic part, on which the pair is unitarily equivalent to the model
//! `P = [[1,0],[0,0]]`, `Q = [[C^2, CS],[CS, S^2]]` with `C = cos(X)`,
//! `S = sin(X)` for the diagonal angle operator `X` built from the principal
//! angles between `P(H_0)` and `Q(H_0)`.

use crate::error::{Error, Result};
use crate::numkit::{self, CMatrix, SubspaceBasis};
use crate::projcore::{EigenData, Projection, ProjectionPair, DEFAULT_SPEC_TOL};

type CVector = nalgebra::DVector<num_complex::Complex64>;

/// Gate at which the compressions of `P` and `Q` to the generic part must
/// look like projections; failures indicate corner directions that the
/// intersection step missed.
const GENERIC_REDUCE_TOL: f64 = 1e-6;

/// Principal angles of the generic part: `(gamma, multiplicity)` with
/// `gamma` strictly inside `(0, pi/2)`, increasing, merged at the spectral
/// clustering tolerance.
#[derive(Debug, Clone)]
pub struct PrincipalAngles {
    pub gammas: Vec<(f64, usize)>,
}

impl PrincipalAngles {
    /// Total multiplicity, i.e. `dim L` (half the generic dimension).
    pub fn total(&self) -> usize {
        self.gammas.iter().map(|&(_, m)| m).sum()
    }

    pub fn distinct(&self) -> usize {
        self.gammas.len()
    }
}

/// The five orthogonal subspaces plus the generic-part model data.
///
/// `model_unitary` is an `n x 2L` isometry whose first `L` columns span
/// `P(H_0)` (the principal vectors on the `P` side) and whose last `L`
/// columns complete the generic part; in these coordinates `P` compresses to
/// `[[1,0],[0,0]]` and `Q` to `[[C^2, CS],[CS, S^2]]`.
#[derive(Debug, Clone)]
pub struct HalmosDecomposition {
    pub h11: SubspaceBasis,
    pub h00: SubspaceBasis,
    pub h10: SubspaceBasis,
    pub h01: SubspaceBasis,
    pub generic: SubspaceBasis,
    pub angles: PrincipalAngles,
    /// Unmerged principal angles, non-decreasing, one per model column pair.
    pub gammas_raw: Vec<f64>,
    pub model_unitary: CMatrix,
}

impl HalmosDecomposition {
    pub fn ambient_dim(&self) -> usize {
        self.h11.ambient_dim()
    }

    /// Half the generic dimension.
    pub fn model_size(&self) -> usize {
        self.gammas_raw.len()
    }

    pub fn corner_dims(&self) -> (usize, usize, usize, usize) {
        (
            self.h11.dim(),
            self.h00.dim(),
            self.h10.dim(),
            self.h01.dim(),
        )
    }

    /// `|V^* V - I|` over the horizontally stacked five bases.
    pub fn completeness_residual(&self) -> f64 {
        let all = hstack(&[
            self.h11.columns(),
            self.h00.columns(),
            self.h10.columns(),
            self.h01.columns(),
            self.generic.columns(),
        ]);
        numkit::ortho_residual(&all)
    }

    /// The model matrices `(P_model, Q_model)` on `L + L` coordinates.
    pub fn model_matrices(&self) -> (CMatrix, CMatrix) {
        let l = self.model_size();
        let mut p = CMatrix::zeros(2 * l, 2 * l);
        let mut q = CMatrix::zeros(2 * l, 2 * l);
        for (i, &gamma) in self.gammas_raw.iter().enumerate() {
            let (s, c) = gamma.sin_cos();
            p[(i, i)] = numkit::complex(1.0, 0.0);
            q[(i, i)] = numkit::complex(c * c, 0.0);
            q[(i, i + l)] = numkit::complex(c * s, 0.0);
            q[(i + l, i)] = numkit::complex(c * s, 0.0);
            q[(i + l, i + l)] = numkit::complex(s * s, 0.0);
        }
        (p, q)
    }
}

fn hstack(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).max().unwrap_or(0);
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        for j in 0..b.ncols() {
            out.set_column(at, &b.column(j));
            at += 1;
        }
    }
    out
}

/// Computes the five-space decomposition of a pair at the given
/// principal-angle threshold.
pub fn halmos_decompose(pair: &ProjectionPair, angle_tol: f64) -> Result<HalmosDecomposition> {
    let p = pair.p();
    let q = pair.q();
    let mut h11 = numkit::subspace_intersection(p.range_basis(), q.range_basis(), angle_tol)?;
    let mut h00 = numkit::subspace_intersection(p.null_basis(), q.null_basis(), angle_tol)?;
    let mut h10 = numkit::subspace_intersection(p.range_basis(), q.null_basis(), angle_tol)?;
    let mut h01 = numkit::subspace_intersection(p.null_basis(), q.range_basis(), angle_tol)?;

    let corners = hstack(&[h11.columns(), h00.columns(), h10.columns(), h01.columns()]);
    let corner_space = SubspaceBasis::orthonormalized(corners, 1e-6)
        .map_err(|_| Error::Inconsistent("corner subspaces are not mutually orthogonal".into()))?;
    let complement = corner_space.complement();
    let g = complement.dim();
    if g == 0 {
        return finish(
            pair,
            h11,
            h00,
            h10,
            h01,
            SubspaceBasis::empty(pair.dim()),
            Vec::new(),
            CMatrix::zeros(pair.dim(), 0),
        );
    }

    // Compressions of P and Q to the generic part must be projections.
    let gcols = complement.columns();
    let pg = numkit::hermitian_part(&(gcols.adjoint() * p.matrix() * gcols));
    let qg = numkit::hermitian_part(&(gcols.adjoint() * q.matrix() * gcols));
    let pg_eig = numkit::hermitian_eigen(&pg);
    let qg_eig = numkit::hermitian_eigen(&qg);
    for eig in [&pg_eig, &qg_eig] {
        let worst = eig
            .values
            .iter()
            .map(|&v| v.abs().min((v - 1.0).abs()))
            .fold(0.0f64, f64::max);
        if worst > GENERIC_REDUCE_TOL {
            return Err(Error::Inconsistent(format!(
                "generic part does not reduce the pair (spectral residual {worst:.3e})"
            )));
        }
    }
    let lp = pg_eig.values.iter().filter(|&&v| v > 0.5).count();
    let lq = qg_eig.values.iter().filter(|&&v| v > 0.5).count();
    if g % 2 != 0 || lp != g / 2 || lq != g / 2 {
        return Err(Error::Inconsistent(format!(
            "generic part of dimension {g} splits as {lp}+{lq} against P and Q"
        )));
    }
    let l_all = g / 2;
    let mp = pg_eig.vectors.columns(0, l_all).into_owned();
    let mq = qg_eig.vectors.columns(0, l_all).into_owned();

    // Principal vectors between P(H0) and Q(H0), in generic coordinates.
    let dec = numkit::svd(&(mp.adjoint() * &mq));
    let xi_g = &mp * &dec.u; // columns: P-side principal vectors
    let eta_g = &mq * dec.v_t.adjoint(); // columns: Q-side principal vectors

    let mut gammas = Vec::new();
    let mut model_cols_xi: Vec<CVector> = Vec::new();
    let mut model_cols_f: Vec<CVector> = Vec::new();
    let mut absorb_h11: Vec<CVector> = Vec::new();
    let mut absorb_h00: Vec<CVector> = Vec::new();
    let mut absorb_h10: Vec<CVector> = Vec::new();
    let mut absorb_h01: Vec<CVector> = Vec::new();
    for (i, &sigma) in dec.s.iter().enumerate() {
        let gamma = sigma.clamp(0.0, 1.0).acos();
        let xi = gcols * xi_g.column(i);
        let eta = gcols * eta_g.column(i);
        let (s, c) = gamma.sin_cos();
        let f = (eta - xi.scale(c)).unscale(s.max(1e-300));
        if gamma < angle_tol {
            // A direction shared by both ranges that slipped past the
            // intersection threshold: fold it back into the corners.
            absorb_h11.push(xi);
            absorb_h00.push(f);
        } else if gamma > std::f64::consts::FRAC_PI_2 - angle_tol {
            absorb_h10.push(xi);
            absorb_h01.push(f);
        } else {
            gammas.push(gamma);
            model_cols_xi.push(xi);
            model_cols_f.push(f);
        }
    }

    let n = pair.dim();
    if !absorb_h11.is_empty() || !absorb_h10.is_empty() {
        h11 = extend_basis(&h11, cols_to_matrix(n, &absorb_h11))?;
        h00 = extend_basis(&h00, cols_to_matrix(n, &absorb_h00))?;
        h10 = extend_basis(&h10, cols_to_matrix(n, &absorb_h10))?;
        h01 = extend_basis(&h01, cols_to_matrix(n, &absorb_h01))?;
    }

    // Ascending angles; the SVD gave descending sigma = ascending gamma, and
    // absorption preserved the order.
    let l = gammas.len();
    let mut model = CMatrix::zeros(n, 2 * l);
    for (j, col) in model_cols_xi.iter().chain(model_cols_f.iter()).enumerate() {
        model.set_column(j, col);
    }
    let model = SubspaceBasis::orthonormalized(model, 1e-6)?;
    let generic = model.clone();
    finish(
        pair,
        h11,
        h00,
        h10,
        h01,
        generic,
        gammas,
        model.columns().clone(),
    )
}

fn cols_to_matrix(n: usize, cols: &[CVector]) -> CMatrix {
    let mut out = CMatrix::zeros(n, cols.len());
    for (j, col) in cols.iter().enumerate() {
        out.set_column(j, col);
    }
    out
}

fn extend_basis(basis: &SubspaceBasis, extra: CMatrix) -> Result<SubspaceBasis> {
    if extra.ncols() == 0 {
        return Ok(basis.clone());
    }
    SubspaceBasis::orthonormalized(hstack(&[basis.columns(), &extra]), 1e-6)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    pair: &ProjectionPair,
    h11: SubspaceBasis,
    h00: SubspaceBasis,
    h10: SubspaceBasis,
    h01: SubspaceBasis,
    generic: SubspaceBasis,
    gammas_raw: Vec<f64>,
    model_unitary: CMatrix,
) -> Result<HalmosDecomposition> {
    let total = h11.dim() + h00.dim() + h10.dim() + h01.dim() + generic.dim();
    if total != pair.dim() {
        return Err(Error::Inconsistent(format!(
            "subspace dimensions sum to {total}, ambient is {}",
            pair.dim()
        )));
    }
    let angles = merge_angles(&gammas_raw, DEFAULT_SPEC_TOL);
    let dec = HalmosDecomposition {
        h11,
        h00,
        h10,
        h01,
        generic,
        angles,
        gammas_raw,
        model_unitary,
    };
    let completeness = dec.completeness_residual();
    if completeness > 1e-8 {
        return Err(Error::Inconsistent(format!(
            "five-space completeness residual {completeness:.3e}"
        )));
    }
    Ok(dec)
}

fn merge_angles(gammas: &[f64], tol: f64) -> PrincipalAngles {
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for &g in gammas {
        match merged.last_mut() {
            Some((value, mult)) if (g - *value).abs() <= tol => {
                *value = (*value * *mult as f64 + g) / (*mult as f64 + 1.0);
                *mult += 1;
            }
            _ => merged.push((g, 1)),
        }
    }
    PrincipalAngles { gammas: merged }
}

/// Reassembles the pair from a decomposition.
pub fn reconstruct(dec: &HalmosDecomposition) -> Result<ProjectionPair> {
    let l = dec.model_size();
    let (pm, qm) = dec.model_matrices();
    let w = &dec.model_unitary;
    let p11 = dec.h11.projector();
    let mut p = &p11 + dec.h10.projector();
    let mut q = p11 + dec.h01.projector();
    if l > 0 {
        p += w * pm * w.adjoint();
        q += w * qm * w.adjoint();
    }
    let p = Projection::new(numkit::hermitian_part(&p), 1e-8)?;
    let q = Projection::new(numkit::hermitian_part(&q), 1e-8)?;
    ProjectionPair::new(p, q)
}

/// Summary used by the compactness proxy: `dim H11`, the cosine multiset of
/// the generic angles, and its maximum.
#[derive(Debug, Clone)]
pub struct CompactPairReport {
    pub dim_h11: usize,
    /// `cos(gamma)` per raw angle, non-increasing.
    pub cos_values: Vec<f64>,
    pub max_cos: f64,
}

pub fn compact_pair_report(dec: &HalmosDecomposition) -> CompactPairReport {
    let mut cos_values: Vec<f64> = dec.gammas_raw.iter().map(|g| g.cos()).collect();
    cos_values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    CompactPairReport {
        dim_h11: dec.h11.dim(),
        max_cos: cos_values.first().copied().unwrap_or(0.0),
        cos_values,
    }
}

/// The oblique idempotent of the generic part, in model coordinates: the
/// projection onto `P(H_0)` along `Q(H_0)`. Computed as
/// `P_0 (P_0 - Q_0)^{-1}` and cross-checked against the closed form
/// `[[1, -C S^{-1}], [0, 0]]`.
pub fn oblique_idempotent(dec: &HalmosDecomposition) -> Result<CMatrix> {
    let l = dec.model_size();
    if l == 0 {
        return Err(Error::EmptyGenericPart);
    }
    let (pm, qm) = dec.model_matrices();
    let diff = &pm - &qm;
    let inv = diff.try_inverse().ok_or(Error::SingularInput {
        sigma_min: 0.0,
        floor: 0.0,
    })?;
    let e = pm * inv;
    let mut closed = CMatrix::zeros(2 * l, 2 * l);
    for (i, &gamma) in dec.gammas_raw.iter().enumerate() {
        closed[(i, i)] = numkit::complex(1.0, 0.0);
        closed[(i, i + l)] = numkit::complex(-gamma.cos() / gamma.sin(), 0.0);
    }
    let agreement = numkit::op_norm(&(&e - &closed));
    if agreement > 1e-8 {
        return Err(Error::Inconsistent(format!(
            "oblique idempotent disagrees with its closed form by {agreement:.3e}"
        )));
    }
    let idem = numkit::op_norm(&(&e * &e - &e));
    if idem > 1e-8 {
        return Err(Error::Inconsistent(format!(
            "oblique idempotent residual {idem:.3e}"
        )));
    }
    Ok(e)
}

/// The three finite quantities whose boundedness across a truncation family
/// signals a rank-bounded (C0) pair, plus a consistency bit tying the angle
/// data to the block spectral data (`lambda_n = cos^2 gamma_n`, and the
/// eigenvalue-1 cluster of `a` matches `H11`).
#[derive(Debug, Clone)]
pub struct C0Report {
    pub distinct_angles: usize,
    pub dim_h01: usize,
    pub rank_e1: usize,
    pub consistent: bool,
}

pub fn c0_conditions(dec: &HalmosDecomposition, ed: &EigenData) -> C0Report {
    let mut consistent = ed.rank_e1 == dec.h11.dim() && ed.lambdas.len() == dec.angles.distinct();
    if consistent {
        // lambdas are descending, angles ascending, so cos^2 aligns directly.
        for ((gamma, mult_g), (lambda, mult_l)) in dec.angles.gammas.iter().zip(&ed.lambdas) {
            let cos2 = gamma.cos().powi(2);
            if (cos2 - lambda).abs() > 1e-6 || mult_g != mult_l {
                consistent = false;
                break;
            }
        }
    }
    C0Report {
        distinct_angles: dec.angles.distinct(),
        dim_h01: dec.h01.dim(),
        rank_e1: ed.rank_e1,
        consistent,
    }
}
