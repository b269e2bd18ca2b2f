//! Validated projections, projection pairs, and the 2x2 block decomposition
//! of one projection relative to another.
//!
//! Writing a projection `Q` as a 2x2 matrix against the splitting
//! `R(P) + N(P)` gives blocks `a` (on the range), `b` (on the nullspace) and
//! a cross term `x`; `Q` being a projection is equivalent to
//! `x x^* = a - a^2`, `x^* x = b - b^2`, `a x + x b = x`. Everything spectral
//! about the pair (the eigenvalue symmetry between `a` and `b`, the singular
//! system of `x`) is derived from this block form.

use crate::error::{Error, Result};
use crate::numkit::{self, CMatrix, SubspaceBasis};

/// Default certificate tolerance for projection validation.
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;
/// Default spectral clustering tolerance.
pub const DEFAULT_SPEC_TOL: f64 = 1e-8;

/// A validated orthogonal projection: Hermitian, idempotent, spectrum at
/// `{0, 1}`, all within the stored tolerance certificate.
#[derive(Debug, Clone)]
pub struct Projection {
    matrix: CMatrix,
    tol: f64,
    rank: usize,
    eigenvalues: Vec<f64>,
    range_basis: SubspaceBasis,
    null_basis: SubspaceBasis,
}

impl Projection {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        numkit::ensure_finite(&matrix)?;
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "projection must be square, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let herm = numkit::op_norm(&(&matrix - matrix.adjoint()));
        if herm > tol {
            return Err(Error::NotAProjection {
                check: "hermitian",
                residual: herm,
                tol,
            });
        }
        let idem = numkit::op_norm(&(&matrix * &matrix - &matrix));
        if idem > tol {
            return Err(Error::NotAProjection {
                check: "idempotent",
                residual: idem,
                tol,
            });
        }
        let eig = numkit::hermitian_eigen(&matrix);
        let spectral = eig
            .values
            .iter()
            .map(|&v| v.abs().min((v - 1.0).abs()))
            .fold(0.0f64, f64::max);
        if spectral > tol {
            return Err(Error::NotAProjection {
                check: "spectrum",
                residual: spectral,
                tol,
            });
        }
        let rank = eig.values.iter().filter(|&&v| v > 0.5).count();
        let range_basis =
            SubspaceBasis::orthonormalized(eig.vectors.columns(0, rank).into_owned(), 1e-8)?;
        let null_basis =
            SubspaceBasis::orthonormalized(eig.vectors.columns(rank, n - rank).into_owned(), 1e-8)?;
        Ok(Projection {
            matrix,
            tol,
            rank,
            eigenvalues: eig.values,
            range_basis,
            null_basis,
        })
    }

    /// `P = B B^*` for an orthonormal basis; always a valid projection.
    pub fn from_basis(basis: &SubspaceBasis) -> Projection {
        Projection::new(basis.projector(), DEFAULT_PROJECTION_TOL)
            .expect("basis certificate guarantees a projection")
    }

    pub fn zero(dim: usize) -> Projection {
        Projection::new(CMatrix::zeros(dim, dim), DEFAULT_PROJECTION_TOL).expect("zero projection")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nullity(&self) -> usize {
        self.dim() - self.rank
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal basis of the range (the eigenvalue-1 cluster), in the
    /// crate's deterministic eigenvector order.
    pub fn range_basis(&self) -> &SubspaceBasis {
        &self.range_basis
    }

    /// Orthonormal basis of the nullspace (the eigenvalue-0 cluster).
    pub fn null_basis(&self) -> &SubspaceBasis {
        &self.null_basis
    }

    /// The complementary projection `1 - P`.
    pub fn complement(&self) -> Projection {
        let n = self.dim();
        Projection::new(numkit::identity(n) - &self.matrix, self.tol)
            .expect("complement of a projection is a projection")
    }

    /// The symmetry `2P - 1`.
    pub fn symmetry(&self) -> CMatrix {
        self.matrix.scale(2.0) - numkit::identity(self.dim())
    }
}

/// A pair of projections on the same space. `p` plays the role of the fixed
/// reference projection throughout.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    p: Projection,
    q: Projection,
}

impl ProjectionPair {
    pub fn new(p: Projection, q: Projection) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::DimensionMismatch(format!(
                "projection dimensions differ: {} vs {}",
                p.dim(),
                q.dim()
            )));
        }
        Ok(ProjectionPair { p, q })
    }

    pub fn p(&self) -> &Projection {
        &self.p
    }

    pub fn q(&self) -> &Projection {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    /// The product `P Q` as a matrix.
    pub fn product(&self) -> CMatrix {
        self.p.matrix() * self.q.matrix()
    }

    /// Swaps the roles of the two projections.
    pub fn swapped(&self) -> ProjectionPair {
        ProjectionPair {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }
}

/// `Q` written as blocks against `R(P) + N(P)`: `a` is `r x r`, `x` is
/// `r x nu`, `b` is `nu x nu`, expressed in the deterministic eigenbases of
/// `P` stored in `basis_r` and `basis_n`.
#[derive(Debug, Clone)]
pub struct BlockForm {
    pub basis_r: SubspaceBasis,
    pub basis_n: SubspaceBasis,
    pub a: CMatrix,
    pub x: CMatrix,
    pub b: CMatrix,
}

impl BlockForm {
    /// Range-block size `r = rank(P)`.
    pub fn r(&self) -> usize {
        self.a.nrows()
    }

    /// Null-block size `nu = dim - rank(P)`.
    pub fn nu(&self) -> usize {
        self.b.nrows()
    }

    /// Rebuilds `Q` in ambient coordinates from the blocks.
    pub fn reassemble(&self) -> CMatrix {
        let br = self.basis_r.columns();
        let bn = self.basis_n.columns();
        br * &self.a * br.adjoint()
            + br * &self.x * bn.adjoint()
            + bn * self.x.adjoint() * br.adjoint()
            + bn * &self.b * bn.adjoint()
    }
}

/// Decomposes `pair.q()` into blocks against the range/nullspace splitting of
/// `pair.p()`. `rank_tol` is the certificate at which each eigenvalue of `P`
/// is re-checked against its assigned cluster.
pub fn block_decompose(pair: &ProjectionPair, rank_tol: f64) -> Result<BlockForm> {
    if !(rank_tol > 0.0 && rank_tol < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "rank_tol must lie in (0, 0.5), got {rank_tol}"
        )));
    }
    let p = pair.p();
    let cluster_tol = rank_tol.max(p.tol());
    for &v in p.eigenvalues() {
        if v.abs().min((v - 1.0).abs()) > cluster_tol {
            return Err(Error::Inconsistent(format!(
                "eigenvalue {v} of P is not within {cluster_tol} of {{0, 1}}"
            )));
        }
    }
    let br = p.range_basis().columns();
    let bn = p.null_basis().columns();
    let q = pair.q().matrix();
    let a = numkit::hermitian_part(&(br.adjoint() * q * br));
    let x = br.adjoint() * q * bn;
    let b = numkit::hermitian_part(&(bn.adjoint() * q * bn));
    Ok(BlockForm {
        basis_r: p.range_basis().clone(),
        basis_n: p.null_basis().clone(),
        a,
        x,
        b,
    })
}

/// The three residuals of the block relations, in operator norm:
/// `|x x^* - (a - a^2)|`, `|x^* x - (b - b^2)|`, `|a x + x b - x|`.
pub fn verify_projection_relations(bf: &BlockForm) -> [f64; 3] {
    let first = numkit::op_norm(&(&bf.x * bf.x.adjoint() - (&bf.a - &bf.a * &bf.a)));
    let second = numkit::op_norm(&(bf.x.adjoint() * &bf.x - (&bf.b - &bf.b * &bf.b)));
    let third = numkit::op_norm(&(&bf.a * &bf.x + &bf.x * &bf.b - &bf.x));
    [first, second, third]
}

/// `P = B B^*` onto the span of the given orthonormal columns.
pub fn projection_from_basis(cols: &SubspaceBasis) -> Projection {
    Projection::from_basis(cols)
}

/// Orthogonal projection onto the nullspace of an idempotent, through the
/// formula `P = (1 - E)(1 - E - E^*)^{-1}`. The returned projection is
/// cross-checked against the numerical kernel of `E`.
pub fn projection_from_idempotent(e: &CMatrix, tol: f64) -> Result<Projection> {
    numkit::ensure_finite(e)?;
    let n = e.nrows();
    if n != e.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "idempotent must be square, got {}x{}",
            n,
            e.ncols()
        )));
    }
    let idem = numkit::op_norm(&(e * e - e));
    if idem > tol {
        return Err(Error::NotIdempotent {
            residual: idem,
            tol,
        });
    }
    let d = numkit::identity(n) - e - e.adjoint();
    // For an exact idempotent (1 - E - E^*)^2 = 1 + (E - E^*)^*(E - E^*),
    // so sigma_min(d) >= 1; anything smaller signals a badly broken input.
    let smin = numkit::sigma_min(&d);
    if smin <= 0.5 {
        return Err(Error::SingularInput {
            sigma_min: smin,
            floor: 0.5,
        });
    }
    let inv = d.try_inverse().ok_or(Error::SingularInput {
        sigma_min: smin,
        floor: 0.5,
    })?;
    let raw = (numkit::identity(n) - e) * inv;
    let vtol = (10.0 * tol).max(DEFAULT_PROJECTION_TOL);
    let proj = Projection::new(numkit::hermitian_part(&raw), vtol)?;
    // Cross-check against the SVD kernel of E.
    let rank_e = numkit::numerical_rank(e, numkit::DEFAULT_RANK_TOL)?;
    let kernel_dim = n - rank_e;
    if proj.rank() != kernel_dim {
        return Err(Error::Inconsistent(format!(
            "projection rank {} does not match kernel dimension {} of the idempotent",
            proj.rank(),
            kernel_dim
        )));
    }
    if kernel_dim > 0 {
        let dec = numkit::svd(e);
        let v = dec.v_t.adjoint();
        let kernel = v.columns(rank_e, kernel_dim).into_owned();
        let resid = numkit::op_norm(&(proj.matrix() * &kernel - &kernel));
        if resid > (100.0 * tol).max(1e-8) {
            return Err(Error::Inconsistent(format!(
                "projection misses the kernel of the idempotent by {resid:.3e}"
            )));
        }
    }
    Ok(proj)
}

/// One eigenvalue cluster of `b` checked against the mirrored cluster of `a`
/// (an eigenvalue `lambda` of `b` off `{0,1}` forces the eigenvalue
/// `1 - lambda` in `a`, with equal multiplicity, intertwined by `x`).
#[derive(Debug, Clone)]
pub struct LemmaCheck {
    pub lambda_b: f64,
    pub multiplicity_b: usize,
    pub matched_lambda_a: Option<f64>,
    pub multiplicity_a: usize,
    pub intertwine_residual: f64,
}

impl LemmaCheck {
    pub fn holds(&self, spec_tol: f64) -> bool {
        self.matched_lambda_a.is_some()
            && self.multiplicity_a == self.multiplicity_b
            && self.intertwine_residual <= 10.0 * spec_tol.max(1e-12)
    }
}

/// Spectral data of a block form: the eigenvalue clusters of `a` and `b`,
/// the corner clusters at 0 and 1, and the singular system of `x` organized
/// per cluster.
#[derive(Debug, Clone)]
pub struct EigenData {
    /// Eigenvalue clusters of `a` inside `(0,1)`: `(value, multiplicity)`,
    /// non-increasing in value.
    pub lambdas: Vec<(f64, usize)>,
    /// `alpha_n = sqrt(lambda_n - lambda_n^2)`, aligned with `lambdas`.
    pub alphas: Vec<f64>,
    /// Dimension of the eigenvalue-1 cluster of `a`.
    pub rank_e1: usize,
    /// Dimension of the eigenvalue-1 cluster of `b`.
    pub rank_e1p: usize,
    /// Dimension of the kernel cluster of `a`.
    pub dim_na: usize,
    /// Dimension of the kernel cluster of `b`.
    pub dim_nb: usize,
    /// Per cluster: orthonormal columns spanning the eigenspace of `a` at
    /// `lambda_n`, in `r`-block coordinates.
    pub xi: Vec<CMatrix>,
    /// Per cluster: orthonormal columns spanning the eigenspace of `b` at
    /// `1 - lambda_n`, in `nu`-block coordinates; computed as
    /// `x^* xi_n / alpha_n`.
    pub xi_prime: Vec<CMatrix>,
    /// Eigenvalue-symmetry checks, one per middle cluster of `b`.
    pub lemma_checks: Vec<LemmaCheck>,
    /// Non-fatal findings (marginal cluster separations).
    pub warnings: Vec<String>,
}

impl EigenData {
    /// True when every middle eigenvalue of `b` found its mirrored partner in
    /// `a` with equal multiplicity and a small intertwining residual.
    pub fn symmetry_holds(&self, spec_tol: f64) -> bool {
        self.lemma_checks.iter().all(|c| c.holds(spec_tol))
    }
}

/// Gap-based clustering of a non-increasing eigenvalue list: a new cluster
/// starts wherever adjacent values differ by more than `spec_tol`. Returns
/// `(mean, member indices)` per cluster.
fn cluster_eigenvalues(values: &[f64], spec_tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some((_, members)) if (values[*members.last().unwrap()] - v).abs() <= spec_tol => {
                members.push(i);
            }
            _ => clusters.push((0.0, vec![i])),
        }
    }
    for (mean, members) in clusters.iter_mut() {
        *mean = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
    }
    clusters
}

struct SplitSpectrum {
    /// Indices of the eigenvalue-1 cluster.
    one: Vec<usize>,
    /// Indices of the kernel cluster.
    zero: Vec<usize>,
    /// Middle clusters `(mean, indices)`, value-descending.
    middle: Vec<(f64, Vec<usize>)>,
    warnings: Vec<String>,
}

fn split_spectrum(values: &[f64], spec_tol: f64, label: &str) -> SplitSpectrum {
    let clusters = cluster_eigenvalues(values, spec_tol);
    let mut warnings = Vec::new();
    for pair in clusters.windows(2) {
        let hi_last = values[*pair[0].1.last().unwrap()];
        let lo_first = values[pair[1].1[0]];
        let gap = hi_last - lo_first;
        if gap < 10.0 * spec_tol {
            warnings.push(format!(
                "marginal cluster separation in {label}: gap {gap:.3e} between {:.12} and {:.12}",
                pair[0].0, pair[1].0
            ));
        }
    }
    let mut one = Vec::new();
    let mut zero = Vec::new();
    let mut middle = Vec::new();
    for (mean, members) in clusters {
        if (mean - 1.0).abs() <= spec_tol {
            one.extend(members);
        } else if mean.abs() <= spec_tol {
            zero.extend(members);
        } else {
            middle.push((mean, members));
        }
    }
    SplitSpectrum {
        one,
        zero,
        middle,
        warnings,
    }
}

/// Spectral decompositions of `a` and `b` clustered at `spec_tol`, with the
/// eigenvalue-symmetry checks and the singular system of `x`.
pub fn eigendata(bf: &BlockForm, spec_tol: f64) -> Result<EigenData> {
    if !(spec_tol > 0.0 && spec_tol < 0.1) {
        return Err(Error::InvalidParameter(format!(
            "spec_tol must lie in (0, 0.1), got {spec_tol}"
        )));
    }
    let a_eig = numkit::hermitian_eigen(&bf.a);
    let b_eig = numkit::hermitian_eigen(&bf.b);
    let a_split = split_spectrum(&a_eig.values, spec_tol, "a");
    let b_split = split_spectrum(&b_eig.values, spec_tol, "b");
    let mut warnings = a_split.warnings.clone();
    warnings.extend(b_split.warnings.clone());

    let mut lambdas = Vec::new();
    let mut alphas = Vec::new();
    let mut xi = Vec::new();
    let mut xi_prime = Vec::new();
    for (mean, members) in &a_split.middle {
        let cols = gather_columns(&a_eig.vectors, members);
        let alpha = (mean - mean * mean).max(0.0).sqrt();
        let mapped = (bf.x.adjoint() * &cols).scale(1.0 / alpha);
        let mapped = SubspaceBasis::orthonormalized(mapped, 1e-4)?;
        lambdas.push((*mean, members.len()));
        alphas.push(alpha);
        xi.push(cols);
        xi_prime.push(mapped.columns().clone());
    }

    // The lemma checks run over the middle clusters of b.
    let mut lemma_checks = Vec::new();
    for (mu, members_b) in &b_split.middle {
        let target = 1.0 - mu;
        let matched = a_split
            .middle
            .iter()
            .min_by(|(la, _), (lb, _)| {
                (la - target)
                    .abs()
                    .partial_cmp(&(lb - target).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .filter(|(la, _)| (la - target).abs() <= (10.0 * spec_tol).max(1e-12));
        let (matched_lambda_a, multiplicity_a, residual) = match matched {
            Some((la, members_a)) => {
                let pb = projector_of(&b_eig.vectors, members_b);
                let pa = projector_of(&a_eig.vectors, members_a);
                let resid = numkit::op_norm(&(&bf.x * pb - pa * &bf.x));
                (Some(*la), members_a.len(), resid)
            }
            None => (None, 0, f64::INFINITY),
        };
        lemma_checks.push(LemmaCheck {
            lambda_b: *mu,
            multiplicity_b: members_b.len(),
            matched_lambda_a,
            multiplicity_a,
            intertwine_residual: residual,
        });
    }

    Ok(EigenData {
        lambdas,
        alphas,
        rank_e1: a_split.one.len(),
        rank_e1p: b_split.one.len(),
        dim_na: a_split.zero.len(),
        dim_nb: b_split.zero.len(),
        xi,
        xi_prime,
        lemma_checks,
        warnings,
    })
}

fn gather_columns(m: &CMatrix, indices: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(m.nrows(), indices.len());
    for (dst, &src) in indices.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

fn projector_of(vectors: &CMatrix, indices: &[usize]) -> CMatrix {
    let cols = gather_columns(vectors, indices);
    &cols * cols.adjoint()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::numkit::{complex, identity, op_norm};

    pub(crate) fn rotation_pair(theta: f64) -> ProjectionPair {
        let p = Projection::new(
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    complex(1.0, 0.0),
                    complex(0.0, 0.0),
                    complex(0.0, 0.0),
                    complex(0.0, 0.0),
                ],
            ),
            1e-12,
        )
        .unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        let q = Projection::new(
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    complex(c * c, 0.0),
                    complex(c * s, 0.0),
                    complex(c * s, 0.0),
                    complex(s * s, 0.0),
                ],
            ),
            1e-12,
        )
        .unwrap();
        ProjectionPair::new(p, q).unwrap()
    }

    #[test]
    fn projection_from_span_e1() {
        let basis = SubspaceBasis::new(CMatrix::from_row_slice(
            2,
            1,
            &[complex(1.0, 0.0), complex(0.0, 0.0)],
        ))
        .unwrap();
        let p = projection_from_basis(&basis);
        assert_eq!(p.rank(), 1);
        assert!((p.matrix()[(0, 0)].re - 1.0).abs() <= 1e-14);
        assert!(p.matrix()[(1, 1)].norm() <= 1e-14);
    }

    #[test]
    fn projection_from_empty_basis_is_zero() {
        let p = projection_from_basis(&SubspaceBasis::empty(2));
        assert_eq!(p.rank(), 0);
        assert!(op_norm(p.matrix()) <= 1e-14);
    }

    #[test]
    fn projection_from_diagonal_span() {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let basis = SubspaceBasis::new(CMatrix::from_row_slice(
            2,
            1,
            &[complex(inv_sqrt2, 0.0), complex(inv_sqrt2, 0.0)],
        ))
        .unwrap();
        let p = projection_from_basis(&basis);
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.matrix()[(i, j)].re - 0.5).abs() <= 1e-14);
                assert!(p.matrix()[(i, j)].im.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn projection_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                complex(1.0, 0.0),
                complex(0.5, 0.0),
                complex(0.0, 0.0),
                complex(0.0, 0.0),
            ],
        );
        assert!(matches!(
            Projection::new(m, 1e-10),
            Err(Error::NotAProjection {
                check: "hermitian",
                ..
            })
        ));
    }

    #[test]
    fn projection_rejects_non_idempotent() {
        let m = identity(2).scale(0.5);
        assert!(matches!(
            Projection::new(m, 1e-10),
            Err(Error::NotAProjection { .. })
        ));
    }

    #[test]
    fn idempotent_that_is_a_projection_gives_complement() {
        let pair = rotation_pair(0.3);
        let e = pair.q().matrix().clone();
        let result = projection_from_idempotent(&e, 1e-10).unwrap();
        let expected = pair.q().complement();
        assert!(op_norm(&(result.matrix() - expected.matrix())) <= 1e-10);
    }

    #[test]
    fn idempotent_formula_matches_rank_one_example() {
        // E = [[1, 1], [0, 0]]; the nullspace projection has entries +-1/2.
        let e = CMatrix::from_row_slice(
            2,
            2,
            &[
                complex(1.0, 0.0),
                complex(1.0, 0.0),
                complex(0.0, 0.0),
                complex(0.0, 0.0),
            ],
        );
        let p = projection_from_idempotent(&e, 1e-12).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                complex(0.5, 0.0),
                complex(-0.5, 0.0),
                complex(-0.5, 0.0),
                complex(0.5, 0.0),
            ],
        );
        assert!(op_norm(&(p.matrix() - expected)) <= 1e-12);
    }

    #[test]
    fn idempotent_random_conjugation_matches_svd_kernel() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 5;
        let mut w = CMatrix::from_fn(n, n, |_, _| {
            complex(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        // keep it well conditioned
        w += identity(n).scale(3.0);
        let w_inv = w.clone().try_inverse().unwrap();
        let mut d = CMatrix::zeros(n, n);
        d[(0, 0)] = complex(1.0, 0.0);
        d[(1, 1)] = complex(1.0, 0.0);
        let e = &w * d * &w_inv;
        let p = projection_from_idempotent(&e, 1e-8).unwrap();
        assert_eq!(p.rank(), 3);
        // SVD kernel oracle
        let dec = numkit::svd(&e);
        let v = dec.v_t.adjoint();
        let kernel = v.columns(2, 3).into_owned();
        let resid = op_norm(&(p.matrix() * &kernel - &kernel));
        assert!(resid <= 1e-8, "kernel residual {resid}");
    }

    #[test]
    fn idempotent_rejects_non_idempotent() {
        let m = identity(2).scale(0.7);
        assert!(matches!(
            projection_from_idempotent(&m, 1e-10),
            Err(Error::NotIdempotent { .. })
        ));
    }

    #[test]
    fn blocks_of_equal_pair() {
        let pair = rotation_pair(0.0);
        let bf = block_decompose(&pair, 1e-10).unwrap();
        assert_eq!(bf.r(), 1);
        assert_eq!(bf.nu(), 1);
        assert!((bf.a[(0, 0)].re - 1.0).abs() <= 1e-12);
        assert!(bf.x[(0, 0)].norm() <= 1e-12);
        assert!(bf.b[(0, 0)].norm() <= 1e-12);
    }

    #[test]
    fn blocks_of_complementary_pair() {
        let p = Projection::new(
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    complex(1.0, 0.0),
                    complex(0.0, 0.0),
                    complex(0.0, 0.0),
                    complex(0.0, 0.0),
                ],
            ),
            1e-12,
        )
        .unwrap();
        let q = p.complement();
        let pair = ProjectionPair::new(p, q).unwrap();
        let bf = block_decompose(&pair, 1e-10).unwrap();
        assert!(bf.a[(0, 0)].norm() <= 1e-12);
        assert!(bf.x[(0, 0)].norm() <= 1e-12);
        assert!((bf.b[(0, 0)].re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn blocks_of_pi_six_rotation() {
        let pair = rotation_pair(std::f64::consts::PI / 6.0);
        let bf = block_decompose(&pair, 1e-10).unwrap();
        assert!((bf.a[(0, 0)].re - 0.75).abs() <= 1e-12);
        assert!((bf.x[(0, 0)].norm() - 3f64.sqrt() / 4.0).abs() <= 1e-12);
        assert!((bf.b[(0, 0)].re - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn relations_hold_and_detect_perturbation() {
        let pair = rotation_pair(0.4);
        let mut bf = block_decompose(&pair, 1e-10).unwrap();
        let residuals = verify_projection_relations(&bf);
        assert!(residuals.iter().all(|&r| r <= 1e-10));
        bf.x[(0, 0)] += complex(1e-3, 0.0);
        let perturbed = verify_projection_relations(&bf);
        assert!(perturbed.iter().any(|&r| r >= 1e-4));
    }

    #[test]
    fn reassembly_reproduces_q() {
        let pair = rotation_pair(0.7);
        let bf = block_decompose(&pair, 1e-10).unwrap();
        assert!(op_norm(&(bf.reassemble() - pair.q().matrix())) <= 1e-12);
    }

    #[test]
    fn eigendata_of_equal_pair() {
        let pair = rotation_pair(0.0);
        let bf = block_decompose(&pair, 1e-10).unwrap();
        let ed = eigendata(&bf, 1e-8).unwrap();
        assert!(ed.lambdas.is_empty());
        assert_eq!(ed.rank_e1, 1);
        assert_eq!(ed.dim_nb, 1);
        assert!(ed.lemma_checks.is_empty());
    }

    #[test]
    fn eigendata_of_pi_six_rotation() {
        let pair = rotation_pair(std::f64::consts::PI / 6.0);
        let bf = block_decompose(&pair, 1e-10).unwrap();
        let ed = eigendata(&bf, 1e-8).unwrap();
        assert_eq!(ed.lambdas.len(), 1);
        assert!((ed.lambdas[0].0 - 0.75).abs() <= 1e-12);
        assert_eq!(ed.lambdas[0].1, 1);
        assert!(ed.symmetry_holds(1e-8));
        assert_eq!(ed.lemma_checks[0].multiplicity_b, 1);
        assert!((ed.lemma_checks[0].lambda_b - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn eigendata_of_two_angle_block_pair() {
        // Two 2x2 rotation blocks with angles pi/6 and pi/3 in C^4.
        let th1 = std::f64::consts::PI / 6.0;
        let th2 = std::f64::consts::PI / 3.0;
        let mut p = CMatrix::zeros(4, 4);
        p[(0, 0)] = complex(1.0, 0.0);
        p[(2, 2)] = complex(1.0, 0.0);
        let mut q = CMatrix::zeros(4, 4);
        for (off, th) in [(0, th1), (2, th2)] {
            let (c, s) = (th.cos(), th.sin());
            q[(off, off)] = complex(c * c, 0.0);
            q[(off, off + 1)] = complex(c * s, 0.0);
            q[(off + 1, off)] = complex(c * s, 0.0);
            q[(off + 1, off + 1)] = complex(s * s, 0.0);
        }
        let pair = ProjectionPair::new(
            Projection::new(p, 1e-12).unwrap(),
            Projection::new(q, 1e-12).unwrap(),
        )
        .unwrap();
        let bf = block_decompose(&pair, 1e-10).unwrap();
        let ed = eigendata(&bf, 1e-8).unwrap();
        let lambda_values: Vec<f64> = ed.lambdas.iter().map(|&(v, _)| v).collect();
        assert_eq!(lambda_values.len(), 2);
        assert!((lambda_values[0] - 0.75).abs() <= 1e-12);
        assert!((lambda_values[1] - 0.25).abs() <= 1e-12);
        assert!(ed.symmetry_holds(1e-8));
        // b's middle spectrum mirrors a's
        let mut mirrored: Vec<f64> = ed.lemma_checks.iter().map(|c| 1.0 - c.lambda_b).collect();
        mirrored.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert!((mirrored[0] - 0.75).abs() <= 1e-12);
        assert!((mirrored[1] - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn eigendata_singular_system_reconstructs_x() {
        let pair = rotation_pair(0.9);
        let bf = block_decompose(&pair, 1e-10).unwrap();
        let ed = eigendata(&bf, 1e-8).unwrap();
        let mut rebuilt = CMatrix::zeros(bf.r(), bf.nu());
        for ((&alpha, xi), xi_p) in ed.alphas.iter().zip(&ed.xi).zip(&ed.xi_prime) {
            rebuilt += (xi * xi_p.adjoint()).scale(alpha);
        }
        assert!(op_norm(&(rebuilt - &bf.x)) <= 1e-10);
    }
}
