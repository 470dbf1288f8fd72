//! Dense kernels shared by every estimator.
//!
//! Everything here is a pure function of its inputs. Factorizations are
//! delegated to `faer` running sequentially, so repeated calls on identical
//! inputs produce bitwise-identical results.

use std::cmp::Ordering;

use faer::linalg::solvers::Solve;
pub use faer::c64;
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

pub type Matrix = Mat<f64>;
pub type CMatrix = Mat<c64>;

/// Default relative singular-value cutoff used by [`reduced_svd`] and [`pinv`].
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Imaginary parts below this are treated as zero when downcasting spectra.
pub const REAL_TOL: f64 = 1e-10;

/// Reduced SVD `A = U diag(sigma) Vᵀ` keeping only the retained rank.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// d×r left singular vectors.
    pub u: Matrix,
    /// r singular values, non-increasing and strictly positive.
    pub sigma: Vec<f64>,
    /// m×r right singular vectors.
    pub v: Matrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_rank_zero(&self) -> bool {
        self.sigma.is_empty()
    }
}

/// Eigenpairs sorted by descending modulus, ties broken by descending real
/// part and then descending imaginary part.
#[derive(Clone, Debug)]
pub struct EigResult {
    pub values: Vec<c64>,
    /// Right eigenvectors as columns, unit 2-norm, first significant entry
    /// rotated to be positive real.
    pub vectors: CMatrix,
    /// Left eigenvectors `u` with `uᵀ M = λ uᵀ`, same normalization.
    pub left_vectors: Option<CMatrix>,
}

impl EigResult {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Real parts of the eigenvalues, or `None` if any imaginary part
    /// exceeds `tol`.
    pub fn real_values(&self, tol: f64) -> Option<Vec<f64>> {
        self.values
            .iter()
            .map(|v| (v.im.abs() <= tol).then_some(v.re))
            .collect()
    }
}

fn check_finite(a: MatRef<'_, f64>, what: &str) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{what} has a non-finite entry at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 0.0 && rel_tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )))
    }
}

pub fn to_complex(a: MatRef<'_, f64>) -> CMatrix {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0))
}

/// Largest absolute deviation from symmetry relative to the Frobenius norm.
pub fn asymmetry(a: MatRef<'_, f64>) -> f64 {
    let n = a.nrows();
    let norm = a.norm_l2();
    if norm == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst / norm
}

pub fn symmetrized(a: MatRef<'_, f64>) -> Matrix {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Reduced SVD discarding singular values below `rel_tol · σ_max`.
///
/// An all-zero matrix yields a rank-zero result (empty factors) rather than
/// an error; callers decide whether rank zero is fatal.
pub fn reduced_svd(a: MatRef<'_, f64>, rel_tol: f64) -> Result<SvdResult> {
    check_rel_tol(rel_tol)?;
    let (d, m) = (a.nrows(), a.ncols());
    if d == 0 || m == 0 {
        return Err(Error::InvalidArgument("reduced_svd of an empty matrix".into()));
    }
    check_finite(a, "matrix")?;

    if a.norm_max() == 0.0 {
        return Ok(SvdResult {
            u: Mat::zeros(d, 0),
            sigma: Vec::new(),
            v: Mat::zeros(m, 0),
        });
    }

    let svd = a
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector();
    let smax = s[0];
    let rank = (0..s.nrows()).take_while(|&i| s[i] > rel_tol * smax).count();

    Ok(SvdResult {
        u: svd.U().subcols(0, rank).to_owned(),
        sigma: (0..rank).map(|i| s[i]).collect(),
        v: svd.V().subcols(0, rank).to_owned(),
    })
}

/// Moore–Penrose pseudoinverse `V diag(σ⁻¹) Uᵀ` on the retained rank.
pub fn pinv(a: MatRef<'_, f64>, rel_tol: f64) -> Result<Matrix> {
    let svd = reduced_svd(a, rel_tol)?;
    let vs = Mat::from_fn(svd.v.nrows(), svd.rank(), |i, j| svd.v[(i, j)] / svd.sigma[j]);
    Ok(&vs * svd.u.transpose())
}

fn eig_order(a: &c64, b: &c64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then_with(|| b.re.total_cmp(&a.re))
        .then_with(|| b.im.total_cmp(&a.im))
}

/// Scales `v` to unit 2-norm and rotates its first significant entry onto
/// the positive real axis.
pub fn normalize_phase(v: &mut [c64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let biggest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .find(|z| z.norm() > 1e-10 * biggest)
        .copied()
        .unwrap_or(c64::new(1.0, 0.0));
    let rot = pivot.conj() / (pivot.norm() * norm);
    for z in v.iter_mut() {
        *z *= rot;
    }
}

fn sorted_eigensystem(values: Vec<c64>, vectors: MatRef<'_, c64>) -> (Vec<c64>, CMatrix) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| eig_order(&values[a], &values[b]));
    let n = vectors.nrows();
    let mut out = Mat::<c64>::zeros(n, order.len());
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            out[(i, dst)] = vectors[(i, src)];
        }
        normalize_phase(out.col_as_slice_mut(dst));
    }
    (order.iter().map(|&i| values[i]).collect(), out)
}

fn raw_eigen(m: MatRef<'_, f64>) -> Result<(Vec<c64>, CMatrix)> {
    let evd = m
        .eigen()
        .map_err(|e| Error::Decomposition(format!("eigendecomposition: {e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<c64> = (0..s.nrows()).map(|i| s[i]).collect();
    Ok(sorted_eigensystem(values, evd.U()))
}

/// Dense eigendecomposition of a real square matrix.
///
/// Left eigenvectors are obtained as right eigenvectors of `Mᵀ` and paired
/// with the right spectrum by nearest eigenvalue.
pub fn eig_dense(m: MatRef<'_, f64>, want_left: bool) -> Result<EigResult> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite(m, "matrix")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(EigResult {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
            left_vectors: want_left.then(|| Mat::zeros(0, 0)),
        });
    }

    let (values, vectors) = raw_eigen(m)?;
    let left_vectors = if want_left {
        let (lvals, lvecs) = raw_eigen(m.transpose())?;
        let mut used = vec![false; n];
        let mut paired = Mat::<c64>::zeros(n, n);
        for (dst, lam) in values.iter().enumerate() {
            let src = (0..n)
                .filter(|&i| !used[i])
                .min_by(|&a, &b| (lvals[a] - lam).norm().total_cmp(&(lvals[b] - lam).norm()))
                .expect("as many left as right eigenvalues");
            used[src] = true;
            for i in 0..n {
                paired[(i, dst)] = lvecs[(i, src)];
            }
        }
        Some(paired)
    } else {
        None
    };

    Ok(EigResult {
        values,
        vectors,
        left_vectors,
    })
}

/// Solves `C_tau a = λ C0 a` for symmetric positive semidefinite `C0` by
/// whitening: eigenvectors `ã` of `C0^{-1/2} C_tau C0^{-1/2}` on the retained
/// rank subspace are mapped back with `a = C0^{-1/2} ã`.
///
/// Directions of `C0` below `rel_tol · s_max` are excluded, so the result
/// holds `rank(C0)` eigenpairs. When the whitened matrix is symmetric the
/// spectrum is exactly real.
pub fn generalized_sym_eig(
    c_tau: MatRef<'_, f64>,
    c0: MatRef<'_, f64>,
    rel_tol: f64,
) -> Result<EigResult> {
    check_rel_tol(rel_tol)?;
    let k = c0.nrows();
    if c0.ncols() != k || c_tau.nrows() != k || c_tau.ncols() != k {
        return Err(Error::Dimension(format!(
            "generalized eigenproblem needs equal square matrices, got {}×{} and {}×{}",
            c_tau.nrows(),
            c_tau.ncols(),
            c0.nrows(),
            c0.ncols()
        )));
    }
    check_finite(c0, "C0")?;
    check_finite(c_tau, "C_tau")?;

    let c0s = symmetrized(c0);
    let evd = c0s
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("C0 eigendecomposition: {e:?}")))?;
    let s = evd.S().column_vector();
    let w = evd.U();
    let s_max = (0..k).map(|i| s[i].abs()).fold(0.0, f64::max);
    let s_min = (0..k).map(|i| s[i]).fold(f64::INFINITY, f64::min);
    if k > 0 && s_min < -1e-10 * s_max.max(1.0) {
        return Err(Error::NotPsd(s_min));
    }
    let kept: Vec<usize> = (0..k).filter(|&i| s[i] > rel_tol * s_max).collect();
    if kept.is_empty() {
        return Err(Error::RankZero);
    }
    // ascending from faer; whitening columns in descending C0 order
    let whiten = Mat::from_fn(k, kept.len(), |i, j| {
        let col = kept[kept.len() - 1 - j];
        w[(i, col)] / s[col].sqrt()
    });
    let mw = whiten.transpose() * c_tau * &whiten;

    let (values, tilde) = if asymmetry(mw.as_ref()) <= 1e-10 {
        let sym = symmetrized(mw.as_ref());
        let e = sym
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Decomposition(format!("whitened eigendecomposition: {e:?}")))?;
        let ev = e.S().column_vector();
        let values: Vec<c64> = (0..ev.nrows()).map(|i| c64::new(ev[i], 0.0)).collect();
        (values, to_complex(e.U()))
    } else {
        let e = eig_dense(mw.as_ref(), false)?;
        (e.values, e.vectors)
    };

    let mapped = to_complex(whiten.as_ref()) * &tilde;
    let (values, vectors) = sorted_eigensystem(values, mapped.as_ref());
    Ok(EigResult {
        values,
        vectors,
        left_vectors: None,
    })
}

/// Inverse of a complex square matrix via partial-pivot LU, together with
/// the 2-norm condition estimate `σ_max / σ_min`.
pub fn complex_inverse(a: MatRef<'_, c64>) -> Result<(CMatrix, f64)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension("inverse of a non-square matrix".into()));
    }
    if n == 0 {
        return Ok((Mat::zeros(0, 0), 1.0));
    }
    let sv = a
        .singular_values()
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))?;
    let smax = sv[0];
    let smin = sv[sv.len() - 1];
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > 1e13 {
        return Err(Error::SingularEigenbasis(cond));
    }
    let lu = a.partial_piv_lu();
    let inv = lu.solve(Mat::<c64>::identity(n, n));
    Ok((inv, cond))
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::mat;

    fn frob_rel(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
        let diff = a - b;
        diff.norm_l2() / a.norm_l2().max(b.norm_l2()).max(1e-300)
    }

    #[test]
    fn svd_identity() {
        let a = Mat::<f64>::identity(2, 2);
        let s = reduced_svd(a.as_ref(), DEFAULT_REL_TOL).unwrap();
        assert_eq!(s.sigma, vec![1.0, 1.0]);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s.u[(i, j)].abs() - expect).abs() < 1e-14);
                assert!((s.v[(i, j)].abs() - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn svd_rank_one() {
        // AᵀA = [[5,10],[10,20]]: trace 25, rank 1, so σ² = 25
        let a = mat![[1.0, 2.0], [2.0, 4.0]];
        let s = reduced_svd(a.as_ref(), DEFAULT_REL_TOL).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.sigma[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn svd_zero_is_rank_zero() {
        let a = Mat::<f64>::zeros(3, 2);
        let s = reduced_svd(a.as_ref(), DEFAULT_REL_TOL).unwrap();
        assert!(s.is_rank_zero());
        assert_eq!(s.u.nrows(), 3);
        assert_eq!(s.v.nrows(), 2);
    }

    #[test]
    fn svd_rejects_bad_tolerance_and_empty() {
        let a = Mat::<f64>::identity(2, 2);
        assert!(reduced_svd(a.as_ref(), 0.0).is_err());
        assert!(reduced_svd(a.as_ref(), 1.5).is_err());
        assert!(reduced_svd(Mat::<f64>::zeros(0, 3).as_ref(), 1e-12).is_err());
    }

    #[test]
    fn pinv_examples() {
        let id = Mat::<f64>::identity(3, 3);
        let p = pinv(id.as_ref(), DEFAULT_REL_TOL).unwrap();
        assert!(frob_rel(p.as_ref(), id.as_ref()) < 1e-15);

        let d = mat![[2.0, 0.0], [0.0, 0.0]];
        let p = pinv(d.as_ref(), DEFAULT_REL_TOL).unwrap();
        let expect = mat![[0.5, 0.0], [0.0, 0.0]];
        assert!(frob_rel(p.as_ref(), expect.as_ref()) < 1e-15);
    }

    #[test]
    fn pinv_zero_matrix() {
        let z = Mat::<f64>::zeros(2, 3);
        let p = pinv(z.as_ref(), DEFAULT_REL_TOL).unwrap();
        assert_eq!((p.nrows(), p.ncols()), (3, 2));
        assert_eq!(p.norm_max(), 0.0);
    }

    #[test]
    fn eig_diagonal() {
        let m = mat![[3.0, 0.0], [0.0, 1.0]];
        let e = eig_dense(m.as_ref(), false).unwrap();
        assert_eq!(e.values, vec![c64::new(3.0, 0.0), c64::new(1.0, 0.0)]);
        assert!((e.vectors[(0, 0)] - c64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((e.vectors[(1, 1)] - c64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eig_rotation_gives_plus_minus_i() {
        let m = mat![[0.0, -1.0], [1.0, 0.0]];
        let e = eig_dense(m.as_ref(), true).unwrap();
        assert!((e.values[0] - c64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((e.values[1] - c64::new(0.0, -1.0)).norm() < 1e-14);
        let left = e.left_vectors.unwrap();
        let mc = to_complex(m.as_ref());
        for l in 0..2 {
            // uᵀ M = λ uᵀ
            let u = left.col(l);
            let lhs = u.transpose() * &mc;
            for j in 0..2 {
                assert!((lhs[j] - e.values[l] * u[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eig_symmetric_is_real() {
        let m = mat![[2.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]];
        let e = eig_dense(m.as_ref(), false).unwrap();
        assert!(e.real_values(REAL_TOL).is_some());
    }

    #[test]
    fn eig_rejects_non_square() {
        let m = Mat::<f64>::zeros(2, 3);
        assert!(matches!(eig_dense(m.as_ref(), false), Err(Error::Dimension(_))));
    }

    #[test]
    fn eig_normalization_convention() {
        let m = mat![[0.5, 0.3], [-0.2, 0.9]];
        let e = eig_dense(m.as_ref(), false).unwrap();
        for l in 0..2 {
            let col = e.vectors.col(l);
            let norm: f64 = (0..2).map(|i| col[i].norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
            assert!(col[0].im.abs() < 1e-15 && col[0].re > 0.0);
        }
    }

    #[test]
    fn generalized_identity_c0_matches_eig() {
        let ct = mat![[0.9, 0.1], [0.1, 0.4]];
        let id = Mat::<f64>::identity(2, 2);
        let g = generalized_sym_eig(ct.as_ref(), id.as_ref(), DEFAULT_REL_TOL).unwrap();
        let e = eig_dense(ct.as_ref(), false).unwrap();
        for (a, b) in g.values.iter().zip(&e.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn generalized_equal_matrices_give_ones() {
        let c0 = mat![[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 0.5]];
        let g = generalized_sym_eig(c0.as_ref(), c0.as_ref(), DEFAULT_REL_TOL).unwrap();
        for v in &g.values {
            assert!((v - c64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn generalized_componentwise_division() {
        let c0 = mat![[4.0, 0.0], [0.0, 1.0]];
        let ct = mat![[2.0, 0.0], [0.0, 0.5]];
        let g = generalized_sym_eig(ct.as_ref(), c0.as_ref(), DEFAULT_REL_TOL).unwrap();
        assert_eq!(g.len(), 2);
        for v in &g.values {
            assert!((v - c64::new(0.5, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn generalized_rejects_indefinite() {
        let c0 = mat![[1.0, 0.0], [0.0, -0.5]];
        let ct = Mat::<f64>::identity(2, 2);
        assert!(matches!(
            generalized_sym_eig(ct.as_ref(), c0.as_ref(), DEFAULT_REL_TOL),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn generalized_residual_nonsymmetric() {
        let c0 = mat![[2.0, 0.5], [0.5, 1.0]];
        let ct = mat![[0.8, 0.4], [-0.1, 0.3]];
        let g = generalized_sym_eig(ct.as_ref(), c0.as_ref(), DEFAULT_REL_TOL).unwrap();
        let ctc = to_complex(ct.as_ref());
        let c0c = to_complex(c0.as_ref());
        for l in 0..g.len() {
            let a = g.vectors.col(l);
            let lhs = &ctc * a;
            let rhs = &c0c * a;
            for i in 0..2 {
                assert!((lhs[i] - g.values[l] * rhs[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn complex_inverse_identity_and_singular() {
        let id = Mat::<c64>::identity(3, 3);
        let (inv, cond) = complex_inverse(id.as_ref()).unwrap();
        assert!((cond - 1.0).abs() < 1e-12);
        assert!((&inv - &id).norm_l2() < 1e-14);
        let sing = Mat::<c64>::from_fn(2, 2, |_, _| c64::new(1.0, 0.0));
        assert!(matches!(
            complex_inverse(sing.as_ref()),
            Err(Error::SingularEigenbasis(_))
        ));
    }
}
