//! Operator approximations and their spectra.
//!
//! Conventions, with `C0 = Ψ_X Ψ_Xᵀ/(m−1)` and `Cτ = Ψ_X Ψ_Yᵀ/(m−1)`:
//!
//! | kind                    | matrix                       | coefficient vectors  |
//! |-------------------------|------------------------------|----------------------|
//! | TICA, VAC               | `C0⁺ Cτ`                     | right eigenvectors   |
//! | DMD, EDMD (Koopman)     | `Ψ_Y Ψ_X⁺ = Cτᵀ C0⁺`         | left eigenvectors    |
//! | EDMD (Perron–Frobenius) | `Cτ C0⁺`                     | left eigenvectors    |
//!
//! In every case the eigenfunction for coefficient vector `ξ` is
//! `φ(x) = ξ* ψ(x)`, so the stored `ξ` is the complex conjugate of the
//! computed eigenvector `v`: `ξ* ψ = vᵀ ψ`.

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::basis::{Dictionary, FeatureMatrices};
use crate::data::DataPairs;
use crate::error::{Error, Result};
use crate::linalg::{
    complex_inverse, eig_dense, generalized_sym_eig, normalize_phase, pinv, reduced_svd, to_complex,
    CMatrix, Matrix,
};

/// Eigenvalues closer than this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Eigenvector bases with a condition estimate above this are flagged.
pub const ILL_CONDITIONED: f64 = 1e10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Tica,
    Dmd,
    Vac,
    EdmdKoopman,
    EdmdPerronFrobenius,
}

impl OperatorKind {
    /// Whether eigenfunction coefficients are left eigenvectors of the matrix.
    pub fn uses_left_eigenvectors(self) -> bool {
        matches!(self, Self::Dmd | Self::EdmdKoopman | Self::EdmdPerronFrobenius)
    }
}

#[derive(Clone, Debug)]
pub struct CovariancePair {
    pub c0: Matrix,
    pub c_tau: Matrix,
    pub m: usize,
    pub symmetrized: bool,
    pub dictionary: Dictionary,
    pub lag_time: f64,
}

impl CovariancePair {
    /// Wraps explicit matrices; the features are taken to be the coordinates.
    pub fn from_matrices(c0: Matrix, c_tau: Matrix) -> Result<Self> {
        let k = c0.nrows();
        if c0.ncols() != k || c_tau.nrows() != k || c_tau.ncols() != k {
            return Err(Error::Dimension("covariance matrices must be equal and square".into()));
        }
        Ok(Self {
            c0,
            c_tau,
            m: 0,
            symmetrized: false,
            dictionary: Dictionary::Identity { dim: k },
            lag_time: 1.0,
        })
    }

    pub fn k(&self) -> usize {
        self.c0.nrows()
    }
}

fn gram(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Matrix {
    a * b.transpose()
}

/// Plain: `C0 = Ψ_XΨ_Xᵀ/(m−1)`, `Cτ = Ψ_XΨ_Yᵀ/(m−1)`.
/// Symmetrized: `C0 = (Ψ_XΨ_Xᵀ + Ψ_YΨ_Yᵀ)/(2m−2)`, `Cτ = (Ψ_XΨ_Yᵀ + Ψ_YΨ_Xᵀ)/(2m−2)`.
pub fn covariances(fm: &FeatureMatrices, symmetrize: bool) -> Result<CovariancePair> {
    let m = fm.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "covariance estimation needs at least 2 pairs, got {m}"
        )));
    }
    let k = fm.k();
    let xx = gram(fm.psi_x.as_ref(), fm.psi_x.as_ref());
    let xy = gram(fm.psi_x.as_ref(), fm.psi_y.as_ref());
    let (c0, c_tau) = if symmetrize {
        let yy = gram(fm.psi_y.as_ref(), fm.psi_y.as_ref());
        let s = 1.0 / (2.0 * m as f64 - 2.0);
        (
            Mat::from_fn(k, k, |i, j| {
                s * 0.5 * (xx[(i, j)] + xx[(j, i)] + yy[(i, j)] + yy[(j, i)])
            }),
            Mat::from_fn(k, k, |i, j| s * (xy[(i, j)] + xy[(j, i)])),
        )
    } else {
        let s = 1.0 / (m as f64 - 1.0);
        (
            Mat::from_fn(k, k, |i, j| s * 0.5 * (xx[(i, j)] + xx[(j, i)])),
            Mat::from_fn(k, k, |i, j| s * xy[(i, j)]),
        )
    };
    Ok(CovariancePair {
        c0,
        c_tau,
        m,
        symmetrized: symmetrize,
        dictionary: fm.dictionary.clone(),
        lag_time: fm.lag_time,
    })
}

/// Eigenvalues with coefficient vectors `ξ_ℓ` defining `φ_ℓ(x) = ξ_ℓ* ψ(x)`.
#[derive(Clone, Debug)]
pub struct SpectralResult {
    pub eigenvalues: Vec<c64>,
    /// k×n, column ℓ is `ξ_ℓ`.
    pub coefficients: CMatrix,
    pub kind: OperatorKind,
    pub dictionary: Dictionary,
    pub lag_time: f64,
    pub m: usize,
    /// Some pair of eigenvalues is closer than [`DEGENERACY_TOL`].
    pub degenerate: bool,
    /// The eigenvector basis is (nearly) defective.
    pub ill_conditioned: bool,
}

fn has_degeneracy(values: &[c64]) -> bool {
    values
        .iter()
        .enumerate()
        .any(|(i, a)| values[i + 1..].iter().any(|b| (a - b).norm() < DEGENERACY_TOL))
}

fn basis_condition(vectors: MatRef<'_, c64>) -> f64 {
    if vectors.ncols() == 0 {
        return 1.0;
    }
    match vectors.singular_values() {
        Ok(sv) => {
            let smin = sv[sv.len() - 1];
            if smin > 0.0 {
                sv[0] / smin
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

impl SpectralResult {
    fn new(
        eigenvalues: Vec<c64>,
        coefficients: CMatrix,
        kind: OperatorKind,
        dictionary: Dictionary,
        lag_time: f64,
        m: usize,
    ) -> Self {
        let degenerate = has_degeneracy(&eigenvalues);
        let ill_conditioned = basis_condition(coefficients.as_ref()) > ILL_CONDITIONED;
        Self {
            eigenvalues,
            coefficients,
            kind,
            dictionary,
            lag_time,
            m,
            degenerate,
            ill_conditioned,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn real_eigenvalues(&self, tol: f64) -> Option<Vec<f64>> {
        self.eigenvalues
            .iter()
            .map(|v| (v.im.abs() <= tol).then_some(v.re))
            .collect()
    }

    /// The first `n` eigenpairs.
    pub fn leading(&self, n: usize) -> Self {
        let n = n.min(self.len());
        let mut out = self.clone();
        out.eigenvalues.truncate(n);
        out.coefficients = self.coefficients.subcols(0, n).to_owned();
        out
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|v| v.norm()).collect()
    }

    /// `φ_ℓ(x) = ξ_ℓ* ψ(x)` for every ℓ.
    pub fn eval_all(&self, x: &[f64]) -> Result<Vec<c64>> {
        let psi = self.dictionary.eval(x)?;
        Ok(self.apply(&psi))
    }

    pub fn eval(&self, ell: usize, x: &[f64]) -> Result<c64> {
        let psi = self.dictionary.eval(x)?;
        Ok(self.apply_one(ell, &psi))
    }

    fn apply_one(&self, ell: usize, psi: &[f64]) -> c64 {
        psi.iter()
            .enumerate()
            .map(|(i, &p)| self.coefficients[(i, ell)].conj() * p)
            .sum()
    }

    fn apply(&self, psi: &[f64]) -> Vec<c64> {
        (0..self.len()).map(|l| self.apply_one(l, psi)).collect()
    }

    pub fn to_doc(&self) -> SpectralDoc {
        SpectralDoc {
            kind: self.kind,
            dictionary: self.dictionary.clone(),
            lag_time: self.lag_time,
            m: self.m,
            eigenvalues: self.eigenvalues.iter().map(|v| [v.re, v.im]).collect(),
            coefficients: (0..self.coefficients.ncols())
                .map(|l| {
                    (0..self.coefficients.nrows())
                        .map(|i| {
                            let z = self.coefficients[(i, l)];
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
            degenerate: self.degenerate,
            ill_conditioned: self.ill_conditioned,
        }
    }
}

/// Serialized form of a [`SpectralResult`]: complex numbers as `[re, im]`,
/// one coefficient vector per eigenvalue.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralDoc {
    pub kind: OperatorKind,
    pub dictionary: Dictionary,
    pub lag_time: f64,
    pub m: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub coefficients: Vec<Vec<[f64; 2]>>,
    pub degenerate: bool,
    pub ill_conditioned: bool,
}

impl SpectralDoc {
    pub fn into_result(self) -> SpectralResult {
        let k = self.coefficients.first().map_or(0, Vec::len);
        let n = self.coefficients.len();
        let coeffs = Mat::from_fn(k, n, |i, l| {
            let [re, im] = self.coefficients[l][i];
            c64::new(re, im)
        });
        SpectralResult {
            eigenvalues: self.eigenvalues.iter().map(|&[re, im]| c64::new(re, im)).collect(),
            coefficients: coeffs,
            kind: self.kind,
            dictionary: self.dictionary,
            lag_time: self.lag_time,
            m: self.m,
            degenerate: self.degenerate,
            ill_conditioned: self.ill_conditioned,
        }
    }
}

fn conjugated(mut m: CMatrix) -> CMatrix {
    for j in 0..m.ncols() {
        for z in m.col_as_slice_mut(j) {
            *z = z.conj();
        }
    }
    m
}

fn scale_columns_by_inverse(a: MatRef<'_, f64>, sigma: &[f64]) -> Matrix {
    Mat::from_fn(a.nrows(), sigma.len(), |i, j| a[(i, j)] / sigma[j])
}

/// AMUSE: whiten with the reduced SVD of `X`, diagonalize
/// `M̄ = X̃ Ỹᵀ`, and map back with `ξ = U Σ⁻¹ w`.
fn amuse(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    rel_tol: f64,
    dictionary: Dictionary,
    lag_time: f64,
) -> Result<SpectralResult> {
    let m = x.ncols();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("AMUSE needs at least 2 pairs, got {m}")));
    }
    let svd = reduced_svd(x, rel_tol)?;
    if svd.is_rank_zero() {
        return Err(Error::RankZero);
    }
    // Σ⁻¹ Uᵀ
    let whiten = scale_columns_by_inverse(svd.u.as_ref(), &svd.sigma).transpose().to_owned();
    let xt = &whiten * x;
    let yt = &whiten * y;
    let mbar = &xt * yt.transpose();
    let eig = eig_dense(mbar.as_ref(), false)?;
    let mut xi = conjugated(to_complex(whiten.transpose()) * &eig.vectors);
    for l in 0..xi.ncols() {
        normalize_phase(xi.col_as_slice_mut(l));
    }
    Ok(SpectralResult::new(eig.values, xi, OperatorKind::Tica, dictionary, lag_time, m))
}

/// TICA on raw coordinates via AMUSE.
pub fn tica_amuse(pairs: &DataPairs, rel_tol: f64) -> Result<SpectralResult> {
    amuse(
        pairs.x.as_ref(),
        pairs.y.as_ref(),
        rel_tol,
        Dictionary::Identity { dim: pairs.dim() },
        pairs.lag_time,
    )
}

/// TICA via AMUSE on transformed data, e.g. centered coordinates.
pub fn tica_amuse_features(fm: &FeatureMatrices, rel_tol: f64) -> Result<SpectralResult> {
    amuse(
        fm.psi_x.as_ref(),
        fm.psi_y.as_ref(),
        rel_tol,
        fm.dictionary.clone(),
        fm.lag_time,
    )
}

/// Eigendecomposition of `M_TICA = C0⁺ Cτ` restricted to the retained range
/// of `C0`; directions in the numerical null space of `C0` are excluded.
pub fn tica_direct(cov: &CovariancePair, rel_tol: f64) -> Result<SpectralResult> {
    let c0_svd = reduced_svd(cov.c0.as_ref(), rel_tol)?;
    if c0_svd.is_rank_zero() {
        return Err(Error::RankZero);
    }
    let m_tica = pinv(cov.c0.as_ref(), rel_tol)? * &cov.c_tau;
    let u = &c0_svd.u;
    let reduced = u.transpose() * &m_tica * u;
    let eig = eig_dense(reduced.as_ref(), false)?;
    let mut xi = conjugated(to_complex(u.as_ref()) * &eig.vectors);
    for l in 0..xi.ncols() {
        normalize_phase(xi.col_as_slice_mut(l));
    }
    Ok(SpectralResult::new(
        eig.values,
        xi,
        OperatorKind::Tica,
        cov.dictionary.clone(),
        cov.lag_time,
        cov.m,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmdVariant {
    Standard,
    Exact,
}

#[derive(Clone, Debug)]
pub struct DmdResult {
    pub eigenvalues: Vec<c64>,
    /// d×r, column ℓ is the mode for `eigenvalues[ℓ]`. Standard modes are
    /// `U w_ℓ`; exact modes are `λ⁻¹ Y V Σ⁻¹ w_ℓ`, left unnormalized.
    pub modes: CMatrix,
    /// False for exact modes whose eigenvalue vanishes.
    pub mode_defined: Vec<bool>,
    pub variant: DmdVariant,
    /// The projected matrix `M̄ = Uᵀ Y V Σ⁻¹`.
    pub reduced: Matrix,
    /// Left singular vectors of `X` spanning the projection.
    pub basis: Matrix,
    pub lag_time: f64,
}

/// The least-squares propagator `M_DMD = Y X⁺`.
pub fn dmd_matrix(pairs: &DataPairs, rel_tol: f64) -> Result<Matrix> {
    lstsq_propagator(pairs.x.as_ref(), pairs.y.as_ref(), rel_tol)
}

fn lstsq_propagator(x: MatRef<'_, f64>, y: MatRef<'_, f64>, rel_tol: f64) -> Result<Matrix> {
    let svd = reduced_svd(x, rel_tol)?;
    if svd.is_rank_zero() {
        return Err(Error::RankZero);
    }
    let yv = y * &svd.v;
    Ok(scale_columns_by_inverse(yv.as_ref(), &svd.sigma) * svd.u.transpose())
}

/// Standard or exact DMD from the compact SVD of `X`.
pub fn dmd(pairs: &DataPairs, variant: DmdVariant, rel_tol: f64) -> Result<DmdResult> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("DMD needs at least one pair".into()));
    }
    let svd = reduced_svd(pairs.x.as_ref(), rel_tol)?;
    if svd.is_rank_zero() {
        return Err(Error::RankZero);
    }
    let yvs = scale_columns_by_inverse((&pairs.y * &svd.v).as_ref(), &svd.sigma);
    let reduced = svd.u.transpose() * &yvs;
    let eig = eig_dense(reduced.as_ref(), false)?;
    let scale = reduced.norm_l2().max(f64::MIN_POSITIVE);

    let (modes, mode_defined) = match variant {
        DmdVariant::Standard => (
            to_complex(svd.u.as_ref()) * &eig.vectors,
            vec![true; eig.len()],
        ),
        DmdVariant::Exact => {
            let mut modes = to_complex(yvs.as_ref()) * &eig.vectors;
            let mut defined = Vec::with_capacity(eig.len());
            for (l, lam) in eig.values.iter().enumerate() {
                let ok = lam.norm() > 1e-12 * scale;
                let inv = if ok { lam.inv() } else { c64::new(0.0, 0.0) };
                for z in modes.col_as_slice_mut(l) {
                    *z *= inv;
                }
                defined.push(ok);
            }
            (modes, defined)
        }
    };
    Ok(DmdResult {
        eigenvalues: eig.values,
        modes,
        mode_defined,
        variant,
        reduced,
        basis: svd.u,
        lag_time: pairs.lag_time,
    })
}

/// Solves `Cτ a = λ C0 a` by whitening. Coefficient vectors are scaled so
/// that `a* C0 a = 1`. When the spectrum is real (symmetric `Cτ`) it is
/// sorted by descending value, otherwise by descending modulus.
pub fn vac(cov: &CovariancePair, rel_tol: f64) -> Result<SpectralResult> {
    let eig = generalized_sym_eig(cov.c_tau.as_ref(), cov.c0.as_ref(), rel_tol)?;
    let k = cov.k();
    let c0 = to_complex(cov.c0.as_ref());
    let mut coeffs = conjugated(eig.vectors);
    for l in 0..coeffs.ncols() {
        let a = coeffs.col(l);
        let c0a = &c0 * a;
        let q: c64 = (0..k).map(|i| a[i].conj() * c0a[i]).sum();
        let s = 1.0 / q.re.max(f64::MIN_POSITIVE).sqrt();
        for z in coeffs.col_as_slice_mut(l) {
            *z *= s;
        }
    }
    let mut values = eig.values;
    if values.iter().all(|v| v.im == 0.0) {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re));
        let reordered = Mat::from_fn(k, order.len(), |i, j| coeffs[(i, order[j])]);
        values = order.iter().map(|&i| values[i]).collect();
        coeffs = reordered;
    }
    Ok(SpectralResult::new(
        values,
        coeffs,
        OperatorKind::Vac,
        cov.dictionary.clone(),
        cov.lag_time,
        cov.m,
    ))
}

/// A finite-dimensional operator approximation on a dictionary.
#[derive(Clone, Debug)]
pub struct OperatorApprox {
    pub matrix: Matrix,
    pub kind: OperatorKind,
    pub dictionary: Dictionary,
    pub lag_time: f64,
    pub m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdmdOperator {
    Koopman,
    PerronFrobenius,
}

/// EDMD from the reduced SVD `Ψ_X = U Σ Vᵀ`:
/// Koopman `M = Ψ_Y Ψ_X⁺ = Ψ_Y V Σ⁻¹ Uᵀ`, Perron–Frobenius
/// `M̃ = (Ψ_XΨ_Yᵀ)(Ψ_XΨ_Xᵀ)⁺ = U Σ (Ψ_Y V)ᵀ U Σ⁻² Uᵀ`.
pub fn edmd(fm: &FeatureMatrices, operator: EdmdOperator, rel_tol: f64) -> Result<OperatorApprox> {
    let m = fm.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("EDMD needs at least 2 pairs, got {m}")));
    }
    let svd = reduced_svd(fm.psi_x.as_ref(), rel_tol)?;
    if svd.is_rank_zero() {
        return Err(Error::RankZero);
    }
    let p = &fm.psi_y * &svd.v; // k×r
    let (matrix, kind) = match operator {
        EdmdOperator::Koopman => (
            scale_columns_by_inverse(p.as_ref(), &svd.sigma) * svd.u.transpose(),
            OperatorKind::EdmdKoopman,
        ),
        EdmdOperator::PerronFrobenius => {
            let r = svd.rank();
            let us = Mat::from_fn(svd.u.nrows(), r, |i, j| svd.u[(i, j)] * svd.sigma[j]);
            let us2 = Mat::from_fn(svd.u.nrows(), r, |i, j| {
                svd.u[(i, j)] / (svd.sigma[j] * svd.sigma[j])
            });
            let inner = p.transpose() * &svd.u; // r×r
            (&us * &inner * us2.transpose(), OperatorKind::EdmdPerronFrobenius)
        }
    };
    Ok(OperatorApprox {
        matrix,
        kind,
        dictionary: fm.dictionary.clone(),
        lag_time: fm.lag_time,
        m,
    })
}

/// Operator matrix of the requested kind assembled directly from
/// covariances with `C0⁺`.
pub fn operator_from_covariances(
    cov: &CovariancePair,
    kind: OperatorKind,
    rel_tol: f64,
) -> Result<OperatorApprox> {
    let c0p = pinv(cov.c0.as_ref(), rel_tol)?;
    let matrix = match kind {
        OperatorKind::Tica | OperatorKind::Vac => &c0p * &cov.c_tau,
        OperatorKind::Dmd | OperatorKind::EdmdKoopman => cov.c_tau.transpose() * &c0p,
        OperatorKind::EdmdPerronFrobenius => &cov.c_tau * &c0p,
    };
    Ok(OperatorApprox {
        matrix,
        kind,
        dictionary: cov.dictionary.clone(),
        lag_time: cov.lag_time,
        m: cov.m,
    })
}

/// Eigenvalues and eigenfunction coefficients of an operator approximation.
/// Left eigenvectors are computed as right eigenvectors of the transpose.
pub fn eigenfunctions(op: &OperatorApprox) -> Result<SpectralResult> {
    let eig = if op.kind.uses_left_eigenvectors() {
        eig_dense(op.matrix.transpose(), false)?
    } else {
        eig_dense(op.matrix.as_ref(), false)?
    };
    Ok(SpectralResult::new(
        eig.values,
        conjugated(eig.vectors),
        op.kind,
        op.dictionary.clone(),
        op.lag_time,
        op.m,
    ))
}

/// Koopman modes `η = B (Ξ*)⁻¹` for the full-state observable `x = B ψ(x)`.
#[derive(Clone, Debug)]
pub struct KoopmanModes {
    /// The spectrum whose left eigenvectors form `Ξ`.
    pub spectrum: SpectralResult,
    /// d×k
    pub b: Matrix,
    /// d×k, column ℓ is `η_ℓ`.
    pub eta: CMatrix,
    /// Condition estimate of `Ξ`.
    pub condition: f64,
}

impl KoopmanModes {
    pub fn xi(&self) -> &CMatrix {
        &self.spectrum.coefficients
    }

    pub fn to_doc(&self) -> KoopmanModesDoc {
        let cplx = |m: &CMatrix| -> Vec<Vec<[f64; 2]>> {
            (0..m.ncols())
                .map(|l| (0..m.nrows()).map(|i| [m[(i, l)].re, m[(i, l)].im]).collect())
                .collect()
        };
        KoopmanModesDoc {
            spectrum: self.spectrum.to_doc(),
            b: (0..self.b.nrows())
                .map(|i| (0..self.b.ncols()).map(|j| self.b[(i, j)]).collect())
                .collect(),
            eta: cplx(&self.eta),
            condition: self.condition,
        }
    }
}

/// Serialized [`KoopmanModes`]; `eta` holds one mode per entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KoopmanModesDoc {
    pub spectrum: SpectralDoc,
    pub b: Vec<Vec<f64>>,
    pub eta: Vec<Vec<[f64; 2]>>,
    pub condition: f64,
}

pub fn koopman_modes(op: &OperatorApprox, b: &Matrix) -> Result<KoopmanModes> {
    if !matches!(op.kind, OperatorKind::EdmdKoopman | OperatorKind::Dmd) {
        return Err(Error::InvalidArgument(format!(
            "Koopman modes need a Koopman EDMD/DMD operator, got {:?}",
            op.kind
        )));
    }
    let k = op.matrix.nrows();
    if b.ncols() != k {
        return Err(Error::Dimension(format!(
            "B has {} columns but the dictionary has {k} functions",
            b.ncols()
        )));
    }
    let spectrum = eigenfunctions(op)?;
    let (inv, condition) = complex_inverse(spectrum.coefficients.adjoint().to_owned().as_ref())?;
    let eta = to_complex(b.as_ref()) * &inv;
    Ok(KoopmanModes {
        spectrum,
        b: b.clone(),
        eta,
        condition,
    })
}
