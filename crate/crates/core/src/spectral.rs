//! Timescales, lag scans, Koopman-mode prediction and the variational trace.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::basis::{evaluate, Dictionary};
use crate::data::{fmt_f64, pairs_from_trajectory, Trajectory};
use crate::error::{Error, Result};
use crate::estimators::{
    covariances, edmd, eigenfunctions, tica_amuse_features, vac, CovariancePair, EdmdOperator,
    KoopmanModes, SpectralResult,
};
use crate::linalg::Matrix;

/// Tolerance on `Uᵀ C0 U = I` accepted by [`rayleigh_trace`].
pub const ORTHONORMAL_TOL: f64 = 1e-6;
/// Moduli this close to one count as stationary; rounding can leave the
/// invariant eigenvalue a few ulps below 1.
pub const STATIONARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Timescale {
    Finite(f64),
    /// `|λ| ≥ 1` up to [`STATIONARY_TOL`]: the process does not relax along this direction.
    Stationary,
    /// `λ = 0`: relaxation within a single lag.
    Instantaneous,
}

impl Timescale {
    pub fn from_eigenvalue(lambda: c64, lag_time: f64) -> Self {
        let r = lambda.norm();
        if r >= 1.0 - STATIONARY_TOL {
            Self::Stationary
        } else if r == 0.0 {
            Self::Instantaneous
        } else {
            Self::Finite(-lag_time / r.ln())
        }
    }

    /// `∞` for stationary, `0` for instantaneous.
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(t) => t,
            Self::Stationary => f64::INFINITY,
            Self::Instantaneous => 0.0,
        }
    }

    pub fn flag(self) -> &'static str {
        match self {
            Self::Finite(_) => "finite",
            Self::Stationary => "stationary",
            Self::Instantaneous => "instantaneous",
        }
    }
}

/// `t_m = −τ / ln|λ_m|` for each eigenvalue.
pub fn implied_timescales(eigenvalues: &[c64], lag_time: f64) -> Result<Vec<Timescale>> {
    if !(lag_time > 0.0 && lag_time.is_finite()) {
        return Err(Error::InvalidArgument(format!("lag time must be positive, got {lag_time}")));
    }
    Ok(eigenvalues
        .iter()
        .map(|&l| Timescale::from_eigenvalue(l, lag_time))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    Tica,
    Vac,
    EdmdKoopman,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LagEntry {
    pub lag_steps: usize,
    pub lag_time: f64,
    pub moduli: Vec<f64>,
    pub timescales: Vec<Timescale>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TimescaleReport {
    pub entries: Vec<LagEntry>,
}

impl TimescaleReport {
    pub fn push(&mut self, lag_steps: usize, lag_time: f64, eigenvalues: &[c64]) -> Result<()> {
        let mut moduli: Vec<f64> = eigenvalues.iter().map(|v| v.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        let timescales = moduli
            .iter()
            .map(|&r| Timescale::from_eigenvalue(c64::new(r, 0.0), lag_time))
            .collect();
        self.entries.push(LagEntry {
            lag_steps,
            lag_time,
            moduli,
            timescales,
        });
        Ok(())
    }

    /// Implied timescale `t_m` (1-based, descending modulus) at every lag.
    pub fn series(&self, m: usize) -> Vec<Option<Timescale>> {
        self.entries
            .iter()
            .map(|e| m.checked_sub(1).and_then(|i| e.timescales.get(i).copied()))
            .collect()
    }

    /// Long format, one row per lag and eigenvalue:
    /// `lag_time,m,lambda_mod,t_m,flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag_time,m,lambda_mod,t_m,flag\n");
        for e in &self.entries {
            for (i, (r, t)) in e.moduli.iter().zip(&e.timescales).enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f64(e.lag_time),
                    i + 1,
                    fmt_f64(*r),
                    fmt_f64(t.value()),
                    t.flag()
                ));
            }
        }
        out
    }
}

/// Spectrum at a single lag with one of the covariance-based estimators.
pub fn estimate_at_lag(
    traj: &Trajectory,
    dict: &Dictionary,
    lag_steps: usize,
    method: ScanMethod,
    symmetrize: bool,
    rel_tol: f64,
) -> Result<SpectralResult> {
    let pairs = pairs_from_trajectory(traj, lag_steps)?;
    let fm = evaluate(dict, &pairs)?;
    match method {
        ScanMethod::Tica => tica_amuse_features(&fm, rel_tol),
        ScanMethod::Vac => vac(&covariances(&fm, symmetrize)?, rel_tol),
        ScanMethod::EdmdKoopman => eigenfunctions(&edmd(&fm, EdmdOperator::Koopman, rel_tol)?),
    }
}

/// Implied timescales over a list of lags (in steps). Fails, naming the lag,
/// if a lag leaves fewer than two pairs.
pub fn lag_scan(
    traj: &Trajectory,
    dict: &Dictionary,
    lags: &[usize],
    method: ScanMethod,
    symmetrize: bool,
    rel_tol: f64,
) -> Result<TimescaleReport> {
    let mut report = TimescaleReport::default();
    for &lag in lags {
        if lag == 0 || lag + 2 > traj.len() {
            return Err(Error::TooShort {
                len: traj.len(),
                lag,
            });
        }
        let spec = estimate_at_lag(traj, dict, lag, method, symmetrize, rel_tol)?;
        report.push(lag, spec.lag_time, &spec.eigenvalues)?;
    }
    Ok(report)
}

/// `x_n ≈ Σ_ℓ λ_ℓⁿ φ_ℓ(x) η_ℓ` for `n = 0..=steps`. `spec` must be the
/// spectrum the modes were computed from.
pub fn predict(
    modes: &KoopmanModes,
    spec: &SpectralResult,
    x: &[f64],
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    if spec.eigenvalues != modes.spectrum.eigenvalues
        || spec.coefficients != modes.spectrum.coefficients
    {
        return Err(Error::Provenance(
            "eigenfunctions do not belong to these Koopman modes".into(),
        ));
    }
    let phi = spec.eval_all(x)?;
    let d = modes.eta.nrows();
    let mut weights = phi;
    let mut out = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        if n > 0 {
            for (w, l) in weights.iter_mut().zip(&spec.eigenvalues) {
                *w *= l;
            }
        }
        out.push(
            (0..d)
                .map(|i| {
                    weights
                        .iter()
                        .enumerate()
                        .map(|(l, w)| modes.eta[(i, l)] * w)
                        .sum::<c64>()
                        .re
                })
                .collect(),
        );
    }
    Ok(out)
}

/// `tr(Uᵀ Cτ U)` for k×M coefficients `U` that are `C0`-orthonormal.
pub fn rayleigh_trace(coeffs: &Matrix, cov: &CovariancePair) -> Result<f64> {
    if coeffs.nrows() != cov.k() {
        return Err(Error::Dimension(format!(
            "coefficients have {} rows, covariances are {}x{}",
            coeffs.nrows(),
            cov.k(),
            cov.k()
        )));
    }
    let gram = coeffs.transpose() * &cov.c0 * coeffs;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let expect = if i == j { 1.0 } else { 0.0 };
            if (gram[(i, j)] - expect).abs() > ORTHONORMAL_TOL {
                return Err(Error::NotOrthonormal {
                    i,
                    j,
                    value: gram[(i, j)],
                });
            }
        }
    }
    let tau = coeffs.transpose() * &cov.c_tau * coeffs;
    Ok((0..tau.nrows()).map(|i| tau[(i, i)]).sum())
}

/// Tensor grid with inclusive endpoints, first axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != counts.len() {
            return Err(Error::Dimension("grid bounds and counts must have equal length".into()));
        }
        for ((lo, hi), n) in lower.iter().zip(&upper).zip(&counts) {
            if *n == 0 || !(lo.is_finite() && hi.is_finite()) || (*n > 1 && lo >= hi) {
                return Err(Error::InvalidArgument(format!("bad grid axis {lo}:{hi}:{n}")));
            }
        }
        Ok(Self { lower, upper, counts })
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, a: usize) -> Vec<f64> {
        let (lo, hi, n) = (self.lower[a], self.upper[a], self.counts[a]);
        if n == 1 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.axis(a)).collect();
        (0..self.len())
            .map(|mut flat| {
                axes.iter()
                    .map(|ax| {
                        let v = ax[flat % ax.len()];
                        flat /= ax.len();
                        v
                    })
                    .collect()
            })
            .collect()
    }
}

/// CSV with the grid coordinates followed by real and imaginary parts of
/// each eigenfunction.
pub fn eigenfunctions_on_grid_csv(spec: &SpectralResult, grid: &Grid) -> Result<String> {
    let mut out = String::new();
    let mut cols: Vec<String> = (1..=grid.dim()).map(|i| format!("x{i}")).collect();
    for l in 1..=spec.len() {
        cols.push(format!("re_phi{l}"));
        cols.push(format!("im_phi{l}"));
    }
    out.push_str(&cols.join(","));
    out.push('\n');
    for p in grid.points() {
        let vals = spec.eval_all(&p)?;
        let mut row: Vec<String> = p.iter().map(|&v| fmt_f64(v)).collect();
        for v in vals {
            row.push(fmt_f64(v.re));
            row.push(fmt_f64(v.im));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}
