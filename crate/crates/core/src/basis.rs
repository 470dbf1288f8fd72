//! Dictionaries of basis functions `ψ = [ψ_1, …, ψ_k]ᵀ` and the transformed
//! data matrices `Ψ_X`, `Ψ_Y`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::data::DataPairs;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A finite basis set.
///
/// Grids (indicator boxes and RBF centers) are enumerated with the first
/// axis varying fastest. Monomials of total degree ≤ `max_degree` are in
/// graded lexicographic order with the constant first, e.g. for two
/// variables and degree 2: `1, x, y, x², xy, y²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dictionary {
    Identity {
        dim: usize,
    },
    /// Coordinates minus their mean over the X snapshots. `mean` is filled
    /// in by [`evaluate`] and reused for every later evaluation.
    IdentityCentered {
        dim: usize,
        mean: Option<Vec<f64>>,
    },
    Monomials {
        dim: usize,
        max_degree: usize,
    },
    /// Indicator functions of an equidistant box partition. Boxes are
    /// half-open `[a, b)` per axis except the last, which is closed.
    IndicatorGrid {
        lower: Vec<f64>,
        upper: Vec<f64>,
        counts: Vec<usize>,
    },
    /// `exp(−‖x − c‖² / (2 h²))` for each center `c`.
    GaussianRbf {
        centers: Vec<Vec<f64>>,
        bandwidth: f64,
    },
}

fn check_box(lower: &[f64], upper: &[f64], counts: &[usize]) -> Result<()> {
    if lower.is_empty() || lower.len() != upper.len() || lower.len() != counts.len() {
        return Err(Error::Dimension(format!(
            "grid bounds/counts lengths disagree: {}, {}, {}",
            lower.len(),
            upper.len(),
            counts.len()
        )));
    }
    for a in 0..lower.len() {
        if counts[a] == 0 {
            return Err(Error::InvalidArgument(format!("axis {a} has zero boxes")));
        }
        if !(upper[a] > lower[a]) {
            return Err(Error::InvalidArgument(format!(
                "axis {a}: upper {} must exceed lower {}",
                upper[a], lower[a]
            )));
        }
    }
    Ok(())
}

/// Exponent vectors of all monomials in `dim` variables with total degree
/// at most `max_degree`, graded lexicographic, constant first.
pub fn monomial_exponents(dim: usize, max_degree: usize) -> Vec<Vec<usize>> {
    fn fill(prefix: &mut Vec<usize>, left: usize, slots: usize, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            fill(prefix, left - e, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=max_degree {
        fill(&mut Vec::with_capacity(dim), total, dim, &mut out);
    }
    out
}

impl Dictionary {
    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self::Identity { dim })
    }

    pub fn identity_centered(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self::IdentityCentered { dim, mean: None })
    }

    pub fn monomials(dim: usize, max_degree: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self::Monomials { dim, max_degree })
    }

    pub fn indicator_grid(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        check_box(&lower, &upper, &counts)?;
        Ok(Self::IndicatorGrid {
            lower,
            upper,
            counts,
        })
    }

    pub fn gaussian_rbf(centers: Vec<Vec<f64>>, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let dim = centers.first().map_or(0, Vec::len);
        if dim == 0 || centers.iter().any(|c| c.len() != dim) {
            return Err(Error::Dimension("RBF centers must share a positive dimension".into()));
        }
        Ok(Self::GaussianRbf { centers, bandwidth })
    }

    /// Input dimension `d`.
    pub fn dim(&self) -> usize {
        match self {
            Self::Identity { dim } | Self::IdentityCentered { dim, .. } | Self::Monomials { dim, .. } => {
                *dim
            }
            Self::IndicatorGrid { lower, .. } => lower.len(),
            Self::GaussianRbf { centers, .. } => centers[0].len(),
        }
    }

    /// Number of basis functions `k`.
    pub fn len(&self) -> usize {
        match self {
            Self::Identity { dim } | Self::IdentityCentered { dim, .. } => *dim,
            Self::Monomials { dim, max_degree } => {
                // C(dim + degree, degree)
                (1..=*max_degree).fold(1usize, |acc, j| acc * (dim + j) / j)
            }
            Self::IndicatorGrid { counts, .. } => counts.iter().product(),
            Self::GaussianRbf { centers, .. } => centers.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity { .. } => "identity",
            Self::IdentityCentered { .. } => "identity_centered",
            Self::Monomials { .. } => "monomials",
            Self::IndicatorGrid { .. } => "indicator_grid",
            Self::GaussianRbf { .. } => "gaussian_rbf",
        }
    }

    /// Index of the box containing `x`.
    pub fn box_index(&self, x: &[f64]) -> Result<usize> {
        let Self::IndicatorGrid {
            lower,
            upper,
            counts,
        } = self
        else {
            return Err(Error::InvalidArgument("box_index needs an indicator grid".into()));
        };
        let mut index = 0;
        let mut stride = 1;
        for a in 0..lower.len() {
            if !(x[a] >= lower[a] && x[a] <= upper[a]) {
                return Err(Error::OutsideDomain { point: x.to_vec() });
            }
            let width = (upper[a] - lower[a]) / counts[a] as f64;
            let cell = (((x[a] - lower[a]) / width).floor() as usize).min(counts[a] - 1);
            index += cell * stride;
            stride *= counts[a];
        }
        Ok(index)
    }

    /// Returns a copy with centering statistics fitted on the columns of
    /// `x` (d×m) if this is an unfitted `IdentityCentered`; otherwise a clone.
    pub fn fitted(&self, x: &Matrix) -> Result<Self> {
        match self {
            Self::IdentityCentered { dim, mean: None } => {
                if x.ncols() == 0 {
                    return Err(Error::InvalidArgument("cannot center on zero snapshots".into()));
                }
                let m = x.ncols() as f64;
                let mean = (0..*dim)
                    .map(|i| (0..x.ncols()).map(|j| x[(i, j)]).sum::<f64>() / m)
                    .collect();
                Ok(Self::IdentityCentered {
                    dim: *dim,
                    mean: Some(mean),
                })
            }
            other => Ok(other.clone()),
        }
    }

    /// Evaluates `ψ(x)` into `out` (length k).
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has dimension {} but the dictionary expects {}",
                x.len(),
                self.dim()
            )));
        }
        match self {
            Self::Identity { .. } => out.copy_from_slice(x),
            Self::IdentityCentered { mean, .. } => {
                let mean = mean.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("centered dictionary has not been fitted".into())
                })?;
                for ((o, xi), mi) in out.iter_mut().zip(x).zip(mean) {
                    *o = xi - mi;
                }
            }
            Self::Monomials { dim, max_degree } => {
                let powers: Vec<Vec<f64>> = x
                    .iter()
                    .map(|&xi| {
                        let mut p = Vec::with_capacity(max_degree + 1);
                        let mut acc = 1.0;
                        for _ in 0..=*max_degree {
                            p.push(acc);
                            acc *= xi;
                        }
                        p
                    })
                    .collect();
                for (o, exps) in out.iter_mut().zip(monomial_exponents(*dim, *max_degree)) {
                    *o = exps.iter().enumerate().map(|(a, &e)| powers[a][e]).product();
                }
            }
            Self::IndicatorGrid { .. } => {
                let idx = self.box_index(x)?;
                out.fill(0.0);
                out[idx] = 1.0;
            }
            Self::GaussianRbf { centers, bandwidth } => {
                let scale = 1.0 / (2.0 * bandwidth * bandwidth);
                for (o, c) in out.iter_mut().zip(centers) {
                    let r2: f64 = c.iter().zip(x).map(|(ci, xi)| (xi - ci) * (xi - ci)).sum();
                    *o = (-r2 * scale).exp();
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// `Ψ` (k×n) for the columns of `points` (d×n).
    pub fn eval_columns(&self, points: &Matrix) -> Result<Matrix> {
        let (d, n, k) = (points.nrows(), points.ncols(), self.len());
        if d != self.dim() {
            return Err(Error::Dimension(format!(
                "data dimension {d} but dictionary dimension {}",
                self.dim()
            )));
        }
        // Monomials: avoid re-enumerating exponents per point.
        if let Self::Monomials { dim, max_degree } = self {
            let exps = monomial_exponents(*dim, *max_degree);
            let mut out = Mat::zeros(k, n);
            let mut powers = vec![0.0; d * (max_degree + 1)];
            for j in 0..n {
                for a in 0..d {
                    let mut acc = 1.0;
                    for e in 0..=*max_degree {
                        powers[a * (max_degree + 1) + e] = acc;
                        acc *= points[(a, j)];
                    }
                }
                for (i, e) in exps.iter().enumerate() {
                    out[(i, j)] = e
                        .iter()
                        .enumerate()
                        .map(|(a, &p)| powers[a * (max_degree + 1) + p])
                        .product();
                }
            }
            return Ok(out);
        }
        let mut out = Mat::zeros(k, n);
        let mut x = vec![0.0; d];
        let mut buf = vec![0.0; k];
        for j in 0..n {
            for (a, xa) in x.iter_mut().enumerate() {
                *xa = points[(a, j)];
            }
            self.eval_into(&x, &mut buf)?;
            for (i, &v) in buf.iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

/// Transformed data matrices `Ψ_X`, `Ψ_Y` (k×m) and the dictionary that
/// produced them (fitted, when it carries statistics).
#[derive(Clone, Debug)]
pub struct FeatureMatrices {
    pub psi_x: Matrix,
    pub psi_y: Matrix,
    pub dictionary: Dictionary,
    pub lag_time: f64,
}

impl FeatureMatrices {
    pub fn len(&self) -> usize {
        self.psi_x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn k(&self) -> usize {
        self.psi_x.nrows()
    }
}

/// `Ψ_X[i, j] = ψ_i(x_j)` and `Ψ_Y[i, j] = ψ_i(y_j)`.
pub fn evaluate(dict: &Dictionary, pairs: &DataPairs) -> Result<FeatureMatrices> {
    if dict.dim() != pairs.dim() {
        return Err(Error::Dimension(format!(
            "dictionary dimension {} but data dimension {}",
            dict.dim(),
            pairs.dim()
        )));
    }
    let fitted = dict.fitted(&pairs.x)?;
    Ok(FeatureMatrices {
        psi_x: fitted.eval_columns(&pairs.x)?,
        psi_y: fitted.eval_columns(&pairs.y)?,
        dictionary: fitted,
        lag_time: pairs.lag_time,
    })
}

/// `B` (d×k) with `x = B ψ(x)` identically.
pub fn full_state_matrix(dict: &Dictionary) -> Result<Matrix> {
    match dict {
        Dictionary::Identity { dim } => Ok(Mat::identity(*dim, *dim)),
        Dictionary::Monomials { dim, max_degree } if *max_degree >= 1 => {
            let exps = monomial_exponents(*dim, *max_degree);
            let mut b = Mat::zeros(*dim, exps.len());
            for (col, e) in exps.iter().enumerate() {
                if e.iter().sum::<usize>() == 1 {
                    let axis = e.iter().position(|&p| p == 1).expect("degree-one monomial");
                    b[(axis, col)] = 1.0;
                }
            }
            Ok(b)
        }
        other => Err(Error::Unrepresentable(other.name().into())),
    }
}

/// Diagonal of one grid cell, the default RBF bandwidth for a center grid.
pub fn default_rbf_bandwidth(lower: &[f64], upper: &[f64], counts: &[usize]) -> f64 {
    lower
        .iter()
        .zip(upper)
        .zip(counts)
        .map(|((lo, hi), &n)| ((hi - lo) / n as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Gaussian RBFs centered at the midpoints of an equidistant box grid.
pub fn make_rbf_grid(lower: &[f64], upper: &[f64], counts: &[usize], bandwidth: f64) -> Result<Dictionary> {
    check_box(lower, upper, counts)?;
    let total: usize = counts.iter().product();
    let mut centers = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let c = (0..lower.len())
            .map(|a| {
                let cell = rest % counts[a];
                rest /= counts[a];
                let width = (upper[a] - lower[a]) / counts[a] as f64;
                lower[a] + (cell as f64 + 0.5) * width
            })
            .collect();
        centers.push(c);
    }
    Dictionary::gaussian_rbf(centers, bandwidth)
}
