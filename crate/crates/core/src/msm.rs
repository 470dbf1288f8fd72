//! k-means discretization and Markov state models.

use faer::{c64, Mat};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::fmt_f64;
use crate::error::{Error, Result};
use crate::linalg::{eig_dense, Matrix};
use crate::simulate::stream_rng;
use crate::spectral::TimescaleReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub centers: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties go to the lowest index.
pub fn nearest(centers: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

pub fn assign(centers: &[Vec<f64>], points: &[Vec<f64>]) -> Vec<usize> {
    points.iter().map(|p| nearest(centers, p).0).collect()
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn centers_csv(&self) -> String {
        let d = self.centers.first().map_or(0, Vec::len);
        let mut out: String = (1..=d).map(|i| format!("c{i}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for c in &self.centers {
            out.push_str(&c.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

fn kmeans_pp(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0);
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = d2.iter().rposition(|&v| v > 0.0).unwrap_or(0);
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // all remaining points coincide with chosen centers
            rng.random_range(0..points.len())
        };
        let c = points[next].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

/// Lloyd iterations from a k-means++ seeding, until the assignment stops
/// changing or `max_iter` is reached. Empty clusters keep their center.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the number of points ({})",
            points.len()
        )));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::Dimension("points have unequal dimension".into()));
    }
    let mut centers = kmeans_pp(points, k, seed);
    let mut assignments = assign(&centers, points);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for ((c, s), &n) in centers.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                *c = s.into_iter().map(|v| v / n as f64).collect();
            }
        }
        let next = assign(&centers, points);
        if next == assignments {
            break;
        }
        assignments = next;
    }
    let inertia = points
        .iter()
        .zip(&assignments)
        .map(|(p, &a)| sq_dist(p, &centers[a]))
        .sum();
    Ok(Clustering {
        centers,
        assignments,
        inertia,
        iterations,
    })
}

#[derive(Clone, Debug)]
pub struct MsmModel {
    /// n×n transition counts.
    pub counts: Vec<Vec<u64>>,
    /// Row-normalized counts; rows of unvisited states are zero.
    pub transition_matrix: Matrix,
    pub lag_steps: usize,
    pub symmetrized: bool,
    /// States with at least one outgoing count.
    pub visited: Vec<bool>,
}

/// Serialized [`MsmModel`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MsmDoc {
    pub lag_steps: usize,
    pub symmetrized: bool,
    pub counts: Vec<Vec<u64>>,
    pub transition_matrix: Vec<Vec<f64>>,
    pub visited: Vec<bool>,
    pub eigenvalues: Vec<[f64; 2]>,
}

impl MsmModel {
    pub fn n_states(&self) -> usize {
        self.counts.len()
    }

    pub fn visited_states(&self) -> Vec<usize> {
        (0..self.n_states()).filter(|&i| self.visited[i]).collect()
    }

    /// Count-based stationary estimate `π̂_i = Σ_j c_ij / Σ c`.
    pub fn count_stationary(&self) -> Vec<f64> {
        let rows: Vec<f64> = self.counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
        let total: f64 = rows.iter().sum();
        rows.into_iter().map(|r| r / total).collect()
    }

    /// Spectrum of the transition matrix restricted to visited states,
    /// sorted by descending modulus.
    pub fn eigenvalues(&self) -> Result<Vec<c64>> {
        let idx = self.visited_states();
        if idx.is_empty() {
            return Err(Error::InvalidArgument("no visited states".into()));
        }
        let sub = Mat::from_fn(idx.len(), idx.len(), |i, j| self.transition_matrix[(idx[i], idx[j])]);
        Ok(eig_dense(sub.as_ref(), false)?.values)
    }

    pub fn to_doc(&self) -> Result<MsmDoc> {
        let n = self.n_states();
        Ok(MsmDoc {
            lag_steps: self.lag_steps,
            symmetrized: self.symmetrized,
            counts: self.counts.clone(),
            transition_matrix: (0..n)
                .map(|i| (0..n).map(|j| self.transition_matrix[(i, j)]).collect())
                .collect(),
            visited: self.visited.clone(),
            eigenvalues: self.eigenvalues()?.iter().map(|v| [v.re, v.im]).collect(),
        })
    }
}

/// Sliding-window transition counts at `lag_steps`, optionally adding the
/// time-reversed counts, then row normalization.
pub fn msm_estimate(assignments: &[usize], lag_steps: usize, symmetrize: bool) -> Result<MsmModel> {
    msm_estimate_with_states(assignments, None, lag_steps, symmetrize)
}

/// As [`msm_estimate`] with an explicit number of states.
pub fn msm_estimate_with_states(
    assignments: &[usize],
    n_states: Option<usize>,
    lag_steps: usize,
    symmetrize: bool,
) -> Result<MsmModel> {
    if lag_steps == 0 {
        return Err(Error::InvalidArgument("lag must be at least one step".into()));
    }
    if assignments.len() <= lag_steps {
        return Err(Error::TooShort {
            len: assignments.len(),
            lag: lag_steps,
        });
    }
    let max = *assignments.iter().max().expect("non-empty");
    let n = n_states.unwrap_or(max + 1);
    if max >= n {
        return Err(Error::InvalidArgument(format!(
            "state {max} out of range for {n} states"
        )));
    }
    let mut counts = vec![vec![0u64; n]; n];
    for w in assignments.windows(lag_steps + 1) {
        let (i, j) = (w[0], w[lag_steps]);
        counts[i][j] += 1;
        if symmetrize {
            counts[j][i] += 1;
        }
    }
    let rows: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let transition_matrix = Mat::from_fn(n, n, |i, j| {
        if rows[i] == 0 {
            0.0
        } else {
            counts[i][j] as f64 / rows[i] as f64
        }
    });
    Ok(MsmModel {
        counts,
        transition_matrix,
        lag_steps,
        symmetrized: symmetrize,
        visited: rows.iter().map(|&r| r > 0).collect(),
    })
}

/// Smallest `M` with `Σ_{ℓ≤M} λ_ℓ² ≥ threshold · Σ_ℓ λ_ℓ²`, in the given order.
pub fn kinetic_variance_dimension(eigenvalues: &[f64], threshold: f64) -> Result<usize> {
    if eigenvalues.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must be in (0, 1], got {threshold}")));
    }
    let total: f64 = eigenvalues.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return Err(Error::InvalidArgument("all eigenvalues are zero".into()));
    }
    let mut acc = 0.0;
    for (i, v) in eigenvalues.iter().enumerate() {
        acc += v * v;
        if acc >= threshold * total {
            return Ok(i + 1);
        }
    }
    Ok(eigenvalues.len())
}

/// MSM implied timescales at each lag (in steps of `tau_unit`).
pub fn msm_timescale_convergence(
    assignments: &[usize],
    lags: &[usize],
    tau_unit: f64,
    symmetrize: bool,
) -> Result<TimescaleReport> {
    let n = assignments.iter().max().map(|m| m + 1);
    let mut report = TimescaleReport::default();
    for &lag in lags {
        let model = msm_estimate_with_states(assignments, n, lag, symmetrize)?;
        report.push(lag, lag as f64 * tau_unit, &model.eigenvalues()?)?;
    }
    Ok(report)
}
