//! Trajectories and paired snapshot matrices.
//!
//! Snapshots are stored column-wise: `X = [x_1 … x_m]` is d×m. Several
//! trajectories are combined by concatenating their pair sets, never their
//! raw states, so no pair straddles the seam between two runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A uniformly sampled trajectory `z_0, z_1, …` with sampling interval `step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dim: usize,
    step: f64,
    states: Vec<f64>,
}

impl Trajectory {
    pub fn new(dim: usize, step: f64) -> Result<Self> {
        Self::from_flat(dim, step, Vec::new())
    }

    /// Builds a trajectory from states stored back to back.
    pub fn from_flat(dim: usize, step: f64, states: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        if states.len() % dim != 0 {
            return Err(Error::Dimension(format!(
                "{} values do not split into states of dimension {dim}",
                states.len()
            )));
        }
        Ok(Self { dim, step, states })
    }

    pub fn from_states(step: f64, states: &[Vec<f64>]) -> Result<Self> {
        let dim = states.first().map_or(1, Vec::len);
        let mut flat = Vec::with_capacity(dim * states.len());
        for (i, s) in states.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::Dimension(format!(
                    "state {i} has dimension {} but the first has {dim}",
                    s.len()
                )));
            }
            flat.extend_from_slice(s);
        }
        Self::from_flat(dim, step, flat)
    }

    pub fn push(&mut self, state: &[f64]) {
        assert_eq!(state.len(), self.dim, "state dimension mismatch");
        self.states.extend_from_slice(state);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.states
    }

    /// The d×n matrix whose columns are the states.
    pub fn to_matrix(&self) -> Matrix {
        Mat::from_fn(self.dim, self.len(), |i, j| self.states[j * self.dim + i])
    }
}

/// Paired snapshot matrices `X`, `Y` with `y_i` observed one lag after `x_i`.
#[derive(Clone, Debug)]
pub struct DataPairs {
    pub x: Matrix,
    pub y: Matrix,
    /// Lag in sampling steps, when the pairs came from uniformly sampled data.
    pub lag_steps: Option<usize>,
    pub lag_time: f64,
}

impl DataPairs {
    pub fn empty(dim: usize, lag_time: f64) -> Self {
        Self {
            x: Mat::zeros(dim, 0),
            y: Mat::zeros(dim, 0),
            lag_steps: None,
            lag_time,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    /// Number of pairs `m`.
    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_lag_time(lag_time: f64) -> Result<()> {
    if lag_time > 0.0 && lag_time.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lag time must be positive, got {lag_time}")))
    }
}

/// `X = [z_0 … z_{m−1}]`, `Y = [z_{n} … z_{n+m−1}]` with `m = len − n`.
pub fn pairs_from_trajectory(traj: &Trajectory, lag_steps: usize) -> Result<DataPairs> {
    if lag_steps == 0 {
        return Err(Error::InvalidArgument("lag must be at least one step".into()));
    }
    if traj.len() <= lag_steps {
        return Err(Error::TooShort {
            len: traj.len(),
            lag: lag_steps,
        });
    }
    let m = traj.len() - lag_steps;
    let d = traj.dim();
    let flat = traj.as_flat();
    Ok(DataPairs {
        x: Mat::from_fn(d, m, |i, j| flat[j * d + i]),
        y: Mat::from_fn(d, m, |i, j| flat[(j + lag_steps) * d + i]),
        lag_steps: Some(lag_steps),
        lag_time: lag_steps as f64 * traj.step(),
    })
}

/// Assembles explicit snapshot pairs column-wise in the given order.
pub fn pairs_from_snapshots(xs: &[Vec<f64>], ys: &[Vec<f64>], lag_time: f64) -> Result<DataPairs> {
    check_lag_time(lag_time)?;
    if xs.len() != ys.len() {
        return Err(Error::Dimension(format!(
            "{} x snapshots but {} y snapshots",
            xs.len(),
            ys.len()
        )));
    }
    let d = xs.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::InvalidArgument("need at least one non-empty snapshot".into()));
    }
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        if x.len() != d || y.len() != d {
            return Err(Error::Dimension(format!(
                "pair {i} has dimensions ({}, {}), expected {d}",
                x.len(),
                y.len()
            )));
        }
    }
    Ok(DataPairs {
        x: Mat::from_fn(d, xs.len(), |i, j| xs[j][i]),
        y: Mat::from_fn(d, ys.len(), |i, j| ys[j][i]),
        lag_steps: None,
        lag_time,
    })
}

/// Column-wise concatenation of two pair sets with equal dimension and lag.
pub fn concat(a: &DataPairs, b: &DataPairs) -> Result<DataPairs> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "cannot concatenate pairs of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.lag_time != b.lag_time {
        return Err(Error::InvalidArgument(format!(
            "cannot concatenate pairs with lag times {} and {}",
            a.lag_time, b.lag_time
        )));
    }
    let (ma, mb, d) = (a.len(), b.len(), a.dim());
    let pick = |left: &Matrix, right: &Matrix| {
        Mat::from_fn(d, ma + mb, |i, j| {
            if j < ma {
                left[(i, j)]
            } else {
                right[(i, j - ma)]
            }
        })
    };
    let lag_steps = match (a.lag_steps, b.lag_steps) {
        (Some(p), Some(q)) if p == q => Some(p),
        (p, None) if b.is_empty() => p,
        (None, q) if a.is_empty() => q,
        _ => None,
    };
    Ok(DataPairs {
        x: pick(&a.x, &b.x),
        y: pick(&a.y, &b.y),
        lag_steps,
        lag_time: a.lag_time,
    })
}

/// Formats a value with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses comma-separated rows of reals. Blank lines are skipped and a
/// leading `#` line is a header; returns the header fields (if any) and rows.
pub fn parse_csv_rows(text: &str) -> Result<(Option<Vec<String>>, Vec<Vec<f64>>)> {
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if rows.is_empty() && header.is_none() {
                header = Some(h.split(',').map(|s| s.trim().to_string()).collect());
                continue;
            }
            return Err(Error::Parse {
                line: line_no,
                msg: "header line must precede the data".into(),
            });
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("`{}` is not a number", f.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn parse_trajectory_csv(text: &str, step: f64) -> Result<Trajectory> {
    let (_, rows) = parse_csv_rows(text)?;
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no data rows".into(),
        });
    }
    Trajectory::from_states(step, &rows)
}

/// Reads a trajectory: one state per line, comma-separated, optional
/// `#`-prefixed header.
pub fn load_trajectory_csv(path: impl AsRef<Path>, step: f64) -> Result<Trajectory> {
    let text = fs::read_to_string(path)?;
    parse_trajectory_csv(&text, step)
}

pub fn trajectory_to_csv(traj: &Trajectory, header: Option<&[&str]>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        let _ = writeln!(out, "#{}", h.join(","));
    }
    for s in traj.states() {
        let fields: Vec<String> = s.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

pub fn save_trajectory_csv(
    traj: &Trajectory,
    path: impl AsRef<Path>,
    header: Option<&[&str]>,
) -> Result<()> {
    fs::write(path, trajectory_to_csv(traj, header))?;
    Ok(())
}
