//! Three operations for the static page in `web/`. Each takes plain numbers
//! and returns a JSON string; the `*_data` functions behind them are plain
//! Rust and are what the tests call.

use serde::Serialize;
use transop::basis::{evaluate, make_rbf_grid, default_rbf_bandwidth, Dictionary};
use transop::data::pairs_from_snapshots;
use transop::estimators::{edmd, eigenfunctions, EdmdOperator, SpectralResult};
use transop::simulate::{
    double_gyre, integrate_pairs, ou_oracle, ou_propagate, ou_sample_path, uniform_points,
    OuParams,
};
use transop::spectral::{lag_scan, ScanMethod};
use wasm_bindgen::prelude::*;

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Serialize)]
pub struct OuEigenfunctions {
    pub x: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub analytic_eigenvalues: Vec<f64>,
    /// `estimated[ℓ][i]` is φ_{ℓ+1} at `x[i]`, sign-aligned with the oracle
    /// and scaled to unit RMS over the grid.
    pub estimated: Vec<Vec<f64>>,
    pub analytic: Vec<Vec<f64>>,
    pub relative_l2_error: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct OuTimescales {
    pub lag_times: Vec<f64>,
    /// Slowest implied timescale per lag; `None` if it did not resolve.
    pub estimated: Vec<Option<f64>>,
    pub analytic: f64,
}

#[derive(Debug, Serialize)]
pub struct GyreField {
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `y` outer, over cell centers of [0,2]x[0,1].
    pub phi2: Vec<f64>,
    pub lambda: Vec<[f64; 2]>,
    /// Share of cells where the sign of φ₂ matches the side of x = 1.
    pub split: f64,
}

fn unit_rms(v: &mut [f64]) {
    let rms = (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
    if rms > 0.0 {
        v.iter_mut().for_each(|a| *a /= rms);
    }
}

fn real_parts(s: &SpectralResult, ell: usize, points: &[f64]) -> Result<Vec<f64>, String> {
    points
        .iter()
        .map(|&x| s.eval(ell, &[x]).map(|z| z.re).map_err(|e| e.to_string()))
        .collect()
}

/// EDMD-Koopman with monomials up to `degree` on `n_points` uniform starts in
/// [−2, 2], propagated exactly by the OU process; the first `n_eigs`
/// eigenfunctions against the Hermite oracle on 200 grid points.
pub fn ou_eigenfunctions_data(
    alpha: f64,
    diff: f64,
    tau: f64,
    n_points: usize,
    degree: usize,
    n_eigs: usize,
    seed: u64,
) -> Result<OuEigenfunctions, String> {
    let p = OuParams::new(alpha, diff).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = uniform_points(&[-2.0], &[2.0], n_points, seed).into_iter().map(|v| v[0]).collect();
    let ys = ou_propagate(&p, &xs, tau, seed.wrapping_add(1));
    let wrap = |v: &[f64]| v.iter().map(|&a| vec![a]).collect::<Vec<_>>();
    let pairs = pairs_from_snapshots(&wrap(&xs), &wrap(&ys), tau).map_err(|e| e.to_string())?;
    let dict = Dictionary::monomials(1, degree).map_err(|e| e.to_string())?;
    let fm = evaluate(&dict, &pairs).map_err(|e| e.to_string())?;
    let op = edmd(&fm, EdmdOperator::Koopman, REL_TOL).map_err(|e| e.to_string())?;
    let spec = eigenfunctions(&op).map_err(|e| e.to_string())?;
    let n_eigs = n_eigs.min(spec.len());

    let x: Vec<f64> = (0..200).map(|i| -2.0 + 4.0 * i as f64 / 199.0).collect();
    let mut out = OuEigenfunctions {
        eigenvalues: spec.eigenvalues[..n_eigs].iter().map(|z| z.re).collect(),
        x,
        analytic_eigenvalues: vec![],
        estimated: vec![],
        analytic: vec![],
        relative_l2_error: vec![],
    };
    for ell in 0..n_eigs {
        let oracle = ou_oracle(&p, ell + 1, tau).map_err(|e| e.to_string())?;
        let mut exact: Vec<f64> = out.x.iter().map(|&x| oracle.eval(x)).collect();
        let mut est = real_parts(&spec, ell, &out.x)?;
        unit_rms(&mut exact);
        unit_rms(&mut est);
        if est.iter().zip(&exact).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            est.iter_mut().for_each(|a| *a = -*a);
        }
        let err: f64 = est.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let norm: f64 = exact.iter().map(|b| b * b).sum::<f64>();
        out.relative_l2_error.push((err / norm).sqrt());
        out.analytic_eigenvalues.push(oracle.lambda);
        out.estimated.push(est);
        out.analytic.push(exact);
    }
    Ok(out)
}

/// Slowest implied timescale of an exact OU path, by VAC on centered
/// coordinates, for each lag in steps of `tau`.
pub fn ou_timescales_data(
    alpha: f64,
    diff: f64,
    tau: f64,
    n: usize,
    lags: &[usize],
    seed: u64,
) -> Result<OuTimescales, String> {
    let p = OuParams::new(alpha, diff).map_err(|e| e.to_string())?;
    let traj = ou_sample_path(&p, 0.0, tau, n, seed).map_err(|e| e.to_string())?;
    let dict = Dictionary::identity_centered(1).map_err(|e| e.to_string())?;
    let report =
        lag_scan(&traj, &dict, lags, ScanMethod::Vac, true, REL_TOL).map_err(|e| e.to_string())?;
    Ok(OuTimescales {
        lag_times: report.entries.iter().map(|e| e.lag_time).collect(),
        estimated: report
            .series(1)
            .into_iter()
            .map(|t| t.map(|t| t.value()).filter(|v| v.is_finite() && *v > 0.0))
            .collect(),
        analytic: 1.0 / p.rate(),
    })
}

/// EDMD-Koopman on the double gyre with a Gaussian RBF grid; φ₂ sampled on
/// an `nx`×`ny` grid of cell centers.
#[allow(clippy::too_many_arguments)]
pub fn double_gyre_data(
    a: f64,
    eps: f64,
    tau: f64,
    n_points: usize,
    rbf_x: usize,
    rbf_y: usize,
    nx: usize,
    ny: usize,
    seed: u64,
) -> Result<GyreField, String> {
    const H: f64 = 1e-3;
    let (lower, upper) = ([0.0, 0.0], [2.0, 1.0]);
    let sys = double_gyre(a, eps).map_err(|e| e.to_string())?;
    let starts = uniform_points(&lower, &upper, n_points, seed);
    let steps = (tau / H).round() as usize;
    let pairs = integrate_pairs(&sys, &starts, H, steps, seed.wrapping_add(1)).map_err(|e| e.to_string())?;
    let counts = [rbf_x, rbf_y];
    let bw = default_rbf_bandwidth(&lower, &upper, &counts);
    let dict = make_rbf_grid(&lower, &upper, &counts, bw).map_err(|e| e.to_string())?;
    let fm = evaluate(&dict, &pairs).map_err(|e| e.to_string())?;
    let op = edmd(&fm, EdmdOperator::Koopman, REL_TOL).map_err(|e| e.to_string())?;
    let spec = eigenfunctions(&op).map_err(|e| e.to_string())?;
    if spec.len() < 2 {
        return Err("fewer than two eigenfunctions".into());
    }
    let mut phi2 = Vec::with_capacity(nx * ny);
    let mut agree = 0usize;
    for j in 0..ny {
        let y = (j as f64 + 0.5) / ny as f64;
        for i in 0..nx {
            let x = 2.0 * (i as f64 + 0.5) / nx as f64;
            let v = spec.eval(1, &[x, y]).map_err(|e| e.to_string())?.re;
            agree += usize::from((v > 0.0) == (x > 1.0));
            phi2.push(v);
        }
    }
    let cells = (nx * ny) as f64;
    let split = (agree as f64 / cells).max(1.0 - agree as f64 / cells);
    Ok(GyreField {
        nx,
        ny,
        phi2,
        lambda: spec.eigenvalues.iter().take(6).map(|z| [z.re, z.im]).collect(),
        split,
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, String> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
}

#[wasm_bindgen]
pub fn ou_eigenfunctions(
    alpha: f64,
    diff: f64,
    tau: f64,
    n_points: usize,
    degree: usize,
    seed: u32,
) -> Result<String, String> {
    to_json(ou_eigenfunctions_data(alpha, diff, tau, n_points, degree, 4, seed.into()))
}

/// `lags` is a comma-separated list of step counts.
#[wasm_bindgen]
pub fn ou_timescales(alpha: f64, diff: f64, tau: f64, n: usize, lags: &str, seed: u32) -> Result<String, String> {
    let lags = lags
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad lag `{s}`")))
        .collect::<Result<Vec<_>, _>>()?;
    to_json(ou_timescales_data(alpha, diff, tau, n, &lags, seed.into()))
}

#[wasm_bindgen]
pub fn double_gyre_phi2(a: f64, eps: f64, tau: f64, n_points: usize, seed: u32) -> Result<String, String> {
    to_json(double_gyre_data(a, eps, tau, n_points, 20, 10, 80, 40, seed.into()))
}
