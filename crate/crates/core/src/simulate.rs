//! Stochastic simulators with analytic reference spectra.
//!
//! Every random stream is a ChaCha8 generator seeded from a 64-bit seed; the
//! i-th of several independent trajectories uses stream `i` of that seed, so
//! results do not depend on how work is split across threads.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{pairs_from_snapshots, DataPairs, Trajectory};
use crate::error::{Error, Result};

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` points drawn uniformly from the box `[lower, upper]`.
pub fn uniform_points(lower: &[f64], upper: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0);
    (0..n)
        .map(|_| {
            lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect()
        })
        .collect()
}

/// OU process `dX = −αD X dt + √(2D) dW` with stationary variance `1/α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    pub alpha: f64,
    pub diffusion: f64,
}

impl OuParams {
    pub fn new(alpha: f64, diffusion: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && diffusion > 0.0 && diffusion.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "OU parameters must be positive, got alpha={alpha}, D={diffusion}"
            )));
        }
        Ok(Self { alpha, diffusion })
    }

    pub fn rate(&self) -> f64 {
        self.alpha * self.diffusion
    }
}

/// Mean `x e^{−αDτ}` and variance `α⁻¹(1 − e^{−2αDτ})` of `X_τ | X_0 = x`.
pub fn ou_transition_moments(p: &OuParams, x: f64, tau: f64) -> (f64, f64) {
    let decay = (-p.rate() * tau).exp();
    let var = -(-2.0 * p.rate() * tau).exp_m1() / p.alpha;
    (x * decay, var)
}

/// Transition density `p_τ(x, y)`.
pub fn ou_transition_density(p: &OuParams, x: f64, y: f64, tau: f64) -> f64 {
    let (mean, var) = ou_transition_moments(p, x, tau);
    gaussian_pdf(y, mean, var)
}

fn gaussian_pdf(y: f64, mean: f64, var: f64) -> f64 {
    (-(y - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// `π(x)`, centered Gaussian with variance `1/α`.
pub fn stationary_density_ou(p: &OuParams, x: f64) -> f64 {
    gaussian_pdf(x, 0.0, 1.0 / p.alpha)
}

/// Path of `n` states starting at `x0`, sampled exactly at spacing `τ`.
pub fn ou_sample_path(p: &OuParams, x0: f64, tau: f64, n: usize, seed: u64) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::InvalidArgument("path length must be at least 1".into()));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau must be non-negative, got {tau}")));
    }
    let (decay, var) = ou_transition_moments(p, 1.0, tau);
    let sd = var.sqrt();
    let mut rng = stream_rng(seed, 0);
    let mut states = Vec::with_capacity(n);
    let mut z = x0;
    states.push(z);
    for _ in 1..n {
        let g: f64 = rng.sample(StandardNormal);
        z = z * decay + sd * g;
        states.push(z);
    }
    Trajectory::from_flat(1, if tau > 0.0 { tau } else { 1.0 }, states)
}

/// One exact OU transition of lag `τ` from each start point.
pub fn ou_propagate(p: &OuParams, starts: &[f64], tau: f64, seed: u64) -> Vec<f64> {
    let (decay, var) = ou_transition_moments(p, 1.0, tau);
    let sd = var.sqrt();
    let mut rng = stream_rng(seed, 0);
    starts
        .iter()
        .map(|&x| {
            let g: f64 = rng.sample(StandardNormal);
            x * decay + sd * g
        })
        .collect()
}

/// Probabilists' Hermite polynomial via `H_{n+1} = x H_n − n H_{n−1}`.
pub fn hermite_prob(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Analytic OU eigenpair `λ_ℓ = e^{−αD(ℓ−1)τ}`,
/// `φ_ℓ(x) = H_{ℓ−1}(√α x)/√((ℓ−1)!)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuEigenpair {
    pub params: OuParams,
    pub ell: usize,
    pub lambda: f64,
}

impl OuEigenpair {
    /// Koopman eigenfunction.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.ell - 1;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        hermite_prob(n, self.params.alpha.sqrt() * x) / fact.sqrt()
    }

    /// Perron–Frobenius eigenfunction `π(x) φ_ℓ(x)`.
    pub fn eval_pf(&self, x: f64) -> f64 {
        stationary_density_ou(&self.params, x) * self.eval(x)
    }
}

pub fn ou_oracle(p: &OuParams, ell: usize, tau: f64) -> Result<OuEigenpair> {
    if ell == 0 {
        return Err(Error::InvalidArgument("eigenpair index starts at 1".into()));
    }
    Ok(OuEigenpair {
        params: *p,
        ell,
        lambda: (-p.rate() * (ell - 1) as f64 * tau).exp(),
    })
}

pub type DriftFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Noise {
    Scalar(f64),
    PerComponent(Vec<f64>),
}

impl Noise {
    fn amplitude(&self, i: usize) -> f64 {
        match self {
            Self::Scalar(s) => *s,
            Self::PerComponent(v) => v[i],
        }
    }
}

/// Axis-aligned box with reflecting faces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidArgument("box needs lower < upper on every axis".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// Mirrors each coordinate across the violated face until it is inside.
    pub fn reflect(&self, x: &mut [f64]) {
        for (v, (&lo, &hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            loop {
                if *v < lo {
                    *v = 2.0 * lo - *v;
                } else if *v > hi {
                    *v = 2.0 * hi - *v;
                } else {
                    break;
                }
            }
        }
    }
}

#[derive(Clone)]
pub struct SdeSystem {
    pub dim: usize,
    pub drift: DriftFn,
    pub noise: Noise,
    pub domain: Option<BoxDomain>,
}

impl std::fmt::Debug for SdeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeSystem")
            .field("dim", &self.dim)
            .field("noise", &self.noise)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl SdeSystem {
    pub fn new(dim: usize, drift: DriftFn, noise: Noise, domain: Option<BoxDomain>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("state dimension must be positive".into()));
        }
        if let Noise::PerComponent(v) = &noise {
            if v.len() != dim {
                return Err(Error::Dimension(format!(
                    "{} noise amplitudes for dimension {dim}",
                    v.len()
                )));
            }
        }
        if let Some(b) = &domain {
            if b.lower.len() != dim {
                return Err(Error::Dimension("domain box dimension mismatch".into()));
            }
        }
        Ok(Self {
            dim,
            drift,
            noise,
            domain,
        })
    }

    fn check_start(&self, x0: &[f64]) -> Result<()> {
        if x0.len() != self.dim {
            return Err(Error::Dimension(format!(
                "start point has {} coordinates, system has {}",
                x0.len(),
                self.dim
            )));
        }
        if let Some(b) = &self.domain {
            if !b.contains(x0) {
                return Err(Error::OutsideDomain { point: x0.to_vec() });
            }
        }
        Ok(())
    }

    fn step(&self, x: &mut [f64], f: &mut [f64], h: f64, rng: &mut ChaCha8Rng) -> Result<()> {
        (self.drift)(x, f);
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDrift(x.to_vec()));
        }
        let sh = h.sqrt();
        for (i, (xi, fi)) in x.iter_mut().zip(f.iter()).enumerate() {
            let g: f64 = rng.sample(StandardNormal);
            *xi += h * fi + self.noise.amplitude(i) * sh * g;
        }
        if let Some(b) = &self.domain {
            b.reflect(x);
        }
        Ok(())
    }
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    Ok(())
}

/// Euler–Maruyama path of `steps + 1` states from `x0`.
pub fn euler_maruyama(
    sys: &SdeSystem,
    x0: &[f64],
    h: f64,
    steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    check_step(h)?;
    sys.check_start(x0)?;
    let mut rng = stream_rng(seed, 0);
    let mut traj = Trajectory::new(sys.dim, h)?;
    let mut x = x0.to_vec();
    let mut f = vec![0.0; sys.dim];
    traj.push(&x);
    for _ in 0..steps {
        sys.step(&mut x, &mut f, h, &mut rng)?;
        traj.push(&x);
    }
    Ok(traj)
}

fn advance(sys: &SdeSystem, x0: &[f64], h: f64, steps: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut x = x0.to_vec();
    let mut f = vec![0.0; sys.dim];
    for _ in 0..steps {
        sys.step(&mut x, &mut f, h, rng)?;
    }
    Ok(x)
}

/// Integrates every start point for `steps` steps and pairs it with the end
/// point (lag time `steps·h`). Start point `i` uses stream `i`; the work is
/// split across threads without affecting the result.
pub fn integrate_pairs(
    sys: &SdeSystem,
    starts: &[Vec<f64>],
    h: f64,
    steps: usize,
    seed: u64,
) -> Result<DataPairs> {
    check_step(h)?;
    for s in starts {
        sys.check_start(s)?;
    }
    // Browsers report no parallelism and cannot spawn threads.
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(starts.len().max(1));
    let chunk = starts.len().div_ceil(threads).max(1);
    let run_block = |c: usize, block: &[Vec<f64>]| {
        block
            .iter()
            .enumerate()
            .map(|(j, x0)| {
                let mut rng = stream_rng(seed, (c * chunk + j) as u64);
                advance(sys, x0, h, steps, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    };
    let ends: Vec<Result<Vec<Vec<f64>>>> = if threads == 1 {
        vec![run_block(0, starts)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = starts
                .chunks(chunk)
                .enumerate()
                .map(|(c, block)| scope.spawn(move || run_block(c, block)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("integration thread panicked"))
                .collect()
        })
    };
    let mut ys = Vec::with_capacity(starts.len());
    for block in ends {
        ys.extend(block?);
    }
    pairs_from_snapshots(starts, &ys, steps as f64 * h)
}

/// `(−πA sin(πx) cos(πy), πA cos(πx) sin(πy))`.
pub fn double_gyre_drift(a: f64) -> DriftFn {
    Arc::new(move |x: &[f64], out: &mut [f64]| {
        let (px, py) = (PI * x[0], PI * x[1]);
        out[0] = -PI * a * px.sin() * py.cos();
        out[1] = PI * a * px.cos() * py.sin();
    })
}

/// Double gyre on `[0,2]×[0,1]` with noise `ε` per component and
/// reflecting walls.
pub fn double_gyre(a: f64, eps: f64) -> Result<SdeSystem> {
    SdeSystem::new(
        2,
        double_gyre_drift(a),
        Noise::Scalar(eps),
        Some(BoxDomain::new(vec![0.0, 0.0], vec![2.0, 1.0])?),
    )
}

/// Noise amplitude of the Smoluchowski equation: `√(2D)` (standard, gives
/// `π ∝ e^{−V}`) or `√(2dD)` as sometimes printed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConvention {
    #[default]
    Standard,
    Paper,
}

impl NoiseConvention {
    pub fn amplitude(self, dim: usize, d_coef: f64) -> f64 {
        match self {
            Self::Standard => (2.0 * d_coef).sqrt(),
            Self::Paper => (2.0 * dim as f64 * d_coef).sqrt(),
        }
    }
}

/// `dX = −D ∇V(X) dt + σ dW` with `σ` set by `convention`.
pub fn smoluchowski_system(
    grad_v: DriftFn,
    d_coef: f64,
    dim: usize,
    convention: NoiseConvention,
) -> Result<SdeSystem> {
    if !(d_coef > 0.0 && d_coef.is_finite()) {
        return Err(Error::InvalidArgument(format!("D must be positive, got {d_coef}")));
    }
    let drift: DriftFn = Arc::new(move |x: &[f64], out: &mut [f64]| {
        grad_v(x, out);
        for v in out.iter_mut() {
            *v *= -d_coef;
        }
    });
    SdeSystem::new(dim, drift, Noise::Scalar(convention.amplitude(dim, d_coef)), None)
}

/// Gradient of the quadratic potential `V(x) = Σ k_i x_i² / 2`.
pub fn quadratic_gradient(stiffness: Vec<f64>) -> DriftFn {
    Arc::new(move |x: &[f64], out: &mut [f64]| {
        for ((o, xi), k) in out.iter_mut().zip(x).zip(&stiffness) {
            *o = k * xi;
        }
    })
}

/// Gradient of the double well `V(x) = k (x₁² − 1)² + Σ_{i>1} x_i²/2`.
pub fn double_well_gradient(barrier: f64) -> DriftFn {
    Arc::new(move |x: &[f64], out: &mut [f64]| {
        out[0] = 4.0 * barrier * x[0] * (x[0] * x[0] - 1.0);
        for (o, xi) in out.iter_mut().zip(x).skip(1) {
            *o = *xi;
        }
    })
}
