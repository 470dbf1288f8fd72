use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use transop::basis::{evaluate, full_state_matrix, Dictionary};
use transop::data::{load_trajectory_csv, pairs_from_trajectory, save_trajectory_csv, Trajectory};
use transop::estimators::{
    covariances, dmd, edmd, eigenfunctions, koopman_modes, tica_amuse_features, tica_direct, vac,
    DmdVariant, EdmdOperator, SpectralResult,
};
use transop::msm::{kmeans, msm_estimate_with_states, msm_timescale_convergence, Clustering};
use transop::simulate::{
    double_gyre, double_well_gradient, euler_maruyama, ou_sample_path, quadratic_gradient,
    smoluchowski_system, NoiseConvention, OuParams,
};
use transop::spectral::{eigenfunctions_on_grid_csv, implied_timescales, lag_scan, ScanMethod};

use crate::args::{
    AnalyzeArgs, Cli, Command, Convention, DmdVariantArg, GyreArgs, InputArgs, Method, OuArgs,
    Potential, ScanArgs, ScanMethodArg, SmoluchowskiArgs, System,
};
use crate::manifest::{default_path, RunManifest};
use crate::parse::{parse_dictionary, parse_grid};

const KMEANS_MAX_ITER: usize = 300;

/// Files touched by a command, for the manifest.
#[derive(Default)]
struct Record {
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

pub fn execute(cli: Cli, argv: &[String]) -> Result<()> {
    if let Command::Replay(r) = &cli.command {
        return replay(&r.manifest_file, r.verify);
    }
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let record = match &cli.command {
        Command::Simulate { system } => simulate(system)?,
        Command::Analyze(a) => analyze(a)?,
        Command::Scan(s) => scan(s)?,
        Command::Replay(_) => unreachable!("handled above"),
    };
    let (name, parameters) = match serde_json::to_value(&cli.command)? {
        Value::Object(map) => map.into_iter().next().unwrap_or((String::new(), Value::Null)),
        other => (String::new(), other),
    };
    let manifest = RunManifest {
        tool: "transop".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: name,
        argv: strip_manifest_flag(argv),
        parameters,
        seed: record.seed,
        inputs: record.inputs,
        outputs: record.outputs.clone(),
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    };
    let path = cli
        .manifest
        .clone()
        .unwrap_or_else(|| default_path(&record.outputs[0]));
    manifest.save(&path)
}

fn strip_manifest_flag(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv.iter().skip(1) {
        if skip {
            skip = false;
        } else if a == "--manifest" {
            skip = true;
        } else if !a.starts_with("--manifest=") {
            out.push(a.clone());
        }
    }
    out
}

fn replay(path: &Path, verify: bool) -> Result<()> {
    let m = RunManifest::load(path)?;
    let before: Vec<Option<Vec<u8>>> = m.outputs.iter().map(|p| fs::read(p).ok()).collect();
    let mut argv = vec!["transop".to_string()];
    argv.extend(m.argv.iter().cloned());
    argv.push("--manifest".into());
    argv.push(path.display().to_string());
    crate::run(argv)?;
    if verify {
        for (p, old) in m.outputs.iter().zip(before) {
            let new = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            match old {
                Some(old) if old == new => {}
                Some(_) => bail!("replayed output {} differs from the recorded run", p.display()),
                None => bail!("recorded output {} was missing before replay", p.display()),
            }
        }
    }
    Ok(())
}

fn thin(traj: Trajectory, every: usize) -> Result<Trajectory> {
    if every == 0 {
        bail!("--record-every must be at least 1");
    }
    if every == 1 {
        return Ok(traj);
    }
    let states: Vec<Vec<f64>> = traj.states().step_by(every).map(<[f64]>::to_vec).collect();
    Ok(Trajectory::from_states(traj.step() * every as f64, &states)?)
}

fn simulate(system: &System) -> Result<Record> {
    let (traj, seed, out) = match system {
        System::Ou(OuArgs {
            alpha,
            diff,
            tau,
            n,
            x0,
            seed,
            output,
        }) => {
            let p = OuParams::new(*alpha, *diff)?;
            (ou_sample_path(&p, *x0, *tau, *n, *seed)?, *seed, output)
        }
        System::DoubleGyre(GyreArgs {
            a,
            eps,
            h,
            steps,
            x0,
            record_every,
            seed,
            output,
        }) => {
            if x0.len() != 2 {
                bail!("--x0 needs two values x,y, got {}", x0.len());
            }
            let sys = double_gyre(*a, *eps)?;
            let t = euler_maruyama(&sys, x0, *h, *steps, *seed)?;
            (thin(t, *record_every)?, *seed, output)
        }
        System::Smoluchowski(s) => smoluchowski(s)?,
    };
    save_trajectory_csv(&traj, out, None).with_context(|| format!("writing {}", out.display()))?;
    Ok(Record {
        seed: Some(seed),
        inputs: vec![],
        outputs: vec![out.clone()],
    })
}

fn smoluchowski(s: &SmoluchowskiArgs) -> Result<(Trajectory, u64, &PathBuf)> {
    let dim = s.dim;
    let grad = match s.potential {
        Potential::Quadratic => {
            let k = match s.stiffness.len() {
                1 => vec![s.stiffness[0]; dim],
                n if n == dim => s.stiffness.clone(),
                n => bail!("{n} stiffness values for dimension {dim}"),
            };
            quadratic_gradient(k)
        }
        Potential::DoubleWell => double_well_gradient(s.barrier),
    };
    let convention = match s.noise_convention {
        Convention::Standard => NoiseConvention::Standard,
        Convention::Paper => NoiseConvention::Paper,
    };
    let sys = smoluchowski_system(grad, s.diff, dim, convention)?;
    let x0 = if s.x0.is_empty() { vec![0.0; dim] } else { s.x0.clone() };
    let t = euler_maruyama(&sys, &x0, s.h, s.steps, s.seed)?;
    Ok((thin(t, s.record_every)?, s.seed, &s.output))
}

struct Loaded {
    traj: Trajectory,
    dict: Dictionary,
}

fn load(input: &InputArgs) -> Result<Loaded> {
    let traj = load_trajectory_csv(&input.input, input.step)
        .with_context(|| format!("reading {}", input.input.display()))?;
    let dict = parse_dictionary(&input.dict, traj.dim())?;
    Ok(Loaded { traj, dict })
}

/// Discrete states for an MSM: indicator boxes, or k-means clusters.
fn discretize(input: &InputArgs, l: &Loaded) -> Result<(Vec<usize>, usize, Option<Clustering>)> {
    match (&l.dict, input.clusters) {
        (Dictionary::IndicatorGrid { .. }, None) => {
            let states = l
                .traj
                .states()
                .map(|x| l.dict.box_index(x))
                .collect::<transop::Result<Vec<_>>>()?;
            Ok((states, l.dict.len(), None))
        }
        (_, Some(k)) => {
            let points: Vec<Vec<f64>> = l.traj.states().map(<[f64]>::to_vec).collect();
            let c = kmeans(&points, k, input.seed, KMEANS_MAX_ITER)?;
            Ok((c.assignments.clone(), k, Some(c)))
        }
        (_, None) => bail!("msm needs an indicator dictionary or --clusters"),
    }
}

fn complex_pairs(values: &[transop::linalg::c64]) -> Value {
    json!(values.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>())
}

fn timescales_json(values: &[transop::linalg::c64], lag_time: f64) -> Result<Value> {
    Ok(serde_json::to_value(implied_timescales(values, lag_time)?)?)
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(v)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn analyze(a: &AnalyzeArgs) -> Result<Record> {
    let input = &a.input;
    let l = load(input)?;
    let lag_time = a.lag_steps as f64 * input.step;
    let mut record = Record {
        seed: None,
        inputs: vec![input.input.clone()],
        outputs: vec![a.out_json.clone()],
    };
    if a.grid.is_some() && matches!(a.method, Method::Dmd | Method::Msm) {
        bail!("--grid needs an eigenfunction method (tica, vac, edmd-koopman, edmd-pf)");
    }
    if a.modes && !matches!(a.method, Method::EdmdKoopman) {
        bail!("--modes is available for edmd-koopman only");
    }
    let mut doc = json!({
        "method": a.method,
        "lag_steps": a.lag_steps,
        "lag_time": lag_time,
        "dictionary": l.dict,
    });
    let spectrum: Option<SpectralResult> = match a.method {
        Method::Dmd => {
            if !matches!(l.dict, Dictionary::Identity { .. }) {
                bail!("dmd works on raw coordinates; use edmd-koopman with dictionary `{}`", input.dict);
            }
            let pairs = pairs_from_trajectory(&l.traj, a.lag_steps)?;
            let variant = match a.dmd_variant {
                DmdVariantArg::Standard => DmdVariant::Standard,
                DmdVariantArg::Exact => DmdVariant::Exact,
            };
            let r = dmd(&pairs, variant, input.rel_tol)?;
            let modes: Vec<Vec<[f64; 2]>> = (0..r.modes.ncols())
                .map(|j| (0..r.modes.nrows()).map(|i| [r.modes[(i, j)].re, r.modes[(i, j)].im]).collect())
                .collect();
            doc["variant"] = json!(variant);
            doc["eigenvalues"] = complex_pairs(&r.eigenvalues);
            doc["modes"] = json!(modes);
            doc["mode_defined"] = json!(r.mode_defined);
            doc["timescales"] = timescales_json(&r.eigenvalues, lag_time)?;
            None
        }
        Method::Msm => {
            let (states, n, clustering) = discretize(input, &l)?;
            let model = msm_estimate_with_states(&states, Some(n), a.lag_steps, input.symmetrize)?;
            let eig = model.eigenvalues()?;
            doc["msm"] = serde_json::to_value(model.to_doc()?)?;
            doc["timescales"] = timescales_json(&eig, lag_time)?;
            if let Some(c) = clustering {
                doc["centers"] = json!(c.centers);
                doc["inertia"] = json!(c.inertia);
                record.seed = Some(input.seed);
            }
            None
        }
        method => {
            let pairs = pairs_from_trajectory(&l.traj, a.lag_steps)?;
            let fm = evaluate(&l.dict, &pairs)?;
            let s = match method {
                Method::Tica if input.symmetrize => tica_direct(&covariances(&fm, true)?, input.rel_tol)?,
                Method::Tica => tica_amuse_features(&fm, input.rel_tol)?,
                Method::Vac => vac(&covariances(&fm, input.symmetrize)?, input.rel_tol)?,
                Method::EdmdKoopman | Method::EdmdPf => {
                    let which = if method == Method::EdmdPf {
                        EdmdOperator::PerronFrobenius
                    } else {
                        EdmdOperator::Koopman
                    };
                    let op = edmd(&fm, which, input.rel_tol)?;
                    if a.modes {
                        let b = full_state_matrix(&op.dictionary)
                            .context("Koopman modes need a dictionary containing the coordinates")?;
                        doc["koopman_modes"] = serde_json::to_value(koopman_modes(&op, &b)?.to_doc())?;
                    }
                    eigenfunctions(&op)?
                }
                Method::Dmd | Method::Msm => unreachable!("handled above"),
            };
            doc["eigenvalues"] = complex_pairs(&s.eigenvalues);
            doc["timescales"] = timescales_json(&s.eigenvalues, lag_time)?;
            doc["spectrum"] = serde_json::to_value(s.to_doc())?;
            Some(s)
        }
    };
    write_json(&a.out_json, &doc)?;
    if let (Some(g), Some(s)) = (&a.grid, spectrum) {
        let grid = parse_grid(g)?;
        let path = a.out_grid.clone().unwrap_or_else(|| {
            let mut p = a.out_json.as_os_str().to_owned();
            p.push(".grid.csv");
            PathBuf::from(p)
        });
        fs::write(&path, eigenfunctions_on_grid_csv(&s.leading(a.n_eigs), &grid)?)
            .with_context(|| format!("writing {}", path.display()))?;
        record.outputs.push(path);
    } else if a.out_grid.is_some() {
        bail!("--out-grid given without --grid");
    }
    Ok(record)
}

fn scan(s: &ScanArgs) -> Result<Record> {
    let input = &s.input;
    let l = load(input)?;
    let mut record = Record {
        seed: None,
        inputs: vec![input.input.clone()],
        outputs: vec![s.output.clone()],
    };
    let report = match s.method {
        ScanMethodArg::Msm => {
            let (states, _, clustering) = discretize(input, &l)?;
            if clustering.is_some() {
                record.seed = Some(input.seed);
            }
            if let Some(&lag) = s.lags.iter().find(|&&lag| lag == 0 || lag >= states.len()) {
                bail!("lag {lag} does not fit a trajectory of {} states", states.len());
            }
            msm_timescale_convergence(&states, &s.lags, input.step, input.symmetrize)?
        }
        m => {
            let method = match m {
                ScanMethodArg::Tica => ScanMethod::Tica,
                ScanMethodArg::Vac => ScanMethod::Vac,
                _ => ScanMethod::EdmdKoopman,
            };
            lag_scan(&l.traj, &l.dict, &s.lags, method, input.symmetrize, input.rel_tol)?
        }
    };
    fs::write(&s.output, report.to_csv()).with_context(|| format!("writing {}", s.output.display()))?;
    Ok(record)
}
