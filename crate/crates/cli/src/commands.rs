use std::path::Path;

use anyhow::{bail, Context};
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use rovella_core::flow_model::{return_orbit_csv, CrossSectionPoint, Fiber, SaddleSpec};
use rovella_core::interval_maps::{solve_conjugacy, MapKind, RightBranch, UnimodalSpec};
use rovella_core::measures::{self, midpoint_grid};
use rovella_core::pliss::{self, Abv0Params, HyperbolicTimeParams, PlissParams};
use rovella_core::solenoid::{self, SolenoidSpec};
use rovella_core::torusphere::{self, TspherePoint};
use rovella_core::{rng, Error};

use crate::config::{BranchName, MapName, RunConfig};
use crate::Invalid;

pub struct Output {
    pub content: String,
    pub extension: &'static str,
    pub summary: String,
    /// Set when the run completed but reports a failed hypothesis or condition.
    pub hypothesis_failure: bool,
}

impl Output {
    fn ok(content: String, extension: &'static str, summary: String) -> Self {
        Self { content, extension, summary, hypothesis_failure: false }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn get<T: Copy>(slot: &mut Option<T>, default: T) -> T {
    *slot.get_or_insert(default)
}

fn required<T: Copy>(slot: Option<T>, flag: &str) -> anyhow::Result<T> {
    slot.ok_or_else(|| Invalid(format!("--{flag} is required")).into())
}

fn unimodal(cfg: &mut RunConfig, default: MapName) -> anyhow::Result<UnimodalSpec> {
    let map = get(&mut cfg.map, default);
    let branch = |cfg: &mut RunConfig| match get(&mut cfg.branch, BranchName::Folded) {
        BranchName::Folded => RightBranch::Folded,
        BranchName::Symmetric => RightBranch::Symmetric,
    };
    let spec = match map {
        MapName::G0 => {
            let alpha = get(&mut cfg.alpha, 1.5);
            UnimodalSpec::new(MapKind::G0, alpha, branch(cfg), -1.0)?
        }
        MapName::F0 => UnimodalSpec::f0(get(&mut cfg.alpha, 2.0))?,
        MapName::Tent => UnimodalSpec::tent(),
        MapName::Perturbed => {
            let alpha = get(&mut cfg.alpha, 1.5);
            let b = branch(cfg);
            UnimodalSpec::perturbed(alpha, b, get(&mut cfg.lower, -0.9))?
        }
    };
    Ok(spec)
}

fn torus_map(cfg: &mut RunConfig) -> anyhow::Result<UnimodalSpec> {
    let spec = unimodal(cfg, MapName::G0)?;
    if !matches!(spec.kind(), MapKind::G0 | MapKind::Perturbed) {
        bail!(Invalid("the torusphere map needs --map g0 or perturbed".into()));
    }
    Ok(spec)
}

fn saddle(cfg: &mut RunConfig, default: SaddleSpec) -> anyhow::Result<SaddleSpec> {
    Ok(SaddleSpec::new(
        get(&mut cfg.lambda1, default.lambda1()),
        get(&mut cfg.lambda2, default.lambda2()),
        get(&mut cfg.lambda3, default.lambda3()),
        get(&mut cfg.saddle_c, default.c()),
        get(&mut cfg.tau0, default.tau0()),
    )?)
}

fn solenoid_spec(cfg: &mut RunConfig) -> anyhow::Result<SolenoidSpec> {
    let d = SolenoidSpec::default();
    Ok(SolenoidSpec::new(get(&mut cfg.k, d.k()), get(&mut cfg.sol_lambda, d.lambda()), get(&mut cfg.sol_c, d.c()))?)
}

fn random_point(spec: &UnimodalSpec, k: usize, r: &mut rng::Rng) -> rovella_core::Result<TspherePoint> {
    let t = measures::uniform_point(spec, r);
    let theta = (0..k).map(|_| r.gen::<f64>() * std::f64::consts::TAU).collect();
    TspherePoint::new(t, theta)
}

fn read_columns(path: &Path, columns: usize) -> anyhow::Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = vec![Vec::new(); columns];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = cells.iter().take(columns).map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == columns => {
                for (col, x) in out.iter_mut().zip(v) {
                    col.push(x);
                }
            }
            // a header line
            _ if i == 0 => continue,
            _ => bail!(Invalid(format!("{}:{}: expected {columns} numeric column(s)", path.display(), i + 1))),
        }
    }
    Ok(out)
}

fn measured_rate(psi: &[f64]) -> anyhow::Result<f64> {
    let c = -psi.iter().sum::<f64>() / psi.len() as f64;
    if c.is_nan() || c <= 0.0 {
        bail!(Invalid(format!("measured expansion rate {c} is not positive; pass --c")));
    }
    Ok(c)
}

pub fn run(name: &str, cfg: &mut RunConfig) -> anyhow::Result<Output> {
    match name {
        "orbit" => orbit(cfg),
        "conjugacy" => conjugacy(cfg),
        "fixed-points" => fixed_points(cfg),
        "lyapunov" => lyapunov(cfg),
        "pliss" => pliss_cmd(cfg),
        "hyptimes" => hyptimes(cfg),
        "abv0" => abv0(cfg),
        "return-map" => return_map(cfg),
        "domination" => domination(cfg),
        "solenoid" => solenoid_cmd(cfg),
        "density" => density(cfg),
        "recurrence" => recurrence(cfg),
        "basin" => basin(cfg),
        "integrability" => integrability(cfg),
        "probe-conditions" => probe_conditions(cfg),
        other => bail!(Invalid(format!("unknown command {other}"))),
    }
}

fn orbit(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = torus_map(cfg)?;
    let n = get(&mut cfg.n, 1000);
    let k = get(&mut cfg.k, 1);
    let mut r = rng::seeded(get(&mut cfg.seed, 1));
    let mut p = random_point(&spec, k, &mut r)?;
    if let Some(t0) = cfg.t0 {
        p = TspherePoint::new(t0, p.theta().to_vec())?;
    }
    let csv = torusphere::orbit_csv(&p, &spec, n)?;
    Ok(Output::ok(csv, "csv", format!("orbit: {n} steps from t = {}", p.t())))
}

fn conjugacy(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    cfg.map = Some(MapName::G0);
    let spec = unimodal(cfg, MapName::G0)?;
    let grid = get(&mut cfg.grid, 10_000);
    let tol = get(&mut cfg.tol, 1e-6);
    let t = solve_conjugacy(&spec, grid, tol)?;
    let summary = format!(
        "conjugacy: {} nodes, residual {:e}, {} sweeps, contraction {:.6}",
        t.grid.len(),
        t.residual,
        t.sweeps,
        t.contraction_factor
    );
    Ok(Output::ok(t.to_csv(), "csv", summary))
}

fn fixed_points(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = unimodal(cfg, MapName::G0)?;
    let r = spec.find_fixed_points(get(&mut cfg.tol, 1e-12))?;
    let locs: Vec<String> = r.points.iter().map(|p| format!("{:.12}", p.location)).collect();
    Ok(Output::ok(r.to_json() + "\n", "json", format!("fixed points: {}", locs.join(", "))))
}

#[derive(Serialize)]
struct LyapunovMember {
    seed: u64,
    t0: f64,
    meridian_exponent: f64,
    parallel_exponent: f64,
}

#[derive(Serialize)]
struct LyapunovSummary {
    n: usize,
    members: Vec<LyapunovMember>,
    mean_meridian_exponent: f64,
    mean_parallel_exponent: f64,
}

fn lyapunov(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = torus_map(cfg)?;
    let n = get(&mut cfg.n, 100_000);
    let seeds = get(&mut cfg.seeds, 10);
    let seed = get(&mut cfg.seed, 1);
    let k = get(&mut cfg.k, 1);
    let members = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::member(seed, i);
            let p = random_point(&spec, k, &mut r)?;
            let e = torusphere::lyapunov_estimate(&p, &spec, n)?;
            Ok(LyapunovMember {
                seed: seed + i as u64,
                t0: p.t(),
                meridian_exponent: e.meridian_exponent,
                parallel_exponent: e.parallel_exponent,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let m = members.len() as f64;
    let s = LyapunovSummary {
        n,
        mean_meridian_exponent: members.iter().map(|x| x.meridian_exponent).sum::<f64>() / m,
        mean_parallel_exponent: members.iter().map(|x| x.parallel_exponent).sum::<f64>() / m,
        members,
    };
    let summary = format!(
        "lyapunov: meridian {:.6}, parallel {:.6} over {seeds} orbits of {n} steps",
        s.mean_meridian_exponent, s.mean_parallel_exponent
    );
    Ok(Output::ok(json(&s), "json", summary))
}

fn pliss_cmd(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let input = cfg.input.clone().ok_or_else(|| Invalid("--input is required".into()))?;
    let params = PlissParams::new(required(cfg.c1, "c1")?, required(cfg.c2, "c2")?, required(cfg.h, "H")?)?;
    let a = read_columns(&input, 1)?.remove(0);
    let r = pliss::pliss_times(&a, &params)?;
    let summary = format!("pliss: {} of {} times, floor {:.3}, hypothesis held: {}", r.count, r.n, r.floor, r.hypothesis_held);
    Ok(Output { hypothesis_failure: !r.hypothesis_held, ..Output::ok(json(&r), "json", summary) })
}

fn orbit_psi_dist(cfg: &mut RunConfig) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let spec = torus_map(cfg)?;
    let n = get(&mut cfg.n, 100_000);
    let seed = get(&mut cfg.seed, 1);
    Ok(measures::meridian_data(&spec, seed, n))
}

fn hyptimes(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let (psi, d) = match cfg.input.clone() {
        Some(path) => {
            let mut cols = read_columns(&path, 2)?;
            let d = cols.pop().expect("two columns");
            (cols.pop().expect("two columns"), d)
        }
        None => {
            let (psi, dist) = orbit_psi_dist(cfg)?;
            let delta = get(&mut cfg.delta, 1e-3);
            let d = dist.iter().map(|&x| pliss::truncated_log_distance(x, delta)).collect::<Result<Vec<_>, _>>()?;
            (psi, d)
        }
    };
    let c = match cfg.c {
        Some(c) => c,
        None => get(&mut cfg.c, 0.5 * measured_rate(&psi)?),
    };
    let beta = get(&mut cfg.beta, 1.0);
    let b = get(&mut cfg.b, HyperbolicTimeParams::default_b(beta));
    let delta = get(&mut cfg.delta, 1e-3);
    let params = HyperbolicTimeParams::new(c, delta, b, beta)?;
    let r = pliss::hyperbolic_times(&psi, &d, &params)?;
    let summary = format!("hyptimes: {} of {} times (frequency {:.4}), floor {:.1}", r.count, r.n, r.frequency, r.floor);
    Ok(Output { hypothesis_failure: !r.hypothesis_held, ..Output::ok(json(&r), "json", summary) })
}

fn abv0(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let (psi, dist) = orbit_psi_dist(cfg)?;
    let c = match cfg.c {
        Some(c) => c,
        None => get(&mut cfg.c, measured_rate(&psi)?),
    };
    let params = Abv0Params {
        c,
        xi: get(&mut cfg.xi, 0.5),
        zeta: get(&mut cfg.zeta, 0.5),
        b: get(&mut cfg.b, 0.25),
    };
    let out = pliss::abv0_pipeline(&psi, &dist, &params)?;
    let summary = match &out.hypothesis_failure {
        Some(h) => format!("abv0: hypothesis failed: {h}"),
        None => format!(
            "abv0: {} simultaneous times of {} (floor theta n = {:.1}, theta = {:.4})",
            out.report.count,
            out.report.n,
            out.report.floor,
            out.constants.theta
        ),
    };
    let failed = out.hypothesis_failure.is_some();
    Ok(Output { hypothesis_failure: failed, ..Output::ok(json(&out), "json", summary) })
}

fn return_map(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    // f₀ needs α = -λ₃/λ₁ ≥ 2
    let s = saddle(cfg, SaddleSpec::new(1.0, -4.5, -2.0, 4.0, 1.0)?)?;
    cfg.map = Some(MapName::F0);
    cfg.alpha = Some(s.alpha());
    let f0 = unimodal(cfg, MapName::F0)?;
    let sol = solenoid_spec(cfg)?;
    let n = get(&mut cfg.n, 1000);
    let mut r = rng::seeded(get(&mut cfg.seed, 1));
    let x1 = match cfg.t0 {
        Some(t) => t,
        None => get(&mut cfg.t0, 2.0 * r.gen::<f64>() - 1.0),
    };
    let theta = (0..sol.k()).map(|_| r.gen::<f64>() * std::f64::consts::TAU).collect();
    let p = CrossSectionPoint::new(x1, 0.0, Fiber::solid_torus(theta, Default::default())?)?;
    let csv = return_orbit_csv(&p, &f0, &s, &sol, n)?;
    Ok(Output::ok(csv, "csv", format!("return-map: {n} returns from x1 = {x1}")))
}

fn domination(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = torus_map(cfg)?;
    let gamma = get(&mut cfg.gamma, 1.2);
    let omega = get(&mut cfg.omega, 0.1);
    let grid = torusphere::symmetric_log_grid(1e-10, 0.5, get(&mut cfg.grid, 200));
    let p = torusphere::domination_profile(&spec, gamma, omega, &grid)?;
    let predicted = torusphere::critical_exponent(spec.alpha(), gamma, omega);
    let exponent = p.fitted_exponent.unwrap_or(f64::NAN);
    let unbounded = exponent < 0.0;
    let summary = format!(
        "domination: sup d = {:.6}, fitted exponent {exponent:.4} (predicted {predicted:.4}){}",
        p.sup_d,
        if unbounded { ", d is unbounded at the critical parallel" } else { "" }
    );
    Ok(Output { hypothesis_failure: unbounded, ..Output::ok(p.to_csv(), "csv", summary) })
}

fn solenoid_cmd(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = solenoid_spec(cfg)?;
    let count = get(&mut cfg.n, 10_000);
    let burn_in = get(&mut cfg.burn_in, 30);
    let mut r = rng::seeded(get(&mut cfg.seed, 1));
    let csv = solenoid::attractor_samples_csv(&spec, count, burn_in, &mut r);
    let clusters = if spec.k() == 1 { solenoid::fiber_cluster_count(8, &spec).ok() } else { None };
    let summary = match clusters {
        Some(c) => format!("solenoid: {count} attractor samples; 8th image has {c} fiber clusters"),
        None => format!("solenoid: {count} attractor samples"),
    };
    Ok(Output::ok(csv, "csv", summary))
}

fn density(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = unimodal(cfg, MapName::G0)?;
    let n = get(&mut cfg.n, 1_000_000);
    let bins = get(&mut cfg.bins, 50);
    let seed = get(&mut cfg.seed, 1);
    let s = measures::density_histogram(&spec, seed, n, bins)?;
    let summary = format!(
        "density: {n} iterates, {} restarts, TV to uniform {:.4}, TV between n/10 and n {:.4}",
        s.restarts,
        s.histogram.total_variation_to_uniform(),
        s.cauchy_tv
    );
    Ok(Output::ok(s.histogram.to_csv(), "csv", summary))
}

fn recurrence(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = unimodal(cfg, MapName::G0)?;
    let r = measures::recurrence_fraction(
        &spec,
        get(&mut cfg.delta, 0.05),
        get(&mut cfg.n_max, 100_000),
        get(&mut cfg.seeds, 1000),
        get(&mut cfg.seed, 1),
    )?;
    let summary = format!("recurrence: {} of {} orbits visit (fraction {:.4})", r.visited, r.seeds, r.fraction);
    Ok(Output::ok(json(&r), "json", summary))
}

fn basin(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = unimodal(cfg, MapName::F0)?;
    let sink = get(&mut cfg.sink, -1.0);
    let grid = midpoint_grid(spec.lower(), 1.0, get(&mut cfg.grid, 10_000));
    let r = measures::basin_fraction(&spec, sink, get(&mut cfg.n_max, 10_000), &grid)
        .map_err(|e| match e {
            Error::InvalidParameter(m) => anyhow::Error::from(Invalid(m)),
            other => other.into(),
        })?;
    let summary = format!("basin: {} of {} grid points captured (fraction {:.5})", r.captured, r.grid_size, r.fraction);
    Ok(Output::ok(json(&r), "json", summary))
}

fn integrability(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let s = saddle(cfg, SaddleSpec::default())?;
    let spec = torus_map(cfg)?;
    let n = get(&mut cfg.n, 1_000_000);
    let x1: Vec<f64> = measures::typical_orbit(&spec, get(&mut cfg.seed, 1), n).iter().map(|p| p.t()).collect();
    let r = measures::log_dist_integrability(&x1, &s)?;
    let avgs: Vec<String> = r.averages.iter().map(|(n, a)| format!("{n}: {a:.5}")).collect();
    let summary = format!("integrability: mean return times {}; converged: {}", avgs.join(", "), r.converged);
    Ok(Output { hypothesis_failure: !r.converged, ..Output::ok(json(&r), "json", summary) })
}

fn probe_conditions(cfg: &mut RunConfig) -> anyhow::Result<Output> {
    let spec = unimodal(cfg, MapName::G0)?;
    let n = get(&mut cfg.n, 100_000);
    let seed = get(&mut cfg.seed, 1);
    let u = get(&mut cfg.u, 0.05);
    let delta = get(&mut cfg.delta, 0.01);
    let epsilon = get(&mut cfg.epsilon, 0.1);
    let grid = midpoint_grid(spec.lower(), 1.0, get(&mut cfg.grid, 10_000));
    let mut reports = vec![
        measures::condition_a_probe(&spec, 1000, 10)?,
        measures::slow_recurrence_probe(&measures::typical_distances(&spec, seed, n), &[delta], epsilon)?,
        measures::condition_c_probe(&spec, u, &grid, 200)?,
        measures::condition_d_probe(&spec, seed, n, u, 1000)?,
    ];
    reports.extend(measures::non_flatness_probes(&spec, 2.0 * u)?);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.condition.as_str()).collect();
    let summary = if failed.is_empty() {
        "probe-conditions: all conditions passed".to_string()
    } else {
        format!("probe-conditions: failed {}", failed.join(", "))
    };
    Ok(Output { hypothesis_failure: !failed.is_empty(), ..Output::ok(json(&reports), "json", summary) })
}
