//! The skew map `g(t, Θ) = (g₀(t), 2Θ)` on the torusphere, its derivative
//! cocycle and the domination ratio.
//!
//! A parallel `{t} × 𝕋ᵏ` is a torus of radius `cos(πt/2)`, so the derivative
//! along parallels is `2 cos(π g₀(t)/2) / cos(πt/2)` and along the meridian it
//! is `|g₀'(t)|`. Both factors are evaluated from the pole distance carried by
//! [`IntervalPoint`], with `cos(πt/2) = sin(π(1 - |t|)/2)`.

use std::f64::consts::{FRAC_PI_2, LN_2, TAU};

use serde::{Deserialize, Serialize};

use crate::export::{csv_cells, csv_document, fmt_f64};
use crate::interval_maps::{IntervalPoint, MapKind, UnimodalSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TspherePoint {
    point: IntervalPoint,
    theta: Vec<f64>,
}

impl TspherePoint {
    pub fn new(t: f64, theta: Vec<f64>) -> Result<Self> {
        Self::from_interval(IntervalPoint::new(t), theta)
    }

    pub fn from_interval(point: IntervalPoint, theta: Vec<f64>) -> Result<Self> {
        if !(point.t().abs() <= 1.0) {
            return Err(Error::Domain { name: "t", value: point.t(), domain: "[-1, 1]" });
        }
        if theta.is_empty() {
            return Err(Error::invalid("torus dimension k must be at least 1"));
        }
        if let Some(&bad) = theta.iter().find(|a| !a.is_finite()) {
            return Err(Error::Domain { name: "theta", value: bad, domain: "finite angles" });
        }
        let theta = theta.into_iter().map(reduce_angle).collect();
        Ok(Self { point, theta })
    }

    pub fn t(&self) -> f64 {
        self.point.t()
    }

    /// `1 - |t|`, accurate near the poles.
    pub fn gap(&self) -> f64 {
        self.point.gap()
    }

    pub fn interval_point(&self) -> IntervalPoint {
        self.point
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to TAU itself
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `cos(πt/2)` from the pole distance.
fn parallel_radius(p: IntervalPoint) -> f64 {
    (FRAC_PI_2 * p.gap()).sin()
}

/// Ambient coordinates `(sin(πt/2), cos θ₁ cos(πt/2), sin θ₁ cos(πt/2), …)`.
pub fn chart_embed(p: &TspherePoint) -> Vec<f64> {
    let r = parallel_radius(p.point);
    let mut out = Vec::with_capacity(1 + 2 * p.k());
    out.push((FRAC_PI_2 * p.t()).sin());
    for &a in &p.theta {
        out.push(a.cos() * r);
        out.push(a.sin() * r);
    }
    out
}

fn require_torus_map(spec: &UnimodalSpec) -> Result<()> {
    match spec.kind() {
        MapKind::G0 | MapKind::Perturbed => Ok(()),
        other => Err(Error::invalid(format!(
            "the torusphere map is built over G0 or its perturbation, not {other:?}"
        ))),
    }
}

/// One step of `g`: `(g₀(t), 2Θ mod 2π)`.
pub fn step_g(p: &TspherePoint, spec: &UnimodalSpec) -> Result<TspherePoint> {
    require_torus_map(spec)?;
    Ok(advance(p, spec))
}

fn advance(p: &TspherePoint, spec: &UnimodalSpec) -> TspherePoint {
    TspherePoint {
        point: spec.step(p.point),
        theta: p.theta.iter().map(|&a| reduce_angle(2.0 * a)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocycleFactors {
    pub meridian: f64,
    pub parallel: f64,
    pub conorm: f64,
    pub norm: f64,
    /// Set when `t = 0`, where the meridian factor vanishes.
    pub degenerate: bool,
}

fn factors_at(p: IntervalPoint, spec: &UnimodalSpec) -> Result<CocycleFactors> {
    if p.gap() <= 0.0 {
        return Err(Error::Pole(p.t()));
    }
    let image = spec.step(p);
    let meridian = spec.slope(p).abs();
    let parallel = 2.0 * parallel_radius(image) / parallel_radius(p);
    Ok(CocycleFactors {
        meridian,
        parallel,
        conorm: meridian.min(parallel),
        norm: meridian.max(parallel),
        degenerate: p.t() == spec.critical_point(),
    })
}

/// Derivative factors of `g` at `p`. The factors do not depend on `Θ` or `k`.
pub fn cocycle_factors(p: &TspherePoint, spec: &UnimodalSpec) -> Result<CocycleFactors> {
    require_torus_map(spec)?;
    factors_at(p.point, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFactorSums {
    pub n: usize,
    pub sum_meridian: f64,
    pub sum_parallel: f64,
    /// `n log 2 + log cos(π tₙ/2) - log cos(π t₀/2)`.
    pub telescoped_parallel: f64,
    pub t_final: f64,
    pub gap_final: f64,
}

impl LogFactorSums {
    pub fn telescoping_residual(&self) -> f64 {
        (self.sum_parallel - self.telescoped_parallel).abs()
    }
}

/// Birkhoff sums of the log cocycle factors over `n` steps.
///
/// The orbit is rejected if it hits the turning point or a pole exactly; see
/// [`birkhoff_log_factors_guarded`] for a positive guard radius.
pub fn birkhoff_log_factors(p: &TspherePoint, spec: &UnimodalSpec, n: usize) -> Result<LogFactorSums> {
    birkhoff_log_factors_guarded(p, spec, n, 0.0)
}

/// As [`birkhoff_log_factors`], flagging any orbit point within `guard` of the
/// turning point or of a pole.
pub fn birkhoff_log_factors_guarded(
    p: &TspherePoint,
    spec: &UnimodalSpec,
    n: usize,
    guard: f64,
) -> Result<LogFactorSums> {
    require_torus_map(spec)?;
    let c = spec.critical_point();
    let start = p.point;
    let mut x = start;
    let mut sum_m = 0.0;
    let mut sum_p = 0.0;
    for index in 0..n {
        if x.gap() <= guard {
            return Err(Error::OrbitDegeneracy { index, reason: "orbit reached a pole" });
        }
        if (x.t() - c).abs() <= guard {
            return Err(Error::OrbitDegeneracy { index, reason: "orbit reached the critical parallel" });
        }
        let next = spec.step(x);
        sum_m += spec.slope(x).abs().ln();
        sum_p += (2.0 * parallel_radius(next) / parallel_radius(x)).ln();
        x = next;
    }
    if x.gap() <= 0.0 {
        return Err(Error::OrbitDegeneracy { index: n, reason: "orbit reached a pole" });
    }
    let telescoped = n as f64 * LN_2 + parallel_radius(x).ln() - parallel_radius(start).ln();
    Ok(LogFactorSums {
        n,
        sum_meridian: sum_m,
        sum_parallel: sum_p,
        telescoped_parallel: telescoped,
        t_final: x.t(),
        gap_final: x.gap(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub meridian_exponent: f64,
    pub parallel_exponent: f64,
}

/// Birkhoff averages of the log factors; `n` must be at least 1000.
pub fn lyapunov_estimate(p: &TspherePoint, spec: &UnimodalSpec, n: usize) -> Result<LyapunovEstimate> {
    if n < 1000 {
        return Err(Error::InsufficientData(format!("{n} iterates, need at least 1000")));
    }
    let s = birkhoff_log_factors(p, spec, n)?;
    Ok(LyapunovEstimate {
        meridian_exponent: s.sum_meridian / n as f64,
        parallel_exponent: s.telescoped_parallel / n as f64,
    })
}

/// `d(t) = (1 - g₀(t)²)^{1/2} / (‖Dg‖^γ m^ω)`.
pub fn domination_ratio(t: f64, spec: &UnimodalSpec, gamma: f64, omega: f64) -> Result<f64> {
    require_torus_map(spec)?;
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain { name: "t", value: t, domain: "[-1, 1]" });
    }
    if t.abs() == 1.0 {
        return Err(Error::Pole(t));
    }
    if t == spec.critical_point() {
        return Err(Error::NonDifferentiable(t));
    }
    let p = IntervalPoint::new(t);
    let f = factors_at(p, spec)?;
    let image_gap = spec.step(p).gap();
    // 1 - g² = (1 - |g|)(1 + |g|)
    let numerator = (image_gap * (2.0 - image_gap)).sqrt();
    Ok(numerator / (f.norm.powf(gamma) * f.conorm.powf(omega)))
}

/// `α/2 - (γ + ω)(α - 1)`, the exponent printed alongside the ratio.
pub fn nominal_critical_exponent(alpha: f64, gamma: f64, omega: f64) -> f64 {
    alpha / 2.0 - (gamma + omega) * (alpha - 1.0)
}

/// `α/2 - γ(α - 1) - ωα`: near `t = 0` the conorm is the parallel factor,
/// which vanishes like `|t|^α`, while the norm is the meridian factor `~|t|^{α-1}`.
pub fn critical_exponent(alpha: f64, gamma: f64, omega: f64) -> f64 {
    alpha / 2.0 - gamma * (alpha - 1.0) - omega * alpha
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationProfile {
    pub gamma: f64,
    pub omega: f64,
    pub samples: Vec<(f64, f64)>,
    pub sup_d: f64,
    /// Least-squares slope of `log d` against `log|t|` over samples with `|t| < 10⁻²`.
    pub fitted_exponent: Option<f64>,
}

impl DominationProfile {
    pub fn to_csv(&self) -> String {
        csv_document(&["t", "d"], self.samples.iter().map(|&(t, d)| vec![t, d]))
    }
}

/// `n` points per side, log-spaced in `|t| ∈ [a, b]`, both signs, sorted.
pub fn symmetric_log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let s = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        let v = (la + (lb - la) * s).exp();
        out.push(v);
        out.push(-v);
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn domination_profile(spec: &UnimodalSpec, gamma: f64, omega: f64, grid: &[f64]) -> Result<DominationProfile> {
    if !(gamma > 1.0) {
        return Err(Error::Domain { name: "gamma", value: gamma, domain: "(1, inf)" });
    }
    if !(omega > 0.0) {
        return Err(Error::Domain { name: "omega", value: omega, domain: "(0, inf)" });
    }
    let mut samples = Vec::with_capacity(grid.len());
    for &t in grid {
        samples.push((t, domination_ratio(t, spec, gamma, omega)?));
    }
    let sup_d = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !sup_d.is_finite() {
        return Err(Error::Convergence("domination ratio is not finite on the grid".into()));
    }
    let near: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.0.abs() < 1e-2).collect();
    let fitted_exponent = if near.len() >= 10 { loglog_slope(&near) } else { None };
    Ok(DominationProfile { gamma, omega, samples, sup_d, fitted_exponent })
}

/// Least-squares slope of `log y` against `log|x|`.
pub fn loglog_slope(samples: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(x, y)| *x != 0.0 && *y > 0.0)
        .map(|(x, y)| (x.abs().ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Orbit dump: step, t, θ₁…θ_k, meridian factor, parallel factor.
pub fn orbit_csv(p: &TspherePoint, spec: &UnimodalSpec, n: usize) -> Result<String> {
    require_torus_map(spec)?;
    let mut header: Vec<String> = vec!["step".into(), "t".into()];
    header.extend((1..=p.k()).map(|j| format!("theta{j}")));
    header.push("meridian_factor".into());
    header.push("parallel_factor".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut rows = Vec::with_capacity(n + 1);
    let mut x = p.clone();
    for step in 0..=n {
        let f = factors_at(x.point, spec)?;
        let mut row = vec![step.to_string(), fmt_f64(x.t())];
        row.extend(x.theta.iter().map(|a| fmt_f64(*a)));
        row.push(fmt_f64(f.meridian));
        row.push(fmt_f64(f.parallel));
        rows.push(row);
        if step < n {
            x = advance(&x, spec);
        }
    }
    Ok(csv_cells(&header_refs, rows))
}
