//! Empirical checks of the expansion and slow-recurrence conditions for a
//! one-dimensional map with critical set `S = {c}`. Throughout,
//! `ψ = -log|f'|` and `dist(x, S) = |x - c|`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TypicalOrbit;
use crate::interval_maps::{IntervalPoint, UnimodalSpec};
use crate::pliss::truncated_log_distance;
use crate::torusphere::loglog_slope;
use crate::{Error, Result};

/// Concrete point supporting a verdict; `value` is `None` when the quantity is `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub location: f64,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionProbeReport {
    pub condition: String,
    pub parameters: BTreeMap<String, f64>,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub detail: String,
}

impl ConditionProbeReport {
    fn new(condition: &str, parameters: &[(&str, f64)], passed: bool, witness: Option<Witness>, detail: String) -> Self {
        Self {
            condition: condition.to_string(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            passed,
            witness,
            detail,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn psi(spec: &UnimodalSpec, p: IntervalPoint) -> f64 {
    -spec.slope(p).abs().ln()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Condition A: `S_kψ(f(c)) ≤ -c₀k` for `n0 ≤ k ≤ n`. The fitted `c₀` is
/// `min_k (-S_kψ / k)` over that range.
pub fn condition_a_probe(spec: &UnimodalSpec, n: usize, n0: usize) -> Result<ConditionProbeReport> {
    if n0 == 0 || n0 > n {
        return Err(Error::invalid(format!("need 1 <= n0 <= n, got n0 = {n0}, n = {n}")));
    }
    let start = spec.step(IntervalPoint::new(spec.critical_point()));
    let mut p = start;
    let mut sum = 0.0;
    let mut c0 = f64::INFINITY;
    let mut worst = None;
    for k in 1..=n {
        sum += psi(spec, p);
        p = spec.step(p);
        if sum == f64::INFINITY {
            let w = Witness { index: k, location: start.t(), value: None };
            let detail = format!("f'(f^{}(c)) = 0: the critical value orbit hits a flat point", k - 1);
            return Ok(ConditionProbeReport::new("A", &[("n", n as f64), ("n0", n0 as f64)], false, Some(w), detail));
        }
        if k >= n0 && -sum / (k as f64) < c0 {
            c0 = -sum / k as f64;
            worst = Some(Witness { index: k, location: start.t(), value: finite(sum) });
        }
    }
    let passed = c0 > 0.0;
    Ok(ConditionProbeReport::new(
        "A",
        &[("n", n as f64), ("n0", n0 as f64), ("c0", c0)],
        passed,
        worst,
        format!("fitted c0 = {c0}"),
    ))
}

/// Slow recurrence along an orbit given by its distances to `S`: for each
/// `δ` the running averages `(1/k) Σ 𝔇_δ(x_j)`, with the limsup estimated
/// by the largest running average over the final decade `[n/10, n]`. Passes
/// when the estimate is at most `epsilon` for some listed `δ`.
pub fn slow_recurrence_probe(dists: &[f64], deltas: &[f64], epsilon: f64) -> Result<ConditionProbeReport> {
    let n = dists.len();
    if n < 10_000 {
        return Err(Error::InsufficientData(format!("{n} orbit points, need at least 10^4")));
    }
    if deltas.is_empty() {
        return Err(Error::invalid("no delta given"));
    }
    let mut params: Vec<(String, f64)> = vec![("n".into(), n as f64), ("epsilon".into(), epsilon)];
    let mut best: Option<(f64, f64, usize)> = None;
    for &delta in deltas {
        let mut sum = 0.0;
        let mut limsup = f64::NEG_INFINITY;
        let mut at = 0;
        for (j, &d) in dists.iter().enumerate() {
            sum += truncated_log_distance(d, delta).map_err(|e| match e {
                Error::InfiniteRecurrence => Error::OrbitDegeneracy { index: j, reason: "orbit hit the critical set" },
                other => other,
            })?;
            let k = j + 1;
            if k >= n / 10 && sum / k as f64 > limsup {
                limsup = sum / k as f64;
                at = k;
            }
        }
        params.push((format!("limsup@{delta}"), limsup));
        if best.is_none_or(|b| limsup < b.1) {
            best = Some((delta, limsup, at));
        }
    }
    let (delta, limsup, at) = best.expect("deltas is non-empty");
    params.push(("delta".into(), delta));
    let refs: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    Ok(ConditionProbeReport::new(
        "B",
        &refs,
        limsup <= epsilon,
        Some(Witness { index: at, location: dists[at - 1], value: Some(limsup) }),
        format!("smallest limsup estimate {limsup} at delta = {delta}"),
    ))
}

/// Distances to the turning point along a typical orbit (see [`TypicalOrbit`]).
pub fn typical_distances(spec: &UnimodalSpec, seed: u64, n: usize) -> Vec<f64> {
    let c = spec.critical_point();
    TypicalOrbit::new(spec, seed).take(n).map(|p| (p.t() - c).abs()).collect()
}

/// Condition C: `S_kψ(x) ≤ K - ck` for grid points whose first `k` iterates
/// avoid `U = (c - u, c + u)`. With `M_k` the largest such sum, `-c` is the
/// least-squares slope of `M_k` against `k` and `K = max_k (M_k + ck)`.
pub fn condition_c_probe(spec: &UnimodalSpec, u: f64, grid: &[f64], n: usize) -> Result<ConditionProbeReport> {
    let c = spec.critical_point();
    let outside = |p: IntervalPoint| (p.t() - c).abs() >= u;
    let mut alive: Vec<(f64, IntervalPoint, f64)> =
        grid.iter().map(|&x| (x, IntervalPoint::new(x), 0.0)).filter(|s| outside(s.1)).collect();
    if alive.is_empty() {
        return Err(Error::InsufficientData("no grid point lies outside U".into()));
    }
    let mut maxima: Vec<(usize, f64, f64)> = Vec::new();
    for k in 1..=n {
        for s in alive.iter_mut() {
            s.2 += psi(spec, s.1);
            s.1 = spec.step(s.1);
        }
        // the sum of k terms counts for points whose first k iterates avoid U
        let best = alive.iter().max_by(|a, b| a.2.total_cmp(&b.2)).expect("non-empty");
        if best.2 == f64::INFINITY {
            let w = Witness { index: k, location: best.0, value: None };
            let detail = format!("S_{k} psi is infinite outside U: a flat point lies outside U");
            return Ok(ConditionProbeReport::new("C", &[("u", u), ("n", n as f64)], false, Some(w), detail));
        }
        maxima.push((k, best.2, best.0));
        alive.retain(|s| outside(s.1));
        if alive.is_empty() {
            break;
        }
    }
    if maxima.len() < 2 {
        return Err(Error::InsufficientData("orbits leave the complement of U too quickly".into()));
    }
    let m = maxima.len() as f64;
    let mk = maxima.iter().map(|s| s.0 as f64).sum::<f64>() / m;
    let my = maxima.iter().map(|s| s.1).sum::<f64>() / m;
    let sxx: f64 = maxima.iter().map(|s| (s.0 as f64 - mk).powi(2)).sum();
    let sxy: f64 = maxima.iter().map(|s| (s.0 as f64 - mk) * (s.1 - my)).sum();
    let rate = -sxy / sxx;
    let (k_at, big_k) = maxima
        .iter()
        .map(|s| (s, s.1 + rate * s.0 as f64))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    Ok(ConditionProbeReport::new(
        "C",
        &[("u", u), ("n", n as f64), ("c", rate), ("K", big_k), ("depth", m)],
        rate > 0.0,
        Some(Witness { index: k_at.0, location: k_at.2, value: Some(k_at.1) }),
        format!("fitted c = {rate}, K = {big_k} over {} iterates", maxima.len()),
    ))
}

/// Condition D: along a typical orbit, `S_nψ(x_i)` over every excursion from
/// one visit to `U = (c - u, c + u)` to the next. `κ` is the largest
/// excursion sum; passes with at least `min_excursions` excursions and finite `κ`.
pub fn condition_d_probe(
    spec: &UnimodalSpec,
    seed: u64,
    n: usize,
    u: f64,
    min_excursions: usize,
) -> Result<ConditionProbeReport> {
    let c = spec.critical_point();
    let mut start: Option<(usize, f64)> = None;
    let mut sum = 0.0;
    let mut kappa = f64::NEG_INFINITY;
    let mut witness = None;
    let mut count = 0;
    for (j, p) in TypicalOrbit::new(spec, seed).take(n).enumerate() {
        if (p.t() - c).abs() < u {
            if let Some((i, x)) = start {
                count += 1;
                if sum > kappa {
                    kappa = sum;
                    witness = Some(Witness { index: j - i, location: x, value: finite(sum) });
                }
            }
            start = Some((j, p.t()));
            sum = 0.0;
        }
        if start.is_some() {
            sum += psi(spec, p);
        }
    }
    let passed = count >= min_excursions && kappa.is_finite();
    Ok(ConditionProbeReport::new(
        "D",
        &[("u", u), ("n", n as f64), ("kappa", kappa), ("excursions", count as f64)],
        passed,
        witness,
        format!("{count} excursions, largest excursion sum {kappa}"),
    ))
}

/// Exponent margin: `α₁ = β₁ + 1 - NON_FLAT_MARGIN`.
pub const NON_FLAT_MARGIN: f64 = 0.01;

// largest per-decade value should not grow as the scale shrinks
const GROWTH_TOL: f64 = 0.05;

struct Bound {
    sup: f64,
    at: f64,
    growth: Option<f64>,
}

// sup of `ratio` over samples at scales `scale`, and the log-log slope of the
// per-decade maxima against the scale (negative slope = blow-up towards 0)
fn bound(samples: &[(f64, f64, f64)]) -> Bound {
    let mut sup = f64::NEG_INFINITY;
    let mut at = f64::NAN;
    let mut decades: BTreeMap<i64, f64> = BTreeMap::new();
    for &(x, scale, r) in samples {
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r > sup {
            sup = r;
            at = x;
        }
        let d = scale.log10().floor() as i64;
        let e = decades.entry(d).or_insert(f64::NEG_INFINITY);
        *e = e.max(r);
    }
    let pts: Vec<(f64, f64)> = decades.iter().map(|(d, r)| (10f64.powi(*d as i32), *r)).collect();
    let growth = if sup.is_finite() { loglog_slope(&pts) } else { None };
    Bound { sup, at, growth }
}

fn bounded(b: &Bound) -> bool {
    b.sup.is_finite() && b.growth.is_some_and(|g| g >= -GROWTH_TOL)
}

/// Log-spaced scales `10^-decades ..= top`, `per_decade` per decade.
fn log_scales(top: f64, decades: u32, per_decade: usize) -> Vec<f64> {
    let lo = top.log10() - decades as f64;
    let m = decades as usize * per_decade;
    (0..=m).map(|i| 10f64.powf(lo + (top.log10() - lo) * i as f64 / m as f64)).collect()
}

/// Non-flatness near `S = {c}` and polynomial bounds everywhere (S1–S4),
/// sampled at distances `10⁻⁸ ..= u` on both sides of `c` and, for S4, also
/// at gaps `10⁻⁸ ..= u` from both endpoints.
///
/// `β₁` is the fitted exponent of `|f'| ≈ dist^β₁` near `c`; the constant
/// `B` of each condition is the largest ratio that occurs on the samples. In
/// dimension one `‖Df⁻¹‖ = 1/|f'|` and `|det Df| = |f'|`, so S2 and S3 both
/// reduce to the local Lipschitz bound on `ψ`.
pub fn non_flatness_probes(spec: &UnimodalSpec, u: f64) -> Result<Vec<ConditionProbeReport>> {
    if !(u > 0.0 && u < 0.5 * (1.0 - spec.lower())) {
        return Err(Error::Domain { name: "u", value: u, domain: "(0, half the interval)" });
    }
    let c = spec.critical_point();
    let slope = |p: IntervalPoint| spec.slope(p).abs();
    let scales = log_scales(u, 8, 20);
    let near: Vec<(f64, f64, f64)> = scales
        .iter()
        .flat_map(|&d| [c - d, c + d])
        .map(|x| (x, (x - c).abs(), slope(IntervalPoint::new(x))))
        .collect();
    let fit: Vec<(f64, f64)> = near.iter().map(|s| (s.1, s.2)).collect();
    let beta1 = loglog_slope(&fit).ok_or_else(|| Error::InsufficientData("no usable samples near c".into()))?;
    let alpha1 = beta1 + 1.0 - NON_FLAT_MARGIN;
    let exps_ok = alpha1 - beta1 < 1.0 && 1.0 + beta1 > 0.0;

    let s1 = bound(&near.iter().map(|&(x, d, g)| (x, d, (g / d.powf(beta1)).max(d.powf(alpha1) / g))).collect::<Vec<_>>());

    // local Lipschitz constant of ψ at |x - y| = dist/4, scaled by dist^α₁
    let lip: Vec<(f64, f64, f64)> = near
        .iter()
        .map(|&(x, d, g)| {
            let h = 0.25 * d;
            let y = if x < c { x + h } else { x - h };
            let gy = slope(IntervalPoint::new(y));
            (x, d, (g.ln() - gy.ln()).abs() * d.powf(alpha1) / h)
        })
        .collect();
    let s2 = bound(&lip);

    let beta4 = alpha1.abs().max(beta1.abs());
    let mut global = near.clone();
    let interior = 2000;
    let lo = spec.lower();
    for i in 0..=interior {
        let x = lo + (1.0 - lo) * i as f64 / interior as f64;
        if (x - c).abs() > u {
            global.push((x, (x - c).abs(), slope(IntervalPoint::new(x))));
        }
    }
    let near_ends: Vec<(f64, f64, f64)> = scales
        .iter()
        .flat_map(|&g| {
            let right = IntervalPoint::near_pole(1.0, g);
            let left = IntervalPoint::new(lo + g);
            [(right, g), (left, g)]
        })
        .map(|(p, g)| (p.t(), g, (p.t() - c).abs(), slope(p)))
        .map(|(x, g, d, s)| (x, g, (d.powf(beta4) / s).max(s * d.powf(beta4))))
        .collect();
    let s4_ends = bound(&near_ends);
    let s4_all = bound(
        &global.iter().map(|&(x, d, g)| (x, d, (d.powf(beta4) / g).max(g * d.powf(beta4)))).collect::<Vec<_>>(),
    );
    let s4_sup = s4_ends.sup.max(s4_all.sup);
    let s4_at = if s4_ends.sup >= s4_all.sup { s4_ends.at } else { s4_all.at };

    let params = [("u", u), ("alpha1", alpha1), ("beta1", beta1)];
    let report = |name: &str, b: &Bound, extra: &[(&str, f64)], ok: bool| {
        let mut p: Vec<(&str, f64)> = params.to_vec();
        p.extend_from_slice(extra);
        p.push(("B", b.sup));
        ConditionProbeReport::new(
            name,
            &p,
            ok,
            Some(Witness { index: 0, location: b.at, value: finite(b.sup) }),
            format!("B = {}, per-decade growth exponent {:?}", b.sup, b.growth),
        )
    };
    let s4_bound = Bound { sup: s4_sup, at: s4_at, growth: s4_ends.growth };
    Ok(vec![
        report("S1", &s1, &[], exps_ok && bounded(&s1)),
        report("S2", &s2, &[], exps_ok && bounded(&s2)),
        report("S3", &s2, &[], exps_ok && bounded(&s2)),
        report("S4", &s4_bound, &[("beta", beta4)], bounded(&s4_ends) && s4_all.sup.is_finite() && bounded(&s1)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::RightBranch;

    fn sym(alpha: f64) -> UnimodalSpec {
        UnimodalSpec::g0_with_branch(alpha, RightBranch::Symmetric).unwrap()
    }

    #[test]
    fn condition_a_on_symmetric_branch() {
        // f(c) = 1 -> -1, a repelling fixed point with |f'| = 2α
        let g = sym(1.5);
        let r = condition_a_probe(&g, 200, 10).unwrap();
        assert!(r.passed);
        let c0 = r.parameters["c0"];
        assert!(c0 > 0.0);
        // witness re-verification against a fresh orbit
        let w = r.witness.unwrap();
        let mut p = IntervalPoint::new(w.location);
        let mut s = 0.0;
        for _ in 0..w.index {
            s += -g.slope(p).abs().ln();
            p = g.step(p);
        }
        assert!((s - w.value.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn condition_a_fails_on_folded_branch() {
        let r = condition_a_probe(&UnimodalSpec::g0(1.5).unwrap(), 200, 10).unwrap();
        assert!(!r.passed);
        let w = r.witness.unwrap();
        assert_eq!((w.index, w.value), (1, None));
        assert_eq!(w.location, 1.0);
    }

    #[test]
    fn slow_recurrence_examples() {
        let far = vec![0.5; 10_000];
        let r = slow_recurrence_probe(&far, &[0.1], 0.0).unwrap();
        assert_eq!(r.parameters["limsup@0.1"], 0.0);
        assert!(r.passed);
        let e = vec![(-1.0f64).exp(); 10_000];
        let r = slow_recurrence_probe(&e, &[0.5], 0.5).unwrap();
        assert!((r.parameters["limsup@0.5"] - 1.0).abs() < 1e-12);
        assert!(!r.passed);
        // critical orbit of g₀: 1 -> -1 -> -1 ...
        let g = sym(1.5);
        let crit: Vec<f64> = super::super::orbit(&g, 0.0, 10_000).iter().skip(1).map(|p| p.t().abs()).collect();
        assert!(slow_recurrence_probe(&crit[..9_000], &[0.1], 0.0).is_err());
        let crit: Vec<f64> = super::super::orbit(&g, 1.0, 10_000).iter().map(|p| p.t().abs()).collect();
        assert!(slow_recurrence_probe(&crit, &[0.5, 0.1], 0.0).unwrap().passed);
        assert!(slow_recurrence_probe(&[0.0; 10_000], &[0.1], 0.0).is_err());
    }

    #[test]
    fn slow_recurrence_of_typical_tent_orbit() {
        // Lebesgue is tent-invariant: E 𝔇_δ = δ(1 - log δ)
        let delta: f64 = 0.01;
        let mean = delta * (1.0 - delta.ln());
        let d = typical_distances(&UnimodalSpec::tent(), 3, 1_000_000);
        let r = slow_recurrence_probe(&d, &[delta], 0.1).unwrap();
        assert!(r.passed, "{}", r.detail);
        assert!((r.parameters["limsup@0.01"] - mean).abs() < 0.1 * mean, "{}", r.detail);
    }

    #[test]
    fn condition_c_for_tent_recovers_log_two() {
        let grid = super::super::midpoint_grid(-1.0, 1.0, 5000);
        let r = condition_c_probe(&UnimodalSpec::tent(), 0.05, &grid, 30).unwrap();
        assert!(r.passed);
        assert!((r.parameters["c"] - 2f64.ln()).abs() < 1e-9);
        assert!(condition_c_probe(&UnimodalSpec::tent(), 0.05, &[0.0], 30).is_err());
    }

    #[test]
    fn condition_d_collects_excursions() {
        let r = condition_d_probe(&sym(1.5), 9, 200_000, 0.05, 100).unwrap();
        assert!(r.parameters["excursions"] >= 100.0);
        assert!(r.parameters["kappa"].is_finite());
        assert!(r.passed);
    }

    #[test]
    fn non_flatness_of_symmetric_g0() {
        let reports = non_flatness_probes(&sym(1.5), 0.1).unwrap();
        assert_eq!(reports.len(), 4);
        let s1 = &reports[0];
        assert!((s1.parameters["beta1"] - 0.5).abs() < 1e-6);
        assert!(reports.iter().all(|r| r.passed), "{reports:#?}");
    }

    #[test]
    fn folded_branch_breaks_s4_at_the_pole() {
        let reports = non_flatness_probes(&UnimodalSpec::g0(1.5).unwrap(), 0.1).unwrap();
        assert!(reports[0].passed);
        assert!(!reports[3].passed);
        let w = reports[3].witness.as_ref().unwrap();
        assert!(w.location > 0.99);
    }

    #[test]
    fn report_json_round_trip() {
        let r = condition_a_probe(&sym(1.5), 50, 5).unwrap();
        let back: ConditionProbeReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
