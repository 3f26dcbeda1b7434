//! Ergodic statistics along orbits of the interval maps: occupation
//! histograms, recurrence to the turning point, basins of a sink, return-time
//! integrability, and empirical checks of the expansion conditions.

mod probes;

pub use probes::{
    condition_a_probe, condition_c_probe, condition_d_probe, non_flatness_probes, slow_recurrence_probe,
    typical_distances, ConditionProbeReport, Witness, NON_FLAT_MARGIN,
};

use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::export::csv_document;
use crate::flow_model::{return_time, SaddleSpec};
use crate::interval_maps::{IntervalPoint, MapKind, UnimodalSpec};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Histogram {
    fn from_counts(lo: f64, hi: f64, counts: &[u64]) -> Self {
        let bins = counts.len();
        let total: u64 = counts.iter().sum();
        let edges = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        let masses = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self { edges, masses }
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Index of the bin containing `x` (right edge included in the last bin).
    pub fn bin_of(&self, x: f64) -> usize {
        let lo = self.edges[0];
        let hi = self.edges[self.bins()];
        let pos = (x - lo) / (hi - lo) * self.bins() as f64;
        (pos.floor().max(0.0) as usize).min(self.bins() - 1)
    }

    /// Total variation distance `½ Σ |mᵢ - m'ᵢ|`.
    pub fn total_variation(&self, other: &Histogram) -> f64 {
        0.5 * self.masses.iter().zip(&other.masses).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Total variation distance to the normalized Lebesgue measure.
    pub fn total_variation_to_uniform(&self) -> f64 {
        let u = 1.0 / self.bins() as f64;
        0.5 * self.masses.iter().map(|m| (m - u).abs()).sum::<f64>()
    }

    pub fn to_csv(&self) -> String {
        let rows = (0..self.bins()).map(|i| vec![self.edges[i], self.edges[i + 1], self.masses[i]]);
        csv_document(&["bin_left", "bin_right", "mass"], rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitStats {
    pub n: usize,
    pub seed: u64,
    /// Orbits restarted after landing exactly on the turning point.
    pub restarts: usize,
    pub birkhoff: BTreeMap<String, f64>,
    pub histogram: Histogram,
    pub visits: BTreeMap<String, usize>,
    /// Total variation between the histograms after `n / 10` and `n` steps.
    pub cauchy_tv: f64,
}

/// Radius of the registered target set around the turning point.
pub const CRITICAL_TARGET_RADIUS: f64 = 0.05;

// Tent orbits in binary: u = (t + 1)/2 in 63-bit fixed point, each step shifts
// one digit out and draws a fresh low digit, which is what the orbit of a
// Lebesgue-random real looks like at finite resolution.
struct TentDigits {
    v: u64,
}

const TENT_BITS: u32 = 63;
const TENT_MASK: u64 = (1u64 << TENT_BITS) - 1;

impl TentDigits {
    fn from_t(t: f64) -> Self {
        let u = ((t + 1.0) * 0.5).clamp(0.0, 1.0);
        Self { v: ((u * (1u64 << TENT_BITS) as f64) as u64).min(TENT_MASK) }
    }

    fn t(&self) -> f64 {
        2.0 * (self.v as f64 / (1u64 << TENT_BITS) as f64) - 1.0
    }

    fn step(&mut self, r: &mut rng::Rng) {
        let top = self.v >> (TENT_BITS - 1) & 1;
        let base = if top == 1 { !self.v & TENT_MASK } else { self.v };
        self.v = ((base << 1) & TENT_MASK) | (r.gen::<u64>() & 1);
    }
}

/// Draws a point uniformly from the invariant interval of `spec`.
pub fn uniform_point(spec: &UnimodalSpec, r: &mut rng::Rng) -> f64 {
    let lo = spec.lower();
    lo + (1.0 - lo) * r.gen::<f64>()
}

/// Typical orbit started from a seeded uniform point.
///
/// Orbits that land exactly on the turning point are restarted from a fresh
/// uniform point drawn from the same stream. Tent orbits are generated digit
/// by digit (see `TentDigits`), since a float orbit of the tent map is an
/// exact dyadic and collapses onto the fixed point within 53 steps.
pub struct TypicalOrbit<'a> {
    spec: &'a UnimodalSpec,
    rng: rng::Rng,
    state: OrbitState,
    pub restarts: usize,
}

enum OrbitState {
    Digits(TentDigits),
    Float(IntervalPoint),
}

impl<'a> TypicalOrbit<'a> {
    pub fn new(spec: &'a UnimodalSpec, seed: u64) -> Self {
        let mut rng = rng::seeded(seed);
        let t = uniform_point(spec, &mut rng);
        let state = if spec.kind() == MapKind::Tent {
            OrbitState::Digits(TentDigits::from_t(t))
        } else {
            OrbitState::Float(IntervalPoint::new(t))
        };
        Self { spec, rng, state, restarts: 0 }
    }
}

impl Iterator for TypicalOrbit<'_> {
    type Item = IntervalPoint;

    fn next(&mut self) -> Option<IntervalPoint> {
        match &mut self.state {
            OrbitState::Digits(d) => {
                let out = IntervalPoint::new(d.t());
                d.step(&mut self.rng);
                Some(out)
            }
            OrbitState::Float(p) => {
                let out = *p;
                let mut q = self.spec.step(out);
                if q.t() == self.spec.critical_point() {
                    self.restarts += 1;
                    q = IntervalPoint::new(uniform_point(self.spec, &mut self.rng));
                }
                *p = q;
                Some(out)
            }
        }
    }
}

/// First `n` points of a typical orbit (see [`TypicalOrbit`]).
pub fn typical_orbit(spec: &UnimodalSpec, seed: u64, n: usize) -> Vec<IntervalPoint> {
    TypicalOrbit::new(spec, seed).take(n).collect()
}

/// Meridian data along a typical orbit: `ψⱼ = -log|f'(xⱼ)|` and the distance
/// `|xⱼ - c|` to the turning point.
pub fn meridian_data(spec: &UnimodalSpec, seed: u64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let c = spec.critical_point();
    TypicalOrbit::new(spec, seed)
        .take(n)
        .map(|p| (-spec.slope(p).abs().ln(), (p.t() - c).abs()))
        .unzip()
}

/// Occupation histogram of one typical orbit (see [`TypicalOrbit`] for the
/// restart rule), with Birkhoff averages of `x`, `x²` and the number of
/// entries into the `0.05`-neighbourhood of the turning point.
pub fn density_histogram(spec: &UnimodalSpec, seed: u64, n: usize, bins: usize) -> Result<OrbitStats> {
    if n < 10_000 {
        return Err(Error::InsufficientData(format!("{n} iterates, need at least 10^4")));
    }
    if bins < 10 {
        return Err(Error::invalid(format!("need at least 10 bins, got {bins}")));
    }
    let lo = spec.lower();
    let width = 1.0 - lo;
    let c = spec.critical_point();
    let mut counts = vec![0u64; bins];
    let mut early = Vec::new();
    let mut sum_x = 0.0;
    let mut sum_x2 = 0.0;
    let mut entries = 0;
    let mut inside_prev = false;
    let snapshot = n / 10;
    let mut orbit = TypicalOrbit::new(spec, seed);
    for i in 0..n {
        if i == snapshot {
            early = counts.clone();
        }
        let t = orbit.next().expect("orbit is infinite").t();
        let pos = ((t - lo) / width * bins as f64).floor().max(0.0) as usize;
        counts[pos.min(bins - 1)] += 1;
        sum_x += t;
        sum_x2 += t * t;
        let inside = (t - c).abs() < CRITICAL_TARGET_RADIUS;
        if inside && !inside_prev {
            entries += 1;
        }
        inside_prev = inside;
    }

    let histogram = Histogram::from_counts(lo, 1.0, &counts);
    let early_h = Histogram::from_counts(lo, 1.0, &early);
    let mut birkhoff = BTreeMap::new();
    birkhoff.insert("x".to_string(), sum_x / n as f64);
    birkhoff.insert("x^2".to_string(), sum_x2 / n as f64);
    let mut visits = BTreeMap::new();
    visits.insert("critical".to_string(), entries);
    Ok(OrbitStats {
        n,
        seed,
        restarts: orbit.restarts,
        birkhoff,
        cauchy_tv: histogram.total_variation(&early_h),
        histogram,
        visits,
    })
}

/// First iterate at which the orbit of `t` lies within `delta` of the turning point.
pub fn first_critical_visit(spec: &UnimodalSpec, t: f64, delta: f64, n_max: usize) -> Option<usize> {
    let c = spec.critical_point();
    let mut p = IntervalPoint::new(t);
    for i in 0..=n_max {
        if (p.t() - c).abs() < delta {
            return Some(i);
        }
        p = spec.step(p);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub seed: u64,
    pub delta: f64,
    pub n_max: usize,
    pub seeds: usize,
    pub visited: usize,
    pub fraction: f64,
    /// Largest first-visit time among the visiting seeds.
    pub max_first_visit: usize,
}

/// Fraction of uniformly drawn starts whose orbit enters `(-δ, δ)` (around
/// the turning point) within `n_max` iterates. Member `i` draws from `seed + i`.
pub fn recurrence_fraction(spec: &UnimodalSpec, delta: f64, n_max: usize, seeds: usize, seed: u64) -> Result<RecurrenceReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain { name: "delta", value: delta, domain: "(0, 0.5)" });
    }
    if seeds < 10 {
        return Err(Error::invalid(format!("need at least 10 seeds, got {seeds}")));
    }
    let visits: Vec<Option<usize>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::member(seed, i);
            first_critical_visit(spec, uniform_point(spec, &mut r), delta, n_max)
        })
        .collect();
    let visited = visits.iter().filter(|v| v.is_some()).count();
    Ok(RecurrenceReport {
        seed,
        delta,
        n_max,
        seeds,
        visited,
        fraction: visited as f64 / seeds as f64,
        max_first_visit: visits.iter().flatten().copied().max().unwrap_or(0),
    })
}

/// Component of `{|f'| < 1}` containing the sink, as a closed interval clipped
/// to the domain. Boundaries are located by bisection.
pub fn contraction_component(spec: &UnimodalSpec, sink: f64) -> Result<(f64, f64)> {
    let slope = |x: f64| spec.slope(IntervalPoint::new(x)).abs();
    if !(slope(sink) < 1.0) {
        return Err(Error::invalid(format!("{sink} is not attracting: |f'| = {}", slope(sink))));
    }
    if (spec.value(sink) - sink).abs() > 1e-10 {
        return Err(Error::invalid(format!("{sink} is not a fixed point")));
    }
    let edge = |dir: f64| -> f64 {
        let limit = if dir > 0.0 { 1.0 } else { spec.lower() };
        let mut inside = sink;
        let mut step = 1e-6;
        loop {
            let probe = sink + dir * step;
            let beyond = if dir > 0.0 { probe >= limit } else { probe <= limit };
            if beyond {
                if slope(limit) < 1.0 {
                    return limit;
                }
                break bisect_edge(&slope, inside, limit);
            }
            if !(slope(probe) < 1.0) {
                break bisect_edge(&slope, inside, probe);
            }
            inside = probe;
            step *= 1.5;
        }
    };
    Ok((edge(-1.0), edge(1.0)))
}

// last point with |f'| < 1 between `inside` and `outside`
fn bisect_edge(slope: &impl Fn(f64) -> f64, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (inside + outside);
        if m == inside || m == outside {
            break;
        }
        if slope(m) < 1.0 {
            inside = m;
        } else {
            outside = m;
        }
    }
    inside
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub sink: f64,
    pub trap: (f64, f64),
    pub n_max: usize,
    pub grid_size: usize,
    pub captured: usize,
    pub fraction: f64,
}

/// Iterates that an orbit must remain in the trapping interval after entering it.
pub const BASIN_DWELL: usize = 10;

/// Fraction of `grid` whose orbit enters the contraction component of the
/// sink within `n_max` steps and stays there for [`BASIN_DWELL`] further steps.
pub fn basin_fraction(spec: &UnimodalSpec, sink: f64, n_max: usize, grid: &[f64]) -> Result<BasinReport> {
    let trap = contraction_component(spec, sink)?;
    let inside = |t: f64| t >= trap.0 && t <= trap.1;
    let captured = grid
        .par_iter()
        .filter(|&&x| {
            let mut p = IntervalPoint::new(x);
            for _ in 0..=n_max {
                if inside(p.t()) {
                    let mut q = p;
                    for _ in 0..BASIN_DWELL {
                        q = spec.step(q);
                        if !inside(q.t()) {
                            return false;
                        }
                    }
                    return true;
                }
                p = spec.step(p);
            }
            false
        })
        .count();
    Ok(BasinReport {
        sink,
        trap,
        n_max,
        grid_size: grid.len(),
        captured,
        fraction: if grid.is_empty() { 0.0 } else { captured as f64 / grid.len() as f64 },
    })
}

/// `n` cell midpoints of `[lo, hi]`.
pub fn midpoint_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

/// Orbit of `t` under the map, `n` points, advanced with pole-accurate steps.
pub fn orbit(spec: &UnimodalSpec, t: f64, n: usize) -> Vec<IntervalPoint> {
    let mut out = Vec::with_capacity(n);
    let mut p = IntervalPoint::new(t);
    for _ in 0..n {
        out.push(p);
        p = spec.step(p);
    }
    out
}

pub const INTEGRABILITY_CHECKPOINTS: [usize; 3] = [10_000, 100_000, 1_000_000];
pub const INTEGRABILITY_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    /// `(n, mean return time over the first n points)`.
    pub averages: Vec<(usize, f64)>,
    pub relative_differences: Vec<f64>,
    pub converged: bool,
}

/// Running averages of the return time `τ₀ - log|x₁|/λ₁` at the checkpoints
/// `10⁴, 10⁵, 10⁶` that fit in the orbit, and their successive relative
/// differences; converged when every difference is below 5 %.
pub fn log_dist_integrability(x1: &[f64], s: &SaddleSpec) -> Result<IntegrabilityReport> {
    if x1.len() < 100_000 {
        return Err(Error::InsufficientData(format!("{} points, need at least 10^5", x1.len())));
    }
    let mut averages = Vec::new();
    let mut sum = 0.0;
    let mut next = 0;
    for (i, &x) in x1.iter().enumerate() {
        sum += return_time(x, s).map_err(|_| Error::OrbitDegeneracy { index: i, reason: "x1 = 0" })?;
        if next < INTEGRABILITY_CHECKPOINTS.len() && i + 1 == INTEGRABILITY_CHECKPOINTS[next] {
            averages.push((i + 1, sum / (i + 1) as f64));
            next += 1;
        }
    }
    let relative_differences: Vec<f64> =
        averages.windows(2).map(|w| ((w[1].1 - w[0].1) / w[0].1).abs()).collect();
    let converged = relative_differences.iter().all(|&d| d < INTEGRABILITY_TOL);
    Ok(IntegrabilityReport { averages, relative_differences, converged })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceCheck {
    pub observable: String,
    pub mean: f64,
    pub mean_after_map: f64,
    /// Standard error of the paired difference `φ(f(x)) - φ(x)`.
    pub std_error: f64,
    pub within_three_se: bool,
}

/// Monte Carlo invariance check of a sampled measure: for each observable,
/// compares `∫ φ ∘ f` and `∫ φ` through the paired differences.
pub fn invariance_check(
    samples: &[f64],
    map: impl Fn(f64) -> f64 + Sync,
    observables: &[(&str, fn(f64) -> f64)],
) -> Vec<InvarianceCheck> {
    let n = samples.len() as f64;
    let images: Vec<f64> = samples.par_iter().map(|&x| map(x)).collect();
    observables
        .iter()
        .map(|(name, phi)| {
            let mut s0 = 0.0;
            let mut s1 = 0.0;
            let mut sd = 0.0;
            let mut sd2 = 0.0;
            for (&x, &y) in samples.iter().zip(&images) {
                let (a, b) = (phi(x), phi(y));
                s0 += a;
                s1 += b;
                sd += b - a;
                sd2 += (b - a) * (b - a);
            }
            let md = sd / n;
            let var = (sd2 / n - md * md).max(0.0) * n / (n - 1.0);
            let se = (var / n).sqrt();
            InvarianceCheck {
                observable: name.to_string(),
                mean: s0 / n,
                mean_after_map: s1 / n,
                std_error: se,
                within_three_se: md.abs() <= 3.0 * se,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_histogram_is_close_to_uniform() {
        let s = density_histogram(&UnimodalSpec::tent(), 7, 1_000_000, 50).unwrap();
        assert!((s.histogram.total_mass() - 1.0).abs() < 1e-12);
        assert!(s.histogram.total_variation_to_uniform() < 0.02);
        assert_eq!(s.restarts, 0);
    }

    #[test]
    fn f0_mass_concentrates_at_sink() {
        let s = density_histogram(&UnimodalSpec::f0(2.0).unwrap(), 11, 100_000, 50).unwrap();
        let b = s.histogram.bin_of(-1.0);
        assert!(s.histogram.masses[b] >= 0.99);
    }

    #[test]
    fn histogram_rejects_short_runs() {
        assert!(density_histogram(&UnimodalSpec::tent(), 1, 100, 50).is_err());
        assert!(density_histogram(&UnimodalSpec::tent(), 1, 10_000, 5).is_err());
    }

    #[test]
    fn recurrence_trivial_cases() {
        let g = UnimodalSpec::g0(1.5).unwrap();
        assert_eq!(first_critical_visit(&g, 0.0, 0.05, 10), Some(0));
        assert_eq!(first_critical_visit(&g, -1.0, 0.05, 10_000), None);
        let r = recurrence_fraction(&g, 0.05, 100_000, 50, 1).unwrap();
        assert!(r.fraction >= 0.98);
        assert!(recurrence_fraction(&g, 0.6, 10, 50, 1).is_err());
    }

    #[test]
    fn basin_of_f0_sink() {
        let f = UnimodalSpec::f0(2.0).unwrap();
        let (a, b) = contraction_component(&f, -1.0).unwrap();
        assert_eq!(a, -1.0);
        assert!(b > -1.0 && b < 0.0);
        assert!(f.slope(IntervalPoint::new(b)).abs() < 1.0);
        let r = basin_fraction(&f, -1.0, 100, &[a, 0.5 * (a + b), b]).unwrap();
        assert_eq!(r.fraction, 1.0);
        let r = basin_fraction(&f, -1.0, 10_000, &[0.5]).unwrap();
        assert_eq!(r.captured, 0);
        assert!(basin_fraction(&f, 0.5, 10, &[0.1]).is_err());
    }

    #[test]
    fn basin_is_monotone_in_n_max() {
        let f = UnimodalSpec::f0(2.0).unwrap();
        let grid = midpoint_grid(-1.0, 1.0, 2000);
        let mut last = 0;
        for n in [0, 1, 2, 5, 10, 50] {
            let r = basin_fraction(&f, -1.0, n, &grid).unwrap();
            assert!(r.captured >= last);
            last = r.captured;
        }
    }

    #[test]
    fn integrability_cases() {
        let s = SaddleSpec::default();
        let constant = vec![0.4; 200_000];
        let r = log_dist_integrability(&constant, &s).unwrap();
        assert!(r.converged);
        assert!(r.relative_differences.iter().all(|&d| d < 1e-9));
        let geometric: Vec<f64> = (0..200_000).map(|j| (-(j as f64) * 1e-3).exp()).collect();
        let r = log_dist_integrability(&geometric, &s).unwrap();
        assert!(!r.converged);
        assert!(log_dist_integrability(&constant[..10], &s).is_err());
        let mut bad = constant.clone();
        bad[5] = 0.0;
        assert!(matches!(log_dist_integrability(&bad, &s), Err(Error::OrbitDegeneracy { index: 5, .. })));
    }

    #[test]
    fn invariance_of_uniform_under_tent() {
        let mut r = rng::seeded(5);
        let samples: Vec<f64> = (0..200_000).map(|_| 2.0 * r.gen::<f64>() - 1.0).collect();
        let tent = UnimodalSpec::tent();
        let checks = invariance_check(&samples, |x| tent.value(x), &[("x", |x| x), ("x^2", |x| x * x)]);
        assert!(checks.iter().all(|c| c.within_three_se), "{checks:?}");
        // and a non-invariant measure is detected
        let shifted: Vec<f64> = samples.iter().map(|x| 0.5 * x + 0.5).collect();
        let checks = invariance_check(&shifted, |x| tent.value(x), &[("x", |x| x)]);
        assert!(!checks[0].within_three_se);
    }
}
