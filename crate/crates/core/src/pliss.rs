//! Pliss times, hyperbolic times and the two-stage constant pipeline that
//! turns a non-uniform expansion rate plus slow recurrence into a positive
//! frequency of simultaneous hyperbolic times.
//!
//! Indices are 1-based: time `n` refers to the partial sum `a₁ + … + aₙ`.
//! For orbit data `x₀, x₁, …` the term `aⱼ` is built from `x_{j-1}`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute slack on prefix-sum comparisons.
pub const PREFIX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlissParams {
    c1: f64,
    c2: f64,
    h: f64,
}

impl PlissParams {
    /// `H ≥ c₂ > c₁ > 0`.
    pub fn new(c1: f64, c2: f64, h: f64) -> Result<Self> {
        if !(c1 > 0.0) {
            return Err(Error::Domain { name: "c1", value: c1, domain: "(0, inf)" });
        }
        Self::signed(c1, c2, h)
    }

    /// Same ordering `H ≥ c₂ > c₁` without the sign condition, for sequences
    /// such as `-𝔇` that are never positive.
    pub fn signed(c1: f64, c2: f64, h: f64) -> Result<Self> {
        if ![c1, c2, h].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("Pliss constants must be finite"));
        }
        if !(c2 > c1) {
            return Err(Error::invalid(format!("need c2 > c1, got c1 = {c1}, c2 = {c2}")));
        }
        if !(h >= c2) {
            return Err(Error::invalid(format!("need H >= c2, got c2 = {c2}, H = {h}")));
        }
        Ok(Self { c1, c2, h })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `(c₂ - c₁) / (H - c₁)`.
    pub fn zeta(&self) -> f64 {
        (self.c2 - self.c1) / (self.h - self.c1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlissReport {
    pub n: usize,
    pub times: Vec<usize>,
    pub count: usize,
    /// Lower bound for `count` implied by the hypotheses (`ζN` or `θN`), 0 if they failed.
    pub floor: f64,
    pub frequency: f64,
    pub hypothesis_held: bool,
}

impl PlissReport {
    fn new(n: usize, times: Vec<usize>, floor: f64, hypothesis_held: bool) -> Self {
        let count = times.len();
        Self {
            n,
            count,
            frequency: if n == 0 { 0.0 } else { count as f64 / n as f64 },
            times,
            floor,
            hypothesis_held,
        }
    }
}

/// Indices `n` with `Sₙ ≥ Sₘ` for all `0 ≤ m < n`, where `Sₘ = Σ_{j≤m}(aⱼ - c₁)`.
fn pliss_indices(a: &[f64], c1: f64) -> Vec<usize> {
    let mut times = Vec::new();
    let mut s = 0.0;
    let mut best = 0.0_f64;
    for (j, &aj) in a.iter().enumerate() {
        s += aj - c1;
        if s >= best - PREFIX_TOL {
            times.push(j + 1);
        }
        best = best.max(s);
    }
    times
}

/// Times `n` at which every backward block average satisfies
/// `Σ_{j=m+1}^{n} aⱼ ≥ c₁(n - m)`.
pub fn pliss_times(a: &[f64], params: &PlissParams) -> Result<PlissReport> {
    if let Some((j, &v)) = a.iter().enumerate().find(|(_, &v)| !(v <= params.h)) {
        return Err(Error::Hypothesis(format!("a[{}] = {v} exceeds H = {}", j + 1, params.h)));
    }
    let n = a.len();
    let total: f64 = a.iter().sum();
    let held = n > 0 && total >= params.c2 * n as f64;
    let floor = if held { params.zeta() * n as f64 } else { 0.0 };
    Ok(PlissReport::new(n, pliss_indices(a, params.c1), floor, held))
}

/// `-log(dist)` inside the `δ`-neighbourhood, 0 outside.
pub fn truncated_log_distance(dist: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain { name: "delta", value: delta, domain: "(0, inf)" });
    }
    if !(dist >= 0.0) {
        return Err(Error::Domain { name: "dist", value: dist, domain: "[0, inf)" });
    }
    if dist == 0.0 {
        return Err(Error::InfiniteRecurrence);
    }
    Ok(if dist <= delta { -dist.ln() } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicTimeParams {
    c: f64,
    delta: f64,
    b: f64,
    beta: f64,
}

impl HyperbolicTimeParams {
    /// Requires `c, δ, β > 0` and `0 < b < min{1/2, 1/(4β)}`.
    pub fn new(c: f64, delta: f64, b: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Domain { name: "c", value: c, domain: "(0, inf)" });
        }
        if !(delta > 0.0) {
            return Err(Error::Domain { name: "delta", value: delta, domain: "(0, inf)" });
        }
        if !(beta > 0.0) {
            return Err(Error::Domain { name: "beta", value: beta, domain: "(0, inf)" });
        }
        let cap = Self::b_cap(beta);
        if !(b > 0.0 && b < cap) {
            return Err(Error::invalid(format!("need 0 < b < min(1/2, 1/(4 beta)) = {cap}, got {b}")));
        }
        Ok(Self { c, delta, b, beta })
    }

    pub fn b_cap(beta: f64) -> f64 {
        0.5_f64.min(1.0 / (4.0 * beta))
    }

    /// Half of the admissible cap.
    pub fn default_b(beta: f64) -> f64 {
        0.5 * Self::b_cap(beta)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

// Pliss fraction for a sequence with floor c1, using its mean and max as c2, H
fn empirical_zeta(a: &[f64], c1: f64) -> Option<f64> {
    if a.is_empty() {
        return None;
    }
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let h = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    PlissParams::signed(c1, mean, h.max(mean)).ok().map(|p| p.zeta())
}

/// Times `h ∈ 1..=N` with `Σ_{j=h-k}^{h-1} ψⱼ ≤ -ck` and `Σ_{j=h-k}^{h-1} Dⱼ ≤ bck`
/// for every `1 ≤ k ≤ h`.
///
/// The reported floor is `(ζ₁ + ζ₂ - 1)N`, where `ζ₁`, `ζ₂` are the Pliss
/// fractions of the two sequences with their own means and maxima.
pub fn hyperbolic_times(psi: &[f64], d: &[f64], params: &HyperbolicTimeParams) -> Result<PlissReport> {
    if psi.len() != d.len() {
        return Err(Error::LengthMismatch { left: psi.len(), right: d.len() });
    }
    let a1: Vec<f64> = psi.iter().map(|v| -v).collect();
    let a2: Vec<f64> = d.iter().map(|v| -v).collect();
    let bc = params.b * params.c;
    let times = intersect(&pliss_indices(&a1, params.c), &pliss_indices(&a2, -bc));
    let n = psi.len();
    let (floor, held) = match (empirical_zeta(&a1, params.c), empirical_zeta(&a2, -bc)) {
        (Some(z1), Some(z2)) => (((z1 + z2 - 1.0) * n as f64).max(0.0), true),
        _ => (0.0, false),
    };
    Ok(PlissReport::new(n, times, floor, held))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abv0Params {
    /// Expansion rate `c` in `limsup (1/n) Sₙψ ≤ -c`.
    pub c: f64,
    pub xi: f64,
    /// Target `ζ` capping `ε₂`.
    pub zeta: f64,
    /// Recurrence weight `b`.
    pub b: f64,
}

/// Truncation radii tried, largest first.
pub const RADIUS_LADDER: [f64; 15] = [
    0.2, 0.1, 0.05, 0.02, 0.01, 5e-3, 2e-3, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-10, 1e-12,
];

/// Points with distance below this radius feed the `ρ` estimate.
pub const RHO_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abv0Constants {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub rho: f64,
    pub eps1: f64,
    pub r1: f64,
    pub h1: f64,
    pub theta1: f64,
    pub eps2: f64,
    pub r2: f64,
    pub theta2: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Abv0Outcome {
    pub report: PlissReport,
    pub constants: Abv0Constants,
    /// Name of the first empirically violated hypothesis, if any.
    pub hypothesis_failure: Option<String>,
}

fn mean_truncated(dist: &[f64], r: f64) -> Result<f64> {
    let mut s = 0.0;
    for &x in dist {
        s += truncated_log_distance(x, r)?;
    }
    Ok(s / dist.len() as f64)
}

fn first_radius_below(dist: &[f64], eps: f64) -> Result<Option<f64>> {
    for &r in &RADIUS_LADDER {
        if mean_truncated(dist, r)? <= eps {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Two successive Pliss applications, the first on the cut-off expansion
/// sequence and the second on the truncated recurrence sequence, with every
/// intermediate constant recorded.
///
/// `psi[j] = log‖Df(xⱼ)⁻¹‖` and `dist[j]` is the distance of `xⱼ` to the
/// critical set. Violated hypotheses are reported in the outcome.
pub fn abv0_pipeline(psi: &[f64], dist: &[f64], params: &Abv0Params) -> Result<Abv0Outcome> {
    if psi.len() != dist.len() {
        return Err(Error::LengthMismatch { left: psi.len(), right: dist.len() });
    }
    let Abv0Params { c, xi, zeta, b } = *params;
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain { name: "xi", value: xi, domain: "(0, 1)" });
    }
    if !(c > 0.0) {
        return Err(Error::Domain { name: "c", value: c, domain: "(0, inf)" });
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::Domain { name: "zeta", value: zeta, domain: "(0, 1)" });
    }
    if !(b > 0.0 && b < 0.5) {
        return Err(Error::Domain { name: "b", value: b, domain: "(0, 1/2)" });
    }
    let n = psi.len();
    if n == 0 {
        return Err(Error::InsufficientData("empty orbit".into()));
    }
    let nf = n as f64;

    let gamma0 = (2.0 + xi) / 3.0;
    let gamma2 = (1.0 - xi) / 3.0;
    let gamma1 = gamma2;
    let gamma3 = gamma0 - gamma2;
    let mut k = Abv0Constants {
        gamma0,
        gamma1,
        gamma2,
        gamma3,
        rho: f64::NAN,
        eps1: f64::NAN,
        r1: f64::NAN,
        h1: f64::NAN,
        theta1: f64::NAN,
        eps2: f64::NAN,
        r2: f64::NAN,
        theta2: f64::NAN,
        theta: f64::NAN,
    };
    let fail = |k: Abv0Constants, what: String| {
        Ok(Abv0Outcome {
            report: PlissReport::new(n, Vec::new(), 0.0, false),
            constants: k,
            hypothesis_failure: Some(what),
        })
    };

    let sum_psi: f64 = psi.iter().sum();
    if sum_psi > -gamma0 * c * nf {
        return fail(k, format!("expansion: S_N psi = {sum_psi} > -gamma0 c N = {}", -gamma0 * c * nf));
    }

    // |ψ| ≤ ρ |log dist| near the critical set
    let mut rho: f64 = 0.0;
    for (&p, &x) in psi.iter().zip(dist) {
        if x == 0.0 {
            return Err(Error::InfiniteRecurrence);
        }
        if x < RHO_RADIUS {
            rho = rho.max(p.abs() / -x.ln());
        }
    }
    if rho == 0.0 {
        rho = 1.0;
    }
    k.rho = rho;
    k.eps1 = gamma1 * c / rho;
    let Some(r1) = first_radius_below(dist, k.eps1)? else {
        return fail(k, format!("slow recurrence: no radius gives mean D_r <= eps1 = {}", k.eps1));
    };
    k.r1 = r1;
    let sup_off = psi
        .iter()
        .zip(dist)
        .filter(|(_, &x)| x >= r1)
        .map(|(p, _)| p.abs())
        .fold(0.0, f64::max);
    k.h1 = c.max(rho * r1.ln().abs()).max(sup_off);

    let a1: Vec<f64> = psi.iter().map(|&p| if p >= -k.h1 { -p } else { 0.0 }).collect();
    let s1: f64 = a1.iter().sum();
    if s1 < gamma3 * c * nf {
        return fail(k, format!("cut-off expansion: sum a = {s1} < gamma3 c N = {}", gamma3 * c * nf));
    }
    let p1 = PlissParams::new(xi * c, gamma3 * c, k.h1)?;
    k.theta1 = gamma2 * c / (k.h1 - xi * c);
    let run1 = pliss_times(&a1, &p1)?;

    let bc = b * c;
    k.eps2 = 0.5 * zeta.min(bc * k.theta1);
    k.theta2 = 1.0 - k.eps2 / bc;
    k.theta = k.theta1 + k.theta2 - 1.0;
    let Some(r2) = first_radius_below(dist, k.eps2)? else {
        return fail(k, format!("slow recurrence: no radius gives mean D_r <= eps2 = {}", k.eps2));
    };
    k.r2 = r2;
    let mut a2 = Vec::with_capacity(n);
    for &x in dist {
        a2.push(-truncated_log_distance(x, r2)?);
    }
    let p2 = PlissParams::signed(-bc, -k.eps2, 0.0)?;
    let run2 = pliss_times(&a2, &p2)?;

    let times = intersect(&run1.times, &run2.times);
    Ok(Abv0Outcome {
        report: PlissReport::new(n, times, k.theta * nf, true),
        constants: k,
        hypothesis_failure: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InducedBoundCheck {
    pub k_checked: usize,
    /// First `k` (1-based) with `Σ_{i<k}(qᵢ + pᵢ) > k N/(1 - ρC)`.
    pub first_violation: Option<usize>,
    /// Largest ratio of the partial sum to its bound.
    pub max_ratio: f64,
}

/// Checks `Σ_{i<k}(qᵢ + pᵢ) ≤ k N/(1 - ρC)` for every `k`, without any hypothesis.
pub fn induced_bound_scan(q: &[f64], p: &[f64], n_cap: f64, c_slope: f64, rho: f64) -> Result<InducedBoundCheck> {
    if q.len() != p.len() {
        return Err(Error::LengthMismatch { left: q.len(), right: p.len() });
    }
    let rc = rho * c_slope;
    if !(rc > 0.0 && rc < 1.0) {
        return Err(Error::invalid(format!("need 0 < rho C < 1, got {rc}")));
    }
    let slope = n_cap / (1.0 - rc);
    let mut total = 0.0;
    let mut first = None;
    let mut max_ratio: f64 = 0.0;
    for (i, (qi, pi)) in q.iter().zip(p).enumerate() {
        total += qi + pi;
        let k = (i + 1) as f64;
        let bound = k * slope;
        max_ratio = max_ratio.max(total / bound);
        if first.is_none() && total > bound * (1.0 + 1e-12) {
            first = Some(i + 1);
        }
    }
    Ok(InducedBoundCheck { k_checked: q.len(), first_violation: first, max_ratio })
}

/// Verifies the hypotheses entrywise (`qᵢ ≤ N`, `pᵢ ≤ C Dᵢ`, and the
/// recurrence budget `Σ_{i<k} Dᵢ ≤ ρ Σ_{i<k}(qᵢ + pᵢ)`) and then the bound.
pub fn induced_time_bound(
    q: &[f64],
    p: &[f64],
    d_at_entries: &[f64],
    n_cap: f64,
    c_slope: f64,
    rho: f64,
) -> Result<InducedBoundCheck> {
    if d_at_entries.len() != q.len() {
        return Err(Error::LengthMismatch { left: q.len(), right: d_at_entries.len() });
    }
    let slack = 1.0 + 1e-12;
    let mut time = 0.0;
    let mut dsum = 0.0;
    for i in 0..q.len() {
        if !(q[i] >= 0.0 && q[i] <= n_cap) {
            return Err(Error::Hypothesis(format!("q[{i}] = {} exceeds N = {n_cap}", q[i])));
        }
        if !(p[i] >= 0.0 && p[i] <= c_slope * d_at_entries[i] * slack) {
            return Err(Error::Hypothesis(format!(
                "p[{i}] = {} exceeds C D = {}",
                p[i],
                c_slope * d_at_entries[i]
            )));
        }
        time += q[i] + p[i];
        dsum += d_at_entries[i];
        if dsum > rho * time * slack {
            return Err(Error::Hypothesis(format!(
                "recurrence budget: sum D = {dsum} exceeds rho * time = {} at k = {}",
                rho * time,
                i + 1
            )));
        }
    }
    induced_bound_scan(q, p, n_cap, c_slope, rho)
}
