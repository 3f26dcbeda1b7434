//! Cross-section dynamics of the singular flow: the projection `π₁`, the
//! passages `L±` near the saddle, the re-injections `T±`, the return map `R₀`
//! and its quotients, and return times.
//!
//! A point of the section is stored in parameter form `(x₁, x₂, W)`; the
//! ambient fiber coordinate is `(1 - x₁²)^{1/2} W`. The composition path
//! [`return_map_by_composition`] instead carries the ambient scale through
//! `L±` and `T±` explicitly, so comparing it with the closed form checks that
//! `Ψ±` cancels the scale picked up on the way.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::export::{csv_cells, fmt_f64};
use crate::interval_maps::{MapKind, UnimodalSpec};
use crate::solenoid::{step_s, SolenoidSpec, SolidTorusState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleSpec {
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
    c: f64,
    tau0: f64,
}

impl Default for SaddleSpec {
    fn default() -> Self {
        Self { lambda1: 1.0, lambda2: -4.0, lambda3: -1.5, c: 4.0, tau0: 1.0 }
    }
}

impl SaddleSpec {
    /// Requires `λ₁ > 0 > λ₂, λ₃`, `λ₁ + λ₃ < 0`, `β > α + 2`, `C > 1` and `τ₀ > 0`.
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, c: f64, tau0: f64) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda1.is_finite()) {
            return Err(Error::Domain { name: "lambda1", value: lambda1, domain: "(0, inf)" });
        }
        if !(lambda2 < 0.0 && lambda2.is_finite()) {
            return Err(Error::Domain { name: "lambda2", value: lambda2, domain: "(-inf, 0)" });
        }
        if !(lambda3 < 0.0 && lambda3.is_finite()) {
            return Err(Error::Domain { name: "lambda3", value: lambda3, domain: "(-inf, 0)" });
        }
        if !(lambda1 + lambda3 < 0.0) {
            return Err(Error::invalid("need lambda1 + lambda3 < 0 (alpha > 1)"));
        }
        let s = Self { lambda1, lambda2, lambda3, c, tau0 };
        if !(s.beta() > s.alpha() + 2.0) {
            return Err(Error::invalid(format!(
                "need beta > alpha + 2, got alpha = {}, beta = {}",
                s.alpha(),
                s.beta()
            )));
        }
        if !(c > 1.0 && c.is_finite()) {
            return Err(Error::Domain { name: "C", value: c, domain: "(1, inf)" });
        }
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(Error::Domain { name: "tau0", value: tau0, domain: "(0, inf)" });
        }
        Ok(s)
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn lambda3(&self) -> f64 {
        self.lambda3
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// `-λ₃/λ₁`.
    pub fn alpha(&self) -> f64 {
        -self.lambda3 / self.lambda1
    }

    /// `-λ₂/λ₁`.
    pub fn beta(&self) -> f64 {
        -self.lambda2 / self.lambda1
    }
}

/// Fiber coordinate `W` of a section point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fiber {
    /// Point of the solid torus `𝕋ᵏ × 𝔻` inside the ball.
    SolidTorus(SolidTorusState),
    /// Any other point of the closed ball, in ambient coordinates.
    Ball(Vec<f64>),
}

impl Fiber {
    pub fn solid_torus(theta: Vec<f64>, z: Complex64) -> Result<Self> {
        Ok(Fiber::SolidTorus(SolidTorusState::new(theta, z)?))
    }

    /// Norm used in orbit dumps: `|z|` on the solid torus, Euclidean otherwise.
    pub fn norm(&self) -> f64 {
        match self {
            Fiber::SolidTorus(s) => s.z.norm(),
            Fiber::Ball(w) => w.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionPoint {
    pub x1: f64,
    pub x2: f64,
    pub fiber: Fiber,
}

impl CrossSectionPoint {
    pub fn new(x1: f64, x2: f64, fiber: Fiber) -> Result<Self> {
        if !(x1.abs() <= 1.0) {
            return Err(Error::Domain { name: "x1", value: x1, domain: "[-1, 1]" });
        }
        if !(x2.abs() <= 1.0) {
            return Err(Error::Domain { name: "x2", value: x2, domain: "[-1, 1]" });
        }
        if !(fiber.norm() <= 1.0) {
            return Err(Error::Domain { name: "|W|", value: fiber.norm(), domain: "[0, 1]" });
        }
        Ok(Self { x1, x2, fiber })
    }
}

/// Point of the ambient space: fiber block equal to `scale · W`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub scale: f64,
    pub fiber: Fiber,
}

/// `√(1 - x²)` without cancellation near `|x| = 1`.
fn cosine_scale(x: f64) -> f64 {
    ((1.0 - x) * (1.0 + x)).max(0.0).sqrt()
}

/// `π₁(x₁, x₂, x₃, W) = (x₁, x₂, x₃, (1 - x₁²)^{1/2} W)` on raw ambient vectors.
pub fn pi1(x1: f64, x2: f64, x3: f64, w: &[f64]) -> Result<(f64, f64, f64, Vec<f64>)> {
    if !(x1.abs() <= 1.0) {
        return Err(Error::Domain { name: "x1", value: x1, domain: "[-1, 1]" });
    }
    let s = cosine_scale(x1);
    Ok((x1, x2, x3, w.iter().map(|v| s * v).collect()))
}

/// Section point of `Σ₂` seen in the ambient space, `x₃ = 2`.
pub fn embed_section_point(p: &CrossSectionPoint) -> AmbientPoint {
    AmbientPoint { x1: p.x1, x2: p.x2, x3: 2.0, scale: cosine_scale(p.x1), fiber: p.fiber.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn of(x1: f64) -> Result<Self> {
        if x1 > 0.0 {
            Ok(Branch::Plus)
        } else if x1 < 0.0 {
            Ok(Branch::Minus)
        } else {
            Err(Error::StableManifold)
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Passage near the saddle: `(x₁, x₂, ·, W) ↦ (±1, x₂|x₁|^β, |x₁|^α, |x₁|^α W)`,
/// the branch chosen by the sign of `x₁`.
pub fn l_pm(p: &AmbientPoint, s: &SaddleSpec) -> Result<AmbientPoint> {
    let branch = Branch::of(p.x1)?;
    let r = p.x1.abs();
    let ra = r.powf(s.alpha());
    Ok(AmbientPoint {
        x1: branch.sign(),
        x2: p.x2 * r.powf(s.beta()),
        x3: ra,
        scale: p.scale * ra,
        fiber: p.fiber.clone(),
    })
}

/// Outer branches of `f₀` as functions of `u = |x|^α`.
pub fn psi_branch(branch: Branch, u: f64) -> f64 {
    match branch {
        Branch::Plus => 1.0 - 2.0 * u,
        Branch::Minus => 1.0 - 6.0 * u * u + 4.0 * u * u * u,
    }
}

// 1 - ψ(u)² in factored form
fn one_minus_psi_sq(branch: Branch, u: f64) -> f64 {
    match branch {
        Branch::Plus => 4.0 * u * (1.0 - u),
        Branch::Minus => 4.0 * u * u * (3.0 - 2.0 * u) * (1.0 - u) * (1.0 - u) * (1.0 + 2.0 * u),
    }
}

/// `Ψ±(z) = (1/z) √((1 - ψ±(z)²) / (1 - z^{2/α}))` on `(0, 1)`; the declared
/// endpoint values `Ψ±(0) = ∓1`, `Ψ±(1) = ±1` are returned at the endpoints.
pub fn psi_scale(z3: f64, branch: Branch, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z3) {
        return Err(Error::Domain { name: "z3", value: z3, domain: "[0, 1]" });
    }
    if !(alpha > 1.0) {
        return Err(Error::Domain { name: "alpha", value: alpha, domain: "(1, inf)" });
    }
    if z3 == 0.0 {
        return Ok(-branch.sign());
    }
    if z3 == 1.0 {
        return Ok(branch.sign());
    }
    let denom = -((2.0 / alpha) * z3.ln()).exp_m1();
    Ok((one_minus_psi_sq(branch, z3) / denom).sqrt() / z3)
}

/// Least-squares growth exponent of `Ψ±(z)` against `z` on `z ∈ [a, b]`.
pub fn psi_growth_exponent(branch: Branch, alpha: f64, a: f64, b: f64, samples: usize) -> Result<f64> {
    let mut pts = Vec::with_capacity(samples);
    for i in 0..samples {
        let z = (a.ln() + (b.ln() - a.ln()) * i as f64 / (samples - 1) as f64).exp();
        pts.push((z, psi_scale(z, branch, alpha)?));
    }
    crate::torusphere::loglog_slope(&pts).ok_or_else(|| Error::InsufficientData("degenerate fit".into()))
}

/// Re-injection `(±1, z₂, z₃, V) ↦ (ψ±(z₃), ±1/2 + z₂/C, 2, Ψ±(z₃)V)`, using
/// the magnitude of `Ψ±`.
pub fn t_pm(p: &AmbientPoint, alpha: f64, s: &SaddleSpec) -> Result<AmbientPoint> {
    let branch = Branch::of(p.x1)?;
    if p.x1.abs() != 1.0 {
        return Err(Error::invalid("T± acts on the sections x1 = ±1"));
    }
    if !(0.0..=1.0).contains(&p.x3) {
        return Err(Error::Domain { name: "z3", value: p.x3, domain: "[0, 1]" });
    }
    if !(p.x2.abs() <= 1.0) {
        return Err(Error::Domain { name: "z2", value: p.x2, domain: "[-1, 1]" });
    }
    let big_psi = psi_scale(p.x3, branch, alpha)?.abs();
    Ok(AmbientPoint {
        x1: psi_branch(branch, p.x3),
        x2: 0.5 * branch.sign() + p.x2 / s.c(),
        x3: 2.0,
        scale: p.scale * big_psi,
        fiber: p.fiber.clone(),
    })
}

/// Fiber part of the time-one map: the solenoid step on the solid torus,
/// radial contraction by `λ` elsewhere in the ball.
pub fn phi1(fiber: &Fiber, sol: &SolenoidSpec) -> Result<Fiber> {
    match fiber {
        Fiber::SolidTorus(st) => {
            if st.theta.len() != sol.k() {
                return Err(Error::invalid(format!(
                    "fiber has {} angles, solenoid has k = {}",
                    st.theta.len(),
                    sol.k()
                )));
            }
            Ok(Fiber::SolidTorus(step_s(st, sol)))
        }
        Fiber::Ball(w) => Ok(Fiber::Ball(w.iter().map(|v| sol.lambda() * v).collect())),
    }
}

fn check_f0(f0: &UnimodalSpec, s: &SaddleSpec) -> Result<()> {
    if f0.kind() != MapKind::F0 {
        return Err(Error::invalid("the return map is built over the F0 family"));
    }
    if (f0.alpha() - s.alpha()).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "map alpha {} differs from the saddle alpha -lambda3/lambda1 = {}",
            f0.alpha(),
            s.alpha()
        )));
    }
    Ok(())
}

/// Closed-form return map
/// `R₀(x₁, x₂, W) = (f₀(x₁), sign(x₁)/2 + x₂|x₁|^β/C, φ₁(W))`.
pub fn return_map_r0(
    p: &CrossSectionPoint,
    f0: &UnimodalSpec,
    s: &SaddleSpec,
    sol: &SolenoidSpec,
) -> Result<CrossSectionPoint> {
    check_f0(f0, s)?;
    let branch = Branch::of(p.x1)?;
    Ok(CrossSectionPoint {
        x1: f0.value(p.x1),
        x2: 0.5 * branch.sign() + p.x2 * p.x1.abs().powf(s.beta()) / s.c(),
        fiber: phi1(&p.fiber, sol)?,
    })
}

/// `T± ∘ L±` followed by the fiber map, carried out in ambient form.
pub fn return_map_by_composition(
    p: &CrossSectionPoint,
    f0: &UnimodalSpec,
    s: &SaddleSpec,
    sol: &SolenoidSpec,
) -> Result<AmbientPoint> {
    check_f0(f0, s)?;
    let q = t_pm(&l_pm(&embed_section_point(p), s)?, f0.alpha(), s)?;
    Ok(AmbientPoint { fiber: phi1(&q.fiber, sol)?, ..q })
}

/// `π₂(x₁, x₂, W) = (x₁, (1 - x₁²)^{1/2} z(Θ))` in `ℝ^{1+2k}`.
pub fn pi2(p: &CrossSectionPoint) -> Result<Vec<f64>> {
    let Fiber::SolidTorus(st) = &p.fiber else {
        return Err(Error::ProjectionUndefined);
    };
    let r = cosine_scale(p.x1);
    let mut out = Vec::with_capacity(1 + 2 * st.theta.len());
    out.push(p.x1);
    for &a in &st.theta {
        out.push(r * a.cos());
        out.push(r * a.sin());
    }
    Ok(out)
}

/// `π₃(x₁, x₂, W) = (x₁, Θ)`.
pub fn pi3(p: &CrossSectionPoint) -> Result<(f64, Vec<f64>)> {
    let Fiber::SolidTorus(st) = &p.fiber else {
        return Err(Error::ProjectionUndefined);
    };
    Ok((p.x1, st.theta.clone()))
}

/// The quotient map on the embedded torusphere:
/// `(x, √(1 - x²) z(Θ)) ↦ (f₀(x), √(1 - f₀(x)²) z(2Θ))`.
///
/// Angles are read back from the embedded coordinates; at the poles the torus
/// block is zero and stays zero.
pub fn f_embedded(y: &[f64], f0: &UnimodalSpec) -> Result<Vec<f64>> {
    if y.len() < 3 || y.len().is_multiple_of(2) {
        return Err(Error::invalid("embedded point must have 1 + 2k coordinates"));
    }
    let x = y[0];
    let fx = f0.eval(x)?;
    let r = cosine_scale(fx);
    let mut out = Vec::with_capacity(y.len());
    out.push(fx);
    for pair in y[1..].chunks(2) {
        let a = pair[1].atan2(pair[0]);
        out.push(r * (2.0 * a).cos());
        out.push(r * (2.0 * a).sin());
    }
    Ok(out)
}

/// `τ₀ + (-log|x₁|)/λ₁`.
pub fn return_time(x1: f64, s: &SaddleSpec) -> Result<f64> {
    if x1 == 0.0 {
        return Err(Error::StableManifold);
    }
    if !(x1.abs() <= 1.0) {
        return Err(Error::Domain { name: "x1", value: x1, domain: "[-1, 1]" });
    }
    Ok(s.tau0() - x1.abs().ln() / s.lambda1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuspensionStats {
    pub map_exponent: f64,
    pub mean_return_time: f64,
    pub flow_exponent: f64,
}

/// Divides a map exponent by the mean return time; needs at least 1000 return times.
pub fn suspension_exponent(map_exponent: f64, return_times: &[f64], s: &SaddleSpec) -> Result<SuspensionStats> {
    if return_times.len() < 1000 {
        return Err(Error::InsufficientData(format!(
            "{} return times, need at least 1000",
            return_times.len()
        )));
    }
    if !map_exponent.is_finite() {
        return Err(Error::Domain { name: "map_exponent", value: map_exponent, domain: "finite reals" });
    }
    let mean = return_times.iter().sum::<f64>() / return_times.len() as f64;
    if !(mean >= s.tau0() * (1.0 - 1e-12)) {
        return Err(Error::invalid(format!("mean return time {mean} is below the floor {}", s.tau0())));
    }
    Ok(SuspensionStats { map_exponent, mean_return_time: mean, flow_exponent: map_exponent / mean })
}

/// `x₂`-coordinate of the invariant stable leaf over a fixed point `x₁ = ±p`
/// of `f₀`: solves `y = sign(p)/2 + y|p|^β/C`.
pub fn fixed_leaf_x2(x1_fixed: f64, s: &SaddleSpec) -> Result<f64> {
    let branch = Branch::of(x1_fixed)?;
    Ok(0.5 * branch.sign() / (1.0 - x1_fixed.abs().powf(s.beta()) / s.c()))
}

/// The attracting leaf over `x₁ = -1`: `y* = -C / (2(C - 1))`.
pub fn sink_leaf(s: &SaddleSpec) -> f64 {
    -s.c() / (2.0 * (s.c() - 1.0))
}

/// Orbit dump of `R₀`: `n, x1, x2, norm_w, return_time`.
pub fn return_orbit_csv(
    p: &CrossSectionPoint,
    f0: &UnimodalSpec,
    s: &SaddleSpec,
    sol: &SolenoidSpec,
    n: usize,
) -> Result<String> {
    let mut rows = Vec::with_capacity(n);
    let mut x = p.clone();
    for i in 0..n {
        let tau = return_time(x.x1, s)?;
        rows.push(vec![i.to_string(), fmt_f64(x.x1), fmt_f64(x.x2), fmt_f64(x.fiber.norm()), fmt_f64(tau)]);
        x = return_map_r0(&x, f0, s, sol)?;
    }
    Ok(csv_cells(&["n", "x1", "x2", "norm_w", "return_time"], rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saddle2() -> SaddleSpec {
        SaddleSpec::new(1.0, -4.5, -2.0, 4.0, 1.0).unwrap()
    }

    fn point(x1: f64, x2: f64, theta: f64, z: Complex64) -> CrossSectionPoint {
        CrossSectionPoint::new(x1, x2, Fiber::solid_torus(vec![theta], z).unwrap()).unwrap()
    }

    #[test]
    fn saddle_admissibility() {
        let d = SaddleSpec::default();
        assert_eq!(d.alpha(), 1.5);
        assert_eq!(d.beta(), 4.0);
        assert!(SaddleSpec::new(1.0, -3.0, -1.5, 4.0, 1.0).is_err());
        assert!(SaddleSpec::new(1.0, -4.0, -0.5, 4.0, 1.0).is_err());
        assert!(SaddleSpec::new(1.0, -4.0, -1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn pi1_examples() {
        let w = [0.3, -0.2, 0.5];
        assert_eq!(pi1(1.0, 0.0, 1.0, &w).unwrap().3, vec![0.0; 3]);
        assert_eq!(pi1(-1.0, 0.0, 1.0, &w).unwrap().3, vec![0.0; 3]);
        assert_eq!(pi1(0.0, 0.0, 1.0, &w).unwrap().3, w.to_vec());
        let once = pi1(0.5, 0.0, 1.0, &w).unwrap();
        let twice = pi1(once.0, once.1, once.2, &once.3).unwrap();
        assert_ne!(once.3, twice.3);
    }

    #[test]
    fn l_pm_examples() {
        let s = SaddleSpec::default();
        let w = Fiber::Ball(vec![0.1, 0.2, 0.0]);
        let a = AmbientPoint { x1: 1.0, x2: 0.5, x3: 1.0, scale: 1.0, fiber: w.clone() };
        let q = l_pm(&a, &s).unwrap();
        assert_eq!((q.x1, q.x2, q.x3, q.scale), (1.0, 0.5, 1.0, 1.0));
        let a = AmbientPoint { x1: 0.5, x2: 0.3, x3: 1.0, scale: 0.0, fiber: w.clone() };
        let q = l_pm(&a, &s).unwrap();
        assert_eq!(q.x1, 1.0);
        assert!((q.x2 - 0.3 / 16.0).abs() < 1e-16);
        assert!((q.x3 - 2f64.powf(-1.5)).abs() < 1e-16);
        assert_eq!(q.scale, 0.0);
        let a = AmbientPoint { x1: -0.5, x2: 0.3, x3: 1.0, scale: 1.0, fiber: w.clone() };
        assert_eq!(l_pm(&a, &s).unwrap().x1, -1.0);
        let a = AmbientPoint { x1: 0.0, x2: 0.3, x3: 1.0, scale: 1.0, fiber: w };
        assert_eq!(l_pm(&a, &s), Err(Error::StableManifold));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_scale(1.0, Branch::Plus, 2.0).unwrap().abs(), 1.0);
        assert_eq!(psi_scale(0.0, Branch::Plus, 2.0).unwrap(), -1.0);
        assert_eq!(psi_scale(0.0, Branch::Minus, 2.0).unwrap(), 1.0);
        let v = psi_scale(0.5, Branch::Plus, 2.0).unwrap();
        assert!((v - 2.0 * (0.5f64 / (0.5 * (1.0 - 0.5))).sqrt()).abs() < 1e-14);
        assert!(psi_scale(1.5, Branch::Plus, 2.0).is_err());
    }

    #[test]
    fn psi_limits() {
        // interior limit at 1 is √(2α) for the right branch, √12 at 0 for the left
        let v = psi_scale(1.0 - 1e-9, Branch::Plus, 2.0).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
        let v = psi_scale(1e-9, Branch::Minus, 2.0).unwrap();
        assert!((v - 12f64.sqrt()).abs() < 1e-6);
        let e = psi_growth_exponent(Branch::Plus, 2.0, 1e-8, 1e-3, 40).unwrap();
        assert!((e + 0.5).abs() < 1e-2);
    }

    #[test]
    fn t_pm_examples() {
        let s = SaddleSpec::default();
        let a = AmbientPoint { x1: 1.0, x2: 0.0, x3: 1.0, scale: 0.0, fiber: Fiber::Ball(vec![0.0; 3]) };
        let q = t_pm(&a, 2.0, &s).unwrap();
        assert_eq!(q.x1, -1.0);
        assert_eq!(q.x2, 0.5);
        assert_eq!(q.scale, 0.0);
        for &z2 in &[-1.0, 1.0] {
            let a = AmbientPoint { x1: -1.0, x2: z2, x3: 0.3, scale: 1.0, fiber: Fiber::Ball(vec![0.0; 3]) };
            let q = t_pm(&a, 2.0, &s).unwrap();
            assert!((q.x2 - (-0.5 + z2 / 4.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_and_composition_agree() {
        let f0 = UnimodalSpec::f0(2.0).unwrap();
        let s = saddle2();
        let sol = SolenoidSpec::default();
        for i in 0..200 {
            let x1 = -1.0 + 2.0 * (i as f64 + 0.5) / 200.0;
            let p = point(x1, 0.3 - 0.002 * i as f64, 0.01 * i as f64, Complex64::new(0.2, -0.1));
            let a = return_map_r0(&p, &f0, &s, &sol).unwrap();
            let b = return_map_by_composition(&p, &f0, &s, &sol).unwrap();
            assert!((a.x1 - b.x1).abs() < 1e-12);
            assert!((a.x2 - b.x2).abs() < 1e-12);
            assert!((cosine_scale(a.x1) - b.scale).abs() < 1e-12);
            assert_eq!(a.fiber, b.fiber);
        }
    }

    #[test]
    fn r0_requires_matching_alpha() {
        let f0 = UnimodalSpec::f0(2.0).unwrap();
        let p = point(0.3, 0.0, 0.0, Complex64::new(0.0, 0.0));
        assert!(return_map_r0(&p, &f0, &SaddleSpec::default(), &SolenoidSpec::default()).is_err());
        let q = point(0.0, 0.0, 0.0, Complex64::new(0.0, 0.0));
        assert_eq!(return_map_r0(&q, &f0, &saddle2(), &SolenoidSpec::default()), Err(Error::StableManifold));
    }

    #[test]
    fn sink_leaf_is_fixed() {
        let s = saddle2();
        assert!((sink_leaf(&s) + 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(fixed_leaf_x2(-1.0, &s).unwrap(), sink_leaf(&s));
        let f0 = UnimodalSpec::f0(2.0).unwrap();
        let p = CrossSectionPoint::new(-1.0, sink_leaf(&s), Fiber::Ball(vec![0.0; 3])).unwrap();
        let q = return_map_r0(&p, &f0, &s, &SolenoidSpec::default()).unwrap();
        assert_eq!(q.x1, -1.0);
        assert!((q.x2 - p.x2).abs() < 1e-15);
        let y = fixed_leaf_x2(0.5, &s).unwrap();
        let p = CrossSectionPoint::new(0.5, y, Fiber::Ball(vec![0.0; 3])).unwrap();
        let q = return_map_r0(&p, &f0, &s, &SolenoidSpec::default()).unwrap();
        assert!((q.x2 - y).abs() < 1e-15 && (q.x1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projections() {
        let p = point(1.0, 0.0, 0.4, Complex64::new(0.3, 0.0));
        let e = pi2(&p).unwrap();
        assert_eq!(e[0], 1.0);
        assert_eq!(&e[1..], &[0.0, 0.0]);
        let q = point(1.0, 0.0, 0.4, Complex64::new(-0.6, 0.2));
        assert_eq!(pi2(&p).unwrap(), pi2(&q).unwrap());
        assert_eq!(pi3(&p).unwrap(), pi3(&q).unwrap());
        let b = CrossSectionPoint::new(0.2, 0.0, Fiber::Ball(vec![0.1, 0.0, 0.0])).unwrap();
        assert_eq!(pi2(&b), Err(Error::ProjectionUndefined));
        assert_eq!(pi3(&b), Err(Error::ProjectionUndefined));
    }

    #[test]
    fn return_time_examples() {
        let s = SaddleSpec::default();
        assert_eq!(return_time(1.0, &s).unwrap(), 1.0);
        assert_eq!(return_time(-1.0, &s).unwrap(), 1.0);
        assert!((return_time((-1.0f64).exp(), &s).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(return_time(0.0, &s), Err(Error::StableManifold));
    }

    #[test]
    fn suspension_examples() {
        let s = SaddleSpec::default();
        let st = suspension_exponent(std::f64::consts::LN_2, &vec![2.0; 1000], &s).unwrap();
        assert!((st.flow_exponent - std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
        let st = suspension_exponent(0.4, &vec![1.0; 1000], &s).unwrap();
        assert_eq!(st.flow_exponent, 0.4);
        assert!(suspension_exponent(0.4, &[1.0; 10], &s).is_err());
    }

    #[test]
    fn x2_contraction_by_finite_differences() {
        let f0 = UnimodalSpec::f0(2.0).unwrap();
        let s = saddle2();
        let sol = SolenoidSpec::default();
        for i in 0..100 {
            let x1 = -1.0 + 2.0 * (i as f64 + 0.5) / 100.0;
            let h = 1e-6;
            let a = return_map_r0(&point(x1, 0.1, 0.0, Complex64::new(0.0, 0.0)), &f0, &s, &sol).unwrap();
            let b = return_map_r0(&point(x1, 0.1 + h, 0.0, Complex64::new(0.0, 0.0)), &f0, &s, &sol).unwrap();
            let d = ((b.x2 - a.x2) / h).abs();
            assert!((d - x1.abs().powf(s.beta()) / s.c()).abs() < 1e-8);
            assert!(d <= 1.0 / s.c() + 1e-9);
        }
    }

    #[test]
    fn ball_fiber_contracts_radially() {
        let f = phi1(&Fiber::Ball(vec![0.5, -0.5, 0.2]), &SolenoidSpec::default()).unwrap();
        assert_eq!(f, Fiber::Ball(vec![0.05, -0.05, 0.020000000000000004]));
    }

    #[test]
    fn orbit_csv_layout() {
        let f0 = UnimodalSpec::f0(2.0).unwrap();
        let csv = return_orbit_csv(&point(0.3, 0.0, 0.0, Complex64::new(0.0, 0.0)), &f0, &saddle2(), &SolenoidSpec::default(), 3).unwrap();
        assert!(csv.starts_with("n,x1,x2,norm_w,return_time\n0,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
