//! One-dimensional unimodal maps of the interval I = [-1, 1].
//!
//! Four families are available: the Misiurewicz-type map `G0` (critical order
//! between 1 and 2, critical value 1 landing on the repelling fixed point -1),
//! the map `F0` with an attracting fixed point at -1, the tent map, and the
//! `Perturbed` quotient, which is `G0` conjugated by an affine change of
//! coordinates onto a subinterval `[lower, 1]`.
//!
//! Orbits are advanced on [`IntervalPoint`]s, which carry `1 - |t|` alongside
//! `t`. Near the poles `t = ±1` that quantity is computed from closed forms
//! instead of by subtraction, so an orbit passing through `0 -> 1 -> -1` is
//! not rounded onto the fixed point `-1`.

mod conjugacy;
mod fixed_points;

pub use conjugacy::{solve_conjugacy, ConjugacyOperator, ConjugacyTable};
pub use fixed_points::{FixedPoint, FixedPointReport, Stability};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance of the fixed-point solver used for structural validation.
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    G0,
    F0,
    Tent,
    Perturbed,
}

/// Right branch of `G0` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RightBranch {
    /// `1 - 2[t(2 - t)]^α`. Derivative vanishes at `t = 1`.
    #[default]
    Folded,
    /// `1 - 2 t^α`, mirror image of the left branch.
    Symmetric,
}

/// A validated unimodal map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnimodalSpec {
    kind: MapKind,
    alpha: f64,
    right_branch: RightBranch,
    lower: f64,
}

/// A point of the interval together with its distance `1 - |t|` to the nearest pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPoint {
    t: f64,
    gap: f64,
}

impl IntervalPoint {
    pub fn new(t: f64) -> Self {
        Self {
            t,
            gap: 1.0 - t.abs(),
        }
    }

    /// Point at distance `gap` from the pole with the sign of `sign`.
    pub fn near_pole(sign: f64, gap: f64) -> Self {
        let t = if sign < 0.0 { gap - 1.0 } else { 1.0 - gap };
        Self { t, gap }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }
}

/// Symbol of an itinerary: left of, at, or right of the turning point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    L,
    C,
    R,
}

impl std::fmt::Display for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self {
            Symbol::L => 'L',
            Symbol::C => 'C',
            Symbol::R => 'R',
        };
        write!(f, "{c}")
    }
}

// 1 - (1 - eps)^a without cancellation.
fn one_minus_pow(eps: f64, a: f64) -> f64 {
    -(a * (-eps).ln_1p()).exp_m1()
}

impl UnimodalSpec {
    /// Builds and validates a map. `right_branch` only matters for `G0` and
    /// `Perturbed`; `lower` only for `Perturbed`.
    pub fn new(kind: MapKind, alpha: f64, right_branch: RightBranch, lower: f64) -> Result<Self> {
        let spec = match kind {
            MapKind::G0 => {
                check_alpha(alpha, 1.0, false)?;
                Self { kind, alpha, right_branch, lower: -1.0 }
            }
            MapKind::F0 => {
                check_alpha(alpha, 2.0, true)?;
                Self { kind, alpha, right_branch: RightBranch::Symmetric, lower: -1.0 }
            }
            MapKind::Tent => Self { kind, alpha: 1.0, right_branch: RightBranch::Symmetric, lower: -1.0 },
            MapKind::Perturbed => {
                check_alpha(alpha, 1.0, false)?;
                if !(lower > -1.0 && lower < 1.0) {
                    return Err(Error::Domain { name: "lower", value: lower, domain: "(-1, 1)" });
                }
                Self { kind, alpha, right_branch, lower }
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn g0(alpha: f64) -> Result<Self> {
        Self::new(MapKind::G0, alpha, RightBranch::Folded, -1.0)
    }

    pub fn g0_with_branch(alpha: f64, branch: RightBranch) -> Result<Self> {
        Self::new(MapKind::G0, alpha, branch, -1.0)
    }

    pub fn f0(alpha: f64) -> Result<Self> {
        Self::new(MapKind::F0, alpha, RightBranch::Symmetric, -1.0)
    }

    pub fn tent() -> Self {
        Self { kind: MapKind::Tent, alpha: 1.0, right_branch: RightBranch::Symmetric, lower: -1.0 }
    }

    pub fn perturbed(alpha: f64, branch: RightBranch, lower: f64) -> Result<Self> {
        Self::new(MapKind::Perturbed, alpha, branch, lower)
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn right_branch(&self) -> RightBranch {
        self.right_branch
    }

    /// Left end of the invariant interval (`-1` except for `Perturbed`).
    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn critical_point(&self) -> f64 {
        match self.kind {
            MapKind::Perturbed => 0.5 * (1.0 + self.lower),
            _ => 0.0,
        }
    }

    fn inner_g0(&self) -> Self {
        Self { kind: MapKind::G0, alpha: self.alpha, right_branch: self.right_branch, lower: -1.0 }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < self.lower || t > 1.0 {
            return Err(Error::Domain {
                name: "t",
                value: t,
                domain: "the invariant interval of the map",
            });
        }
        Ok(())
    }

    /// Map value at `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.step(IntervalPoint::new(t)).t)
    }

    /// Analytic derivative at `t`; the turning point is rejected.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        if t == self.critical_point() {
            return Err(Error::NonDifferentiable(t));
        }
        Ok(self.slope(IntervalPoint::new(t)))
    }

    /// Unchecked value for hot loops; `t` must lie in the invariant interval.
    pub fn value(&self, t: f64) -> f64 {
        self.step(IntervalPoint::new(t)).t
    }

    /// Advances a point, keeping `1 - |t|` accurate near the poles.
    pub fn step(&self, p: IntervalPoint) -> IntervalPoint {
        let a = self.alpha;
        match self.kind {
            MapKind::Tent => {
                let s = p.t.abs();
                if s <= 0.5 {
                    IntervalPoint { t: 1.0 - 2.0 * s, gap: 2.0 * s }
                } else {
                    IntervalPoint::near_pole(-1.0, 2.0 * p.gap)
                }
            }
            MapKind::G0 => {
                // w in [0,1] and 1 - w, both accurate
                let (w, one_minus_w) = if p.t >= 0.0 {
                    match self.right_branch {
                        RightBranch::Folded => {
                            let w = if p.t < 0.5 { p.t * (2.0 - p.t) } else { 1.0 - p.gap * p.gap };
                            (w, p.gap * p.gap)
                        }
                        RightBranch::Symmetric => (p.t, p.gap),
                    }
                } else {
                    (-p.t, p.gap)
                };
                power_branch(w, one_minus_w, a)
            }
            MapKind::F0 => {
                if p.t >= 0.0 {
                    power_branch(p.t, p.gap, a)
                } else {
                    let u = (-p.t).powf(a);
                    let val = 1.0 - 6.0 * u * u + 4.0 * u * u * u;
                    if val >= 0.0 {
                        IntervalPoint { t: val, gap: 2.0 * u * u * (3.0 - 2.0 * u) }
                    } else {
                        let omu = one_minus_pow(p.gap, a);
                        IntervalPoint::near_pole(-1.0, 2.0 * omu * omu * (1.0 + 2.0 * u))
                    }
                }
            }
            MapKind::Perturbed => {
                let width = 1.0 - self.lower;
                let inner_in = self.inner_point(p);
                let inner = self.inner_g0().step(inner_in);
                if inner.t >= 0.0 {
                    let gap = 0.5 * width * inner.gap;
                    if gap <= 1.0 {
                        return IntervalPoint::near_pole(1.0, gap);
                    }
                    return IntervalPoint::new(1.0 - gap);
                }
                // measured from the left end, which is a fixed point
                IntervalPoint::new(self.lower + 0.5 * width * inner.gap)
            }
        }
    }

    /// Derivative at a point; the limit value 0 at the turning point for the
    /// smooth families, NaN for the tent map.
    pub fn slope(&self, p: IntervalPoint) -> f64 {
        let a = self.alpha;
        match self.kind {
            MapKind::Tent => {
                if p.t > 0.0 {
                    -2.0
                } else if p.t < 0.0 {
                    2.0
                } else {
                    f64::NAN
                }
            }
            MapKind::G0 => {
                if p.t >= 0.0 {
                    match self.right_branch {
                        RightBranch::Folded => {
                            let w = if p.t < 0.5 { p.t * (2.0 - p.t) } else { 1.0 - p.gap * p.gap };
                            -4.0 * a * w.powf(a - 1.0) * p.gap
                        }
                        RightBranch::Symmetric => -2.0 * a * p.t.powf(a - 1.0),
                    }
                } else {
                    2.0 * a * (-p.t).powf(a - 1.0)
                }
            }
            MapKind::F0 => {
                if p.t >= 0.0 {
                    -2.0 * a * p.t.powf(a - 1.0)
                } else {
                    let s = -p.t;
                    let u = s.powf(a);
                    let omu = one_minus_pow(p.gap, a);
                    12.0 * a * u * omu * s.powf(a - 1.0)
                }
            }
            MapKind::Perturbed => {
                let inner_in = self.inner_point(p);
                self.inner_g0().slope(inner_in)
            }
        }
    }

    // affine chart of the perturbed map onto [-1, 1]
    fn inner_point(&self, p: IntervalPoint) -> IntervalPoint {
        let width = 1.0 - self.lower;
        if p.t >= self.critical_point() {
            IntervalPoint::near_pole(1.0, 2.0 * p.gap / width)
        } else {
            IntervalPoint::near_pole(-1.0, 2.0 * (p.t - self.lower) / width)
        }
    }

    /// Symbols of the first `n` points of the orbit of `t` (the point itself first).
    pub fn itinerary(&self, t: f64, n: usize) -> Result<Vec<Symbol>> {
        self.check_domain(t)?;
        let c = self.critical_point();
        let mut p = IntervalPoint::new(t);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(if p.t < c {
                Symbol::L
            } else if p.t > c {
                Symbol::R
            } else {
                Symbol::C
            });
            if i + 1 < n {
                p = self.step(p);
            }
        }
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let lo = self.lower;
        let c = self.critical_point();
        let v_lo = self.value(lo);
        let v_hi = self.value(1.0);
        let v_c = self.value(c);
        let tol = 1e-12;
        if (v_lo - lo).abs() > tol || (v_hi - lo).abs() > tol {
            return Err(Error::Structure(format!(
                "endpoint values {v_lo}, {v_hi} differ from {lo}"
            )));
        }
        if (v_c - 1.0).abs() > tol {
            return Err(Error::Structure(format!("critical value {v_c} differs from 1")));
        }
        self.find_fixed_points(STRUCTURE_TOL)?;
        Ok(())
    }
}

// value of 1 - 2 w^a given w and 1 - w
fn power_branch(w: f64, one_minus_w: f64, a: f64) -> IntervalPoint {
    let v = w.powf(a);
    if v <= 0.5 {
        IntervalPoint { t: 1.0 - 2.0 * v, gap: 2.0 * v }
    } else {
        IntervalPoint::near_pole(-1.0, 2.0 * one_minus_pow(one_minus_w, a))
    }
}

fn check_alpha(alpha: f64, min: f64, inclusive: bool) -> Result<()> {
    let ok = if inclusive { alpha >= min } else { alpha > min };
    if !ok || !alpha.is_finite() {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            domain: if inclusive { "[2, inf)" } else { "(1, inf)" },
        });
    }
    Ok(())
}
