use serde::{Deserialize, Serialize};

use super::{MapKind, UnimodalSpec};
use crate::{Error, Result};

const SCAN_NODES: usize = 10_000;
// multipliers this close to 1 in modulus are treated as neutral
const NEUTRAL_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Attracting,
    Repelling,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: f64,
    pub multiplier: f64,
    pub stability: Stability,
}

/// Fixed points in increasing order. Serializes as a JSON array of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixedPointReport {
    pub points: Vec<FixedPoint>,
}

impl FixedPointReport {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fixed point with the largest location (the interior orientation-reversing one
    /// for `G0` and `Tent`, `p₂` for `F0`).
    pub fn rightmost(&self) -> Option<FixedPoint> {
        self.points.last().copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixed point report serializes")
    }
}

impl UnimodalSpec {
    /// Number of fixed points the family is built to have.
    pub fn expected_fixed_points(&self) -> usize {
        match self.kind() {
            MapKind::F0 => 3,
            _ => 2,
        }
    }

    /// Scans for sign changes of `f(x) - x`, refines each by bisection and
    /// checks the count against the family's declared structure.
    pub fn find_fixed_points(&self, tol: f64) -> Result<FixedPointReport> {
        if !(tol > 0.0) {
            return Err(Error::Domain { name: "tol", value: tol, domain: "(0, inf)" });
        }
        let lo = self.lower();
        let node = |i: usize| lo + (1.0 - lo) * i as f64 / SCAN_NODES as f64;
        let resid = |x: f64| self.value(x) - x;

        let mut roots = Vec::new();
        let mut prev_x = node(0);
        let mut prev_f = resid(prev_x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        }
        for i in 1..=SCAN_NODES {
            let x = node(i);
            let f = resid(x);
            if f == 0.0 {
                roots.push(x);
            } else if prev_f != 0.0 && (prev_f < 0.0) != (f < 0.0) {
                roots.push(bisect(&resid, prev_x, x, prev_f));
            }
            prev_x = x;
            prev_f = f;
        }

        let mut points = Vec::with_capacity(roots.len());
        for x in roots {
            let r = resid(x).abs();
            if r >= tol {
                return Err(Error::Structure(format!(
                    "fixed point candidate {x} has residual {r:e} above {tol:e}"
                )));
            }
            let multiplier = self.slope(super::IntervalPoint::new(x));
            let stability = if (multiplier.abs() - 1.0).abs() <= NEUTRAL_BAND {
                Stability::Neutral
            } else if multiplier.abs() < 1.0 {
                Stability::Attracting
            } else {
                Stability::Repelling
            };
            if (multiplier - 1.0).abs() <= NEUTRAL_BAND {
                return Err(Error::Structure(format!(
                    "tangential (double) fixed point near {x}"
                )));
            }
            points.push(FixedPoint { location: x, multiplier, stability });
        }

        let want = self.expected_fixed_points();
        if points.len() != want {
            return Err(Error::Structure(format!(
                "found {} fixed points, the {:?} family requires {want}",
                points.len(),
                self.kind()
            )));
        }
        Ok(FixedPointReport { points })
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    // run to floating-point adjacency; 200 halvings is far more than needed
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}
