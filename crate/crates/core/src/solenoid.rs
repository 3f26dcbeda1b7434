//! Solenoid skew product on the solid torus `𝕋ᵏ × 𝔻`:
//! `S(Θ, z) = (2Θ mod 2π, λz + c·e^{iθ₁})`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::export::csv_document;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolenoidSpec {
    k: usize,
    lambda: f64,
    c: f64,
}

impl Default for SolenoidSpec {
    fn default() -> Self {
        Self { k: 1, lambda: 0.1, c: 0.5 }
    }
}

impl SolenoidSpec {
    /// Requires `k ≥ 1`, `0 < λ < c < 1` and `λ + c < 1`.
    pub fn new(k: usize, lambda: f64, c: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("torus dimension k must be at least 1"));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Domain { name: "lambda", value: lambda, domain: "(0, 1)" });
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Domain { name: "c", value: c, domain: "(0, 1)" });
        }
        if lambda + c >= 1.0 {
            return Err(Error::invalid(format!("lambda + c = {} must be below 1", lambda + c)));
        }
        // the two branches over a common angle land 2c apart up to 2λ
        if lambda >= c {
            return Err(Error::invalid(format!("lambda = {lambda} must be below c = {c}")));
        }
        Ok(Self { k, lambda, c })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Fiber map `A_Θ(z) = λz + c·e^{iθ₁}`.
    pub fn fiber_map(&self, theta1: f64, z: Complex64) -> Complex64 {
        self.lambda * z + self.c * Complex64::from_polar(1.0, theta1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolidTorusState {
    pub theta: Vec<f64>,
    pub z: Complex64,
}

impl SolidTorusState {
    pub fn new(theta: Vec<f64>, z: Complex64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("torus dimension k must be at least 1"));
        }
        if !(z.norm() <= 1.0) {
            return Err(Error::Domain { name: "|z|", value: z.norm(), domain: "[0, 1]" });
        }
        Ok(Self { theta: theta.into_iter().map(|a| a.rem_euclid(TAU)).collect(), z })
    }
}

fn double_angle(a: f64) -> f64 {
    let r = (2.0 * a).rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub fn step_s(p: &SolidTorusState, spec: &SolenoidSpec) -> SolidTorusState {
    SolidTorusState {
        z: spec.fiber_map(p.theta[0], p.z),
        theta: p.theta.iter().map(|&a| double_angle(a)).collect(),
    }
}

/// Upper bound `2λⁿ` on the diameter of the `n`-th image of a fiber disk.
pub fn fiber_diameter_bound(n: u32, spec: &SolenoidSpec) -> f64 {
    2.0 * spec.lambda.powi(n as i32)
}

/// Diameter of the `n`-th image of `m` equally spaced boundary points of the
/// fiber over `theta`.
pub fn empirical_fiber_diameter(n: u32, spec: &SolenoidSpec, theta: &[f64], m: usize) -> Result<f64> {
    let mut pts: Vec<SolidTorusState> = (0..m)
        .map(|j| SolidTorusState::new(theta.to_vec(), Complex64::from_polar(1.0, TAU * j as f64 / m as f64)))
        .collect::<Result<_>>()?;
    for _ in 0..n {
        for p in pts.iter_mut() {
            *p = step_s(p, spec);
        }
    }
    let mut diam: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            diam = diam.max((pts[i].z - pts[j].z).norm());
        }
    }
    Ok(diam)
}

/// Centers of the `2ⁿ` disks making up the `n`-th image over angle 0, `k = 1`.
///
/// The preimage angles are `2πm/2ⁿ` and their forward images are evaluated
/// from the exact dyadic numerators.
pub fn image_centers(n: u32, spec: &SolenoidSpec) -> Vec<Complex64> {
    let count = 1u64 << n;
    (0..count)
        .map(|m| {
            let mut z = Complex64::new(0.0, 0.0);
            let mut num = m;
            for _ in 0..n {
                let angle = TAU * num as f64 / count as f64;
                z = spec.fiber_map(angle, z);
                num = (2 * num) % count;
            }
            z
        })
        .collect()
}

/// Number of single-linkage clusters (threshold `3λⁿ`) among the disks of the
/// `n`-th image over angle 0.
pub fn fiber_cluster_count(n: u32, spec: &SolenoidSpec) -> Result<usize> {
    if spec.k != 1 {
        return Err(Error::invalid("cluster counting is implemented for k = 1"));
    }
    if n > 20 {
        return Err(Error::invalid(format!("n = {n} exceeds the cap 20")));
    }
    let threshold = 3.0 * spec.lambda.powi(n as i32);
    let scale = spec.c / (1.0 - spec.lambda);
    if threshold <= 1e3 * f64::EPSILON * scale {
        return Err(Error::invalid(format!(
            "threshold 3 lambda^{n} = {threshold:e} is below the rounding level of the fiber coordinates"
        )));
    }
    let centers = image_centers(n, spec);
    Ok(single_linkage_clusters(&centers, threshold))
}

fn single_linkage_clusters(pts: &[Complex64], threshold: f64) -> usize {
    use std::collections::HashMap;
    let cell = |z: &Complex64| ((z.re / threshold).floor() as i64, (z.im / threshold).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, z) in pts.iter().enumerate() {
        grid.entry(cell(z)).or_default().push(i);
    }
    let mut parent: Vec<usize> = (0..pts.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, z) in pts.iter().enumerate() {
        let (cx, cy) = cell(z);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in bucket {
                        if j > i && (pts[j] - z).norm() <= threshold {
                            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                            if a != b {
                                parent[a] = b;
                            }
                        }
                    }
                }
            }
        }
    }
    (0..pts.len()).filter(|&i| find(&mut parent, i) == i).count()
}

/// Points on the attractor after a burn-in, as CSV `theta1..thetak, re_z, im_z`.
pub fn attractor_samples_csv(spec: &SolenoidSpec, count: usize, burn_in: usize, rng: &mut crate::rng::Rng) -> String {
    let mut header: Vec<String> = (1..=spec.k).map(|j| format!("theta{j}")).collect();
    header.push("re_z".into());
    header.push("im_z".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let theta: Vec<f64> = (0..spec.k).map(|_| rng.gen::<f64>() * TAU).collect();
        let mut p = SolidTorusState { theta, z: Complex64::new(0.0, 0.0) };
        for _ in 0..burn_in {
            p = step_s(&p, spec);
        }
        let mut row = p.theta.clone();
        row.push(p.z.re);
        row.push(p.z.im);
        rows.push(row);
    }
    csv_document(&header_refs, rows)
}
