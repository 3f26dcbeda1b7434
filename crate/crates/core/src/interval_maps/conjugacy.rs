use super::{IntervalPoint, MapKind, UnimodalSpec};
use crate::export::csv_document;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 200;

/// One sweep of `h ↦ sign(x)(1 - h(g₀(x)))/2` on a fixed uniform grid.
///
/// The images `g₀(xᵢ)` are located in the grid once, so a sweep costs one
/// linear interpolation per node.
#[derive(Debug, Clone)]
pub struct ConjugacyOperator {
    grid: Vec<f64>,
    sign: Vec<f64>,
    cell: Vec<usize>,
    weight: Vec<f64>,
}

impl ConjugacyOperator {
    /// Builds the operator on `2m + 1` equally spaced nodes of `[-1, 1]`,
    /// `m = ceil((grid_size - 1) / 2)`, so that `-1`, `0` and `1` are nodes.
    pub fn new(spec: &UnimodalSpec, grid_size: usize) -> Result<Self> {
        if spec.kind() != MapKind::G0 {
            return Err(Error::invalid("the conjugacy is solved for the G0 family only"));
        }
        if grid_size < 3 {
            return Err(Error::invalid("conjugacy grid needs at least 3 nodes"));
        }
        let m = grid_size.div_ceil(2).max(1);
        let grid = uniform_grid(m);
        let mut sign = Vec::with_capacity(grid.len());
        let mut cell = Vec::with_capacity(grid.len());
        let mut weight = Vec::with_capacity(grid.len());
        for &x in &grid {
            sign.push(if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 });
            let y = spec.value(x);
            let (j, w) = locate(m, y);
            cell.push(j);
            weight.push(w);
        }
        Ok(Self { grid, sign, cell, weight })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        assert_eq!(h.len(), self.grid.len(), "table length must match the grid");
        (0..self.grid.len())
            .map(|i| {
                let j = self.cell[i];
                let w = self.weight[i];
                let hy = if w == 0.0 { h[j] } else { (1.0 - w) * h[j] + w * h[j + 1] };
                self.sign[i] * 0.5 * (1.0 - hy)
            })
            .collect()
    }
}

/// Piecewise-linear approximation of the conjugacy `h` with `h ∘ g₀ = T ∘ h`.
#[derive(Debug, Clone)]
pub struct ConjugacyTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |h(g₀(x)) - (1 - 2|h(x)|)|` over the grid nodes.
    pub residual: f64,
    pub sweeps: usize,
    /// Largest ratio of successive sweep differences that was observed.
    pub contraction_factor: f64,
    spec: UnimodalSpec,
}

impl ConjugacyTable {
    fn m(&self) -> usize {
        (self.grid.len() - 1) / 2
    }

    pub fn spec(&self) -> &UnimodalSpec {
        &self.spec
    }

    /// Linear interpolation of the table at `x ∈ [-1, 1]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let (j, w) = locate(self.m(), x);
        if w == 0.0 {
            self.values[j]
        } else {
            (1.0 - w) * self.values[j] + w * self.values[j + 1]
        }
    }

    /// Unrolls the functional equation `depth` times along the orbit of `x`
    /// before falling back on the table, which divides the table error by `2^depth`.
    pub fn refined(&self, x: f64, depth: usize) -> f64 {
        let mut p = IntervalPoint::new(x);
        let mut acc = 0.0;
        let mut coef = 1.0;
        for _ in 0..depth {
            let s = if p.t() > 0.0 {
                1.0
            } else if p.t() < 0.0 {
                -1.0
            } else {
                return acc;
            };
            // h(x) = s/2 - (s/2) h(g₀ x)
            acc += coef * 0.5 * s;
            coef *= -0.5 * s;
            p = self.spec.step(p);
        }
        acc + coef * self.interpolate(p.t())
    }

    /// Inverse of the (increasing) table, by bisection on the nodes.
    pub fn inverse(&self, y: f64) -> f64 {
        let v = &self.values;
        if y <= v[0] {
            return self.grid[0];
        }
        if y >= v[v.len() - 1] {
            return self.grid[v.len() - 1];
        }
        let j = v.partition_point(|&hv| hv <= y) - 1;
        let w = (y - v[j]) / (v[j + 1] - v[j]);
        (1.0 - w) * self.grid[j] + w * self.grid[j + 1]
    }

    pub fn to_csv(&self) -> String {
        let rows = self
            .grid
            .iter()
            .zip(&self.values)
            .map(|(x, h)| vec![*x, *h]);
        csv_document(&["x", "h_x"], rows)
    }
}

/// Iterates the conjugacy operator from `h₀(x) = x` until successive tables
/// differ by less than `tol / 4`, then checks residual and monotonicity.
pub fn solve_conjugacy(spec: &UnimodalSpec, grid_size: usize, tol: f64) -> Result<ConjugacyTable> {
    if !(tol > 0.0) {
        return Err(Error::Domain { name: "tol", value: tol, domain: "(0, inf)" });
    }
    spec.find_fixed_points(super::STRUCTURE_TOL)?;
    let op = ConjugacyOperator::new(spec, grid_size)?;
    let mut h = op.grid().to_vec();
    let mut prev_diff = f64::NAN;
    let mut factor: f64 = 0.0;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < MAX_SWEEPS {
        let next = op.apply(&h);
        sweeps += 1;
        let diff = sup_dist(&next, &h);
        if prev_diff > 0.0 && diff > 0.0 {
            factor = factor.max(diff / prev_diff);
        }
        h = next;
        prev_diff = diff;
        if diff < 0.25 * tol {
            converged = true;
            break;
        }
    }

    for i in 1..h.len() {
        if h[i] <= h[i - 1] {
            return Err(Error::Degenerate(i));
        }
    }

    let grid = op.grid().to_vec();
    let mut table = ConjugacyTable {
        grid,
        values: h,
        residual: 0.0,
        sweeps,
        contraction_factor: factor,
        spec: *spec,
    };
    table.residual = table
        .grid
        .iter()
        .zip(&table.values)
        .map(|(&x, &hx)| (table.interpolate(spec.value(x)) - (1.0 - 2.0 * hx.abs())).abs())
        .fold(0.0, f64::max);

    if !converged || table.residual >= tol {
        return Err(Error::Convergence(format!(
            "conjugacy residual {:e} after {sweeps} sweeps (tolerance {tol:e})",
            table.residual
        )));
    }
    Ok(table)
}

fn uniform_grid(m: usize) -> Vec<f64> {
    let mf = m as f64;
    (0..=2 * m).map(|i| (i as f64 - mf) / mf).collect()
}

// cell index j and weight w with x = (1 - w) x_j + w x_{j+1}
fn locate(m: usize, x: f64) -> (usize, f64) {
    let n = 2 * m;
    let pos = ((x.clamp(-1.0, 1.0) + 1.0) * m as f64).clamp(0.0, n as f64);
    let j = (pos.floor() as usize).min(n);
    if j == n {
        return (n, 0.0);
    }
    (j, pos - j as f64)
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
