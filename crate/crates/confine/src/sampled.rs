//! Functions sampled on a grid, the common currency between the kernel,
//! quasi-potential, and spectral layers.

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

#[derive(Clone, Debug)]
pub struct SampledFunction {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// true when the function and its first derivative vanish at the
    /// endpoints (the admissible class for the truncated generator)
    pub boundary_class: bool,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, boundary_class: bool) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::Grid("grid/value length mismatch or too short".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("non-finite sample value".into()));
        }
        Ok(Self { grid, values, boundary_class })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &[f64], f: F, boundary_class: bool) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid.to_vec(), values, boundary_class)
    }

    /// Uniform grid of `n` nodes on `[a, b]` (endpoints included).
    pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    pub fn spline(&self) -> Result<CubicSpline> {
        CubicSpline::natural(&self.grid, &self.values)
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (v[0] + v[1]) * (x[1] - x[0]))
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup norm excluding `skip` nodes at each end (boundary stencils are
    /// one-sided and excluded from residual norms).
    pub fn interior_sup_norm(&self, skip: usize) -> f64 {
        let n = self.values.len();
        if 2 * skip >= n {
            return 0.0;
        }
        self.values[skip..n - skip]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
