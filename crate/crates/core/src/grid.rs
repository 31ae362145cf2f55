//! Phase-space grids and the fields that live on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

pub type C64 = Complex64;

/// Minimum number of nodes per axis.
pub const MIN_NODES: usize = 16;

/// Uniform rectangular discretization of an `(x, p)` window.
///
/// The x-axis always carries a node exactly at the wall `x = 0`. The
/// constructor keeps `x_min` and `n_x` and moves `x_max` to the nearest value
/// for which `0` falls on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_x: usize,
    pub n_p: usize,
    pub dx: f64,
    pub dp: f64,
    wall: usize,
}

impl PhaseGrid {
    pub fn new(n_x: usize, n_p: usize, x_min: f64, x_max: f64, p_min: f64, p_max: f64) -> Result<Self> {
        if n_x < MIN_NODES || n_p < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes per axis, got n_x = {n_x}, n_p = {n_p}"
            )));
        }
        if ![x_min, x_max, p_min, p_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if !(x_min < 0.0 && 0.0 < x_max) {
            return Err(Error::InvalidGrid(format!(
                "wall must lie strictly inside the x-window, got [{x_min}, {x_max}]"
            )));
        }
        if p_min >= p_max {
            return Err(Error::InvalidGrid(format!("empty p-window [{p_min}, {p_max}]")));
        }
        let span = x_max - x_min;
        let wall = ((-x_min) * (n_x - 1) as f64 / span).round() as usize;
        if wall == 0 || wall >= n_x - 1 {
            return Err(Error::InvalidGrid(
                "wall node would coincide with a window edge".into(),
            ));
        }
        let dx = -x_min / wall as f64;
        let x_max = (n_x - 1 - wall) as f64 * dx;
        let dp = (p_max - p_min) / (n_p - 1) as f64;
        Ok(Self {
            x_min,
            x_max,
            p_min,
            p_max,
            n_x,
            n_p,
            dx,
            dp,
            wall,
        })
    }

    /// The desk-scale default: x in [-8, 2], p in [-10, 10], 512 x 512 nodes.
    pub fn desk() -> Self {
        Self::new(512, 512, -8.0, 2.0, -10.0, 10.0).expect("default grid is valid")
    }

    /// Index of the node at `x = 0`.
    pub fn wall_index(&self) -> usize {
        self.wall
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.wall as f64) * self.dx
    }

    pub fn p(&self, j: usize) -> f64 {
        let n = (self.n_p - 1) as f64;
        (self.p_min * (n - j as f64) + self.p_max * j as f64) / n
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n_p).map(|j| self.p(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index, x outer and p inner.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_p + j
    }

    /// Same grid with both axes refined by `factor` (node counts scale as `factor*(n-1)+1`).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(
            factor * (self.n_x - 1) + 1,
            factor * (self.n_p - 1) + 1,
            self.x_min,
            self.x_max,
            self.p_min,
            self.p_max,
        )
    }

    pub fn same_shape(&self, other: &PhaseGrid) -> bool {
        self.n_x == other.n_x
            && self.n_p == other.n_p
            && self.wall == other.wall
            && (self.dx - other.dx).abs() <= 1e-14 * self.dx
            && (self.p_min - other.p_min).abs() <= 1e-14 * self.p_min.abs().max(1.0)
            && (self.p_max - other.p_max).abs() <= 1e-14 * self.p_max.abs().max(1.0)
    }
}

/// A complex scalar field on a [`PhaseGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction {
    grid: PhaseGrid,
    values: Vec<C64>,
    pub tag: String,
}

impl PhaseFunction {
    pub fn zeros(grid: &PhaseGrid, tag: impl Into<String>) -> Self {
        Self {
            grid: *grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
            tag: tag.into(),
        }
    }

    /// Builds a field from row-major values. Rejects non-finite entries.
    pub fn from_values(grid: &PhaseGrid, values: Vec<C64>, tag: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite {
                i: k / grid.n_p,
                j: k % grid.n_p,
            });
        }
        Ok(Self {
            grid: *grid,
            values,
            tag: tag.into(),
        })
    }

    /// Samples `f(x, p)` at every node.
    pub fn from_fn<F>(grid: &PhaseGrid, tag: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> C64 + Sync + Send,
    {
        let mut out = Self::zeros(grid, tag);
        let g = *grid;
        exec::for_each_chunk(&mut out.values, g.n_p, |i, row| {
            let x = g.x(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(x, g.p(j));
            }
        });
        out
    }

    pub fn from_real_fn<F>(grid: &PhaseGrid, tag: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        Self::from_fn(grid, tag, |x, p| C64::new(f(x, p), 0.0))
    }

    /// Fills rows independently: `f(i, row)` writes the fixed-x slice `i`.
    pub fn from_rows<F>(grid: &PhaseGrid, tag: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize, &mut [C64]) + Sync + Send,
    {
        let mut out = Self::zeros(grid, tag);
        exec::for_each_chunk(&mut out.values, grid.n_p, f);
        out
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let k = self.grid.index(i, j);
        self.values[k] = v;
    }

    /// The fixed-x slice `i` (contiguous over p).
    pub fn row(&self, i: usize) -> &[C64] {
        let n = self.grid.n_p;
        &self.values[i * n..(i + 1) * n]
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Fails unless `max |Im| <= tol * max(1, max |f|)`.
    pub fn assert_real(&self, tol: f64) -> Result<()> {
        let im = self.max_imag();
        if im > tol * self.max_abs().max(1.0) {
            Err(Error::NotReal { max_imag: im })
        } else {
            Ok(())
        }
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(C64) -> C64,
    {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            tag: self.tag.clone(),
        }
    }

    /// Pointwise map with node coordinates.
    pub fn map_nodes<F>(&self, f: F) -> Self
    where
        F: Fn(f64, f64, C64) -> C64 + Sync + Send,
    {
        let g = self.grid;
        let src = &self.values;
        Self::from_rows(&g, self.tag.clone(), |i, row| {
            let x = g.x(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(x, g.p(j), src[g.index(i, j)]);
            }
        })
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn real_part(&self) -> Self {
        self.map(|v| C64::new(v.re, 0.0))
    }

    pub fn scale(&self, a: C64) -> Self {
        self.map(|v| a * v)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &PhaseFunction, b: C64) -> Result<Self> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| a * u + b * v)
                .collect(),
            tag: self.tag.clone(),
        })
    }

    pub fn add(&self, other: &PhaseFunction) -> Result<Self> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &PhaseFunction) -> Result<Self> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// Multiplies every node by `theta(-x)`: zero for `x > 0`, unchanged at and left of the wall.
    pub fn confine(&self) -> Self {
        let w = self.grid.wall_index();
        let mut out = self.clone();
        for i in (w + 1)..self.grid.n_x {
            for j in 0..self.grid.n_p {
                out.set(i, j, C64::new(0.0, 0.0));
            }
        }
        out
    }
}

/// A point-supported distribution at `x = 0` together with a regular part.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionalValue {
    pub regular: PhaseFunction,
    /// Coefficient of `delta(x)` at each p-node.
    pub delta_coeff: Vec<C64>,
}

impl DistributionalValue {
    pub fn new(regular: PhaseFunction, delta_coeff: Vec<C64>) -> Result<Self> {
        if delta_coeff.len() != regular.grid().n_p {
            return Err(Error::InvalidParameter("delta coefficient length != n_p".into()));
        }
        if !regular.is_finite() || delta_coeff.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite distributional value".into()));
        }
        Ok(Self {
            regular,
            delta_coeff,
        })
    }

    /// Pairs with a test function `t(x)` at momentum node `j`: sum of the
    /// regular part integrated against `t` and `delta_coeff[j] * t(0)`.
    pub fn pair_with(&self, j: usize, t: impl Fn(f64) -> f64) -> C64 {
        let g = self.regular.grid();
        let w = crate::calculus::simpson_weights(g.n_x, g.dx);
        let regular: C64 = (0..g.n_x)
            .map(|i| self.regular.get(i, j) * (w[i] * t(g.x(i))))
            .sum();
        regular + self.delta_coeff[j] * t(0.0)
    }
}

/// Partial Fourier transform `Sigma(y, p)` of a phase-space field in x.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSlice {
    pub y_nodes: Vec<f64>,
    pub p_nodes: Vec<f64>,
    /// Row-major, y outer and p inner.
    pub values: Vec<C64>,
}

impl SpectralSlice {
    pub fn new(y_nodes: Vec<f64>, p_nodes: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if values.len() != y_nodes.len() * p_nodes.len() {
            return Err(Error::InvalidParameter("spectral slice shape mismatch".into()));
        }
        let n = y_nodes.len();
        for k in 0..n / 2 {
            let (a, b) = (y_nodes[k], y_nodes[n - 1 - k]);
            if (a + b).abs() > 1e-9 * a.abs().max(1.0) {
                return Err(Error::InvalidParameter("y-axis is not symmetric about 0".into()));
            }
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite spectral value".into()));
        }
        Ok(Self {
            y_nodes,
            p_nodes,
            values,
        })
    }

    #[inline]
    pub fn get(&self, m: usize, j: usize) -> C64 {
        self.values[m * self.p_nodes.len() + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
