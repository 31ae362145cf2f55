//! Finite-difference stencils along the x-axis.

use crate::error::{Error, Result};
use crate::grid::{PhaseFunction, C64};

/// Finite-difference weights for the `m`-th derivative at `z` from nodes `xs`.
///
/// Fornberg's recursion; exact for polynomials of degree below `xs.len()`.
pub fn fornberg_weights(z: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Stencil configuration for x-derivatives.
///
/// `accuracy` is the formal order in `dx` (even). With `wall_split` the axis is
/// cut at the wall node into `[x_min, 0]` and `[0, x_max]`; each side is
/// differenced without crossing the wall, and the wall node takes the
/// left-sided stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stencil {
    pub accuracy: usize,
    pub wall_split: bool,
}

impl Default for Stencil {
    fn default() -> Self {
        Self {
            accuracy: 8,
            wall_split: false,
        }
    }
}

impl Stencil {
    pub fn new(accuracy: usize) -> Self {
        Self {
            accuracy,
            wall_split: false,
        }
    }

    pub fn split(self) -> Self {
        Self {
            wall_split: true,
            ..self
        }
    }

    /// Half-width of the central window for derivative order `m`.
    pub fn half_width(&self, m: usize) -> usize {
        m.div_ceil(2) - 1 + self.accuracy / 2
    }

    /// Number of nodes in a one-sided window for derivative order `m`.
    pub fn one_sided_len(&self, m: usize) -> usize {
        (m + self.accuracy).max(2 * self.half_width(m) + 1)
    }

    /// Nodes at each end of a segment that use off-centre stencils.
    pub fn edge_margin(&self, m: usize) -> usize {
        self.half_width(m)
    }

    fn validate(&self, m: usize) -> Result<()> {
        if !(1..=4).contains(&m) {
            return Err(Error::InvalidParameter(format!("derivative order {m} not in 1..=4")));
        }
        if self.accuracy < 2 || !self.accuracy.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "stencil accuracy must be even and >= 2, got {}",
                self.accuracy
            )));
        }
        Ok(())
    }
}

/// Precomputed differentiation rows for one axis segment.
#[derive(Debug, Clone)]
pub struct DiffRows {
    /// First node of each row's window.
    pub start: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
}

impl DiffRows {
    /// Rows for `n` nodes of spacing `h`, derivative order `m`.
    pub fn build(n: usize, h: f64, m: usize, stencil: &Stencil) -> Result<Self> {
        stencil.validate(m)?;
        let r = stencil.half_width(m);
        let one = stencil.one_sided_len(m);
        if n < one {
            return Err(Error::GridTooSmall {
                needed: one,
                available: n,
            });
        }
        let mut start = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut cache: Vec<(usize, isize, Vec<f64>)> = Vec::new();
        for i in 0..n {
            let (s, len) = if i >= r && i + r < n {
                (i - r, 2 * r + 1)
            } else if i < r {
                (0, one)
            } else {
                (n - one, one)
            };
            let offset = s as isize - i as isize;
            let w = match cache.iter().find(|(l, o, _)| *l == len && *o == offset) {
                Some((_, _, w)) => w.clone(),
                None => {
                    let xs: Vec<f64> = (0..len).map(|k| (offset + k as isize) as f64 * h).collect();
                    let w = fornberg_weights(0.0, &xs, m);
                    cache.push((len, offset, w.clone()));
                    w
                }
            };
            start.push(s);
            weights.push(w);
        }
        Ok(Self { start, weights })
    }

    #[inline]
    pub fn apply<F: Fn(usize) -> C64>(&self, i: usize, f: F) -> C64 {
        let s = self.start[i];
        self.weights[i]
            .iter()
            .enumerate()
            .map(|(k, &w)| f(s + k) * w)
            .sum()
    }
}

/// Maps every x-node to (segment offset, rows) for the chosen stencil.
struct AxisPlan {
    left: DiffRows,
    right: Option<DiffRows>,
    wall: usize,
}

impl AxisPlan {
    fn new(n: usize, h: f64, wall: usize, m: usize, stencil: &Stencil) -> Result<Self> {
        if stencil.wall_split {
            Ok(Self {
                left: DiffRows::build(wall + 1, h, m, stencil)?,
                right: Some(DiffRows::build(n - wall, h, m, stencil)?),
                wall,
            })
        } else {
            Ok(Self {
                left: DiffRows::build(n, h, m, stencil)?,
                right: None,
                wall,
            })
        }
    }

    /// Absolute window start and weights for node `i`.
    fn row(&self, i: usize) -> (usize, &[f64]) {
        match &self.right {
            Some(right) if i > self.wall => {
                let k = i - self.wall;
                (right.start[k] + self.wall, &right.weights[k])
            }
            _ => (self.left.start[i], &self.left.weights[i]),
        }
    }

    fn eval<F: Fn(usize) -> C64>(&self, i: usize, f: F) -> C64 {
        let (s, w) = self.row(i);
        w.iter().enumerate().map(|(k, &w)| f(s + k) * w).sum()
    }
}

/// `order`-th x-derivative with the default stencil (8th order, no wall split).
pub fn partial_derivative_x(f: &PhaseFunction, order: usize) -> Result<PhaseFunction> {
    partial_derivative_x_with(f, order, &Stencil::default())
}

/// `order`-th x-derivative with an explicit stencil.
pub fn partial_derivative_x_with(f: &PhaseFunction, order: usize, stencil: &Stencil) -> Result<PhaseFunction> {
    let g = *f.grid();
    let plan = AxisPlan::new(g.n_x, g.dx, g.wall_index(), order, stencil)?;
    let tag = format!("d{order}x({})", f.tag);
    Ok(PhaseFunction::from_rows(&g, tag, |i, row| {
        let (s, w) = plan.row(i);
        for (k, &wk) in w.iter().enumerate() {
            for (v, &u) in row.iter_mut().zip(f.row(s + k)) {
                *v += u * wk;
            }
        }
    }))
}

/// `order`-th x-derivative at the single node `i`, for every p-node.
pub fn derivative_at_node(f: &PhaseFunction, i: usize, order: usize, stencil: &Stencil) -> Result<Vec<C64>> {
    let g = f.grid();
    let plan = AxisPlan::new(g.n_x, g.dx, g.wall_index(), order, stencil)?;
    Ok((0..g.n_p).map(|j| plan.eval(i, |k| f.get(k, j))).collect())
}

/// Derivative of a sampled 1-D sequence with spacing `h`.
pub fn derivative_1d(values: &[C64], h: f64, order: usize, stencil: &Stencil) -> Result<Vec<C64>> {
    let rows = DiffRows::build(values.len(), h, order, &Stencil { wall_split: false, ..*stencil })?;
    Ok((0..values.len()).map(|i| rows.apply(i, |k| values[k])).collect())
}

/// Mask of x-nodes at least `margin` nodes away from both window edges.
pub fn interior_x_mask(n_x: usize, margin: usize) -> Vec<bool> {
    (0..n_x).map(|i| i >= margin && i + margin < n_x).collect()
}
