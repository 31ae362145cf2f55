//! Residual tolerances.
//!
//! Grid identities use `C (dx^2 + dp^2)`, with one constant per identity
//! fixed from a single run at `E = 1` on the desk grid and frozen with headroom.

use crate::grid::PhaseGrid;

/// `dx^2 + dp^2`.
pub fn grid_scale(grid: &PhaseGrid) -> f64 {
    grid.dx * grid.dx + grid.dp * grid.dp
}

/// Star-genvalue residuals with polynomial symbols only.
pub const C_NAIVE: f64 = 1.0;
/// Star-genvalue residuals including the `delta'_-` kernel.
pub const C_DP: f64 = 5.0;
/// Wall conditions at `x = 0^-`.
pub const C_BOUNDARY: f64 = 1.0;
/// Fourth-order equation and the triple star product.
pub const C_KW: f64 = 15.0;
/// Regular part of the equivalence chain.
pub const C_CHAIN: f64 = 100.0;
/// Pure-state log-PDE on the masked transform.
pub const C_PURE: f64 = 0.05;
/// Transport equation with wall source; the E = 4 component dominates the 4th-order x-stencil error.
pub const C_MOYAL: f64 = 30.0;
/// Real part of the regularized-wall star-genvalue equation.
pub const C_WALL: f64 = 1e-4;

/// Relative tolerance on delta coefficients and the wall third derivative.
pub const DELTA_REL: f64 = 1e-2;
/// Relative spread in p allowed for the wall third derivative.
pub const THIRD_DERIVATIVE_SPREAD: f64 = 1e-6;

pub fn naive(grid: &PhaseGrid) -> f64 {
    C_NAIVE * grid_scale(grid)
}

pub fn dp(grid: &PhaseGrid) -> f64 {
    C_DP * grid_scale(grid)
}

pub fn boundary(grid: &PhaseGrid) -> f64 {
    C_BOUNDARY * grid_scale(grid)
}

pub fn kw(grid: &PhaseGrid) -> f64 {
    C_KW * grid_scale(grid)
}

pub fn chain(grid: &PhaseGrid) -> f64 {
    C_CHAIN * grid_scale(grid)
}

pub fn pure(grid: &PhaseGrid) -> f64 {
    C_PURE * grid_scale(grid)
}

pub fn moyal(grid: &PhaseGrid) -> f64 {
    C_MOYAL * grid_scale(grid)
}

pub fn wall(grid: &PhaseGrid) -> f64 {
    C_WALL * grid_scale(grid)
}
