//! The fourth-order phase-space equation in x, its exponential solutions, the
//! wall filter, and selection of the physical (pure-state) solution.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::calculus::stencil::derivative_1d;
use crate::calculus::{fourier_x_damped, interior_x_mask, partial_derivative_x_with, Stencil};
use crate::dp::sinc;
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{PhaseFunction, PhaseGrid, SpectralSlice, C64};
use crate::report::ResidualReport;
use crate::startools::stencil_for;
use crate::tolerance;

/// Per-p coefficients of `rho = A e^{r1 x} + A^* e^{r2 x} + B e^{r3 x} + B^* e^{r4 x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KWSolutionBasis {
    pub energy: f64,
    pub grid: PhaseGrid,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl KWSolutionBasis {
    pub fn new(energy: f64, grid: &PhaseGrid, a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::InvalidParameter(format!("energy must be > 0, got {energy}")));
        }
        if a.len() != grid.n_p || b.len() != grid.n_p {
            return Err(Error::InvalidParameter("coefficient count != n_p".into()));
        }
        if a.iter().chain(&b).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self {
            energy,
            grid: *grid,
            a,
            b,
        })
    }

    /// Coefficients reproducing the filtered sine form for profile `n`.
    ///
    /// `A = N / (2i(p + k))`, `B = -N / (2i(p - k))`; singular at `p = -+k`.
    pub fn from_profile(energy: f64, n: &MomentumProfile, grid: &PhaseGrid) -> Result<Self> {
        let k = energy.sqrt();
        let i2 = C64::new(0.0, 2.0);
        let ps = grid.ps();
        let a = ps.iter().map(|&p| n.eval(p) / (i2 * (p + k))).collect();
        let b = ps.iter().map(|&p| -n.eval(p) / (i2 * (p - k))).collect();
        Self::new(energy, grid, a, b)
    }

    /// Characteristic roots `[2i(p+k), -2i(p+k), 2i(p-k), -2i(p-k)]`.
    pub fn roots(&self, p: f64) -> [C64; 4] {
        let k = self.energy.sqrt();
        let r1 = C64::new(0.0, 2.0 * (p + k));
        let r3 = C64::new(0.0, 2.0 * (p - k));
        [r1, r1.conj(), r3, r3.conj()]
    }
}

/// `(1/16) d^4 rho + (1/2)(p^2 + E) d^2 rho + (p^2 - E)^2 rho` with a given stencil.
pub fn kw_operator(rho: &PhaseFunction, e: f64, stencil: &Stencil) -> Result<PhaseFunction> {
    let d2 = partial_derivative_x_with(rho, 2, stencil)?;
    let d4 = partial_derivative_x_with(rho, 4, stencil)?;
    let g = *rho.grid();
    Ok(PhaseFunction::from_rows(&g, "kw", |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            let p = g.p(j);
            let s = p * p - e;
            *v = d4.get(i, j) / 16.0 + d2.get(i, j) * (0.5 * (p * p + e)) + rho.get(i, j) * (s * s);
        }
    }))
}

/// Residual of the fourth-order equation away from the window edges.
pub fn kw_residual(rho: &PhaseFunction, e: f64) -> Result<ResidualReport> {
    let stencil = stencil_for(rho);
    let r = kw_operator(rho, e, &stencil)?;
    let mask = interior_x_mask(rho.grid().n_x, stencil.edge_margin(4));
    Ok(ResidualReport::from_field("fourth-order equation", &r, Some(&mask), tolerance::kw(rho.grid())))
}

/// `rho(x, p) = 2 Re[A e^{2i(p+k)x} + B e^{2i(p-k)x}]`.
pub fn assemble_solution(basis: &KWSolutionBasis) -> PhaseFunction {
    let g = basis.grid;
    let k = basis.energy.sqrt();
    PhaseFunction::from_rows(&g, "kw_solution", |i, row| {
        let x = g.x(i);
        for (j, v) in row.iter_mut().enumerate() {
            let p = g.p(j);
            let z = basis.a[j] * C64::from_polar(1.0, 2.0 * (p + k) * x) + basis.b[j] * C64::from_polar(1.0, 2.0 * (p - k) * x);
            *v = z + z.conj();
        }
    })
}

/// Condition number of the Gram matrix of the four exponentials at momentum `p`
/// as grid functions on the x-axis.
pub fn basis_gram_condition(energy: f64, p: f64, grid: &PhaseGrid) -> f64 {
    let k = energy.sqrt();
    let freqs = [2.0 * (p + k), -2.0 * (p + k), 2.0 * (p - k), -2.0 * (p - k)];
    let xs = grid.xs();
    let gram = DMatrix::<C64>::from_fn(4, 4, |a, b| {
        xs.iter()
            .map(|&x| C64::from_polar(1.0, (freqs[b] - freqs[a]) * x))
            .sum::<C64>()
            / xs.len() as f64
    });
    let sv = gram.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Momentum profile `N(p)` of the filtered solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MomentumProfile {
    /// `1/p`.
    Physical,
    /// `e^{a p} / p`.
    Exponential { a: f64 },
    /// Samples on increasing `p`, linearly interpolated; NaN outside the range.
    Custom { p: Vec<f64>, n: Vec<f64> },
}

impl MomentumProfile {
    pub fn custom(p: Vec<f64>, n: Vec<f64>) -> Result<Self> {
        if p.len() != n.len() || p.len() < 2 || p.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("custom profile needs >= 2 increasing nodes".into()));
        }
        if n.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter("custom profile has NaN values".into()));
        }
        Ok(Self::Custom { p, n })
    }

    pub fn eval(&self, p: f64) -> f64 {
        match self {
            Self::Physical => 1.0 / p,
            Self::Exponential { a } => (a * p).exp() / p,
            Self::Custom { p: ps, n } => {
                if p < ps[0] || p > ps[ps.len() - 1] {
                    return f64::NAN;
                }
                let k = ps.partition_point(|&q| q <= p).clamp(1, ps.len() - 1);
                let t = (p - ps[k - 1]) / (ps[k] - ps[k - 1]);
                if t == 0.0 {
                    n[k - 1]
                } else if t == 1.0 {
                    n[k]
                } else {
                    n[k - 1] * (1.0 - t) + n[k] * t
                }
            }
        }
    }
}

/// `sin(2x(p+k))/(p+k) - sin(2x(p-k))/(p-k)`, with the sinc limit at `p = -+k`.
pub fn filter_bracket(x: f64, p: f64, k: f64) -> f64 {
    2.0 * x * (sinc(2.0 * x * (p + k)) - sinc(2.0 * x * (p - k)))
}

/// `bracket / p` at `p = 0`: `(4xk cos(2kx) - 2 sin(2kx)) / k^2`.
fn bracket_over_p_at_zero(x: f64, k: f64) -> f64 {
    (4.0 * x * k * (2.0 * k * x).cos() - 2.0 * (2.0 * k * x).sin()) / (k * k)
}

fn filtered_value(profile: &MomentumProfile, x: f64, p: f64, k: f64) -> f64 {
    match profile {
        MomentumProfile::Physical | MomentumProfile::Exponential { .. } if p.abs() < 1e-8 => {
            let a = match profile {
                MomentumProfile::Exponential { a } => *a,
                _ => 0.0,
            };
            (a * p).exp() * bracket_over_p_at_zero(x, k)
        }
        _ => {
            let n = profile.eval(p);
            if n.is_finite() {
                n * filter_bracket(x, p, k)
            } else {
                two_sided_limit(profile, x, p, k)
            }
        }
    }
}

/// Linear interpolation of `rho` between the nearest finite profile values on
/// either side of `p`; NaN when one side has none.
fn two_sided_limit(profile: &MomentumProfile, x: f64, p: f64, k: f64) -> f64 {
    let MomentumProfile::Custom { p: ps, n } = profile else {
        return f64::NAN;
    };
    let left = ps.iter().zip(n).rev().find(|(q, v)| **q < p && v.is_finite());
    let right = ps.iter().zip(n).find(|(q, v)| **q > p && v.is_finite());
    match (left, right) {
        (Some((&pl, &nl)), Some((&pr, &nr))) => {
            let (rl, rr) = (nl * filter_bracket(x, pl, k), nr * filter_bracket(x, pr, k));
            rl + (rr - rl) * (p - pl) / (pr - pl)
        }
        _ => f64::NAN,
    }
}

/// `rho(x, p) = N(p) [sin(2x(p+k))/(p+k) - sin(2x(p-k))/(p-k)]` on the whole grid.
///
/// Non-finite `N` at a node is replaced by the two-sided limit of `rho` from
/// the neighbouring finite samples.
pub fn apply_boundary_filter(energy: f64, n: &MomentumProfile, grid: &PhaseGrid) -> Result<PhaseFunction> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidParameter(format!("energy must be > 0, got {energy}")));
    }
    let k = energy.sqrt();
    let f = PhaseFunction::from_real_fn(grid, "filtered", |x, p| filtered_value(n, x, p, k));
    if !f.is_finite() {
        return Err(Error::InvalidParameter("profile produces non-finite values on the grid".into()));
    }
    Ok(f)
}

/// Options for the pure-state check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureStateConfig {
    /// Abel damping `e^{eta x}` applied before the transform.
    pub eta: f64,
    pub y_max: f64,
    pub n_y: usize,
    /// Evaluate only where `|Sigma| > floor * max |Sigma|`.
    pub floor: f64,
    pub min_coverage: f64,
}

impl PureStateConfig {
    pub fn for_grid(grid: &PhaseGrid) -> Self {
        Self {
            eta: 30.0 / grid.x_min.abs().max(grid.x_max.abs()),
            y_max: 6.0,
            n_y: 241,
            floor: 1e-6,
            min_coverage: 0.3,
        }
    }
}

/// Masked residual of `d_y^2 ln Sigma = (1/4) d_p^2 ln Sigma`.
pub fn purestate_residual(f: &PhaseFunction) -> Result<ResidualReport> {
    purestate_residual_with(f, &PureStateConfig::for_grid(f.grid()))
}

pub fn purestate_residual_with(f: &PhaseFunction, cfg: &PureStateConfig) -> Result<ResidualReport> {
    let g = f.grid();
    if cfg.n_y < 5 || cfg.y_max <= 0.0 {
        return Err(Error::InvalidParameter("pure-state y-axis needs >= 5 nodes and y_max > 0".into()));
    }
    let hy = 2.0 * cfg.y_max / (cfg.n_y - 1) as f64;
    let ys: Vec<f64> = (0..cfg.n_y).map(|m| (m as f64 - (cfg.n_y - 1) as f64 / 2.0) * hy).collect();
    let sigma = fourier_x_damped(f, &ys, cfg.eta)?;
    let (res, coverage) = log_pde_residual(&sigma, hy, g.dp, cfg.floor);
    if coverage < cfg.min_coverage {
        return Err(Error::EmptyEvaluationSet { coverage });
    }
    let max = res.iter().cloned().fold(0.0, f64::max);
    let l2 = (res.iter().map(|v| v * v).sum::<f64>() * hy * g.dp).sqrt();
    Ok(ResidualReport::new("pure-state log equation", max, l2, tolerance::pure(g), g).with_detail("coverage", coverage))
}

/// Nodewise `|d_y^2 ln S - (1/4) d_p^2 ln S|` on the masked interior, and the covered fraction.
pub fn log_pde_residual(s: &SpectralSlice, hy: f64, hp: f64, floor: f64) -> (Vec<f64>, f64) {
    let (ny, np) = (s.y_nodes.len(), s.p_nodes.len());
    let cut = floor * s.max_abs();
    let ok = |m: usize, j: usize| s.get(m, j).norm() > cut;
    let mut out = Vec::new();
    let interior = (ny - 2) * (np - 2);
    for m in 1..ny - 1 {
        for j in 1..np - 1 {
            if !(ok(m, j) && ok(m - 1, j) && ok(m + 1, j) && ok(m, j - 1) && ok(m, j + 1)) {
                continue;
            }
            let c = s.get(m, j);
            let dyy = (s.get(m + 1, j) * s.get(m - 1, j) / (c * c)).ln() / (hy * hy);
            let dpp = (s.get(m, j + 1) * s.get(m, j - 1) / (c * c)).ln() / (hp * hp);
            out.push((dyy - dpp * 0.25).norm());
        }
    }
    let coverage = out.len() as f64 / interior.max(1) as f64;
    (out, coverage)
}

/// Report of [`profile_consistency`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub report: ResidualReport,
    /// Least-squares slope of `ln[p N(p)]`.
    pub fitted_a: f64,
    pub p_nodes: Vec<f64>,
    /// `d_p^2 ln[p N(p)]` at each node.
    pub second_derivative: Vec<f64>,
}

/// Absolute tolerance on `d_p^2 ln[p N(p)]`.
pub const PROFILE_TOL: f64 = 1e-8;

/// Default profile window `[1/2, p_max]` on the grid's p-nodes.
pub fn default_profile_window(grid: &PhaseGrid) -> Vec<f64> {
    grid.ps().into_iter().filter(|&p| p >= 0.5).collect()
}

/// `d_p^2 ln[p N(p)] = 0` on `p_nodes` (uniform, away from 0), and the fitted `a`.
pub fn profile_consistency(n: &MomentumProfile, p_nodes: &[f64], grid: &PhaseGrid) -> Result<ProfileReport> {
    if p_nodes.len() < 16 {
        return Err(Error::InvalidParameter("profile window needs >= 16 nodes".into()));
    }
    let h = p_nodes[1] - p_nodes[0];
    if p_nodes.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs()) || h <= 0.0 {
        return Err(Error::InvalidParameter("profile window must be uniform and increasing".into()));
    }
    let mut logs = Vec::with_capacity(p_nodes.len());
    for &p in p_nodes {
        let v = p * n.eval(p);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveProfile { p });
        }
        logs.push(C64::new(v.ln(), 0.0));
    }
    let d2: Vec<f64> = derivative_1d(&logs, h, 2, &Stencil::new(4))?.iter().map(|v| v.re).collect();
    let m = p_nodes.len() as f64;
    let pm = p_nodes.iter().sum::<f64>() / m;
    let lm = logs.iter().map(|v| v.re).sum::<f64>() / m;
    let sxy: f64 = p_nodes.iter().zip(&logs).map(|(p, l)| (p - pm) * (l.re - lm)).sum();
    let sxx: f64 = p_nodes.iter().map(|p| (p - pm) * (p - pm)).sum();
    let max = d2.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let l2 = (d2.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
    let fitted_a = sxy / sxx;
    Ok(ProfileReport {
        report: ResidualReport::new("profile log-linearity", max, l2, PROFILE_TOL, grid).with_detail("fitted_a", fitted_a),
        fitted_a,
        p_nodes: p_nodes.to_vec(),
        second_derivative: d2,
    })
}

/// Result of [`select_physical`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSelection {
    /// `theta(-x) rho` with `N = sqrt(E) / (pi p)`, the unit-coefficient confined state.
    pub f: PhaseFunction,
    /// Minimizer of the near-wall marginal over the exponential family.
    pub a: f64,
    /// `(a, |marginal|)` for the coarse scan.
    pub scan: Vec<(f64, f64)>,
    pub probe_x: f64,
}

/// Coarse scan values of the exponential-family parameter.
pub const A_SCAN: [f64; 3] = [-0.5, 0.0, 0.5];
/// Golden-section stopping width for the refined parameter.
pub const A_REFINE_TOL: f64 = 1e-3;

/// `|int dp theta(-x) rho_a(x, p)|` at the probe node left of the wall.
///
/// The wall node itself gives an identically zero marginal for every `a`, so
/// the probe sits one node to its left.
fn near_wall_marginal(energy: f64, a: f64, grid: &PhaseGrid) -> Result<f64> {
    let k = energy.sqrt();
    let i = grid.wall_index() - 1;
    let x = grid.x(i);
    let profile = MomentumProfile::Exponential { a };
    let row: Vec<C64> = grid.ps().iter().map(|&p| C64::new(filtered_value(&profile, x, p, k), 0.0)).collect();
    Ok(crate::calculus::simpson(&row, grid.dp).re.abs())
}

/// Builds the normalized `theta(-x) rho` with `N ~ 1/p` and verifies that the near-wall
/// marginal selects `a = 0` within the exponential family `e^{ap}/p`.
pub fn select_physical(energy: f64, grid: &PhaseGrid) -> Result<PhysicalSelection> {
    let rho = apply_boundary_filter(energy, &MomentumProfile::Physical, grid)?;
    let f = rho
        .confine()
        .scale(C64::new(physical_normalization(energy), 0.0))
        .with_tag("physical");
    let vals: Vec<Result<f64>> = exec::map_indexed(A_SCAN.len(), |t| near_wall_marginal(energy, A_SCAN[t], grid));
    let mut scan = Vec::with_capacity(A_SCAN.len());
    for (a, v) in A_SCAN.iter().zip(vals) {
        scan.push((*a, v?));
    }
    let mut order: Vec<usize> = (0..scan.len()).collect();
    order.sort_by(|&u, &v| scan[u].1.total_cmp(&scan[v].1));
    let (best, second) = (scan[order[0]], scan[order[1]]);
    if (second.1 - best.1).abs() <= 1e-9 * second.1.max(f64::MIN_POSITIVE) {
        return Err(Error::ScanTie { a1: best.0, a2: second.0 });
    }
    let (mut lo, mut hi) = (best.0 - 0.5, best.0 + 0.5);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = near_wall_marginal(energy, c, grid)?;
    let mut fd = near_wall_marginal(energy, d, grid)?;
    while hi - lo > A_REFINE_TOL {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = near_wall_marginal(energy, c, grid)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = near_wall_marginal(energy, d, grid)?;
        }
    }
    Ok(PhysicalSelection {
        f,
        a: 0.5 * (lo + hi),
        scan,
        probe_x: grid.x(grid.wall_index() - 1),
    })
}

/// Least-squares constant `c` with `target ~ c * model`, and `max |target - c model|`.
pub fn fit_constant(model: &PhaseFunction, target: &PhaseFunction) -> Result<(f64, f64)> {
    if !model.grid().same_shape(target.grid()) {
        return Err(Error::GridMismatch);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (m, t) in model.values().iter().zip(target.values()) {
        num += m.re * t.re + m.im * t.im;
        den += m.norm_sqr();
    }
    let c = if den > 0.0 { num / den } else { 0.0 };
    let res = model
        .values()
        .iter()
        .zip(target.values())
        .map(|(m, t)| (t - m * c).norm())
        .fold(0.0, f64::max);
    Ok((c, res))
}

/// Normalization linking `N = 1/p` to the unit-coefficient confined state: `sqrt(E)/pi`.
pub fn physical_normalization(energy: f64) -> f64 {
    energy.sqrt() / PI
}
