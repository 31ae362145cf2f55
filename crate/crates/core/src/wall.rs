//! Scattering states of the exponential barrier `V(x) = e^{2 alpha x}` and the
//! approach of their Wigner functions to the hard-wall one as `alpha` grows.

use serde::{Deserialize, Serialize};

use crate::calculus::{interior_x_mask, partial_derivative_x_with, Stencil};
use crate::dp::{self, weighted_sampled_transform};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{PhaseFunction, PhaseGrid, C64};
use crate::report::ResidualReport;
use crate::tolerance;
use crate::wave::{WaveFunction, WaveKind};

/// `V(x_far) / E` used by [`WallParameters::for_alpha`].
pub const FORBIDDEN_RATIO: f64 = 1600.0;
/// Smallest accepted `V(x_far) / E`.
pub const MIN_FORBIDDEN_RATIO: f64 = 100.0;
/// Largest accepted `V(x_match) / E`.
pub const MAX_MATCH_POTENTIAL: f64 = 1e-8;
/// Left end of the default integration range.
pub const DEFAULT_X_MATCH: f64 = -24.0;
/// Default mesh size for [`solve_wall_state`].
pub const DEFAULT_NODES: usize = 32_001;
/// Smallest accepted mesh size.
pub const MIN_NODES: usize = 2000;
/// Largest accepted deviation of the normalized state from `2 sin(kx + delta)` on the fit window.
pub const FIT_TOL: f64 = 1e-4;

const OVERFLOW_LIMIT: f64 = 1e250;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallParameters {
    pub alpha: f64,
    pub energy: f64,
    pub x_match: f64,
    pub x_far: f64,
}

impl WallParameters {
    pub fn new(alpha: f64, energy: f64, x_match: f64, x_far: f64) -> Result<Self> {
        let p = Self {
            alpha,
            energy,
            x_match,
            x_far,
        };
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::InvalidParameter(format!("energy must be > 0, got {energy}")));
        }
        if !(x_match.is_finite() && x_far.is_finite() && x_match < 0.0 && x_far > x_match) {
            return Err(Error::InvalidParameter("need x_match < 0 and x_far > x_match".into()));
        }
        if p.potential(x_far) < MIN_FORBIDDEN_RATIO * energy {
            return Err(Error::InvalidParameter(format!(
                "V(x_far) = {:.3e} is not deep in the forbidden region for E = {energy}",
                p.potential(x_far)
            )));
        }
        if p.potential(x_match) >= MAX_MATCH_POTENTIAL * energy {
            return Err(Error::InvalidParameter(format!(
                "V(x_match) = {:.3e} is not negligible against E = {energy}",
                p.potential(x_match)
            )));
        }
        Ok(p)
    }

    /// `x_far` with `V(x_far) = 1600 E` and `x_match = -24`.
    pub fn for_alpha(alpha: f64, energy: f64) -> Result<Self> {
        let x_far = (FORBIDDEN_RATIO * energy).ln() / (2.0 * alpha);
        Self::new(alpha, energy, DEFAULT_X_MATCH, x_far)
    }

    pub fn potential(&self, x: f64) -> f64 {
        (2.0 * self.alpha * x).exp()
    }

    /// `sqrt(V - E)`, real in the forbidden region.
    fn kappa(&self, x: f64) -> f64 {
        (self.potential(x) - self.energy).max(0.0).sqrt()
    }

    /// `int^x kappa`, up to a constant.
    fn kappa_integral(&self, x: f64) -> f64 {
        let k = self.energy.sqrt();
        let kap = self.kappa(x);
        (kap - k * (kap / k).atan()) / self.alpha
    }
}

/// A scattering state normalized to asymptotic amplitude 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizedEigenstate {
    pub params: WallParameters,
    /// Real samples from `x_match` to `x_far + 2/alpha`.
    pub xi: WaveFunction,
    /// `delta` in `xi ~ 2 sin(sqrt(E) x + delta)`, in `(-pi/2, pi/2]`.
    pub phase_shift: f64,
    pub fit_residual: f64,
}

fn rk4_step(p: &WallParameters, x: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let rhs = |x: f64, y: [f64; 2]| [y[1], (p.potential(x) - p.energy) * y[0]];
    let k1 = rhs(x, y);
    let k2 = rhs(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = rhs(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = rhs(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Decaying WKB branch continued from `(x0, xi0)` to `x >= x0`.
fn wkb_decay(p: &WallParameters, x0: f64, xi0: f64, x: f64) -> f64 {
    let (k0, k1) = (p.kappa(x0), p.kappa(x));
    xi0 * (k0 / k1).sqrt() * (p.kappa_integral(x0) - p.kappa_integral(x)).exp()
}

/// Integrates `-xi'' + e^{2 alpha x} xi = E xi` leftward from the decaying
/// branch at `x_far` with fixed-step RK4, then fits the asymptotic phase on
/// `[x_match, x_match/2]` and rescales to amplitude 2.
pub fn solve_wall_state(params: &WallParameters, n_nodes: usize) -> Result<RegularizedEigenstate> {
    let p = WallParameters::new(params.alpha, params.energy, params.x_match, params.x_far)?;
    if n_nodes < MIN_NODES {
        return Err(Error::InvalidParameter(format!("need >= {MIN_NODES} nodes, got {n_nodes}")));
    }
    let h = (p.x_far - p.x_match) / (n_nodes - 1) as f64;
    let kap = p.kappa(p.x_far);
    let dkap = p.alpha * p.potential(p.x_far) / kap;
    let mut y = [1.0, -kap - dkap / (2.0 * kap)];
    let mut vals = vec![0.0; n_nodes];
    vals[n_nodes - 1] = y[0];
    for s in (0..n_nodes - 1).rev() {
        let x = p.x_match + (s + 1) as f64 * h;
        y = rk4_step(&p, x, y, -h);
        if !(y[0].abs() < OVERFLOW_LIMIT && y[1].abs() < OVERFLOW_LIMIT) {
            return Err(Error::Overflow);
        }
        vals[s] = y[0];
    }

    let k = p.energy.sqrt();
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let fit: Vec<usize> = (0..n_nodes).filter(|&s| p.x_match + s as f64 * h <= 0.5 * p.x_match).collect();
    for &s in &fit {
        let x = p.x_match + s as f64 * h;
        let (sn, cs) = (k * x).sin_cos();
        ss += sn * sn;
        sc += sn * cs;
        cc += cs * cs;
        ys += vals[s] * sn;
        yc += vals[s] * cs;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    let mut delta = b.atan2(a);
    let mut scale = 2.0 / a.hypot(b);
    if delta > std::f64::consts::FRAC_PI_2 {
        delta -= std::f64::consts::PI;
        scale = -scale;
    } else if delta <= -std::f64::consts::FRAC_PI_2 {
        delta += std::f64::consts::PI;
        scale = -scale;
    }
    for v in vals.iter_mut() {
        *v *= scale;
    }
    let fit_residual = fit
        .iter()
        .map(|&s| (vals[s] - 2.0 * (k * (p.x_match + s as f64 * h) + delta).sin()).abs() / 2.0)
        .fold(0.0, f64::max);
    if fit_residual > FIT_TOL {
        return Err(Error::FitResidual {
            residual: fit_residual,
            threshold: FIT_TOL,
        });
    }

    let xi_far = vals[n_nodes - 1];
    let n_tail = (2.0 / p.alpha / h).ceil() as usize;
    vals.extend((1..=n_tail).map(|s| wkb_decay(&p, p.x_far, xi_far, p.x_far + s as f64 * h)));
    let samples = vals.into_iter().map(|v| C64::new(v, 0.0)).collect();
    Ok(RegularizedEigenstate {
        params: p,
        xi: WaveFunction::sampled(p.x_match, h, samples)?,
        phase_shift: delta,
        fit_residual,
    })
}

impl RegularizedEigenstate {
    /// The state sampled up to at least `x_hi`, continuing the decaying branch.
    pub fn extended(&self, x_hi: f64) -> Result<WaveFunction> {
        let WaveKind::Sampled { x0, h, values } = &self.xi.kind else {
            return Err(Error::InvalidParameter("wall state must be sampled".into()));
        };
        let (_, hi) = self.xi.support().expect("sampled");
        if x_hi <= hi {
            return Ok(self.xi.clone());
        }
        let p = &self.params;
        let xi_far = self.xi.eval(p.x_far).re;
        let mut v = values.clone();
        let start = v.len();
        let extra = ((x_hi - hi) / h).ceil() as usize;
        v.extend((0..extra).map(|s| C64::new(wkb_decay(p, p.x_far, xi_far, x0 + (start + s) as f64 * h), 0.0)));
        WaveFunction::sampled(*x0, *h, v)
    }
}

/// Wigner function of a wall state on `grid`.
pub fn wigner_of_wall_state(state: &RegularizedEigenstate, grid: &PhaseGrid) -> Result<PhaseFunction> {
    let xi = state.extended(grid.x_max)?;
    dp::wigner_transform(&xi, grid).map(|f| f.with_tag(format!("wall_wigner(alpha={})", state.params.alpha)))
}

/// `(p^2 - E) f - (1/4) d_x^2 f + e^{2 alpha x} S f` with
/// `S f = (1/pi) int dy e^{-2ipy} cosh(2 alpha y) xi^*(x-y) xi(x+y)`,
/// the real part of the star-genvalue equation of the barrier.
pub fn wall_real_residual(state: &RegularizedEigenstate, grid: &PhaseGrid) -> Result<ResidualReport> {
    let r = wall_real_residual_field(state, grid)?;
    let mask = interior_x_mask(grid.n_x, Stencil::default().edge_margin(2));
    Ok(ResidualReport::from_field("barrier star-genvalue (real part)", &r, Some(&mask), tolerance::wall(grid))
        .with_detail("alpha", state.params.alpha))
}

/// Nodewise field behind [`wall_real_residual`].
pub fn wall_real_residual_field(state: &RegularizedEigenstate, grid: &PhaseGrid) -> Result<PhaseFunction> {
    let xi = state.extended(grid.x_max)?;
    let p = state.params;
    let f = dp::wigner_transform(&xi, grid)?;
    let shifted = weighted_sampled_transform(&xi, grid, |y| (2.0 * p.alpha * y).cosh(), "shift_average")?;
    let stencil = Stencil::default();
    let d2 = partial_derivative_x_with(&f, 2, &stencil)?;
    let g = *grid;
    Ok(PhaseFunction::from_rows(&g, "wall_real_residual", |i, row| {
        let x = g.x(i);
        let v = p.potential(x);
        for (j, out) in row.iter_mut().enumerate() {
            let q = g.p(j);
            *out = f.get(i, j) * (q * q - p.energy) - d2.get(i, j) * 0.25 + shifted.get(i, j) * v;
        }
    }))
}

/// One row of [`wall_limit_study`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallStudyRow {
    pub alpha: f64,
    /// `max |f_alpha - f|` over the grid.
    pub sup_distance: f64,
    pub phase_shift: f64,
    /// Same quantities with the integrator step halved.
    pub sup_distance_refined: f64,
    pub phase_shift_refined: f64,
}

impl WallStudyRow {
    pub fn relative_distance_change(&self) -> f64 {
        (self.sup_distance_refined - self.sup_distance).abs() / self.sup_distance.abs().max(f64::MIN_POSITIVE)
    }

    pub fn phase_change(&self) -> f64 {
        (self.phase_shift_refined - self.phase_shift).abs()
    }
}

/// Output of [`wall_limit_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct WallStudy {
    pub energy: f64,
    pub rows: Vec<WallStudyRow>,
    /// `f_alpha` per row.
    pub fields: Vec<PhaseFunction>,
}

/// Largest accepted relative change of `d` under step halving.
pub const SELF_CONVERGENCE_D: f64 = 1e-2;
/// Largest accepted change of the phase shift under step halving.
pub const SELF_CONVERGENCE_PHASE: f64 = 1e-6;

impl WallStudy {
    /// Consecutive pairs where `d` or `|delta|` fails to decrease strictly; NaN counts as a failure.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        for w in self.rows.windows(2) {
            if !(w[1].sup_distance < w[0].sup_distance) {
                out.push(Error::NonMonotone {
                    alpha_lo: w[0].alpha,
                    alpha_hi: w[1].alpha,
                    quantity: "sup_distance",
                });
            }
            if !(w[1].phase_shift.abs() < w[0].phase_shift.abs()) {
                out.push(Error::NonMonotone {
                    alpha_lo: w[0].alpha,
                    alpha_hi: w[1].alpha,
                    quantity: "phase_shift",
                });
            }
        }
        out
    }

    /// Worst `(relative d change, phase change)` under step halving.
    pub fn self_convergence(&self) -> (f64, f64) {
        self.rows.iter().fold((0.0f64, 0.0f64), |(d, ph), r| (d.max(r.relative_distance_change()), ph.max(r.phase_change())))
    }

    /// `Ok` iff both sequences decrease strictly and the integrator is self-converged.
    pub fn check(&self) -> Result<()> {
        if let Some(e) = self.violations().into_iter().next() {
            return Err(e);
        }
        let (d, ph) = self.self_convergence();
        if d >= SELF_CONVERGENCE_D || ph >= SELF_CONVERGENCE_PHASE {
            return Err(Error::FitResidual {
                residual: d.max(ph),
                threshold: SELF_CONVERGENCE_D.min(SELF_CONVERGENCE_PHASE),
            });
        }
        Ok(())
    }
}

/// Sup-distance and phase shift of the barrier states against the hard wall
/// for increasing `alphas`, each also recomputed with the step halved.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn wall_limit_study(energy: f64, alphas: &[f64], grid: &PhaseGrid) -> Result<WallStudy> {
    if alphas.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 alpha values".into()));
    }
    if alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("alpha values must be strictly increasing".into()));
    }
    let hard = dp::ConfinedEigenstate::new(energy)?.wigner(grid)?;
    let per_alpha: Vec<Result<(WallStudyRow, PhaseFunction)>> = exec::map_indexed(alphas.len(), |t| {
        let params = WallParameters::for_alpha(alphas[t], energy)?;
        let state = solve_wall_state(&params, DEFAULT_NODES)?;
        let fine = solve_wall_state(&params, 2 * DEFAULT_NODES - 1)?;
        let f = wigner_of_wall_state(&state, grid)?;
        let f_fine = wigner_of_wall_state(&fine, grid)?;
        let d = f.sub(&hard)?.max_abs();
        let d_fine = f_fine.sub(&hard)?.max_abs();
        Ok((
            WallStudyRow {
                alpha: alphas[t],
                sup_distance: d,
                phase_shift: state.phase_shift,
                sup_distance_refined: d_fine,
                phase_shift_refined: fine.phase_shift,
            },
            f,
        ))
    });
    let mut rows = Vec::with_capacity(alphas.len());
    let mut fields = Vec::with_capacity(alphas.len());
    for r in per_alpha {
        let (row, f) = r?;
        rows.push(row);
        fields.push(f);
    }
    Ok(WallStudy { energy, rows, fields })
}
