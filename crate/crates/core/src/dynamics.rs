//! Transport equation `d_t f + 2p d_x f = K` for confined free states, where
//! the source `K` is carried by the wavefunction's slope at the wall.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::calculus::{integrate_x, interior_x_mask, partial_derivative_x_with, simpson_weights, Stencil};
use crate::dp::wigner_transform;
use crate::error::{Error, Result};
use crate::grid::{PhaseFunction, PhaseGrid, C64};
use crate::report::ResidualReport;
use crate::startools::stencil_for;
use crate::tolerance;
use crate::wave::WaveFunction;

/// Largest number of eigenstates in a [`TimeState`].
pub const MAX_TERMS: usize = 4;
/// Largest accepted `dt * max E_k`.
pub const MAX_PHASE_STEP: f64 = 4e-3;

/// `sum_k c_k e^{-i E_k t} phi_{E_k}(x)` over confined eigenstates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeState {
    terms: Vec<(C64, f64)>,
}

impl TimeState {
    pub fn new(terms: Vec<(C64, f64)>) -> Result<Self> {
        if terms.len() > MAX_TERMS {
            return Err(Error::InvalidParameter(format!("at most {MAX_TERMS} terms, got {}", terms.len())));
        }
        for (a, &(_, ea)) in terms.iter().enumerate() {
            if terms[..a].iter().any(|&(_, eb)| eb == ea) {
                return Err(Error::InvalidParameter(format!("repeated energy {ea}")));
            }
        }
        WaveFunction::superposition(terms.clone())?;
        Ok(Self { terms })
    }

    pub fn stationary(energy: f64) -> Result<Self> {
        Self::new(vec![(C64::new(1.0, 0.0), energy)])
    }

    pub fn terms(&self) -> &[(C64, f64)] {
        &self.terms
    }

    pub fn max_energy(&self) -> f64 {
        self.terms.iter().map(|t| t.1).fold(0.0, f64::max)
    }

    pub fn psi(&self, t: f64) -> WaveFunction {
        WaveFunction::superposition(self.terms.clone())
            .expect("validated on construction")
            .at_time(t)
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im == 0.0)
    }
}

/// `K(x, p, t) = (2/pi) Im[e^{-2ipx} psi'^*(0, t) psi(2x, t)]`.
pub fn source_term(state: &TimeState, t: f64, grid: &PhaseGrid) -> PhaseFunction {
    let psi = state.psi(t);
    let dpsi0 = psi.wall_derivative().conj();
    let g = *grid;
    PhaseFunction::from_rows(&g, "source", |i, row| {
        let x = g.x(i);
        let a = dpsi0 * psi.eval(2.0 * x);
        for (j, v) in row.iter_mut().enumerate() {
            let z = C64::from_polar(1.0, -2.0 * g.p(j) * x) * a;
            *v = C64::new(2.0 / PI * z.im, 0.0);
        }
    })
}

/// x-stencil accuracy for the transport residual.
pub const TRANSPORT_ACCURACY: usize = 4;

fn check_step(state: &TimeState, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0 && dt * state.max_energy() <= MAX_PHASE_STEP) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} must be > 0 with dt * max E <= {MAX_PHASE_STEP}"
        )));
    }
    Ok(())
}

/// Nodewise `d_t f + 2p d_x f - K`, optionally with `K` dropped.
pub fn moyal_residual_field(state: &TimeState, t: f64, dt: f64, grid: &PhaseGrid, with_source: bool) -> Result<PhaseFunction> {
    check_step(state, dt)?;
    let (fm, f0, fp) = (
        wigner_transform(&state.psi(t - dt), grid)?,
        wigner_transform(&state.psi(t), grid)?,
        wigner_transform(&state.psi(t + dt), grid)?,
    );
    let stencil = Stencil {
        accuracy: TRANSPORT_ACCURACY,
        ..stencil_for(&f0)
    };
    let dx = partial_derivative_x_with(&f0, 1, &stencil)?;
    let k = if with_source {
        source_term(state, t, grid)
    } else {
        PhaseFunction::zeros(grid, "no_source")
    };
    let g = *grid;
    Ok(PhaseFunction::from_rows(&g, "transport_residual", |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            let dt_f = (fp.get(i, j) - fm.get(i, j)) / (2.0 * dt);
            *v = dt_f + dx.get(i, j) * (2.0 * g.p(j)) - k.get(i, j);
        }
    }))
}

/// Transport residual away from the window edges.
pub fn moyal_residual(state: &TimeState, t: f64, dt: f64, grid: &PhaseGrid) -> Result<ResidualReport> {
    moyal_report(state, t, dt, grid, true)
}

/// As [`moyal_residual`] with `K` forced to zero.
pub fn moyal_residual_without_source(state: &TimeState, t: f64, dt: f64, grid: &PhaseGrid) -> Result<ResidualReport> {
    moyal_report(state, t, dt, grid, false)
}

fn moyal_report(state: &TimeState, t: f64, dt: f64, grid: &PhaseGrid, with_source: bool) -> Result<ResidualReport> {
    let r = moyal_residual_field(state, t, dt, grid, with_source)?;
    let mask = interior_x_mask(grid.n_x, Stencil::new(TRANSPORT_ACCURACY).edge_margin(1));
    let label = if with_source { "transport with wall source" } else { "transport without source" };
    Ok(ResidualReport::from_field(label, &r, Some(&mask), tolerance::moyal(grid)).with_detail("t", t))
}

/// Terms of the integrated transport equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    /// `d/dt int int f`.
    pub rate: f64,
    /// `int int K`.
    pub source: f64,
    /// `2 int dp p f` at `x_max` minus at `x_min`.
    pub flux: f64,
}

impl Balance {
    /// `rate + flux - source`.
    pub fn residual(&self) -> f64 {
        self.rate + self.flux - self.source
    }
}

fn total(f: &PhaseFunction) -> f64 {
    let g = f.grid();
    let w = simpson_weights(g.n_p, g.dp);
    integrate_x(f).iter().zip(&w).map(|(v, w)| v.re * w).sum()
}

/// Integrates the transport equation over the grid window.
pub fn global_balance(state: &TimeState, t: f64, dt: f64, grid: &PhaseGrid) -> Result<Balance> {
    check_step(state, dt)?;
    let fm = wigner_transform(&state.psi(t - dt), grid)?;
    let fp = wigner_transform(&state.psi(t + dt), grid)?;
    let f0 = wigner_transform(&state.psi(t), grid)?;
    let w = simpson_weights(grid.n_p, grid.dp);
    let edge = |i: usize| -> f64 { f0.row(i).iter().zip(&w).enumerate().map(|(j, (v, w))| 2.0 * grid.p(j) * v.re * w).sum() };
    Ok(Balance {
        rate: (total(&fp) - total(&fm)) / (2.0 * dt),
        source: total(&source_term(state, t, grid)),
        flux: edge(grid.n_x - 1) - edge(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(161, 128, -4.0, 1.0, -8.0, 8.0).unwrap()
    }

    #[test]
    fn zero_state_has_no_source() {
        let s = TimeState::new(vec![(C64::new(0.0, 0.0), 1.0)]).unwrap();
        assert_eq!(source_term(&s, 0.3, &grid()).max_abs(), 0.0);
    }

    #[test]
    fn source_vanishes_right_of_wall() {
        let g = grid();
        let s = TimeState::new(vec![(C64::new(0.6, 0.1), 1.0), (C64::new(-0.3, 0.7), 2.5)]).unwrap();
        let k = source_term(&s, 0.4, &g);
        for i in g.wall_index()..g.n_x {
            assert!(k.row(i).iter().all(|v| v.norm() == 0.0));
        }
        assert_eq!(k.max_imag(), 0.0);
    }

    #[test]
    fn states_are_validated() {
        assert!(TimeState::new(vec![(C64::new(1.0, 0.0), 1.0); 2]).is_err());
        assert!(TimeState::new((1..=5).map(|k| (C64::new(1.0, 0.0), k as f64)).collect()).is_err());
        assert!(TimeState::new(vec![(C64::new(1.0, 0.0), -1.0)]).is_err());
        let s = TimeState::stationary(1.0).unwrap();
        assert!(moyal_residual(&s, 0.0, 0.1, &grid()).is_err());
    }

    #[test]
    fn transport_vanishes_right_of_wall() {
        let g = grid();
        let s = TimeState::new(vec![(C64::new(0.5f64.sqrt(), 0.0), 1.0), (C64::new(0.5f64.sqrt(), 0.0), 4.0)]).unwrap();
        let r = moyal_residual_field(&s, 0.1, 1e-3, &g, true).unwrap();
        for i in g.wall_index() + 1..g.n_x {
            assert!(r.row(i).iter().all(|v| v.norm() == 0.0));
        }
    }
}
