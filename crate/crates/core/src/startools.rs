//! Moyal star products with polynomial momentum symbols and with the one-sided
//! wall potential `delta'_-`.
//!
//! Polynomial symbols act through Bopp shifts: `s(p) * f = s(p - i/2 d_x) f`
//! from the left and `f * s(p) = s(p + i/2 d_x) f` from the right.
//!
//! The left product with `delta'_-` is
//! `(2i/pi) e^{2ipx} [p M0(x) - M1(x)]`, with the p-moments
//! `Mn(x) = int dq q^n e^{-2iqx} f(x - eps, q)`. The moments are taken on the
//! p-window and completed by an asymptotic tail model fitted to each source row.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calculus::{partial_derivative_x_with, simpson_weights, Stencil};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{DistributionalValue, PhaseFunction, PhaseGrid, C64};
use crate::special::two_sided_tail;
use crate::wave::WaveFunction;

const I: C64 = C64::new(0.0, 1.0);

/// Which side a symbol multiplies from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Star multiplication by `c0 + c1 p + c2 p^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoppOperator {
    pub side: Side,
    pub coeffs: [f64; 3],
}

impl BoppOperator {
    pub fn new(side: Side, coeffs: [f64; 3]) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite symbol coefficient".into()));
        }
        Ok(Self { side, coeffs })
    }

    /// Symbol `p^2 - e_shift`.
    pub fn p2_minus(side: Side, e_shift: f64) -> Result<Self> {
        Self::new(side, [-e_shift, 0.0, 1.0])
    }

    pub fn apply(&self, f: &PhaseFunction) -> Result<PhaseFunction> {
        self.apply_with(f, &stencil_for(f))
    }

    pub fn apply_with(&self, f: &PhaseFunction, stencil: &Stencil) -> Result<PhaseFunction> {
        let [c0, c1, c2] = self.coeffs;
        let sign = match self.side {
            Side::Left => -1.0,
            Side::Right => 1.0,
        };
        let needs_d2 = c2 != 0.0;
        let needs_d1 = c1 != 0.0 || c2 != 0.0;
        let d1 = if needs_d1 { Some(partial_derivative_x_with(f, 1, stencil)?) } else { None };
        let d2 = if needs_d2 { Some(partial_derivative_x_with(f, 2, stencil)?) } else { None };
        let g = *f.grid();
        let tag = format!("bopp({})", f.tag);
        Ok(PhaseFunction::from_rows(&g, tag, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                let p = g.p(j);
                let mut acc = f.get(i, j) * (c0 + c1 * p + c2 * p * p);
                if let Some(d1) = &d1 {
                    // (p +- i/2 d)^n first-order terms
                    acc += d1.get(i, j) * (sign * 0.5 * I) * (c1 + 2.0 * c2 * p);
                }
                if let Some(d2) = &d2 {
                    acc -= d2.get(i, j) * (0.25 * c2);
                }
                *v = acc;
            }
        }))
    }
}

/// Stencil used by default: split at the wall for fields that vanish on `x > 0`.
pub fn stencil_for(f: &PhaseFunction) -> Stencil {
    let g = f.grid();
    let confined = ((g.wall_index() + 1)..g.n_x).all(|i| f.row(i).iter().all(|v| *v == C64::new(0.0, 0.0)));
    if confined {
        Stencil::default().split()
    } else {
        Stencil::default()
    }
}

/// `(p^2 - e_shift) * f`.
pub fn star_p2_left(f: &PhaseFunction, e_shift: f64) -> Result<PhaseFunction> {
    BoppOperator::p2_minus(Side::Left, e_shift)?.apply(f)
}

/// `f * (p^2 - e_shift)`.
pub fn star_p2_right(f: &PhaseFunction, e_shift: f64) -> Result<PhaseFunction> {
    BoppOperator::p2_minus(Side::Right, e_shift)?.apply(f)
}

/// `(p^2 - e) * f * (p^2 - e)`, composed left then right with one stencil.
pub fn triple_star_p2(f: &PhaseFunction, e: f64) -> Result<PhaseFunction> {
    let stencil = stencil_for(f);
    let left = BoppOperator::p2_minus(Side::Left, e)?.apply_with(f, &stencil)?;
    Ok(BoppOperator::p2_minus(Side::Right, e)?
        .apply_with(&left, &stencil)?
        .with_tag(format!("triple_star({})", f.tag)))
}

/// How the one-sided limit `eps -> 0+` of `delta'_-` is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extrapolation {
    /// Single offset `eps`.
    Fixed,
    /// `2 K(eps) - K(2 eps)`.
    Richardson2,
    /// `3 K(eps) - 3 K(2 eps) + K(3 eps)`.
    Richardson3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRule {
    pub epsilon: f64,
    pub extrapolation: Extrapolation,
}

impl EpsilonRule {
    /// `eps = dx` with Richardson extrapolation.
    pub fn richardson(grid: &PhaseGrid) -> Self {
        Self {
            epsilon: grid.dx,
            extrapolation: Extrapolation::Richardson2,
        }
    }

    /// `eps = dx` with three-level extrapolation.
    pub fn richardson3(grid: &PhaseGrid) -> Self {
        Self {
            epsilon: grid.dx,
            extrapolation: Extrapolation::Richardson3,
        }
    }

    /// `eps = dx`, no extrapolation.
    pub fn fixed(grid: &PhaseGrid) -> Self {
        Self {
            epsilon: grid.dx,
            extrapolation: Extrapolation::Fixed,
        }
    }

    /// Offset in whole x-nodes; `eps` must be a positive multiple of `dx`.
    pub fn node_shift(&self, grid: &PhaseGrid) -> Result<usize> {
        let s = self.epsilon / grid.dx;
        let r = s.round();
        if !(self.epsilon.is_finite() && r >= 1.0 && (s - r).abs() < 1e-9 * r) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} must be a positive multiple of dx = {}",
                self.epsilon, grid.dx
            )));
        }
        Ok(r as usize)
    }
}

/// Number of inverse powers in the tail model.
const TAIL_TERMS: usize = 9;

/// Tail coefficients `a_n, b_n` of one source row:
/// `f(x', q) ~ sum_n (2iq)^{-(n+1)} [a_n e^{-2iqL'} + b_n e^{2iqL'}]`, `L' = -x'`.
#[derive(Debug, Clone, Copy)]
struct TailModel {
    a: [C64; TAIL_TERMS],
    b: [C64; TAIL_TERMS],
}

fn fit_tail(row: &[C64], x_src: f64, grid: &PhaseGrid) -> Option<TailModel> {
    let q_cut = 0.5 * grid.p_max.min(-grid.p_min);
    let lp = -x_src;
    let nodes: Vec<usize> = (0..grid.n_p).filter(|&j| grid.p(j).abs() >= q_cut).collect();
    let ncol = 2 * TAIL_TERMS;
    if nodes.len() < 2 * ncol {
        return None;
    }
    let mut m = DMatrix::<C64>::zeros(nodes.len(), ncol);
    let mut rhs = DVector::<C64>::zeros(nodes.len());
    for (r, &j) in nodes.iter().enumerate() {
        let q = grid.p(j);
        let mut base = C64::new(1.0, 0.0) / (2.0 * I * q);
        let (em, ep) = (C64::from_polar(1.0, -2.0 * q * lp), C64::from_polar(1.0, 2.0 * q * lp));
        for n in 0..TAIL_TERMS {
            m[(r, 2 * n)] = base * em;
            m[(r, 2 * n + 1)] = base * ep;
            base /= 2.0 * I * q;
        }
        rhs[r] = row[j];
    }
    let scale: Vec<f64> = (0..ncol).map(|c| m.column(c).norm().max(1e-300)).collect();
    for (c, &s) in scale.iter().enumerate() {
        m.column_mut(c).unscale_mut(s);
    }
    let sol = m.svd(true, true).solve(&rhs, 1e-12).ok()?;
    let mut model = TailModel {
        a: [C64::new(0.0, 0.0); TAIL_TERMS],
        b: [C64::new(0.0, 0.0); TAIL_TERMS],
    };
    for n in 0..TAIL_TERMS {
        model.a[n] = sol[2 * n] / scale[2 * n];
        model.b[n] = sol[2 * n + 1] / scale[2 * n + 1];
    }
    Some(model)
}

/// Moments `(M0, M1)` at every target row for source offset `shift` nodes.
fn moments(f: &PhaseFunction, tails: &[Option<TailModel>], shift: usize) -> Vec<(C64, C64)> {
    let g = *f.grid();
    let w = simpson_weights(g.n_p, g.dp);
    let ps = g.ps();
    let tail_ok = g.p_min < 0.0 && g.p_max > 0.0;
    exec::map_indexed(g.n_x, |i| {
        if i < shift {
            return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        }
        let src = i - shift;
        let x = g.x(i);
        let (mut m0, mut m1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (j, &v) in f.row(src).iter().enumerate() {
            let t = C64::from_polar(w[j], -2.0 * ps[j] * x) * v;
            m0 += t;
            m1 += t * ps[j];
        }
        let x_src = g.x(src);
        if tail_ok && x_src < 0.0 {
            if let Some(model) = &tails[src] {
                let (l, lp) = (-x, -x_src);
                let (w1, w2) = (2.0 * (l - lp), 2.0 * (l + lp));
                let mut base = C64::new(1.0, 0.0) / (2.0 * I);
                for n in 0..TAIL_TERMS {
                    let (a, b) = (model.a[n], model.b[n]);
                    let t0 = a * two_sided_tail(w1, n + 1, g.p_min, g.p_max) + b * two_sided_tail(w2, n + 1, g.p_min, g.p_max);
                    let t1 = a * two_sided_tail(w1, n, g.p_min, g.p_max) + b * two_sided_tail(w2, n, g.p_min, g.p_max);
                    m0 += base * t0;
                    m1 += base * t1;
                    base /= 2.0 * I;
                }
            }
        }
        (m0, m1)
    })
}

/// `delta'_- * f`.
///
/// Rows whose shifted source falls outside the x-window are set to zero.
pub fn star_deltaprime_left(f: &PhaseFunction, rule: &EpsilonRule) -> Result<PhaseFunction> {
    let g = *f.grid();
    let shift = rule.node_shift(&g)?;
    if shift * 3 >= g.n_x {
        return Err(Error::GridTooSmall {
            needed: 3 * shift + 1,
            available: g.n_x,
        });
    }
    let tail = crate::calculus::p_tail_max(f);
    if tail > crate::calculus::DEFAULT_TAIL_TOL {
        log::warn!("delta' kernel on '{}': p-edge/peak = {tail:.3e}; tail model carries the remainder", f.tag);
    }
    let tails: Vec<Option<TailModel>> = exec::map_indexed(g.n_x, |i| {
        let x = g.x(i);
        if x < 0.0 {
            fit_tail(f.row(i), x, &g)
        } else {
            None
        }
    });
    let mom = match rule.extrapolation {
        Extrapolation::Fixed => moments(f, &tails, shift),
        Extrapolation::Richardson2 => {
            let a = moments(f, &tails, shift);
            let b = moments(f, &tails, 2 * shift);
            a.iter()
                .zip(&b)
                .map(|(&(a0, a1), &(b0, b1))| (a0 * 2.0 - b0, a1 * 2.0 - b1))
                .collect()
        }
        Extrapolation::Richardson3 => {
            let a = moments(f, &tails, shift);
            let b = moments(f, &tails, 2 * shift);
            let c = moments(f, &tails, 3 * shift);
            a.iter()
                .zip(&b)
                .zip(&c)
                .map(|((&(a0, a1), &(b0, b1)), &(c0, c1))| ((a0 - b0) * 3.0 + c0, (a1 - b1) * 3.0 + c1))
                .collect()
        }
    };
    let tag = format!("dprime_left({})", f.tag);
    Ok(PhaseFunction::from_rows(&g, tag, |i, row| {
        let x = g.x(i);
        let (m0, m1) = mom[i];
        for (j, v) in row.iter_mut().enumerate() {
            let p = g.p(j);
            *v = C64::from_polar(2.0 / PI, 2.0 * p * x) * I * (m0 * p - m1);
        }
    }))
}

/// `f * delta'_-`, as the conjugate of `delta'_- * conj(f)`.
pub fn star_deltaprime_right(f: &PhaseFunction, rule: &EpsilonRule) -> Result<PhaseFunction> {
    Ok(star_deltaprime_left(&f.conj(), rule)?
        .conj()
        .with_tag(format!("dprime_right({})", f.tag)))
}

/// `delta'_- * f * delta'_- = (1/2pi) |psi'(0)|^2 delta(x)` for a confined pure state.
///
/// The regular part is identically zero.
pub fn star_deltaprime_sandwich(f: &PhaseFunction, psi_prime_at_0: C64, rule: &EpsilonRule) -> Result<DistributionalValue> {
    rule.node_shift(f.grid())?;
    if !(psi_prime_at_0.re.is_finite() && psi_prime_at_0.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite wall derivative".into()));
    }
    let coeff = psi_prime_at_0.norm_sqr() / (2.0 * PI);
    let g = f.grid();
    DistributionalValue::new(
        PhaseFunction::zeros(g, format!("sandwich_regular({})", f.tag)),
        vec![C64::new(coeff, 0.0); g.n_p],
    )
}

/// Weak evaluation of the sandwich against a test function of x.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakSandwich {
    pub p_nodes: Vec<f64>,
    /// `int dx t(x) [delta'_- * f * delta'_-](x, p)`.
    pub numeric: Vec<C64>,
    /// `delta_coeff(p) t(0)` from the closed form.
    pub closed: Vec<f64>,
    /// `max_p |numeric - closed| / max_p |closed|` (absolute when `closed = 0`).
    pub discrepancy: f64,
}

/// Offset and mollifier width of the weak sandwich evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakSandwichConfig {
    pub epsilon: f64,
    pub sigma: f64,
    pub extrapolation: Extrapolation,
    /// Quadrature nodes per axis of the `(u, v)` integral.
    pub nodes: usize,
}

impl Default for WeakSandwichConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            sigma: 1e-3 / 8.0,
            extrapolation: Extrapolation::Richardson2,
            nodes: 161,
        }
    }
}

/// Pairs `delta'_- * f * delta'_-` with `test`, where `f` is the Wigner function of `phi`.
///
/// The sandwich is the Wigner function of `chi = delta'(x + eps) phi`, with the
/// delta mollified to a Gaussian of width `sigma`; its pairing with `t` is
/// `(1/2pi) int du dv t((u+v)/2) e^{-ip(v-u)} chi*(u) chi(v)`.
pub fn weak_sandwich(phi: &WaveFunction, p_nodes: &[f64], test: impl Fn(f64) -> f64 + Sync, cfg: &WeakSandwichConfig) -> Result<WeakSandwich> {
    if !(cfg.epsilon > 0.0 && cfg.sigma > 0.0 && cfg.nodes >= 17) {
        return Err(Error::InvalidParameter("weak sandwich needs eps, sigma > 0 and >= 17 nodes".into()));
    }
    let eval = |eps: f64| -> Vec<C64> {
        let half = 8.0 * cfg.sigma;
        let n = cfg.nodes | 1;
        let h = 2.0 * half / (n - 1) as f64;
        let us: Vec<f64> = (0..n).map(|k| -eps - half + k as f64 * h).collect();
        let w = simpson_weights(n, h);
        let norm = 1.0 / (cfg.sigma * (2.0 * PI).sqrt());
        let chi: Vec<C64> = us
            .iter()
            .map(|&u| {
                let s = (u + eps) / cfg.sigma;
                let dgauss = -s / cfg.sigma * norm * (-0.5 * s * s).exp();
                phi.eval(u) * dgauss
            })
            .collect();
        let tw: Vec<f64> = (0..n * n)
            .map(|ab| {
                let (a, b) = (ab / n, ab % n);
                w[a] * w[b] * test(0.5 * (us[a] + us[b]))
            })
            .collect();
        exec::map_indexed(p_nodes.len(), |jp| {
            let p = p_nodes[jp];
            let z: Vec<C64> = us.iter().zip(&chi).map(|(&u, &c)| c * C64::from_polar(1.0, -p * u)).collect();
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..n {
                let inner: C64 = (0..n).map(|b| z[b] * tw[a * n + b]).sum();
                acc += z[a].conj() * inner;
            }
            acc / (2.0 * PI)
        })
    };
    let numeric: Vec<C64> = match cfg.extrapolation {
        Extrapolation::Fixed => eval(cfg.epsilon),
        Extrapolation::Richardson2 => {
            let a = eval(cfg.epsilon);
            let b = eval(2.0 * cfg.epsilon);
            a.iter().zip(&b).map(|(a, b)| a * 2.0 - b).collect()
        }
        Extrapolation::Richardson3 => {
            let a = eval(cfg.epsilon);
            let b = eval(2.0 * cfg.epsilon);
            let c = eval(3.0 * cfg.epsilon);
            a.iter().zip(&b).zip(&c).map(|((a, b), c)| (a - b) * 3.0 + c).collect()
        }
    };
    let coeff = phi.wall_derivative().norm_sqr() / (2.0 * PI);
    let closed = vec![coeff * test(0.0); p_nodes.len()];
    let scale = closed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = numeric
        .iter()
        .zip(&closed)
        .map(|(a, &b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(WeakSandwich {
        p_nodes: p_nodes.to_vec(),
        numeric,
        closed,
        discrepancy: if scale > 0.0 { diff / scale } else { diff },
    })
}
