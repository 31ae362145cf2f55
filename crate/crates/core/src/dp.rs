//! Confined eigenstates, their Wigner functions, and the star-genvalue,
//! boundary and equivalence identities they satisfy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::calculus::{derivative_at_node, integrate_p, interior_x_mask, simpson_weights, Stencil};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{PhaseFunction, PhaseGrid, C64};
use crate::report::ResidualReport;
use crate::startools::{self, stencil_for, EpsilonRule, Extrapolation};
use crate::tolerance;
use crate::wave::{WaveFunction, WaveKind};

/// `sin(z) / z` with the removable point filled.
#[inline]
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// A confined free eigenstate `theta(-x) 2i sin(sqrt(E) x)` with its wall derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfinedEigenstate {
    pub energy: f64,
    pub phi: WaveFunction,
    /// `psi'(0^-) = 2i sqrt(E)`.
    pub psi_prime_0: C64,
}

impl ConfinedEigenstate {
    pub fn new(energy: f64) -> Result<Self> {
        Ok(Self {
            energy,
            phi: WaveFunction::confined(energy)?,
            psi_prime_0: C64::new(0.0, 2.0 * energy.sqrt()),
        })
    }

    pub fn wigner(&self, grid: &PhaseGrid) -> Result<PhaseFunction> {
        wigner_transform(&self.phi, grid)
    }
}

/// Cross term `(1/pi) int_{-L}^{L} dy e^{-2ipy} phi_j^*(x - y) phi_l(x + y)`, `L = -x`,
/// for confined sines with wavenumbers `kj`, `kl`.
fn confined_cross(kj: f64, kl: f64, x: f64, p: f64) -> C64 {
    if x >= 0.0 {
        return C64::new(0.0, 0.0);
    }
    let l = -x;
    // int e^{-2ipy} cos(a - b y) dy = e^{ia} L sinc((2p+b)L) + e^{-ia} L sinc((2p-b)L)
    let c = |a: f64, b: f64| C64::from_polar(l * sinc((2.0 * p + b) * l), a) + C64::from_polar(l * sinc((2.0 * p - b) * l), -a);
    (c((kj - kl) * x, kj + kl) - c((kj + kl) * x, kj - kl)) * (2.0 / PI)
}

/// `f(x, p) = (1/pi) int dy e^{-2ipy} phi^*(x - y) phi(x + y)`.
///
/// Confined closed forms use the finite y-range `[x, -x]` analytically;
/// sampled states use Simpson quadrature over the sampled support, treating the
/// state as zero beyond it. Full-line states have no grid Wigner function.
pub fn wigner_transform(phi: &WaveFunction, grid: &PhaseGrid) -> Result<PhaseFunction> {
    let g = *grid;
    match &phi.kind {
        WaveKind::Confined { energy } => {
            let k = energy.sqrt();
            Ok(PhaseFunction::from_real_fn(&g, "wigner", move |x, p| confined_cross(k, k, x, p).re))
        }
        WaveKind::ConfinedSuperposition { terms } => {
            let t = phi.time.unwrap_or(0.0);
            let pairs: Vec<(C64, f64, f64)> = terms
                .iter()
                .flat_map(|&(cj, ej)| {
                    terms.iter().map(move |&(cl, el)| {
                        let w = cj.conj() * cl * C64::from_polar(1.0, (ej - el) * t);
                        (w, ej.sqrt(), el.sqrt())
                    })
                })
                .collect();
            Ok(PhaseFunction::from_fn(&g, "wigner", move |x, p| {
                pairs.iter().map(|&(w, kj, kl)| w * confined_cross(kj, kl, x, p)).sum()
            }))
        }
        WaveKind::FullLine { .. } => Err(Error::Distributional("full-line")),
        WaveKind::Sampled { .. } => wigner_sampled(phi, &g),
    }
}

fn wigner_sampled(phi: &WaveFunction, g: &PhaseGrid) -> Result<PhaseFunction> {
    weighted_sampled_transform(phi, g, |_| 1.0, "wigner")
}

/// `(1/pi) int dy e^{-2ipy} w(y) phi^*(x - y) phi(x + y)` for a sampled state,
/// by Simpson quadrature in y over the part of the support symmetric about x.
pub(crate) fn weighted_sampled_transform<W>(phi: &WaveFunction, g: &PhaseGrid, weight: W, tag: &str) -> Result<PhaseFunction>
where
    W: Fn(f64) -> f64 + Sync + Send,
{
    let WaveKind::Sampled { h, .. } = &phi.kind else {
        return Err(Error::InvalidParameter("weighted transform needs a sampled state".into()));
    };
    let (lo, hi) = phi.support().expect("sampled state has a support");
    let need_lo = 2.0 * g.x_min - hi;
    if lo > need_lo + 1e-12 || hi < g.x_max {
        return Err(Error::SupportCoverage {
            need_lo,
            need_hi: g.x_max,
        });
    }
    let step = h.max(g.dx / 4.0).min(0.25 * PI / (2.0 * g.p_max.abs().max(g.p_min.abs())));
    let gg = *g;
    let rows = exec::map_indexed(g.n_x, |i| {
        let x = gg.x(i);
        let ymax = (x - lo).min(hi - x).max(0.0);
        let n = ((ymax / step).ceil() as usize).max(2) | 1;
        let hy = ymax / (n - 1) as f64;
        let w = simpson_weights(n, hy);
        let mut acc = vec![C64::new(0.0, 0.0); gg.n_p];
        for (m, &wm) in w.iter().enumerate() {
            let y = m as f64 * hy;
            // both halves of [-Y, Y] carry the y = 0 node
            for sgn in [1.0, -1.0] {
                let ys = sgn * y;
                let c = phi.eval(x - ys).conj() * phi.eval(x + ys) * (wm * weight(ys));
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut ph = C64::from_polar(1.0, -2.0 * gg.p_min * ys);
                let r = C64::from_polar(1.0, -2.0 * gg.dp * ys);
                for a in acc.iter_mut() {
                    *a += c * ph;
                    ph *= r;
                }
            }
        }
        acc.into_iter().map(|v| v / PI).collect::<Vec<C64>>()
    });
    PhaseFunction::from_values(g, rows.into_iter().flatten().collect(), tag)
}

/// Rows of a residual that are trusted: away from the window edges, with the
/// shifted kernel source inside the window, and not right of the wall within
/// half the largest kernel offset, where the offsets straddle the mirror point
/// of their source.
pub fn residual_mask(grid: &PhaseGrid, stencil: &Stencil, max_order: usize, kernel_rows: usize) -> Vec<bool> {
    let mut mask = interior_x_mask(grid.n_x, stencil.edge_margin(max_order).max(kernel_rows));
    let w = grid.wall_index();
    for (i, m) in mask.iter_mut().enumerate().skip(w + 1) {
        if 2 * (i - w) <= kernel_rows {
            *m = false;
        }
    }
    mask
}

fn kernel_rows(rule: &EpsilonRule, grid: &PhaseGrid) -> Result<usize> {
    let s = rule.node_shift(grid)?;
    Ok(match rule.extrapolation {
        Extrapolation::Fixed => s,
        Extrapolation::Richardson2 => 2 * s,
        Extrapolation::Richardson3 => 3 * s,
    })
}

/// `max |p^2 * f - E f|` over trusted rows.
pub fn naive_stargenvalue_residual(f: &PhaseFunction, e: f64) -> Result<ResidualReport> {
    let g = f.grid();
    let stencil = stencil_for(f);
    let r = startools::star_p2_left(f, e)?;
    let mask = residual_mask(g, &stencil, 2, 0);
    Ok(ResidualReport::from_field("naive star-genvalue", &r, Some(&mask), tolerance::naive(g)))
}

/// Gaussian test functions in p used for distributional Wigner functions.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakTests {
    pub centers: Vec<f64>,
    pub width: f64,
}

impl WeakTests {
    /// Centres on `[-2k, 2k]` including `0` and `+-k`, width `1/2`.
    pub fn around(energy: f64) -> Self {
        let k = energy.sqrt();
        Self {
            centers: (-8..=8).map(|m| 0.25 * k * m as f64).collect(),
            width: 0.5,
        }
    }
}

/// Naive residual of the full-line eigenstate, paired with normalized Gaussians
/// `chi(p)` in p.
///
/// `<f, p^n chi>(x)` is computed as `(1/pi) int dy phi^*(x-y) phi(x+y) chi_n(y)`
/// with `chi_n` the transform of `p^n chi`; x-derivatives use the grid stencil.
/// The residual is `<f,(p^2-E)chi> - i d_x <f,p chi> - 1/4 d_x^2 <f,chi>`.
pub fn naive_residual_full_line(energy: f64, grid: &PhaseGrid, tests: &WeakTests) -> Result<ResidualReport> {
    let phi = WaveFunction::full_line(energy)?;
    let g = *grid;
    let s = tests.width;
    let ymax = 9.0 / s;
    let ny = 4001;
    let hy = 2.0 * ymax / (ny - 1) as f64;
    let wy = simpson_weights(ny, hy);
    let stencil = Stencil::default();
    let mask = residual_mask(&g, &stencil, 2, 0);
    let per_test: Vec<Result<f64>> = exec::map_indexed(tests.centers.len(), |t| {
        let p0 = tests.centers[t];
        let mut pair = [vec![C64::new(0.0, 0.0); g.n_x], vec![C64::new(0.0, 0.0); g.n_x], vec![C64::new(0.0, 0.0); g.n_x]];
        for i in 0..g.n_x {
            let x = g.x(i);
            for (m, &w) in wy.iter().enumerate() {
                let y = -ymax + m as f64 * hy;
                let gy = C64::from_polar((-2.0 * s * s * y * y).exp(), -2.0 * p0 * y);
                let u = C64::new(-4.0 * s * s * y, -2.0 * p0);
                let chis = [gy, gy * C64::new(p0, -2.0 * s * s * y), gy * (u * u - 4.0 * s * s) * -0.25];
                let base = phi.eval(x - y).conj() * phi.eval(x + y) * (w / PI);
                for (acc, chi) in pair.iter_mut().zip(chis) {
                    acc[i] += base * chi;
                }
            }
        }
        let d1 = crate::calculus::stencil::derivative_1d(&pair[1], g.dx, 1, &stencil)?;
        let d2 = crate::calculus::stencil::derivative_1d(&pair[0], g.dx, 2, &stencil)?;
        Ok((0..g.n_x)
            .filter(|&i| mask[i])
            .map(|i| (pair[2][i] - pair[0][i] * energy - d1[i] * C64::new(0.0, 1.0) - d2[i] * 0.25).norm())
            .fold(0.0, f64::max))
    });
    let mut worst: f64 = 0.0;
    for r in per_test {
        worst = worst.max(r?);
    }
    Ok(ResidualReport::new("naive star-genvalue (full line, weak)", worst, worst, tolerance::naive(&g), &g))
}

/// Left and right residuals of `(p^2 + delta'_-) * f = E f` and `f * (p^2 + delta'_-) = E f`.
pub fn dp_residual_fields(f: &PhaseFunction, e: f64, rule: &EpsilonRule) -> Result<(PhaseFunction, PhaseFunction)> {
    let left = startools::star_p2_left(f, e)?.add(&startools::star_deltaprime_left(f, rule)?)?;
    let right = startools::star_p2_right(f, e)?.add(&startools::star_deltaprime_right(f, rule)?)?;
    Ok((left, right))
}

/// Worse of the left and right star-genvalue residuals with the wall potential.
pub fn dp_stargenvalue_residual(f: &PhaseFunction, e: f64, rule: &EpsilonRule) -> Result<ResidualReport> {
    let g = f.grid();
    let (left, right) = dp_residual_fields(f, e, rule)?;
    let mask = residual_mask(g, &stencil_for(f), 2, kernel_rows(rule, g)?);
    let tol = tolerance::dp(g);
    Ok(ResidualReport::worst(
        "dp star-genvalue",
        ResidualReport::from_field("left", &left, Some(&mask), tol),
        ResidualReport::from_field("right", &right, Some(&mask), tol),
    ))
}

/// `f`, `d_x f`, `d_x^2 f` at `0^-` for every p, and the p-marginal there.
pub fn boundary_conditions_check(f: &PhaseFunction) -> Result<ResidualReport> {
    let g = f.grid();
    let w = g.wall_index();
    let stencil = Stencil::default().split();
    let v0 = f.row(w).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let d1 = derivative_at_node(f, w, 1, &stencil)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let d2 = derivative_at_node(f, w, 2, &stencil)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let marginal = integrate_p(&f.real_part())?[w].abs();
    let worst = v0.max(d1).max(d2).max(marginal);
    Ok(ResidualReport::new("wall conditions", worst, worst, tolerance::boundary(g), g)
        .with_detail("f", v0)
        .with_detail("dx_f", d1)
        .with_detail("dxx_f", d2)
        .with_detail("marginal", marginal))
}

/// Reports of the equivalence chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// `2E Re(p^2 * f) - p^2 * f * p^2 - E^2 f` off the wall.
    pub regular: ResidualReport,
    /// Point-supported coefficient implied by `f` against the sandwich closed form.
    pub delta: ResidualReport,
    /// `delta'_- * f - (E f - p^2 * f)`.
    pub substitution: ResidualReport,
}

impl ChainReport {
    pub fn pass(&self) -> bool {
        self.regular.pass && self.delta.pass && self.substitution.pass
    }

    pub fn combined(&self) -> ResidualReport {
        let r = ResidualReport::worst("equivalence chain", self.regular.clone(), self.delta.clone());
        ResidualReport::worst("equivalence chain", r, self.substitution.clone())
    }
}

/// Checks `2E Re(p^2 * f) - p^2 * f * p^2 + delta'_- * f * delta'_- = E^2 f`.
///
/// Off the wall the regular parts must cancel. At the wall the fourth
/// derivative in `p^2 * f * p^2` carries `-(1/16) d_x^3 f(0^-, p) delta(x)`,
/// which must equal the sandwich coefficient `(1/2pi) |psi'(0)|^2`.
pub fn equivalence_chain_residual(f: &PhaseFunction, e: f64, psi_prime_0: C64, rule: &EpsilonRule) -> Result<ChainReport> {
    let g = *f.grid();
    let stencil = stencil_for(f);
    let wall = g.wall_index();

    let left = startools::BoppOperator::p2_minus(startools::Side::Left, 0.0)?.apply_with(f, &stencil)?;
    let both = startools::BoppOperator::p2_minus(startools::Side::Right, 0.0)?.apply_with(&left, &stencil)?;
    let regular = PhaseFunction::from_rows(&g, "chain_regular", |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = C64::new(2.0 * e * left.get(i, j).re, 0.0) - both.get(i, j) - f.get(i, j) * (e * e);
        }
    });
    let margin = stencil.edge_margin(4) + stencil.edge_margin(2);
    let mut mask = interior_x_mask(g.n_x, margin);
    mask[wall] = false;
    let regular = ResidualReport::from_field("chain regular part", &regular, Some(&mask), tolerance::chain(&g));

    let d3 = derivative_at_node(f, wall, 3, &Stencil::default().split())?;
    let sandwich = startools::star_deltaprime_sandwich(f, psi_prime_0, rule)?;
    let mut worst: f64 = 0.0;
    let mut implied_mean = 0.0;
    for (j, d) in d3.iter().enumerate() {
        let implied = -d.re / 16.0;
        implied_mean += implied / g.n_p as f64;
        worst = worst.max((implied - sandwich.delta_coeff[j].re).abs());
    }
    let closed = sandwich.delta_coeff[0].re;
    let rel = if closed.abs() > 0.0 { worst / closed.abs() } else { worst };
    let delta = ResidualReport::new("chain delta coefficient (relative)", rel, rel, tolerance::DELTA_REL, &g)
        .with_detail("implied_mean", implied_mean)
        .with_detail("closed_form", closed);

    let (lres, _) = dp_residual_fields(f, e, rule)?;
    let smask = residual_mask(&g, &stencil, 2, kernel_rows(rule, &g)?);
    let substitution = ResidualReport::from_field("chain substitution", &lres, Some(&smask), tolerance::dp(&g));
    Ok(ChainReport {
        regular,
        delta,
        substitution,
    })
}

/// Stencil accuracy used for the wall third derivative of the smooth extension.
pub const THIRD_DERIVATIVE_ACCURACY: usize = 16;

/// `d_x^3 rho(0, p) = -(8/pi) |psi'(0)|^2`, constant in p.
///
/// `max_abs` is the relative deviation from the closed form; the relative
/// spread over p is reported and must stay below
/// [`tolerance::THIRD_DERIVATIVE_SPREAD`].
pub fn third_derivative_identity(rho: &PhaseFunction, psi_prime_0: C64) -> Result<ResidualReport> {
    let g = rho.grid();
    let d3 = derivative_at_node(rho, g.wall_index(), 3, &Stencil::new(THIRD_DERIVATIVE_ACCURACY))?;
    let expected = -(8.0 / PI) * psi_prime_0.norm_sqr();
    let vals: Vec<f64> = d3.iter().map(|v| v.re).collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let dev = vals.iter().map(|v| (v - expected).abs()).fold(0.0, f64::max);
    let scale = expected.abs();
    let (dev_rel, sd_rel) = if scale > 0.0 { (dev / scale, sd / scale) } else { (dev, sd) };
    let mut r = ResidualReport::new("wall third derivative (relative)", dev_rel, dev_rel, tolerance::DELTA_REL, g)
        .with_detail("expected", expected)
        .with_detail("mean", mean)
        .with_detail("spread_rel", sd_rel);
    r.pass = r.pass && sd_rel <= tolerance::THIRD_DERIVATIVE_SPREAD;
    Ok(r)
}
