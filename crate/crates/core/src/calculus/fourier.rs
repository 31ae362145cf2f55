//! Partial Fourier transforms in x: `Sigma(y, p) = int dx e^{i x y} f(x, p)`.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::calculus::quadrature::{simpson_weights, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{PhaseFunction, PhaseGrid, SpectralSlice, C64};

/// Conjugate frequencies `y_m = 2 pi m / (n dx)` for `m` symmetric about 0.
///
/// For even `n` both `m = -n/2` and `m = n/2` are kept so the axis is symmetric.
pub fn conjugate_axis(grid: &PhaseGrid) -> Vec<f64> {
    let n = grid.n_x as i64;
    let h = n / 2;
    let lo = if n % 2 == 0 { -h } else { -(n - 1) / 2 };
    (lo..=h).map(|m| 2.0 * PI * m as f64 / (n as f64 * grid.dx)).collect()
}

fn x_tail(f: &PhaseFunction) -> f64 {
    let g = f.grid();
    let peak = f.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    f.row(0)
        .iter()
        .chain(f.row(g.n_x - 1))
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        / peak
}

/// Simpson-weighted discrete transform on the conjugate axis.
///
/// Exact inverse: [`inverse_fourier_x`]. `Sigma(0, p)` equals the Simpson
/// integral of `f(., p)`.
pub fn fourier_x(f: &PhaseFunction) -> SpectralSlice {
    let g = *f.grid();
    let tail = x_tail(f);
    if tail > DEFAULT_TAIL_TOL {
        log::warn!("x-transform of '{}': edge/peak = {tail:.3e}, window truncation not negligible", f.tag);
    }
    let n = g.n_x;
    let w = simpson_weights(n, g.dx);
    let ys = conjugate_axis(&g);
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let columns: Vec<Vec<C64>> = exec::map_indexed(g.n_p, |j| {
        let mut buf: Vec<C64> = (0..n).map(|i| f.get(i, j) * w[i]).collect();
        fft.process(&mut buf);
        ys.iter()
            .map(|&y| {
                let m = (y * n as f64 * g.dx / (2.0 * PI)).round() as i64;
                let k = m.rem_euclid(n as i64) as usize;
                buf[k] * C64::from_polar(1.0, y * g.x_min)
            })
            .collect()
    });
    let mut values = vec![C64::new(0.0, 0.0); ys.len() * g.n_p];
    for (j, col) in columns.iter().enumerate() {
        for (m, &v) in col.iter().enumerate() {
            values[m * g.n_p + j] = v;
        }
    }
    SpectralSlice::new(ys, g.ps(), values).expect("conjugate axis is symmetric by construction")
}

/// Recovers `f` on `grid` from the output of [`fourier_x`].
pub fn inverse_fourier_x(sigma: &SpectralSlice, grid: &PhaseGrid) -> Result<PhaseFunction> {
    let g = *grid;
    let n = g.n_x;
    let ys = conjugate_axis(&g);
    if sigma.y_nodes.len() != ys.len() || sigma.p_nodes.len() != g.n_p {
        return Err(Error::GridMismatch);
    }
    let w = simpson_weights(n, g.dx);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let columns: Vec<Vec<C64>> = exec::map_indexed(g.n_p, |j| {
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for (m, &y) in ys.iter().enumerate().take(n) {
            let mm = (y * n as f64 * g.dx / (2.0 * PI)).round() as i64;
            let k = mm.rem_euclid(n as i64) as usize;
            buf[k] = sigma.get(m, j) * C64::from_polar(1.0, -y * g.x_min);
        }
        fft.process(&mut buf);
        buf.iter().zip(&w).map(|(v, &wi)| v / (n as f64 * wi)).collect()
    });
    let mut values = vec![C64::new(0.0, 0.0); g.len()];
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            values[g.index(i, j)] = v;
        }
    }
    PhaseFunction::from_values(&g, values, "inverse")
}

/// `int dx e^{(i y + eta) x} f(x, p)` at arbitrary `y_nodes`, by direct Simpson sums.
///
/// `eta > 0` damps the `x -> -inf` side; the result is the undamped transform
/// continued to `y - i eta`.
pub fn fourier_x_damped(f: &PhaseFunction, y_nodes: &[f64], eta: f64) -> Result<SpectralSlice> {
    let g = *f.grid();
    let w = simpson_weights(g.n_x, g.dx);
    let xs = g.xs();
    let rows: Vec<Vec<C64>> = exec::map_indexed(y_nodes.len(), |m| {
        let y = y_nodes[m];
        let mut acc = vec![C64::new(0.0, 0.0); g.n_p];
        for (i, &x) in xs.iter().enumerate() {
            let c = C64::from_polar((eta * x).exp() * w[i], y * x);
            for (a, &v) in acc.iter_mut().zip(f.row(i)) {
                *a += c * v;
            }
        }
        acc
    });
    SpectralSlice::new(y_nodes.to_vec(), g.ps(), rows.into_iter().flatten().collect())
}
