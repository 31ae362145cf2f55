//! Composite Simpson quadrature on uniform axes.

use crate::error::Result;
use crate::grid::{PhaseFunction, C64};

/// Largest `|f|` on the p-window edges, relative to `max |f|`, accepted before
/// a p-marginal is flagged as untrustworthy.
pub const DEFAULT_TAIL_TOL: f64 = 5e-2;

/// Imaginary part allowed in a p-marginal, relative to `max(1, max |f|)`.
const REALITY_TOL: f64 = 1e-9;

/// Composite Simpson weights for `n` uniform nodes of spacing `h`.
///
/// Odd `n` uses the 1-4-2-...-4-1 rule. Even `n` applies it to the first
/// `n - 3` nodes and closes with the 3/8 rule on the last four. `n = 2` is
/// the trapezoid.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 => {}
        1 => w[0] = 0.0,
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
        }
        3 => {
            w[0] = h / 3.0;
            w[1] = 4.0 * h / 3.0;
            w[2] = h / 3.0;
        }
        _ if n % 2 == 1 => simpson_into(&mut w, h),
        _ => {
            let m = n - 3;
            if m >= 3 {
                simpson_into(&mut w[..m], h);
            }
            let c = 3.0 * h / 8.0;
            for (k, f) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
                w[m - 1 + k] += c * f;
            }
        }
    }
    w
}

fn simpson_into(w: &mut [f64], h: f64) {
    let n = w.len();
    for (i, v) in w.iter_mut().enumerate() {
        *v = if i == 0 || i == n - 1 {
            h / 3.0
        } else if i % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
}

/// Simpson integral of uniformly sampled values.
pub fn simpson(values: &[C64], h: f64) -> C64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(&w, &v)| v * w)
        .sum()
}

/// Largest `|f|` over the two p-edges of the window, relative to `max |f|`.
pub fn p_tail_max(f: &PhaseFunction) -> f64 {
    let g = f.grid();
    let peak = f.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    (0..g.n_x)
        .map(|i| f.get(i, 0).norm().max(f.get(i, g.n_p - 1).norm()))
        .fold(0.0, f64::max)
        / peak
}

/// `int dp f(x, p)` at every x-node.
///
/// Rejects fields with a non-negligible imaginary part and logs a warning when
/// the p-window edges carry more than [`DEFAULT_TAIL_TOL`] of the peak value.
pub fn integrate_p(f: &PhaseFunction) -> Result<Vec<f64>> {
    f.assert_real(REALITY_TOL)?;
    let tail = p_tail_max(f);
    if tail > DEFAULT_TAIL_TOL {
        log::warn!(
            "p-marginal of '{}' untrustworthy: edge/peak = {tail:.3e} exceeds {DEFAULT_TAIL_TOL:e}",
            f.tag
        );
    }
    let g = f.grid();
    let w = simpson_weights(g.n_p, g.dp);
    Ok((0..g.n_x)
        .map(|i| f.row(i).iter().zip(&w).map(|(v, &w)| v.re * w).sum())
        .collect())
}

/// `int dx f(x, p)` at every p-node (complex).
pub fn integrate_x(f: &PhaseFunction) -> Vec<C64> {
    let g = f.grid();
    let w = simpson_weights(g.n_x, g.dx);
    let mut out = vec![C64::new(0.0, 0.0); g.n_p];
    for (i, &wi) in w.iter().enumerate() {
        for (o, &v) in out.iter_mut().zip(f.row(i)) {
            *o += v * wi;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseGrid;

    fn integrate_fn(n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = 2.0 / (n - 1) as f64;
        let w = simpson_weights(n, h);
        (0..n).map(|i| w[i] * f(-1.0 + i as f64 * h)).sum()
    }

    #[test]
    fn weights_sum_to_length() {
        for n in 2..40 {
            let s: f64 = simpson_weights(n, 0.5).iter().sum();
            assert!((s - 0.5 * (n - 1) as f64).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn exact_for_cubics() {
        for n in [5, 6, 7, 8, 33, 64] {
            let v = integrate_fn(n, |x| 1.0 + x + 3.0 * x * x - x * x * x);
            assert!((v - 4.0).abs() < 1e-12, "n = {n}: {v}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = 2.0 * 1f64.sin();
        let e1 = (integrate_fn(33, f64::cos) - exact).abs();
        let e2 = (integrate_fn(65, f64::cos) - exact).abs();
        assert!((e1 / e2).log2() > 3.8);
    }

    #[test]
    fn zero_field_has_zero_marginal() {
        let g = PhaseGrid::new(32, 32, -1.0, 1.0, -1.0, 1.0).unwrap();
        let m = integrate_p(&PhaseFunction::zeros(&g, "z")).unwrap();
        assert!(m.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn complex_field_is_rejected() {
        let g = PhaseGrid::new(32, 32, -1.0, 1.0, -1.0, 1.0).unwrap();
        let f = PhaseFunction::from_fn(&g, "c", |_, _| C64::new(1.0, 0.5));
        assert!(integrate_p(&f).is_err());
    }
}
