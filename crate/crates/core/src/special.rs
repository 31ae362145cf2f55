//! Sine/cosine integrals and oscillatory tail integrals `int_Q^inf e^{i w q} q^{-m} dq`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `|w| Q` above which the asymptotic series replaces upward recursion.
const ASYMPTOTIC_SWITCH: f64 = 40.0;

/// `(Si(x), Ci(x))` for `x > 0`; `Si` is odd, `Ci(0) = -inf`.
///
/// Power series below `x = 2`, Lentz continued fraction above.
pub fn sici(x: f64) -> (f64, f64) {
    const MAXIT: usize = 200;
    const EPS: f64 = 1e-16;
    let t = x.abs();
    if t == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let (si, ci) = if t > 2.0 {
        let tiny = 1e-300;
        let mut b = C64::new(1.0, t);
        let mut c = C64::new(1.0 / tiny, 0.0);
        let mut d = C64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..MAXIT {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += 2.0;
            d = C64::new(1.0, 0.0) / (d * a + b);
            c = b + C64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < EPS {
                break;
            }
        }
        h *= C64::new(t.cos(), -t.sin());
        (FRAC_PI_2 + h.im, -h.re)
    } else {
        let (mut sum, mut sums, mut sumc) = (0.0, 0.0, 0.0);
        let (mut sign, mut fact, mut odd) = (1.0, 1.0, true);
        for k in 1..MAXIT {
            fact *= t / k as f64;
            let term = fact / k as f64;
            sum += sign * term;
            let err = term / sum.abs();
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if err < EPS {
                break;
            }
            odd = !odd;
        }
        (sums, sumc + t.ln() + EULER_GAMMA)
    };
    (if x < 0.0 { -si } else { si }, ci)
}

/// `int_Q^inf e^{i w q} q^{-m} dq` for `Q > 0`, `w != 0`; `m = 0` in the Abel sense.
pub fn upper_tail(w: f64, m: usize, q: f64) -> C64 {
    debug_assert!(q > 0.0 && w != 0.0);
    let iw = C64::new(0.0, w);
    let e = C64::from_polar(1.0, w * q);
    if m == 0 {
        return -e / iw;
    }
    if m >= 2 && w.abs() * q > ASYMPTOTIC_SWITCH {
        // I_m = -e/(i w) * sum_j (m)_j Q^{-m-j} / (i w)^j
        let mut term = C64::new(q.powi(-(m as i32)), 0.0);
        let mut sum = term;
        for j in 0..60 {
            let next = term * ((m + j) as f64 / q) / iw;
            if next.norm() > term.norm() {
                break;
            }
            term = next;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        return -e / iw * sum;
    }
    let (si, ci) = sici(w.abs() * q);
    let mut v = C64::new(-ci, w.signum() * (FRAC_PI_2 - si));
    for j in 1..m {
        v = (iw * v + e * q.powi(-(j as i32))) / j as f64;
    }
    v
}

/// `int_{q > q_hi} + int_{q < q_lo} e^{i w q} q^{-m} dq` for `q_lo < 0 < q_hi`.
///
/// At `w = 0` the value is the limit of the Abel-regularized form; for `m = 1`
/// it is the midpoint of the jump across `w = 0`.
pub fn two_sided_tail(w: f64, m: usize, q_lo: f64, q_hi: f64) -> C64 {
    if w == 0.0 {
        let v = match m {
            0 => q_lo - q_hi,
            1 => (-q_lo / q_hi).ln(),
            _ => {
                let k = 1.0 - m as f64;
                let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                (q_hi.powf(k) + sign * (-q_lo).powf(k)) / (m as f64 - 1.0)
            }
        };
        return C64::new(v, 0.0);
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    upper_tail(w, m, q_hi) + upper_tail(-w, m, -q_lo) * sign
}
