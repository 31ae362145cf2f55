//! Wavefunctions on the line: closed-form free states and sampled states.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Representation of a wavefunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WaveKind {
    /// `theta(-x) (e^{i k x} - e^{-i k x})`, `k = sqrt(E)`.
    Confined { energy: f64 },
    /// `e^{i k x} - e^{-i k x}` on the whole line.
    FullLine { energy: f64 },
    /// `sum_k c_k e^{-i E_k t} phi_{E_k}(x)` of confined eigenstates.
    ConfinedSuperposition { terms: Vec<(C64, f64)> },
    /// Samples `values[k]` at `x0 + k h`, cubic interpolation in between.
    Sampled { x0: f64, h: f64, values: Vec<C64> },
}

/// A wavefunction with an optional evolution time.
///
/// Closed-form kinds evolve with `e^{-i E t}` per component; samples are static.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    pub kind: WaveKind,
    pub time: Option<f64>,
}

fn check_energy(e: f64) -> Result<()> {
    if e.is_finite() && e > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("energy must be finite and > 0, got {e}")))
    }
}

impl WaveFunction {
    pub fn confined(energy: f64) -> Result<Self> {
        check_energy(energy)?;
        Ok(Self {
            kind: WaveKind::Confined { energy },
            time: None,
        })
    }

    pub fn full_line(energy: f64) -> Result<Self> {
        check_energy(energy)?;
        Ok(Self {
            kind: WaveKind::FullLine { energy },
            time: None,
        })
    }

    pub fn superposition(terms: Vec<(C64, f64)>) -> Result<Self> {
        for &(c, e) in &terms {
            check_energy(e)?;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        Ok(Self {
            kind: WaveKind::ConfinedSuperposition { terms },
            time: None,
        })
    }

    pub fn sampled(x0: f64, h: f64, values: Vec<C64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && x0.is_finite()) {
            return Err(Error::InvalidParameter("sample spacing must be finite and > 0".into()));
        }
        if values.len() < 4 {
            return Err(Error::InvalidParameter("need at least 4 samples".into()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        Ok(Self {
            kind: WaveKind::Sampled { x0, h, values },
            time: None,
        })
    }

    pub fn zero() -> Self {
        Self {
            kind: WaveKind::ConfinedSuperposition { terms: Vec::new() },
            time: None,
        }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    fn phase(&self, energy: f64) -> C64 {
        match self.time {
            Some(t) => C64::from_polar(1.0, -energy * t),
            None => C64::new(1.0, 0.0),
        }
    }

    /// True when the state vanishes identically for `x > 0`.
    pub fn is_confined(&self) -> bool {
        match &self.kind {
            WaveKind::Confined { .. } | WaveKind::ConfinedSuperposition { .. } => true,
            WaveKind::FullLine { .. } => false,
            WaveKind::Sampled { x0, h, values } => *x0 + *h * (values.len() - 1) as f64 <= 0.0,
        }
    }

    /// Closed interval outside which samples are unavailable; `None` for closed forms.
    pub fn support(&self) -> Option<(f64, f64)> {
        match &self.kind {
            WaveKind::Sampled { x0, h, values } => Some((*x0, *x0 + *h * (values.len() - 1) as f64)),
            _ => None,
        }
    }

    /// `psi(x)`. Sampled states evaluate to 0 outside their support.
    pub fn eval(&self, x: f64) -> C64 {
        let sine = |e: f64, x: f64| C64::new(0.0, 2.0 * (e.sqrt() * x).sin());
        match &self.kind {
            WaveKind::Confined { energy } => {
                if x < 0.0 {
                    self.phase(*energy) * sine(*energy, x)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            WaveKind::FullLine { energy } => self.phase(*energy) * sine(*energy, x),
            WaveKind::ConfinedSuperposition { terms } => {
                if x < 0.0 {
                    terms.iter().map(|&(c, e)| c * self.phase(e) * sine(e, x)).sum()
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            WaveKind::Sampled { x0, h, values } => cubic(*x0, *h, values, x),
        }
    }

    /// `psi'(x)` from the left.
    pub fn derivative(&self, x: f64) -> C64 {
        let cosine = |e: f64, x: f64| C64::new(0.0, 2.0 * e.sqrt() * (e.sqrt() * x).cos());
        match &self.kind {
            WaveKind::Confined { energy } => {
                if x <= 0.0 {
                    self.phase(*energy) * cosine(*energy, x)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            WaveKind::FullLine { energy } => self.phase(*energy) * cosine(*energy, x),
            WaveKind::ConfinedSuperposition { terms } => {
                if x <= 0.0 {
                    terms.iter().map(|&(c, e)| c * self.phase(e) * cosine(e, x)).sum()
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            WaveKind::Sampled { x0, h, values } => {
                let d = 1e-3 * h;
                (cubic(*x0, *h, values, x - d) - cubic(*x0, *h, values, x - 3.0 * d)) / (2.0 * d)
            }
        }
    }

    /// Left derivative at the wall, `psi'(0^-)`.
    pub fn wall_derivative(&self) -> C64 {
        self.derivative(0.0)
    }
}

/// Four-point Lagrange interpolation on a uniform mesh; 0 outside `[x0, x_last]`.
fn cubic(x0: f64, h: f64, v: &[C64], x: f64) -> C64 {
    let n = v.len();
    let s = (x - x0) / h;
    if !(s >= 0.0 && s <= (n - 1) as f64) {
        return C64::new(0.0, 0.0);
    }
    let k = (s.floor() as usize).clamp(1, n - 3) - 1;
    let t = s - k as f64;
    let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    v[k] * l0 + v[k + 1] * l1 + v[k + 2] * l2 + v[k + 3] * l3
}
