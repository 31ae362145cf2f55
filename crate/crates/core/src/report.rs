//! Residual reports shared by every verification operation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::{PhaseFunction, PhaseGrid};

/// Outcome of checking one identity on a grid.
///
/// `pass` is `max_abs <= tolerance`. `l2` is the grid L2 norm
/// `sqrt(dx dp sum |r|^2)` over the evaluated nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub label: String,
    pub max_abs: f64,
    pub l2: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub grid: PhaseGrid,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl ResidualReport {
    pub fn new(label: impl Into<String>, max_abs: f64, l2: f64, tolerance: f64, grid: &PhaseGrid) -> Self {
        let max_abs = if max_abs.is_nan() { f64::INFINITY } else { max_abs };
        Self {
            label: label.into(),
            max_abs,
            l2,
            tolerance,
            pass: max_abs <= tolerance,
            grid: *grid,
            details: BTreeMap::new(),
        }
    }

    /// Report on `residual` restricted to rows where `x_mask` is true (all rows if `None`).
    pub fn from_field(label: impl Into<String>, residual: &PhaseFunction, x_mask: Option<&[bool]>, tolerance: f64) -> Self {
        let g = residual.grid();
        let mut max_abs: f64 = 0.0;
        let mut sq = 0.0;
        for i in 0..g.n_x {
            if x_mask.is_some_and(|m| !m[i]) {
                continue;
            }
            for v in residual.row(i) {
                let a = v.norm();
                max_abs = if a.is_nan() { f64::INFINITY } else { max_abs.max(a) };
                sq += a * a;
            }
        }
        Self::new(label, max_abs, (sq * g.dx * g.dp).sqrt(), tolerance, g)
    }

    pub fn with_detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    /// Worse of two reports; details are merged with prefixes.
    pub fn worst(label: impl Into<String>, a: ResidualReport, b: ResidualReport) -> Self {
        let ratio = |r: &ResidualReport| if r.tolerance > 0.0 { r.max_abs / r.tolerance } else { r.max_abs };
        let (hi, lo) = if ratio(&a) >= ratio(&b) { (a, b) } else { (b, a) };
        let mut out = hi.clone();
        out.label = label.into();
        out.pass = hi.pass && lo.pass;
        for (prefix, r) in [(&hi.label, &hi), (&lo.label, &lo)] {
            out.details.insert(format!("{prefix}.max_abs"), r.max_abs);
            for (k, v) in &r.details {
                out.details.insert(format!("{prefix}.{k}"), *v);
            }
        }
        out
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{:<5} {}: max_abs = {:.3e}, tolerance = {:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.label,
            self.max_abs,
            self.tolerance
        )
    }
}
