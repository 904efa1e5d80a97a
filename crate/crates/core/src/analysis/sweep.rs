use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::presets::SplitterTemplate;
use crate::propagator::{effective_unitary, EffectiveUnitary, IntegratorOptions};

/// Grid spacing in `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `n` strictly increasing speeds spanning `[lo, hi]`.
pub fn velocity_grid(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::param("range", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if n < 2 {
        return Err(Error::param("points", format!("need at least 2 points, got {n}")));
    }
    let frac = |k: usize| k as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|k| match (k, spacing) {
            (0, _) => lo,
            (k, _) if k == n - 1 => hi,
            (k, Spacing::Linear) => lo + (hi - lo) * frac(k),
            (k, Spacing::Log) => lo * (hi / lo).powf(frac(k)),
        })
        .collect())
}

/// Effective map at one speed. Failed points keep the error text and NaN entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nu: f64,
    pub abs_a: f64,
    pub abs_b: f64,
    pub phase_a: f64,
    pub phase_b: f64,
    /// larger of the two column leaks
    pub leak: f64,
    pub defect: f64,
    pub peak_intermediate: f64,
    pub peak_excited: f64,
    pub unitary: Option<EffectiveUnitary>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn from_unitary(nu: f64, u: EffectiveUnitary) -> Self {
        Self {
            nu,
            abs_a: u.a.norm(),
            abs_b: u.b.norm(),
            phase_a: u.a.arg(),
            phase_b: u.b.arg(),
            leak: u.leak[0].max(u.leak[1]),
            defect: u.unitarity_defect(),
            peak_intermediate: u.peak_intermediate,
            peak_excited: u.peak_excited,
            unitary: Some(u),
            error: None,
        }
    }

    fn failed(nu: f64, err: Error) -> Self {
        Self {
            nu,
            abs_a: f64::NAN,
            abs_b: f64::NAN,
            phase_a: f64::NAN,
            phase_b: f64::NAN,
            leak: f64::NAN,
            defect: f64::NAN,
            peak_intermediate: f64::NAN,
            peak_excited: f64::NAN,
            unitary: None,
            error: Some(err.to_string()),
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    /// The map is reported non-unitary.
    pub fn flagged(&self) -> bool {
        self.unitary.is_none_or(|u| u.warning().is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    fn usable(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.ok())
    }

    /// Row with the largest `|B|`.
    pub fn best_router(&self) -> Option<&SweepRow> {
        self.usable().max_by(|a, b| a.abs_b.total_cmp(&b.abs_b))
    }

    /// Row with the smallest `||A| - |B||`.
    pub fn best_balanced(&self) -> Option<&SweepRow> {
        self.usable().min_by(|a, b| (a.abs_a - a.abs_b).abs().total_cmp(&(b.abs_a - b.abs_b).abs()))
    }

    /// Largest `||B|(ν_k+1) - |B|(ν_k)|` over adjacent rows inside `[lo, hi]`.
    pub fn max_adjacent_change(&self, lo: f64, hi: f64) -> f64 {
        self.rows
            .windows(2)
            .filter(|w| w[0].nu >= lo && w[1].nu <= hi)
            .map(|w| (w[1].abs_b - w[0].abs_b).abs())
            .fold(0.0, f64::max)
    }
}

/// One effective unitary per speed, computed in parallel and returned in grid order.
pub fn velocity_sweep(
    template: &SplitterTemplate,
    range: (f64, f64),
    points: usize,
    spacing: Spacing,
    opts: &IntegratorOptions,
) -> Result<SweepTable> {
    let grid = velocity_grid(range.0, range.1, points, spacing)?;
    let rows = grid
        .par_iter()
        .map(|&nu| {
            match template.protocol(nu).and_then(|p| effective_unitary(&p, opts)) {
                Ok(u) => SweepRow::from_unitary(nu, u),
                Err(e) => SweepRow::failed(nu, e),
            }
        })
        .collect();
    Ok(SweepTable { rows })
}
