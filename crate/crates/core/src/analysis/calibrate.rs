use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::presets::SplitterTemplate;
use crate::propagator::{effective_unitary, EffectiveUnitary, IntegratorOptions};

/// Desired `|B|²` at the calibrated speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrationTarget {
    /// full transfer, `|B|² = 1`
    Router,
    /// `|A|² = |B|² = 1/2`
    Balanced,
    Custom(f64),
}

impl CalibrationTarget {
    pub fn value(self) -> f64 {
        match self {
            CalibrationTarget::Router => 1.0,
            CalibrationTarget::Balanced => 0.5,
            CalibrationTarget::Custom(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub nu: f64,
    pub unitary: EffectiveUnitary,
    /// number of effective-unitary evaluations, coarse scan included
    pub evaluations: usize,
    /// final bracket around `nu`
    pub bracket: (f64, f64),
}

impl Calibration {
    pub fn transfer(&self) -> f64 {
        self.unitary.b.norm_sqr()
    }
}

const SCAN_POINTS: usize = 16;
const SEEDED_SCAN_POINTS: usize = 5;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

struct Objective<'a> {
    template: &'a SplitterTemplate,
    opts: &'a IntegratorOptions,
}

impl Objective<'_> {
    fn eval(&self, nu: f64) -> Result<EffectiveUnitary> {
        effective_unitary(&self.template.protocol(nu)?, self.opts)
    }
}

/// Finds the transit speed in `range` whose `|B|²` meets `target`, to `tol` in `ν`.
///
/// A coarse scan locates the bracket at the largest qualifying speed. Full
/// transfer has no sign change, so the router target is refined by
/// golden-section maximization of `|B|²`; other targets by bisection on
/// `|B|² - target`. An objective equal to the target everywhere returns the
/// middle of the range.
pub fn calibrate_velocity(
    template: &SplitterTemplate,
    target: CalibrationTarget,
    range: (f64, f64),
    tol: f64,
    opts: &IntegratorOptions,
) -> Result<Calibration> {
    calibrate_in(template, target, range, SCAN_POINTS, tol, opts)
}

/// Calibration restricted to `[seed - half_width, seed + half_width]`.
pub fn calibrate_velocity_near(
    template: &SplitterTemplate,
    target: CalibrationTarget,
    seed: f64,
    half_width: f64,
    tol: f64,
    opts: &IntegratorOptions,
) -> Result<Calibration> {
    let lo = (seed - half_width).max(seed * 1e-3);
    calibrate_in(template, target, (lo, seed + half_width), SEEDED_SCAN_POINTS, tol, opts)
}

fn calibrate_in(
    template: &SplitterTemplate,
    target: CalibrationTarget,
    range: (f64, f64),
    scan_points: usize,
    tol: f64,
    opts: &IntegratorOptions,
) -> Result<Calibration> {
    let goal = target.value();
    if !(0.0..=1.0).contains(&goal) {
        return Err(Error::param("target", format!("|B|^2 target must lie in [0, 1], got {goal}")));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be > 0, got {tol}")));
    }
    let grid = super::velocity_grid(range.0, range.1, scan_points, super::Spacing::Linear)?;
    let obj = Objective { template, opts };
    let scan: Vec<(f64, EffectiveUnitary)> = grid
        .par_iter()
        .map(|&nu| obj.eval(nu).map(|u| (nu, u)))
        .collect::<Result<_>>()?;
    let mut evaluations = scan.len();
    let values: Vec<f64> = scan.iter().map(|(_, u)| u.b.norm_sqr()).collect();
    let summary = || {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!(
            "|B|^2 spans [{lo:.4}, {hi:.4}] over {} speeds in [{}, {}], target {goal}",
            values.len(),
            range.0,
            range.1
        )
    };

    if values.iter().all(|v| (v - goal).abs() <= 1e-12) {
        let nu = 0.5 * (range.0 + range.1);
        let unitary = obj.eval(nu)?;
        return Ok(Calibration { nu, unitary, evaluations: evaluations + 1, bracket: range });
    }

    if goal >= 1.0 - 1e-12 {
        // largest-speed local maximum of the scan that gets reasonably close
        let n = values.len();
        let peak = (0..n).rev().find(|&i| {
            let left = i == 0 || values[i] >= values[i - 1];
            let right = i == n - 1 || values[i] >= values[i + 1];
            left && right && values[i] >= 0.9 * goal
        });
        let i = peak.ok_or_else(|| Error::NoBracket(format!("no transfer peak: {}", summary())))?;
        let (mut a, mut b) = (scan[i.saturating_sub(1)].0, scan[(i + 1).min(n - 1)].0);
        let mut best = scan[i];
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut u1 = obj.eval(x1)?;
        let mut u2 = obj.eval(x2)?;
        evaluations += 2;
        while b - a > tol {
            if u1.b.norm_sqr() >= u2.b.norm_sqr() {
                b = x2;
                x2 = x1;
                u2 = u1;
                x1 = b - INV_PHI * (b - a);
                u1 = obj.eval(x1)?;
            } else {
                a = x1;
                x1 = x2;
                u1 = u2;
                x2 = a + INV_PHI * (b - a);
                u2 = obj.eval(x2)?;
            }
            evaluations += 1;
            for (x, u) in [(x1, u1), (x2, u2)] {
                if u.b.norm_sqr() > best.1.b.norm_sqr() {
                    best = (x, u);
                }
            }
        }
        return Ok(Calibration { nu: best.0, unitary: best.1, evaluations, bracket: (a, b) });
    }

    let h: Vec<f64> = values.iter().map(|v| v - goal).collect();
    let k = (0..h.len() - 1)
        .rev()
        .find(|&k| h[k] == 0.0 || h[k + 1] == 0.0 || (h[k] < 0.0) != (h[k + 1] < 0.0))
        .ok_or_else(|| Error::NoBracket(format!("objective never crosses the target: {}", summary())))?;
    let (mut a, mut ha) = (scan[k].0, h[k]);
    let mut b = scan[k + 1].0;
    let mut best = if h[k].abs() <= h[k + 1].abs() { scan[k] } else { scan[k + 1] };
    while b - a > tol && best.1.b.norm_sqr() != goal {
        let mid = 0.5 * (a + b);
        let u = obj.eval(mid)?;
        evaluations += 1;
        let hm = u.b.norm_sqr() - goal;
        if hm.abs() < (best.1.b.norm_sqr() - goal).abs() {
            best = (mid, u);
        }
        if (hm < 0.0) == (ha < 0.0) {
            a = mid;
            ha = hm;
        } else {
            b = mid;
        }
    }
    Ok(Calibration { nu: best.0, unitary: best.1, evaluations, bracket: (a, b) })
}
