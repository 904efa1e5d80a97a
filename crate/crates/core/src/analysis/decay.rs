use crate::error::{Error, Result};
use crate::propagator::Trajectory;

/// Least-squares fit `ln ‖ψ‖² ≈ intercept - rate·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    /// coefficient of determination; 1 for an exact exponential
    pub r_squared: f64,
    pub rms_residual: f64,
    pub points: usize,
    /// the norm never increases inside the window
    pub monotone: bool,
}

/// Fits the survival probability over `window`, by default the middle 60% of the run.
pub fn extract_decay_rate(traj: &Trajectory, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let (t0, t1) = match window {
        Some(w) => w,
        None => {
            let (a, b) = (traj.times[0], traj.final_time());
            (a + 0.2 * (b - a), a + 0.8 * (b - a))
        }
    };
    if !(t0 < t1) {
        return Err(Error::param("window", format!("need t0 < t1, got [{t0}, {t1}]")));
    }
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (&t, &n) in traj.times.iter().zip(&traj.norms) {
        if t >= t0 && t <= t1 {
            if !(n > 0.0) {
                return Err(Error::param("window", format!("norm {n} is not positive at t = {t}")));
            }
            ts.push(t);
            ys.push(n.ln());
        }
    }
    let m = ts.len();
    if m < 2 {
        return Err(Error::param("window", format!("needs at least 2 samples, found {m}")));
    }
    let mt = ts.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let sse: f64 = ts.iter().zip(&ys).map(|(t, y)| (y - intercept - slope * t).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let monotone = ys.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(DecayFit { rate: -slope, intercept, r_squared, rms_residual: (sse / m as f64).sqrt(), points: m, monotone })
}
