use rayon::prelude::*;

use crate::error::{Error, Result};

/// Settings of the bounded compass search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// points per dimension of the initial grid scan; 0 or 1 starts at `x0`
    pub grid: usize,
    /// first step as a fraction of each dimension's range
    pub initial_step: f64,
    /// stop once the step fraction falls below this
    pub min_step: f64,
    pub max_evaluations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { grid: 5, initial_step: 0.125, min_step: 1e-3, max_evaluations: 400 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximizes `f` over the box `[lower, upper]` by a coarse grid scan followed
/// by a compass search with step halving. Candidate points of one round are
/// evaluated in parallel.
pub fn bounded_search<F>(f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &SearchOptions) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = x0.len();
    if lower.len() != n || upper.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: lower.len().min(upper.len()) });
    }
    for i in 0..n {
        if !(lower[i] <= x0[i] && x0[i] <= upper[i]) {
            return Err(Error::param("x0", format!("start {} outside [{}, {}] in dimension {i}", x0[i], lower[i], upper[i])));
        }
    }
    let span: Vec<f64> = (0..n).map(|i| upper[i] - lower[i]).collect();
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..n {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };

    let mut candidates = vec![x0.to_vec()];
    if opts.grid > 1 && n > 0 {
        let total = opts.grid.pow(n as u32);
        for k in 0..total {
            let mut rest = k;
            let point = (0..n)
                .map(|i| {
                    let j = rest % opts.grid;
                    rest /= opts.grid;
                    lower[i] + span[i] * j as f64 / (opts.grid - 1) as f64
                })
                .collect();
            candidates.push(point);
        }
    }
    let mut evaluations = candidates.len();
    let (mut best_x, mut best) = candidates
        .into_par_iter()
        .map(|x| {
            let v = score(f(&x));
            (x, v)
        })
        .reduce_with(|a, b| if b.1 > a.1 { b } else { a })
        .expect("at least the start point");

    let mut step = opts.initial_step;
    while step >= opts.min_step && evaluations < opts.max_evaluations {
        let mut trial = Vec::with_capacity(2 * n);
        for i in 0..n {
            for sign in [-1.0, 1.0] {
                let mut x = best_x.clone();
                x[i] += sign * step * span[i];
                clamp(&mut x);
                if x != best_x {
                    trial.push(x);
                }
            }
        }
        if trial.is_empty() {
            break;
        }
        evaluations += trial.len();
        let round = trial
            .into_par_iter()
            .map(|x| {
                let v = score(f(&x));
                (x, v)
            })
            .reduce_with(|a, b| if b.1 > a.1 { b } else { a })
            .expect("non-empty round");
        if round.1 > best {
            best_x = round.0;
            best = round.1;
        } else {
            step *= 0.5;
        }
    }
    Ok(SearchResult { x: best_x, value: best, evaluations })
}
