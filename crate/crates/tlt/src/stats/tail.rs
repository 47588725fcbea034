//! Least-squares fit of the upper-tail decay rate of the centered maximum.
//!
//! The target shape is a survival function proportional to
//! `(1 + u) exp(slope * u)`; regressing `ln P(X >= u) - ln(1 + u)` on `u`
//! recovers `slope` exactly when the shape holds.

use crate::error::{Result, TltError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    /// Grid points with a nonzero empirical tail that entered the fit.
    pub points_used: usize,
}

pub fn tail_slope_fit(samples: &[f64], u_grid: &[f64]) -> Result<TailFit> {
    if samples.is_empty() {
        return Err(TltError::invalid_parameter("tail_slope_fit needs samples".into()));
    }
    if u_grid.len() < 2 {
        return Err(TltError::invalid_parameter("tail_slope_fit needs >= 2 grid points".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(TltError::InvalidInput("non-finite sample".into()));
    }
    let n = samples.len() as f64;
    let mut xs = Vec::with_capacity(u_grid.len());
    let mut ys = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        if u <= -1.0 {
            return Err(TltError::invalid_parameter(format!(
                "grid point {u} makes ln(1+u) undefined"
            )));
        }
        let tail = samples.iter().filter(|&&x| x >= u).count() as f64 / n;
        if tail > 0.0 {
            xs.push(u);
            ys.push(tail.ln() - (1.0 + u).ln());
        }
    }
    if xs.len() < 2 {
        return Err(TltError::FitFailed(
            "degenerate tail: fewer than 2 grid points carry mass".into(),
        ));
    }
    let m = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / m;
    let mean_y = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    if sxx == 0.0 {
        return Err(TltError::FitFailed("degenerate grid: zero spread".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    Ok(TailFit {
        slope,
        intercept: mean_y - slope * mean_x,
        points_used: xs.len(),
    })
}

/// Inverse-CDF generator for the synthetic law with survival function
/// `P(X >= u) = (1 + u) e^{-rate u}` on `u >= 0` (test oracle for the fit).
pub fn sample_poly_exponential_tail(rng: &mut crate::rng::RngState, rate: f64) -> f64 {
    let p = rng.next_open01();
    // Solve (1 + u) e^{-rate u} = p by monotone bisection + Newton polish.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let sf = |u: f64| (1.0 + u) * (-rate * u).exp();
    while sf(hi) > p {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if sf(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
