//! Maximum-likelihood fitting of the Gumbel (max) family.

use crate::error::{Result, TltError};
use crate::rng::RngState;
use serde::{Deserialize, Serialize};

const MAX_ITERATIONS: u32 = 100;
const RESIDUAL_TOL: f64 = 1e-8;

/// Result of a Gumbel MLE fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GumbelFit {
    pub location: f64,
    pub scale: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: u32,
    /// Stationarity residual of the profile equation at the returned scale
    /// (on standardized data), below 1e-8 when converged.
    pub residual: f64,
}

/// Fit location/scale by Newton iteration on the profile likelihood
/// `beta = mean(x) - sum(x w) / sum(w)`, `w = exp(-x / beta)`, initialized by
/// the method of moments (`scale = sd * sqrt(6) / pi`).
///
/// Data are standardized internally so the convergence tolerance is
/// scale-free; the MLE is exactly equivariant under affine maps.
pub fn gumbel_fit(samples: &[f64]) -> Result<GumbelFit> {
    if samples.len() < 100 {
        return Err(TltError::invalid_parameter(format!(
            "gumbel_fit needs at least 100 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(TltError::InvalidInput("non-finite sample".into()));
    }
    let n = samples.len() as f64;
    let mean: f64 = samples.iter().sum::<f64>() / n;
    let var: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(TltError::FitFailed("degenerate sample: zero variance".into()));
    }

    let z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    let z_mean = 0.0;
    let z_min = z.iter().cloned().fold(f64::INFINITY, f64::min);

    // Method-of-moments start: sd * sqrt(6)/pi on standardized data is just
    // sqrt(6)/pi.
    let mut beta = 6f64.sqrt() / std::f64::consts::PI;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Weights shifted by the sample minimum so exponents stay <= 0.
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &x in &z {
            let w = (-(x - z_min) / beta).exp();
            s0 += w;
            s1 += x * w;
            s2 += x * x * w;
        }
        let g = s1 / s0;
        let f = beta - z_mean + g;
        residual = f.abs();
        if residual < RESIDUAL_TOL {
            converged = true;
            break;
        }
        let fp = 1.0 + (s2 * s0 - s1 * s1) / (beta * beta * s0 * s0);
        let mut step = f / fp;
        // Keep the iterate positive.
        while beta - step <= 0.0 {
            step *= 0.5;
        }
        beta -= step;
    }

    let (mut s0, mut s1) = (0.0, 0.0);
    for &x in &z {
        let w = (-(x - z_min) / beta).exp();
        s0 += w;
        s1 += x * w;
    }
    let _ = s1;
    let mu_z = z_min - beta * (s0 / n).ln();

    let scale = beta * sd;
    let location = mu_z * sd + mean;

    let log_likelihood = {
        let mut ll = -n * scale.ln();
        for &x in samples {
            let u = (x - location) / scale;
            ll += -u - (-u).exp();
        }
        ll
    };

    if !converged {
        return Err(TltError::FitFailed(format!(
            "no convergence after {MAX_ITERATIONS} iterations (residual {residual:.3e}, scale {scale:.6})"
        )));
    }

    Ok(GumbelFit {
        location,
        scale,
        log_likelihood,
        converged,
        iterations,
        residual,
    })
}

/// Quantile function of Gumbel(location, scale).
pub fn gumbel_quantile(location: f64, scale: f64, p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    location - scale * (-p.ln()).ln()
}

/// Draw one Gumbel(location, scale) variate by inversion.
pub fn sample_gumbel(rng: &mut RngState, location: f64, scale: f64) -> f64 {
    gumbel_quantile(location, scale, rng.next_open01())
}
