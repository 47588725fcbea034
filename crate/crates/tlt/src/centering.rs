//! Centering sequences for the maximal square-root local time, and the
//! derived constants they are built from. Natural logarithms throughout.

use crate::error::{Result, TltError};

/// `sqrt(ln b)` for an integer branching factor.
pub fn sqrt_log_b(b: u32) -> Result<f64> {
    if b < 2 {
        return Err(TltError::invalid_parameter(format!(
            "branching factor must be >= 2, got {b}"
        )));
    }
    Ok(sqrt_log_b_real(b as f64))
}

/// Real-valued helper so that tests can probe non-integer branching factors
/// (e.g. `b = e` where the value is exactly 1).
pub fn sqrt_log_b_real(b: f64) -> f64 {
    b.ln().sqrt()
}

/// The `t`-dependent centering sequence
/// `n sqrt(ln b) - 3/(4 sqrt(ln b)) ln n - 1/(4 sqrt(ln b)) ln((n + sqrt t)/sqrt t)`
/// around which the maximal square-root local time concentrates.
///
/// Callers apply the `t v 1` truncation themselves; `t < 1` is rejected here
/// because the sequence degenerates for small `t`. By convention the value at
/// `n = 0` is 0.
pub fn an_centering(b: u32, n: u32, t: f64) -> Result<f64> {
    if b < 2 {
        return Err(TltError::invalid_parameter(format!(
            "branching factor must be >= 2, got {b}"
        )));
    }
    if !(t >= 1.0) || !t.is_finite() {
        return Err(TltError::invalid_parameter(format!(
            "an_centering requires t >= 1 (truncation is the caller's duty), got {t}"
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let s = sqrt_log_b_real(b as f64);
    let nf = n as f64;
    let sqrt_t = t.sqrt();
    Ok(nf * s - 3.0 / (4.0 * s) * nf.ln() - ((nf + sqrt_t) / sqrt_t).ln() / (4.0 * s))
}

/// Fixed-`t` expansion of the centering:
/// `n sqrt(ln b) - ln(n)/sqrt(ln b) + ln(t v 1)/(8 sqrt(ln b))`.
///
/// This is the limit shape of [`an_centering`] for fixed `t >= 1`; the two
/// agree up to `o(1)` as `n` grows.
pub fn centering_fixed_t(b: u32, n: u32, t: f64) -> Result<f64> {
    if b < 2 {
        return Err(TltError::invalid_parameter(format!(
            "branching factor must be >= 2, got {b}"
        )));
    }
    if n == 0 {
        return Err(TltError::invalid_parameter(
            "centering_fixed_t requires n >= 1".to_string(),
        ));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(TltError::invalid_parameter(format!(
            "centering_fixed_t requires t > 0, got {t}"
        )));
    }
    let s = sqrt_log_b_real(b as f64);
    let nf = n as f64;
    Ok(nf * s - nf.ln() / s + t.max(1.0).ln() / (8.0 * s))
}

/// Leaf-start centering for the raw (not square-root) maximal local time:
/// `n^2 ln b - 2 n ln n`.
pub fn leaf_start_centering(b: u32, n: u32) -> f64 {
    let nf = n as f64;
    let log_b = (b as f64).ln();
    nf * nf * log_b - 2.0 * nf * if n == 0 { 0.0 } else { nf.ln() }
}
