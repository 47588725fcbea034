//! Two-sample Kolmogorov-Smirnov test with the asymptotic p-value, plus the
//! Holm step-down used to gate families of such tests.

use crate::error::{Result, TltError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Exact sup-distance of the two empirical CDFs via a sorted merge (ties are
/// consumed jointly), with the asymptotic Kolmogorov p-value at effective
/// size `n1 n2 / (n1 + n2)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(TltError::invalid_parameter("ks_two_sample needs nonempty samples".into()));
    }
    if a.iter().chain(b.iter()).any(|x| x.is_nan()) {
        return Err(TltError::InvalidInput("NaN in sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);

    let step_x = 1.0 / xs.len() as f64;
    let step_y = 1.0 / ys.len() as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut cdf_diff = 0.0f64;
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            while i < xs.len() && xs[i] == x {
                cdf_diff += step_x;
                i += 1;
            }
        }
        if y <= x {
            while j < ys.len() && ys[j] == y {
                cdf_diff -= step_y;
                j += 1;
            }
        }
        d = d.max(cdf_diff.abs());
    }
    // One side exhausted: the remaining gap is monotone, attained immediately.
    d = d.max(cdf_diff.abs());

    let ne = (xs.len() as f64 * ys.len() as f64) / (xs.len() + ys.len()) as f64;
    let lambda = ne.sqrt() * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
        n1: xs.len(),
        n2: ys.len(),
    })
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.18 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Outcome of a Holm step-down over a family of p-values at a family level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolmOutcome {
    pub family_level: f64,
    pub rejected: Vec<usize>,
    pub all_pass: bool,
}

/// Holm correction: sort p ascending, compare p_(i) to alpha / (k - i);
/// stop at the first acceptance. Returns the indices (into the original
/// family) of rejected hypotheses.
pub fn holm_step_down(p_values: &[f64], family_level: f64) -> HolmOutcome {
    let k = p_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut rejected = Vec::new();
    for (rank, &idx) in order.iter().enumerate() {
        let threshold = family_level / (k - rank) as f64;
        if p_values[idx] < threshold {
            rejected.push(idx);
        } else {
            break;
        }
    }
    HolmOutcome {
        family_level,
        all_pass: rejected.is_empty(),
        rejected,
    }
}
