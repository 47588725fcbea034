//! Extremal statistics, estimation and hypothesis-testing toolkit.

pub mod gumbel;
pub mod ks;
pub mod tail;
pub mod zstats;

pub use gumbel::{gumbel_fit, gumbel_quantile, sample_gumbel, GumbelFit};
pub use ks::{holm_step_down, kolmogorov_sf, ks_two_sample, HolmOutcome, KsResult};
pub use tail::{tail_slope_fit, TailFit};
pub use zstats::{
    centered_max, compute_seneta_heyde, compute_w_brw, compute_w_tilde, compute_z,
    compute_z_tilde, FieldStats, FieldStatsAcc, SenetaAccumulator, WBrwAccumulator,
    ZAccumulator, ZStatistic, ZTildeAccumulator, ZVariant,
};

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// z-quantile for the 99% (two-sided) Wilson interval.
pub const Z_99: f64 = 2.575829303548900761;

/// Mean and standard error of a sample.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample covariance (denominator `n - 1`).
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    xs.iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1.0)
}
