//! Compound Poisson-Exponential draws: the one-step transition kernel of the
//! local-time chain down the tree.

use crate::error::{Result, TltError};
use crate::rng::RngState;

/// One draw of `sum_{i=1}^{N} U_i` with `N ~ Poisson(t)` and `U_i` i.i.d.
/// unit exponentials; exactly `0.0` on the `N = 0` atom (mass `e^{-t}`).
///
/// Given `N = k`, the sum is Gamma(k, 1), so the draw reduces to the exact
/// integer-shape gamma sampler.
pub fn sample_cpe(rng: &mut RngState, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(TltError::invalid_parameter(format!(
            "compound Poisson-Exponential parameter must be finite and >= 0, got {t}"
        )));
    }
    let n = rng.poisson(t)?;
    Ok(rng.gamma_int(n, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameter_is_identically_zero() {
        let mut rng = RngState::for_replica(1, 0);
        for _ in 0..1000 {
            assert_eq!(sample_cpe(&mut rng, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = RngState::for_replica(1, 0);
        assert!(sample_cpe(&mut rng, -0.1).is_err());
        assert!(sample_cpe(&mut rng, f64::NAN).is_err());
        assert!(sample_cpe(&mut rng, f64::INFINITY).is_err());
    }

    #[test]
    fn atom_mass_at_one() {
        let mut rng = RngState::for_replica(1, 1);
        let n = 1_000_000;
        let zeros = (0..n)
            .filter(|_| sample_cpe(&mut rng, 1.0).unwrap() == 0.0)
            .count();
        let p = zeros as f64 / n as f64;
        let target = (-1.0f64).exp(); // 0.36787944...
        assert!((p - target).abs() < 0.002, "zero-atom mass {p}");
    }

    #[test]
    fn moments_at_five() {
        // mean t, variance 2t.
        let mut rng = RngState::for_replica(1, 2);
        let n = 1_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_cpe(&mut rng, 5.0).unwrap();
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        // SE of the mean: sqrt(2t/n); SE of the variance estimate ~ sqrt(Var(X^2)/n).
        let se_mean = (10.0 / n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * se_mean, "mean {mean}");
        assert!((var - 10.0).abs() < 0.15, "var {var}");
    }
}
