//! Overflow-safe accumulation of sums of the form `sum_i p_i * exp(e_i)`.
//!
//! The exponents reach several hundred in stress settings, far past what a
//! naive `exp` tolerates. Terms are kept as `p_i * exp(e_i - M)` against a
//! running maximum exponent `M`, with Kahan compensation so that the result
//! is stable (beyond 1e-12 relative) under reorderings of the input.

/// Streaming `sum p_i exp(e_i)` with non-negative prefactors.
#[derive(Debug, Clone)]
pub struct WeightedExpSum {
    max_exp: f64,
    sum: f64,
    comp: f64,
    count: u64,
}

impl Default for WeightedExpSum {
    fn default() -> Self {
        Self::new()
    }
}

impl WeightedExpSum {
    pub fn new() -> Self {
        WeightedExpSum {
            max_exp: f64::NEG_INFINITY,
            sum: 0.0,
            comp: 0.0,
            count: 0,
        }
    }

    /// Add a term `prefactor * exp(exponent)`. Zero prefactors are skipped
    /// before any exponentiation.
    pub fn add(&mut self, prefactor: f64, exponent: f64) {
        debug_assert!(prefactor >= 0.0);
        if prefactor == 0.0 {
            return;
        }
        self.count += 1;
        if exponent > self.max_exp {
            let scale = if self.max_exp.is_finite() {
                (self.max_exp - exponent).exp()
            } else {
                0.0
            };
            self.sum *= scale;
            self.comp *= scale;
            self.max_exp = exponent;
        }
        self.kahan_add(prefactor * (exponent - self.max_exp).exp());
    }

    #[inline]
    fn kahan_add(&mut self, term: f64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Natural log of the accumulated sum; `-inf` when empty.
    pub fn log_total(&self) -> f64 {
        if self.count == 0 || self.sum <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.sum.ln() + self.max_exp
        }
    }

    /// The sum scaled by `exp(log_scale)`, leaving log space only once.
    pub fn total_scaled(&self, log_scale: f64) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.log_total() + log_scale).exp()
        }
    }
}

/// Signed variant: positive and negative parts tracked separately.
#[derive(Debug, Clone, Default)]
pub struct SignedExpSum {
    pos: WeightedExpSum,
    neg: WeightedExpSum,
}

impl SignedExpSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, prefactor: f64, exponent: f64) {
        if prefactor >= 0.0 {
            self.pos.add(prefactor, exponent);
        } else {
            self.neg.add(-prefactor, exponent);
        }
    }

    pub fn count(&self) -> u64 {
        self.pos.count() + self.neg.count()
    }

    pub fn total_scaled(&self, log_scale: f64) -> f64 {
        let lp = self.pos.log_total();
        let ln = self.neg.log_total();
        if ln == f64::NEG_INFINITY {
            return self.pos.total_scaled(log_scale);
        }
        if lp == f64::NEG_INFINITY {
            return -self.neg.total_scaled(log_scale);
        }
        // Factor out the larger magnitude to keep the difference stable.
        let m = lp.max(ln);
        ((lp - m).exp() - (ln - m).exp()) * (m + log_scale).exp()
    }
}
