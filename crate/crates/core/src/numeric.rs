//! Log-domain helpers shared by the weight computations.

use crate::error::{Error, Result};

/// Largest exponent for which `exp` stays finite in double precision.
pub const MAX_LOG: f64 = 709.0;

/// `ln(sum(exp(x_i)))` with the maximum factored out. Empty input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `ln(cosh(x))` without overflow for large `|x|`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `exp(x)`, failing instead of returning infinity.
pub fn checked_exp(x: f64) -> Result<f64> {
    if !x.is_finite() && x != f64::NEG_INFINITY {
        return Err(Error::NonFinite("exponent"));
    }
    if x > MAX_LOG {
        return Err(Error::Overflow(x));
    }
    Ok(x.exp())
}

/// Streaming accumulator for `ln Σ exp(e)` together with `Σ o·exp(e)`.
///
/// The running maximum is used as the shift; both sums are rescaled whenever
/// a larger exponent arrives.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    shift: f64,
    total: f64,
    observed: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            total: 0.0,
            observed: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, exponent: f64) {
        self.add_observed(exponent, 0.0);
    }

    pub fn add_observed(&mut self, exponent: f64, observable: f64) {
        if exponent > self.shift {
            let scale = (self.shift - exponent).exp();
            self.total *= scale;
            self.observed *= scale;
            self.shift = exponent;
        }
        let w = (exponent - self.shift).exp();
        self.total += w;
        self.observed += observable * w;
    }

    pub fn ln_total(&self) -> f64 {
        self.shift + self.total.ln()
    }

    /// `Σ o·exp(e) / Σ exp(e)`.
    pub fn mean(&self) -> f64 {
        self.observed / self.total
    }
}
