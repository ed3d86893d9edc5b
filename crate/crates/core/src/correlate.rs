//! Correlations involving the central spin, expanded in leg monomials.
//!
//! `C(σ) = Σ_μ μ·exp(μ·h(σ) + e(μ))` is written as `Σ_n α_n Π σ_i^{n_i}`.
//! Dividing by the associated weight first gives the conditional mean
//! `⟨S0 | σ⟩ = C(σ)/W(σ)`; its expansion is what turns a decorated correlator
//! into a linear combination of effective-model expectation values.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, MAX_LOG};
use crate::spin::{CouplingVector, Legs, MultiIndex, NodeConvention};
use crate::transform::{inverse_factors, DecoratedCell};
use crate::vanderm::kron_apply;

/// Which leg function the coefficients expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    /// The partial sum `C(σ)` itself.
    Raw,
    /// The conditional mean `C(σ)/W(σ)`.
    Conditional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCoefficients {
    values: CouplingVector,
    expansion: Expansion,
}

impl AlphaCoefficients {
    pub fn values(&self) -> &CouplingVector {
        &self.values
    }

    pub fn expansion(&self) -> Expansion {
        self.expansion
    }

    pub fn legs(&self) -> &Legs {
        self.values.legs()
    }

    pub fn convention(&self) -> NodeConvention {
        self.values.convention()
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        self.values.get(idx)
    }

    /// `max_σ |Σ_n α_n Π σ_i^{n_i} - target(σ)|`.
    pub fn residual(&self, target: &[f64]) -> Result<f64> {
        let fitted = self.values.evaluate_all();
        if fitted.len() != target.len() {
            return Err(Error::LengthMismatch {
                expected: fitted.len(),
                actual: target.len(),
            });
        }
        Ok(fitted
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `C(σ)` for every leg configuration, in linear order.
pub fn correlation_vector(cell: &DecoratedCell) -> Result<Vec<f64>> {
    let mu = cell.central_moments();
    cell.exponents()
        .iter()
        .map(|ex| {
            let shift = ex.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if shift > MAX_LOG {
                return Err(Error::Overflow(shift));
            }
            let c = shift.exp() * mu.iter().zip(ex).map(|(m, t)| m * (t - shift).exp()).sum::<f64>();
            if c.is_finite() {
                Ok(c)
            } else {
                Err(Error::Overflow(shift))
            }
        })
        .collect()
}

/// `⟨S0 | σ⟩ = C(σ)/W(σ)` for every leg configuration.
pub fn conditional_mean_vector(cell: &DecoratedCell) -> Result<Vec<f64>> {
    let mu = cell.central_moments();
    Ok(cell
        .exponents()
        .iter()
        .map(|ex| {
            let z = log_sum_exp(ex);
            mu.iter().zip(ex).map(|(m, t)| m * (t - z).exp()).sum()
        })
        .collect())
}

fn expand(legs: &Legs, conv: NodeConvention, v: &[f64], expansion: Expansion) -> Result<AlphaCoefficients> {
    let factors = inverse_factors(legs, conv)?;
    let entries = kron_apply(&factors, v)?;
    Ok(AlphaCoefficients {
        values: CouplingVector::from_entries(legs.clone(), conv, entries)?,
        expansion,
    })
}

/// `α = (⊗ Ṽ(s_i)) · C`.
pub fn alpha_coefficients(cell: &DecoratedCell) -> Result<AlphaCoefficients> {
    let c = correlation_vector(cell)?;
    expand(cell.legs(), cell.convention(), &c, Expansion::Raw)
}

/// `α = (⊗ Ṽ(s_i)) · (C / W)`.
pub fn conditional_alpha(cell: &DecoratedCell) -> Result<AlphaCoefficients> {
    let c = conditional_mean_vector(cell)?;
    expand(cell.legs(), cell.convention(), &c, Expansion::Conditional)
}

/// `Σ_n α_n · ⟨X Π σ_i^{n_i}⟩`, with the bracketed values supplied by the caller.
///
/// For [`Expansion::Conditional`] coefficients the brackets are ordinary
/// expectation values of the effective model and the sum equals `⟨S0 X⟩`.
/// Coefficients that are exactly zero need no entry in `correlators`.
pub fn decorated_correlator(alpha: &AlphaCoefficients, correlators: &HashMap<MultiIndex, f64>) -> Result<f64> {
    alpha.values.nonzero().into_iter().try_fold(0.0, |acc, (idx, a)| {
        let v = correlators
            .get(&idx)
            .ok_or_else(|| Error::MissingCorrelator(idx.0.clone()))?;
        Ok(acc + a * v)
    })
}
