//! The m-leg decoration transformation.
//!
//! A cell has Hamiltonian (in units of β)
//!
//! ```text
//! H(S0, σ) = Σ_n J_n · S0 · Π σ_i^{n_i}  +  e(S0)
//! ```
//!
//! where `e` is an optional per-moment self energy of the central spin (for
//! example a single-ion term `D·S0²`). Tracing out `S0` gives one associated
//! weight per leg configuration, and the effective couplings solve
//! `ln W = (⊗ V(s_i)) · J̃`.

use crate::error::{Error, Result};
use crate::numeric::{checked_exp, log_sum_exp, MAX_LOG};
use crate::spin::{moments, CouplingVector, Legs, NodeConvention, SpinValue};
use crate::vanderm::{inverse_vandermonde, kron_apply, RealMatrix, DEFAULT_KRON_CAP};

/// A central spin coupled to a list of peripheral legs.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedCell {
    central: SpinValue,
    central_convention: NodeConvention,
    couplings: CouplingVector,
    self_energy: Option<Vec<f64>>,
}

impl DecoratedCell {
    /// The central spin uses the same node convention as the legs.
    pub fn new(central: SpinValue, couplings: CouplingVector) -> Self {
        Self {
            central,
            central_convention: couplings.convention(),
            couplings,
            self_energy: None,
        }
    }

    pub fn with_central_convention(mut self, conv: NodeConvention) -> Self {
        self.central_convention = conv;
        self
    }

    /// Adds `energies[k]` to the exponent when the central spin sits on its
    /// `k`-th (ascending) moment.
    pub fn with_self_energy(mut self, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != self.central.states() {
            return Err(Error::LengthMismatch {
                expected: self.central.states(),
                actual: energies.len(),
            });
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("self energy"));
        }
        self.self_energy = Some(energies);
        Ok(self)
    }

    /// Single-ion anisotropy `D·S0²` as a self energy.
    pub fn with_single_ion(self, d: f64) -> Result<Self> {
        let e = self.central_moments().iter().map(|m| d * m * m).collect();
        self.with_self_energy(e)
    }

    pub fn central(&self) -> SpinValue {
        self.central
    }

    pub fn central_convention(&self) -> NodeConvention {
        self.central_convention
    }

    pub fn couplings(&self) -> &CouplingVector {
        &self.couplings
    }

    pub fn legs(&self) -> &Legs {
        self.couplings.legs()
    }

    pub fn convention(&self) -> NodeConvention {
        self.couplings.convention()
    }

    pub fn self_energy(&self) -> Option<&[f64]> {
        self.self_energy.as_deref()
    }

    pub fn central_moments(&self) -> Vec<f64> {
        moments(self.central, self.central_convention)
    }

    /// Exponents `μ·h(σ) + e(μ)` for every central moment `μ`, per configuration.
    pub(crate) fn exponents(&self) -> Vec<Vec<f64>> {
        let mu = self.central_moments();
        let fields = self.couplings.evaluate_all();
        fields
            .iter()
            .map(|&h| {
                mu.iter()
                    .enumerate()
                    .map(|(k, &m)| m * h + self.self_energy.as_ref().map_or(0.0, |e| e[k]))
                    .collect()
            })
            .collect()
    }

    /// Exponent of one joint state, used by brute-force enumeration.
    pub(crate) fn energy(&self, field: f64, central_state: usize) -> f64 {
        let m = self.central.node(central_state, self.central_convention);
        m * field + self.self_energy.as_ref().map_or(0.0, |e| e[central_state])
    }
}

/// Associated Boltzmann weights, one per leg configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    legs: Legs,
    convention: NodeConvention,
    weights: Vec<f64>,
}

impl WeightTable {
    pub fn new(legs: Legs, convention: NodeConvention, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != legs.size() {
            return Err(Error::LengthMismatch {
                expected: legs.size(),
                actual: weights.len(),
            });
        }
        if let Some((position, &value)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::NonPositiveWeight { position, value });
        }
        Ok(Self {
            legs,
            convention,
            weights,
        })
    }

    pub fn legs(&self) -> &Legs {
        &self.legs
    }

    pub fn convention(&self) -> NodeConvention {
        self.convention
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, config: &[usize]) -> Result<f64> {
        Ok(self.weights[self.legs.position(config)?])
    }
}

/// Effective couplings `J̃`; the all-zero entry is the constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCouplings {
    couplings: CouplingVector,
}

impl EffectiveCouplings {
    pub fn new(couplings: CouplingVector) -> Self {
        Self { couplings }
    }

    pub fn couplings(&self) -> &CouplingVector {
        &self.couplings
    }

    pub fn into_couplings(self) -> CouplingVector {
        self.couplings
    }

    pub fn constant(&self) -> f64 {
        self.couplings.constant()
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        self.couplings.get(idx)
    }
}

/// `W(σ) = Σ_μ exp(μ·h(σ) + e(μ))`, summed with the largest exponent factored out.
pub fn boltzmann_weights(cell: &DecoratedCell) -> Result<WeightTable> {
    let weights = cell
        .exponents()
        .iter()
        .map(|ex| checked_exp(log_sum_exp(ex)))
        .collect::<Result<Vec<_>>>()?;
    WeightTable::new(cell.legs().clone(), cell.convention(), weights)
}

/// `R = ln W`, elementwise.
pub fn log_weight_vector(w: &WeightTable) -> Result<Vec<f64>> {
    w.weights
        .iter()
        .enumerate()
        .map(|(position, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(Error::NonPositiveWeight { position, value })
            }
        })
        .collect()
}

/// Float copies of the exact inverses `Ṽ(s_i)`, one per leg.
pub(crate) fn inverse_factors(legs: &Legs, conv: NodeConvention) -> Result<Vec<RealMatrix>> {
    let n = legs.size() as u128;
    if n * n > DEFAULT_KRON_CAP {
        return Err(Error::DimensionCap {
            entries: n * n,
            cap: DEFAULT_KRON_CAP,
        });
    }
    Ok(legs
        .spins()
        .iter()
        .map(|&s| inverse_vandermonde(s, conv).to_f64())
        .collect())
}

/// `J̃ = (⊗ Ṽ(s_i)) · ln W` for an arbitrary weight table.
pub fn effective_from_weights(w: &WeightTable) -> Result<EffectiveCouplings> {
    let r = log_weight_vector(w)?;
    let factors = inverse_factors(&w.legs, w.convention)?;
    let j = kron_apply(&factors, &r)?;
    Ok(EffectiveCouplings::new(CouplingVector::from_entries(
        w.legs.clone(),
        w.convention,
        j,
    )?))
}

pub fn effective_couplings(cell: &DecoratedCell) -> Result<EffectiveCouplings> {
    effective_from_weights(&boltzmann_weights(cell)?)
}

/// `J̃_n = 2^{-m} Σ_σ (Π σ_i^{n_i}) ln W(σ)` for spin-1/2 legs with `σ = ±1`.
pub fn spin_half_effective_couplings(w: &WeightTable) -> Result<EffectiveCouplings> {
    if w.convention != NodeConvention::Normalized || w.legs.spins().iter().any(|&s| s != SpinValue::HALF) {
        return Err(Error::WrongConvention);
    }
    let r = log_weight_vector(w)?;
    let m = w.legs.count();
    let scale = 0.5f64.powi(m as i32);
    let configs: Vec<Vec<usize>> = w.legs.iter_digits().collect();
    let entries = w
        .legs
        .iter_digits()
        .map(|n| {
            let sum: f64 = configs
                .iter()
                .zip(&r)
                .map(|(c, ln_w)| {
                    // node 0 is σ = -1, node 1 is σ = +1
                    let negatives = c.iter().zip(&n).filter(|(&j, &e)| j == 0 && e == 1).count();
                    if negatives % 2 == 0 {
                        *ln_w
                    } else {
                        -ln_w
                    }
                })
                .sum();
            scale * sum
        })
        .collect();
    Ok(EffectiveCouplings::new(CouplingVector::from_entries(
        w.legs.clone(),
        w.convention,
        entries,
    )?))
}

/// `W(σ) = exp(Σ_n J̃_n Π σ_i^{n_i})`.
pub fn reconstruct_weights(j: &EffectiveCouplings) -> Result<WeightTable> {
    let c = &j.couplings;
    let weights = c
        .evaluate_all()
        .into_iter()
        .map(|h| {
            if h > MAX_LOG {
                Err(Error::Overflow(h))
            } else {
                Ok(h.exp())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    WeightTable::new(c.legs().clone(), c.convention(), weights)
}

/// `N_d · J̃_0`, the log prefactor in `Z = exp(N_d J̃_0) · Z̃`.
pub fn partition_constant(j: &EffectiveCouplings, n_decorations: usize) -> f64 {
    n_decorations as f64 * j.constant()
}
