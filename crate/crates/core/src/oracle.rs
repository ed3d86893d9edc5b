//! Exhaustive enumeration of small decorated lattices and their effective
//! counterparts.
//!
//! Nothing here goes through the Vandermonde inverses: decorated partition
//! functions and correlators sum over every joint state of the backbone and
//! central spins directly. The `verify` entry point compares those sums with
//! what the transformation predicts.

use std::collections::HashMap;

use crate::correlate::{conditional_alpha, decorated_correlator};
use crate::error::{Error, Result};
use crate::mixed::MixedModelParams;
use crate::numeric::LogSumExp;
use crate::spin::{CouplingVector, Legs, MultiIndex, NodeConvention, SpinValue};
use crate::transform::{effective_couplings, DecoratedCell};

/// Upper bound on the number of joint states an enumeration may visit.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// A decorated cell attached to backbone sites (one site per leg, in leg order).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCell {
    pub cell: DecoratedCell,
    pub sites: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    sigma_spin: SpinValue,
    n_sites: usize,
    convention: NodeConvention,
    cells: Vec<LatticeCell>,
}

fn check_sites(sites: &[usize], legs: &Legs, sigma: SpinValue, n_sites: usize) -> Result<()> {
    if sites.len() != legs.count() {
        return Err(Error::LengthMismatch {
            expected: legs.count(),
            actual: sites.len(),
        });
    }
    for (k, &site) in sites.iter().enumerate() {
        if site >= n_sites {
            return Err(Error::InvalidSite { site, count: n_sites });
        }
        if sites[..k].contains(&site) {
            return Err(Error::Format(format!("site {site} appears twice in one cell")));
        }
    }
    if legs.spins().iter().any(|&s| s != sigma) {
        return Err(Error::Format("cell leg spin differs from backbone spin".into()));
    }
    Ok(())
}

impl LatticeSpec {
    pub fn new(
        sigma_spin: SpinValue,
        n_sites: usize,
        convention: NodeConvention,
        cells: Vec<LatticeCell>,
    ) -> Result<Self> {
        for c in &cells {
            check_sites(&c.sites, c.cell.legs(), sigma_spin, n_sites)?;
            if c.cell.convention() != convention {
                return Err(Error::Format("cell convention differs from lattice convention".into()));
            }
        }
        let spec = Self {
            sigma_spin,
            n_sites,
            convention,
            cells,
        };
        let states = spec.state_space();
        if states > ENUMERATION_CAP {
            return Err(Error::StateSpaceTooLarge {
                states,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(spec)
    }

    pub fn sigma_spin(&self) -> SpinValue {
        self.sigma_spin
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn convention(&self) -> NodeConvention {
        self.convention
    }

    pub fn cells(&self) -> &[LatticeCell] {
        &self.cells
    }

    /// Number of joint backbone and central states.
    pub fn state_space(&self) -> u128 {
        let backbone = (self.sigma_spin.states() as u128).saturating_pow(self.n_sites as u32);
        self.cells
            .iter()
            .fold(backbone, |acc, c| acc.saturating_mul(c.cell.central().states() as u128))
    }

    /// Replaces every cell by its effective couplings.
    pub fn effective(&self) -> Result<EffectiveLattice> {
        let cells = self
            .cells
            .iter()
            .map(|c| {
                Ok(EffectiveCell {
                    sites: c.sites.clone(),
                    couplings: effective_couplings(&c.cell)?.into_couplings(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EffectiveLattice::new(self.sigma_spin, self.n_sites, self.convention, cells)
    }

    /// Mixed spin-(1/2, S) lattice on a 2×2 periodic backbone: four plaquette
    /// cells, each touching all four backbone sites.
    pub fn mixed_square_torus(p: &MixedModelParams) -> Result<Self> {
        let site = |x: usize, y: usize| (y % 2) * 2 + (x % 2);
        let mut cells = Vec::new();
        for y in 0..2 {
            for x in 0..2 {
                cells.push(LatticeCell {
                    cell: crate::mixed::plaquette_cell(p)?,
                    sites: vec![site(x, y), site(x + 1, y), site(x + 1, y + 1), site(x, y + 1)],
                });
            }
        }
        Self::new(SpinValue::HALF, 4, NodeConvention::Physical, cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCell {
    pub sites: Vec<usize>,
    pub couplings: CouplingVector,
}

/// Backbone-only lattice with a polynomial energy per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveLattice {
    sigma_spin: SpinValue,
    n_sites: usize,
    convention: NodeConvention,
    cells: Vec<EffectiveCell>,
}

impl EffectiveLattice {
    pub fn new(
        sigma_spin: SpinValue,
        n_sites: usize,
        convention: NodeConvention,
        cells: Vec<EffectiveCell>,
    ) -> Result<Self> {
        for c in &cells {
            check_sites(&c.sites, c.couplings.legs(), sigma_spin, n_sites)?;
            if c.couplings.convention() != convention {
                return Err(Error::Format("cell convention differs from lattice convention".into()));
            }
        }
        let states = (sigma_spin.states() as u128).saturating_pow(n_sites as u32);
        if states > ENUMERATION_CAP {
            return Err(Error::StateSpaceTooLarge {
                states,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(Self {
            sigma_spin,
            n_sites,
            convention,
            cells,
        })
    }

    pub fn cells(&self) -> &[EffectiveCell] {
        &self.cells
    }

    pub fn convention(&self) -> NodeConvention {
        self.convention
    }

    /// `Σ_cells J̃_0`.
    pub fn constant_sum(&self) -> f64 {
        self.cells.iter().map(|c| c.couplings.constant()).sum()
    }

    /// Copy with every constant term set to zero.
    pub fn without_constants(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.cells {
            let zero = vec![0; c.couplings.legs().count()];
            c.couplings.set(&zero, 0.0).expect("all-zero index is valid");
        }
        out
    }

    /// Copy with `delta` added to the constant of cell `cell`.
    pub fn shift_constant(&self, cell: usize, delta: f64) -> Result<Self> {
        let mut out = self.clone();
        let c = out.cells.get_mut(cell).ok_or(Error::InvalidCell(cell))?;
        let zero = vec![0; c.couplings.legs().count()];
        let v = c.couplings.constant() + delta;
        c.couplings.set(&zero, v)?;
        Ok(out)
    }

    /// Mixed-lattice effective model on the 2×2 periodic backbone, σ = ±1.
    pub fn mixed_square_torus(params: &crate::mixed::SquareParams) -> Result<Self> {
        let couplings = crate::mixed::square_couplings(params)?;
        let site = |x: usize, y: usize| (y % 2) * 2 + (x % 2);
        let mut cells = Vec::new();
        for y in 0..2 {
            for x in 0..2 {
                cells.push(EffectiveCell {
                    sites: vec![site(x, y), site(x + 1, y), site(x + 1, y + 1), site(x, y + 1)],
                    couplings: couplings.clone(),
                });
            }
        }
        Self::new(SpinValue::HALF, 4, NodeConvention::Normalized, cells)
    }
}

/// A factor in a correlator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// Backbone site raised to a power.
    Sigma { site: usize, power: usize },
    /// Central spin of a decorated cell.
    Central { cell: usize },
}

/// Odometer over `radix^len` digit tuples, first digit slowest.
struct Odometer {
    digits: Vec<usize>,
    radices: Vec<usize>,
    done: bool,
}

impl Odometer {
    fn new(radices: Vec<usize>) -> Self {
        Self {
            digits: vec![0; radices.len()],
            radices,
            done: false,
        }
    }

    fn current(&self) -> Option<&[usize]> {
        (!self.done).then_some(self.digits.as_slice())
    }

    fn advance(&mut self) {
        for k in (0..self.digits.len()).rev() {
            self.digits[k] += 1;
            if self.digits[k] < self.radices[k] {
                return;
            }
            self.digits[k] = 0;
        }
        self.done = true;
    }
}

fn local_position(sites: &[usize], sigma: &[usize], radix: usize) -> usize {
    sites.iter().fold(0, |acc, &s| acc * radix + sigma[s])
}

fn sigma_product(obs: &[(usize, usize)], sigma: &[usize], spin: SpinValue, conv: NodeConvention) -> f64 {
    obs.iter()
        .map(|&(site, power)| spin.node(sigma[site], conv).powi(power as i32))
        .product()
}

type SplitObservables = (Vec<(usize, usize)>, Vec<usize>);

fn split_observables(spec_sites: usize, n_cells: usize, obs: &[Observable]) -> Result<SplitObservables> {
    let mut sigma = Vec::new();
    let mut central = Vec::new();
    for o in obs {
        match *o {
            Observable::Sigma { site, power } => {
                if site >= spec_sites {
                    return Err(Error::InvalidSite {
                        site,
                        count: spec_sites,
                    });
                }
                sigma.push((site, power));
            }
            Observable::Central { cell } => {
                if cell >= n_cells {
                    return Err(Error::InvalidCell(cell));
                }
                central.push(cell);
            }
        }
    }
    Ok((sigma, central))
}

/// Visits every joint state once and accumulates `exp(H)` and `O·exp(H)`.
fn enumerate_decorated(spec: &LatticeSpec, obs: &[Observable]) -> Result<LogSumExp> {
    let (sigma_obs, central_obs) = split_observables(spec.n_sites, spec.cells.len(), obs)?;
    let radix = spec.sigma_spin.states();
    let fields: Vec<Vec<f64>> = spec.cells.iter().map(|c| c.cell.couplings().evaluate_all()).collect();
    let central_radices: Vec<usize> = spec.cells.iter().map(|c| c.cell.central().states()).collect();

    let mut acc = LogSumExp::new();
    let mut sigma_states = Odometer::new(vec![radix; spec.n_sites]);
    while let Some(sigma) = sigma_states.current() {
        let h: Vec<f64> = spec
            .cells
            .iter()
            .zip(&fields)
            .map(|(c, f)| f[local_position(&c.sites, sigma, radix)])
            .collect();
        let backbone_obs = sigma_product(&sigma_obs, sigma, spec.sigma_spin, spec.convention);

        let mut centrals = Odometer::new(central_radices.clone());
        while let Some(mu) = centrals.current() {
            let energy: f64 = spec
                .cells
                .iter()
                .zip(&h)
                .zip(mu)
                .map(|((c, &field), &state)| c.cell.energy(field, state))
                .sum();
            let o: f64 = central_obs
                .iter()
                .map(|&k| {
                    let c = &spec.cells[k].cell;
                    c.central().node(mu[k], c.central_convention())
                })
                .product();
            acc.add_observed(energy, backbone_obs * o);
            centrals.advance();
        }
        sigma_states.advance();
    }
    Ok(acc)
}

/// `ln Z` of the decorated lattice by full enumeration.
pub fn enumerate_decorated_log_z(spec: &LatticeSpec) -> Result<f64> {
    Ok(enumerate_decorated(spec, &[])?.ln_total())
}

/// Expectation of a product of backbone and central spins under the decorated model.
pub fn enumerate_correlator(spec: &LatticeSpec, obs: &[Observable]) -> Result<f64> {
    Ok(enumerate_decorated(spec, obs)?.mean())
}

/// Accumulates over backbone states; `weight` maps (σ, total energy) to an
/// (exponent, observable) pair.
fn enumerate_effective(eff: &EffectiveLattice, mut visit: impl FnMut(&[usize], &[f64]) -> (f64, f64)) -> LogSumExp {
    let radix = eff.sigma_spin.states();
    let tables: Vec<Vec<f64>> = eff.cells.iter().map(|c| c.couplings.evaluate_all()).collect();
    let mut acc = LogSumExp::new();
    let mut states = Odometer::new(vec![radix; eff.n_sites]);
    let mut per_cell = vec![0.0; eff.cells.len()];
    while let Some(sigma) = states.current() {
        for ((c, t), slot) in eff.cells.iter().zip(&tables).zip(per_cell.iter_mut()) {
            *slot = t[local_position(&c.sites, sigma, radix)];
        }
        let (e, o) = visit(sigma, &per_cell);
        acc.add_observed(e, o);
        states.advance();
    }
    acc
}

/// `ln Z̃` of the effective lattice, constant terms included.
pub fn enumerate_effective_log_z(eff: &EffectiveLattice) -> Result<f64> {
    Ok(enumerate_effective(eff, |_, e| (e.iter().sum(), 0.0)).ln_total())
}

/// `⟨Π σ_site^power⟩` under the effective model.
pub fn enumerate_effective_correlator(eff: &EffectiveLattice, obs: &[(usize, usize)]) -> Result<f64> {
    if let Some(&(site, _)) = obs.iter().find(|(s, _)| *s >= eff.n_sites) {
        return Err(Error::InvalidSite {
            site,
            count: eff.n_sites,
        });
    }
    let (spin, conv) = (eff.sigma_spin, eff.convention);
    Ok(enumerate_effective(eff, |sigma, e| (e.iter().sum(), sigma_product(obs, sigma, spin, conv))).mean())
}

fn monomial_observables(
    eff: &EffectiveLattice,
    cell: usize,
    idx: &MultiIndex,
    extra: &[(usize, usize)],
) -> Vec<(usize, usize)> {
    let mut obs = extra.to_vec();
    obs.extend(
        eff.cells[cell]
            .sites
            .iter()
            .zip(&idx.0)
            .filter(|(_, &n)| n > 0)
            .map(|(&s, &n)| (s, n)),
    );
    obs
}

/// `⟨X Π_i σ_{site_i}^{n_i}⟩` for every multi-index of `cell`.
pub fn effective_correlators(
    eff: &EffectiveLattice,
    cell: usize,
    extra: &[(usize, usize)],
) -> Result<HashMap<MultiIndex, f64>> {
    let c = eff.cells.get(cell).ok_or(Error::InvalidCell(cell))?;
    let legs = c.couplings.legs().clone();
    (0..legs.size())
        .map(|p| {
            let idx = legs.multi_index(p)?;
            let obs = monomial_observables(eff, cell, &idx, extra);
            Ok((idx, enumerate_effective_correlator(eff, &obs)?))
        })
        .collect()
}

/// `Σ_σ X Π σ^n Π_{c'≠cell} W_c' / Z̃` for every multi-index of `cell`.
///
/// These are the brackets that pair with raw (unconditioned) expansion
/// coefficients: the weight of the cell itself is left out of the sum.
pub fn excluded_cell_moments(
    eff: &EffectiveLattice,
    cell: usize,
    extra: &[(usize, usize)],
) -> Result<HashMap<MultiIndex, f64>> {
    let c = eff.cells.get(cell).ok_or(Error::InvalidCell(cell))?;
    let legs = c.couplings.legs().clone();
    let (spin, conv) = (eff.sigma_spin, eff.convention);
    (0..legs.size())
        .map(|p| {
            let idx = legs.multi_index(p)?;
            let obs = monomial_observables(eff, cell, &idx, extra);
            let acc = enumerate_effective(eff, |sigma, e| {
                let total: f64 = e.iter().sum();
                (total, sigma_product(&obs, sigma, spin, conv) * (-e[cell]).exp())
            });
            Ok((idx, acc.mean()))
        })
        .collect()
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Tolerance of every identity checked by [`verify`].
pub const VERIFY_TOLERANCE: f64 = 1e-8;

/// `ln Z_dec - (Σ J̃_0 + ln Z̃')` where `Z̃'` omits the constants.
pub fn partition_identity_residual(spec: &LatticeSpec) -> Result<f64> {
    let eff = spec.effective()?;
    let lhs = enumerate_decorated_log_z(spec)?;
    let rhs = eff.constant_sum() + enumerate_effective_log_z(&eff.without_constants())?;
    Ok(lhs - rhs)
}

/// Decorated correlator `⟨S0(cell) X⟩` predicted from the effective model.
pub fn predicted_central_correlator(
    spec: &LatticeSpec,
    eff: &EffectiveLattice,
    cell: usize,
    extra: &[(usize, usize)],
) -> Result<f64> {
    let c = spec.cells.get(cell).ok_or(Error::InvalidCell(cell))?;
    let alpha = conditional_alpha(&c.cell)?;
    let brackets = effective_correlators(eff, cell, extra)?;
    decorated_correlator(&alpha, &brackets)
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Runs the partition, correlation and constant-shift identities on `spec`.
///
/// Correlators checked for every cell: `⟨S0⟩`, `⟨S0 σ_k⟩` for every backbone
/// site and `⟨S0 σ_0 σ_1⟩` when at least two sites exist. Correlator
/// residuals are `|a - b| / max(|b|, 1)`.
pub fn verify(spec: &LatticeSpec) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let eff = spec.effective()?;

    out.push(Check {
        name: "partition identity".into(),
        residual: partition_identity_residual(spec)?.abs(),
        tolerance: VERIFY_TOLERANCE,
    });

    let mut selections: Vec<Vec<usize>> = vec![Vec::new()];
    selections.extend((0..spec.n_sites).map(|k| vec![k]));
    if spec.n_sites >= 2 {
        selections.push(vec![0, 1]);
    }
    for cell in 0..spec.cells.len() {
        let mut worst: f64 = 0.0;
        for sel in &selections {
            let mut obs: Vec<Observable> = sel.iter().map(|&site| Observable::Sigma { site, power: 1 }).collect();
            obs.push(Observable::Central { cell });
            let direct = enumerate_correlator(spec, &obs)?;
            let extra: Vec<(usize, usize)> = sel.iter().map(|&s| (s, 1)).collect();
            let predicted = predicted_central_correlator(spec, &eff, cell, &extra)?;
            worst = worst.max(relative(predicted, direct));
        }
        out.push(Check {
            name: format!("correlation identity, cell {cell}"),
            residual: worst,
            tolerance: VERIFY_TOLERANCE,
        });
    }

    if !eff.cells.is_empty() {
        let shift = 0.731;
        let base = enumerate_effective_log_z(&eff)?;
        let shifted = enumerate_effective_log_z(&eff.shift_constant(0, shift)?)?;
        out.push(Check {
            name: "constant shift".into(),
            residual: (shifted - base - shift).abs(),
            tolerance: VERIFY_TOLERANCE,
        });
    }
    Ok(out)
}
