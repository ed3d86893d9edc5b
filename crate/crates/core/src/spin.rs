//! Spins, node conventions and the mixed-radix indexing shared by every module.
//!
//! Leg configurations and exponent multi-indices are both laid out in
//! mixed-radix order with leg 1 slowest, which is the row/column order of
//! `V(s1) ⊗ V(s2) ⊗ … ⊗ V(sm)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A spin `s` stored as the integer `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinValue(u32);

impl SpinValue {
    pub const HALF: SpinValue = SpinValue(1);
    pub const ONE: SpinValue = SpinValue(2);

    pub fn from_twice(twice_spin: u32) -> Result<Self> {
        if twice_spin == 0 {
            return Err(Error::InvalidSpin(twice_spin));
        }
        Ok(Self(twice_spin))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    /// Number of magnetic moments, `2s + 1`.
    pub fn states(self) -> usize {
        self.0 as usize + 1
    }

    pub fn is_integral(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Exact value of node `j` (zero-based, ascending).
    pub fn exact_node(self, j: usize, conv: NodeConvention) -> BigRational {
        let twice = i64::from(self.0);
        let numer = BigInt::from(2 * j as i64 - twice);
        match conv {
            NodeConvention::Physical => BigRational::new(numer, BigInt::from(2)),
            NodeConvention::Normalized => BigRational::new(numer, BigInt::from(twice)),
        }
    }

    pub fn node(self, j: usize, conv: NodeConvention) -> f64 {
        let numer = 2.0 * j as f64 - f64::from(self.0);
        match conv {
            NodeConvention::Physical => numer / 2.0,
            NodeConvention::Normalized => numer / f64::from(self.0),
        }
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integral() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// How the `2s+1` nodes of a spin are placed on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeConvention {
    /// Nodes `-s, -s+1, …, s`.
    #[default]
    Physical,
    /// Nodes `(-s-1+j)/s`, spanning `[-1, 1]`.
    Normalized,
}

impl std::str::FromStr for NodeConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(Self::Physical),
            "normalized" => Ok(Self::Normalized),
            other => Err(Error::Format(format!("unknown convention {other:?}"))),
        }
    }
}

/// Ascending magnetic moments of `s` under `conv`.
pub fn moments(s: SpinValue, conv: NodeConvention) -> Vec<f64> {
    (0..s.states()).map(|j| s.node(j, conv)).collect()
}

pub fn exact_moments(s: SpinValue, conv: NodeConvention) -> Vec<BigRational> {
    (0..s.states()).map(|j| s.exact_node(j, conv)).collect()
}

/// Exponent tuple `(n_1, …, n_m)` with `0 <= n_i <= 2 s_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

/// Node indices `(j_1, …, j_m)`, zero-based, one per leg.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LegConfiguration(pub Vec<usize>);

/// The ordered list of peripheral spins of a cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Legs(Vec<SpinValue>);

impl Legs {
    pub fn new(spins: Vec<SpinValue>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::LengthMismatch { expected: 1, actual: 0 });
        }
        Ok(Self(spins))
    }

    pub fn uniform(spin: SpinValue, count: usize) -> Result<Self> {
        Self::new(vec![spin; count])
    }

    pub fn from_twice(twice: &[u32]) -> Result<Self> {
        let spins = twice
            .iter()
            .map(|&t| SpinValue::from_twice(t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(spins)
    }

    pub fn spins(&self) -> &[SpinValue] {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.len()
    }

    /// `Π (2 s_i + 1)`: number of configurations, equally number of couplings.
    pub fn size(&self) -> usize {
        self.0.iter().map(|s| s.states()).product()
    }

    fn check(&self, digits: &[usize]) -> Result<()> {
        if digits.len() != self.0.len() {
            return Err(Error::LengthMismatch {
                expected: self.0.len(),
                actual: digits.len(),
            });
        }
        for (leg, (&d, s)) in digits.iter().zip(&self.0).enumerate() {
            if d >= s.states() {
                return Err(Error::IndexOutOfRange {
                    leg,
                    value: d,
                    max: s.states() - 1,
                });
            }
        }
        Ok(())
    }

    /// Mixed-radix position of `digits`, leg 1 most significant.
    pub fn position(&self, digits: &[usize]) -> Result<usize> {
        self.check(digits)?;
        Ok(digits.iter().zip(&self.0).fold(0, |acc, (&d, s)| acc * s.states() + d))
    }

    /// Inverse of [`Legs::position`].
    pub fn digits(&self, mut position: usize) -> Result<Vec<usize>> {
        if position >= self.size() {
            return Err(Error::IndexOutOfRange {
                leg: 0,
                value: position,
                max: self.size() - 1,
            });
        }
        let mut out = vec![0; self.0.len()];
        for (slot, s) in out.iter_mut().zip(&self.0).rev() {
            *slot = position % s.states();
            position /= s.states();
        }
        Ok(out)
    }

    pub fn linear_index(&self, idx: &MultiIndex) -> Result<usize> {
        self.position(&idx.0)
    }

    pub fn config_index(&self, config: &LegConfiguration) -> Result<usize> {
        self.position(&config.0)
    }

    pub fn multi_index(&self, position: usize) -> Result<MultiIndex> {
        self.digits(position).map(MultiIndex)
    }

    pub fn configuration(&self, position: usize) -> Result<LegConfiguration> {
        self.digits(position).map(LegConfiguration)
    }

    /// All digit tuples in linear order.
    pub fn iter_digits(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size()).map(move |p| self.digits(p).expect("position in range"))
    }

    /// Moments of each leg for a configuration.
    pub fn resolve(&self, config: &LegConfiguration, conv: NodeConvention) -> Result<Vec<f64>> {
        self.check(&config.0)?;
        Ok(config.0.iter().zip(&self.0).map(|(&j, s)| s.node(j, conv)).collect())
    }

    /// Dense table `monomial(config, idx)` with configurations as rows.
    pub fn monomial_table(&self, conv: NodeConvention) -> Vec<Vec<f64>> {
        let powers: Vec<Vec<Vec<f64>>> = self
            .0
            .iter()
            .map(|s| {
                moments(*s, conv)
                    .into_iter()
                    .map(|x| (0..s.states()).map(|n| power(x, n)).collect())
                    .collect()
            })
            .collect();
        self.iter_digits()
            .map(|config| {
                self.iter_digits()
                    .map(|idx| {
                        config
                            .iter()
                            .zip(&idx)
                            .zip(&powers)
                            .map(|((&j, &n), p)| p[j][n])
                            .product()
                    })
                    .collect()
            })
            .collect()
    }
}

fn power(x: f64, n: usize) -> f64 {
    // 0^0 = 1 by convention
    x.powi(n as i32)
}

/// `Π_i x_i^{n_i}` for the moments selected by `config`.
pub fn monomial(legs: &Legs, config: &LegConfiguration, idx: &MultiIndex, conv: NodeConvention) -> Result<f64> {
    legs.check(&idx.0)?;
    let xs = legs.resolve(config, conv)?;
    Ok(xs.iter().zip(&idx.0).map(|(&x, &n)| power(x, n)).product())
}

/// Exact counterpart of [`monomial`].
pub fn exact_monomial(
    legs: &Legs,
    config: &LegConfiguration,
    idx: &MultiIndex,
    conv: NodeConvention,
) -> Result<BigRational> {
    legs.check(&idx.0)?;
    legs.check(&config.0)?;
    let mut acc = BigRational::from_integer(1.into());
    for ((&j, &n), s) in config.0.iter().zip(&idx.0).zip(legs.spins()) {
        let x = s.exact_node(j, conv);
        if n > 0 && x.is_zero() {
            return Ok(BigRational::zero());
        }
        acc *= num_traits::pow(x, n);
    }
    Ok(acc)
}

/// Coefficients `J_{n}` of a polynomial in the leg spins, one per multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingVector {
    legs: Legs,
    convention: NodeConvention,
    entries: Vec<f64>,
}

impl CouplingVector {
    pub fn zeros(legs: Legs, convention: NodeConvention) -> Self {
        let entries = vec![0.0; legs.size()];
        Self {
            legs,
            convention,
            entries,
        }
    }

    pub fn from_entries(legs: Legs, convention: NodeConvention, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != legs.size() {
            return Err(Error::LengthMismatch {
                expected: legs.size(),
                actual: entries.len(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("coupling vector"));
        }
        Ok(Self {
            legs,
            convention,
            entries,
        })
    }

    pub fn legs(&self) -> &Legs {
        &self.legs
    }

    pub fn convention(&self) -> NodeConvention {
        self.convention
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.entries[self.legs.position(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite("coupling"));
        }
        let p = self.legs.position(idx)?;
        self.entries[p] = value;
        Ok(())
    }

    /// Entry at the all-zero multi-index.
    pub fn constant(&self) -> f64 {
        self.entries[0]
    }

    /// `Σ_n J_n Π x_i^{n_i}` at every configuration, in linear order.
    pub fn evaluate_all(&self) -> Vec<f64> {
        self.legs
            .monomial_table(self.convention)
            .iter()
            .map(|row| row.iter().zip(&self.entries).map(|(m, j)| m * j).sum())
            .collect()
    }

    /// Non-zero entries as `(multi-index, value)` pairs.
    pub fn nonzero(&self) -> Vec<(MultiIndex, f64)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(p, &v)| (self.legs.multi_index(p).expect("in range"), v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_spin_one() -> Legs {
        Legs::uniform(SpinValue::ONE, 2).unwrap()
    }

    #[test]
    fn zero_spin_rejected() {
        assert_eq!(SpinValue::from_twice(0), Err(Error::InvalidSpin(0)));
    }

    #[test]
    fn moments_examples() {
        assert_eq!(moments(SpinValue::ONE, NodeConvention::Physical), vec![-1.0, 0.0, 1.0]);
        assert_eq!(moments(SpinValue::HALF, NodeConvention::Normalized), vec![-1.0, 1.0]);
        let three_halves = SpinValue::from_twice(3).unwrap();
        assert_eq!(
            moments(three_halves, NodeConvention::Physical),
            vec![-1.5, -0.5, 0.5, 1.5]
        );
        let two = SpinValue::from_twice(4).unwrap();
        assert_eq!(
            moments(two, NodeConvention::Normalized),
            vec![-1.0, -0.5, 0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn linear_index_examples() {
        let legs = two_spin_one();
        assert_eq!(legs.linear_index(&MultiIndex(vec![0, 0])).unwrap(), 0);
        assert_eq!(legs.linear_index(&MultiIndex(vec![1, 2])).unwrap(), 5);
        // configuration (-1, 0) is node indices (0, 1)
        assert_eq!(legs.config_index(&LegConfiguration(vec![0, 1])).unwrap(), 1);
    }

    #[test]
    fn linear_index_rejects_out_of_range() {
        let legs = two_spin_one();
        assert!(matches!(
            legs.linear_index(&MultiIndex(vec![3, 0])),
            Err(Error::IndexOutOfRange {
                leg: 0,
                value: 3,
                max: 2
            })
        ));
        assert!(matches!(
            legs.linear_index(&MultiIndex(vec![0])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(legs.digits(9).is_err());
    }

    #[test]
    fn monomial_examples() {
        let legs = two_spin_one();
        let conv = NodeConvention::Physical;
        let m = |c: Vec<usize>, n: Vec<usize>| monomial(&legs, &LegConfiguration(c), &MultiIndex(n), conv).unwrap();
        assert_eq!(m(vec![0, 0], vec![1, 1]), 1.0);
        assert_eq!(m(vec![2, 0], vec![0, 0]), 1.0);
        // config (0, 1) -> node indices (1, 2)
        assert_eq!(m(vec![1, 2], vec![2, 1]), 0.0);
        assert_eq!(m(vec![1, 1], vec![0, 0]), 1.0);
    }

    #[test]
    fn exact_and_float_monomials_agree() {
        let legs = Legs::from_twice(&[3, 2]).unwrap();
        for conv in [NodeConvention::Physical, NodeConvention::Normalized] {
            for c in legs.iter_digits() {
                for n in legs.iter_digits() {
                    let c = LegConfiguration(c.clone());
                    let n = MultiIndex(n);
                    let f = monomial(&legs, &c, &n, conv).unwrap();
                    let e = exact_monomial(&legs, &c, &n, conv).unwrap();
                    let e = num_traits::ToPrimitive::to_f64(&e).unwrap();
                    assert!((f - e).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn coupling_vector_length_checked() {
        let legs = two_spin_one();
        assert!(CouplingVector::from_entries(legs.clone(), NodeConvention::Physical, vec![0.0; 8]).is_err());
        assert!(CouplingVector::from_entries(legs, NodeConvention::Physical, vec![f64::NAN; 9]).is_err());
    }

    #[test]
    fn spin_display() {
        assert_eq!(SpinValue::HALF.to_string(), "1/2");
        assert_eq!(SpinValue::from_twice(6).unwrap().to_string(), "3");
    }

    proptest! {
        #[test]
        fn position_round_trips(twice in prop::collection::vec(1u32..=6, 1..4), seed in any::<usize>()) {
            let legs = Legs::from_twice(&twice).unwrap();
            let p = seed % legs.size();
            let d = legs.digits(p).unwrap();
            prop_assert_eq!(legs.position(&d).unwrap(), p);
        }
    }

    #[test]
    fn position_is_bijective_exhaustively() {
        let legs = Legs::from_twice(&[1, 2, 3]).unwrap();
        let mut seen = vec![false; legs.size()];
        for d in legs.iter_digits() {
            let p = legs.position(&d).unwrap();
            assert!(!seen[p]);
            seen[p] = true;
            assert_eq!(legs.digits(p).unwrap(), d);
        }
        assert!(seen.into_iter().all(|x| x));
    }
}
