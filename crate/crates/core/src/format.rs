//! JSON documents for cells, lattices and coupling output.
//!
//! Spins are written as twice their value (`1` for spin-1/2, `2` for spin-1).

use serde::{Deserialize, Serialize};

use crate::correlate::AlphaCoefficients;
use crate::error::{Error, Result};
use crate::oracle::{LatticeCell, LatticeSpec};
use crate::spin::{CouplingVector, Legs, NodeConvention, SpinValue};
use crate::transform::{DecoratedCell, EffectiveCouplings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub index: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDocument {
    pub central: u32,
    pub legs: Vec<u32>,
    #[serde(default)]
    pub convention: NodeConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central_convention: Option<NodeConvention>,
    #[serde(default)]
    pub couplings: Vec<CouplingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0_self_energy: Option<Vec<f64>>,
}

fn coupling_vector(legs: Legs, conv: NodeConvention, entries: &[CouplingEntry]) -> Result<CouplingVector> {
    let mut j = CouplingVector::zeros(legs, conv);
    let mut seen = vec![false; j.legs().size()];
    for e in entries {
        if !e.value.is_finite() {
            return Err(Error::NonFinite("coupling"));
        }
        let pos = j.legs().position(&e.index)?;
        if std::mem::replace(&mut seen[pos], true) {
            return Err(Error::Format(format!("duplicate coupling index {:?}", e.index)));
        }
        j.set(&e.index, e.value)?;
    }
    Ok(j)
}

fn build_cell(
    central: u32,
    legs: Legs,
    conv: NodeConvention,
    central_conv: Option<NodeConvention>,
    couplings: &[CouplingEntry],
    self_energy: Option<&Vec<f64>>,
) -> Result<DecoratedCell> {
    let j = coupling_vector(legs, conv, couplings)?;
    let mut cell = DecoratedCell::new(SpinValue::from_twice(central)?, j);
    if let Some(cc) = central_conv {
        cell = cell.with_central_convention(cc);
    }
    if let Some(e) = self_energy {
        cell = cell.with_self_energy(e.clone())?;
    }
    Ok(cell)
}

impl CellDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_cell(&self) -> Result<DecoratedCell> {
        build_cell(
            self.central,
            Legs::from_twice(&self.legs)?,
            self.convention,
            self.central_convention,
            &self.couplings,
            self.s0_self_energy.as_ref(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeCellDocument {
    pub central: u32,
    pub sites: Vec<usize>,
    #[serde(default)]
    pub couplings: Vec<CouplingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central_convention: Option<NodeConvention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0_self_energy: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeDocument {
    #[serde(default)]
    pub convention: NodeConvention,
    pub sigma_spin: u32,
    pub sigma_sites: usize,
    pub cells: Vec<LatticeCellDocument>,
}

impl LatticeDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_spec(&self) -> Result<LatticeSpec> {
        let sigma = SpinValue::from_twice(self.sigma_spin)?;
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let legs = Legs::uniform(sigma, c.sites.len())?;
                Ok(LatticeCell {
                    cell: build_cell(
                        c.central,
                        legs,
                        self.convention,
                        c.central_convention,
                        &c.couplings,
                        c.s0_self_energy.as_ref(),
                    )?,
                    sites: c.sites.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LatticeSpec::new(sigma, self.sigma_sites, self.convention, cells)
    }
}

/// Dense coupling listing; `constant` repeats the all-zero entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingsDocument {
    pub legs: Vec<u32>,
    pub convention: NodeConvention,
    pub constant: f64,
    pub couplings: Vec<CouplingEntry>,
}

impl CouplingsDocument {
    pub fn from_vector(j: &CouplingVector) -> Result<Self> {
        let legs = j.legs();
        let couplings = j
            .entries()
            .iter()
            .enumerate()
            .map(|(p, &value)| {
                Ok(CouplingEntry {
                    index: legs.multi_index(p)?.0,
                    value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            legs: legs.spins().iter().map(|s| s.twice()).collect(),
            convention: j.convention(),
            constant: j.constant(),
            couplings,
        })
    }

    pub fn from_effective(j: &EffectiveCouplings) -> Result<Self> {
        Self::from_vector(j.couplings())
    }

    pub fn from_alpha(a: &AlphaCoefficients) -> Result<Self> {
        Self::from_vector(a.values())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_vector(&self) -> Result<CouplingVector> {
        coupling_vector(Legs::from_twice(&self.legs)?, self.convention, &self.couplings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::effective_couplings;

    #[test]
    fn cell_document_defaults() {
        let doc = CellDocument::from_json(
            r#"{"central": 1, "legs": [1, 1], "couplings": [{"index": [1, 0], "value": 1.0}]}"#,
        )
        .unwrap();
        assert_eq!(doc.convention, NodeConvention::Physical);
        let cell = doc.to_cell().unwrap();
        assert_eq!(cell.legs().count(), 2);
        assert_eq!(cell.couplings().get(&[1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_documents() {
        for text in [
            r#"{"central": 1, "legs": [1], "couplings": [{"index": [2], "value": 1.0}]}"#,
            r#"{"central": 1, "legs": [1], "couplings": [{"index": [1], "value": 1.0}, {"index": [1], "value": 2.0}]}"#,
            r#"{"central": 1, "legs": [1, 1], "couplings": [{"index": [1], "value": 1.0}]}"#,
            r#"{"central": 0, "legs": [1]}"#,
            r#"{"central": 1, "legs": [1], "s0_self_energy": [0.0]}"#,
        ] {
            let r = CellDocument::from_json(text).and_then(|d| d.to_cell());
            assert!(r.is_err(), "{text}");
        }
        assert!(CellDocument::from_json(r#"{"central": 1, "legs": [1], "bogus": 3}"#).is_err());
    }

    #[test]
    fn couplings_round_trip() {
        let doc = CellDocument::from_json(
            r#"{"central": 2, "legs": [1, 2], "convention": "normalized",
                "couplings": [{"index": [1, 1], "value": 0.4}, {"index": [0, 2], "value": -0.3}]}"#,
        )
        .unwrap();
        let eff = effective_couplings(&doc.to_cell().unwrap()).unwrap();
        let out = CouplingsDocument::from_effective(&eff).unwrap();
        assert_eq!(out.couplings.len(), 6);
        assert_eq!(out.constant, eff.constant());
        let back = CouplingsDocument::from_json(&out.to_json())
            .unwrap()
            .to_vector()
            .unwrap();
        assert_eq!(&back, eff.couplings());
    }

    #[test]
    fn lattice_document() {
        let doc = LatticeDocument::from_json(
            r#"{"convention": "normalized", "sigma_spin": 1, "sigma_sites": 3,
                "cells": [{"central": 1, "sites": [0, 1], "couplings": [{"index": [1, 1], "value": 0.5}]},
                          {"central": 2, "sites": [1, 2], "s0_self_energy": [0.1, 0.0, 0.1]}]}"#,
        )
        .unwrap();
        let spec = doc.to_spec().unwrap();
        assert_eq!(spec.cells().len(), 2);
        assert_eq!(spec.state_space(), 8 * 2 * 3);
    }
}
