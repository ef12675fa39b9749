//! TOML instance files: generator matrices, lattices and chains.
//!
//! ```toml
//! schema_version = 1
//!
//! [[group]]
//! name = "H3"
//! generators = [[[1, 1, 0], [0, 1, 0], [0, 0, 1]], [[1, 0, 0], [0, 1, 1], [0, 0, 1]]]
//! exponent = 2   # optional, replaces each generator g by g^exponent
//! radius = 4     # optional word-ball radius
//!
//! [[lattice]]
//! name = "Z1"
//! ambient = 3
//! rows = [[1, 0, 0]]
//!
//! [[chain]]
//! name = "flag"
//! model_dim = 4          # optional dimension n of the model space
//! lattices = ["Z1", "Z2"] # or groups = ["H3", "H3xH3"]
//! ```
//!
//! The canonical form orders every table array by name and writes each
//! entry with keys in the order above, so canonical files are diff-stable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::LatticeChain;
use crate::group::{zeta_chain, NilpotentGroupData};
use crate::lattice::AbelianLattice;
use crate::matrix::UniMatrix;
use crate::{ComplexError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// The instance set shipped with the crate.
pub const BUNDLED: &str = include_str!("../instances/catalog.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupEntry {
    pub name: String,
    pub generators: Vec<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeEntry {
    pub name: String,
    pub ambient: usize,
    pub rows: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattices: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(default, rename = "group", skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupEntry>,
    #[serde(default, rename = "lattice", skip_serializing_if = "Vec::is_empty")]
    pub lattices: Vec<LatticeEntry>,
    #[serde(default, rename = "chain", skip_serializing_if = "Vec::is_empty")]
    pub chains: Vec<ChainEntry>,
}

fn unique<'a>(kind: &str, names: impl Iterator<Item = &'a String>) -> Result<()> {
    let mut seen = BTreeMap::new();
    for n in names {
        if seen.insert(n, ()).is_some() {
            return Err(ComplexError::Instance(format!("duplicate {kind} name {n}")));
        }
    }
    Ok(())
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile = toml::from_str(text).map_err(|e| ComplexError::Instance(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(ComplexError::Instance(format!(
                "schema_version {} is not supported, expected {SCHEMA_VERSION}",
                file.schema_version
            )));
        }
        unique("group", file.groups.iter().map(|g| &g.name))?;
        unique("lattice", file.lattices.iter().map(|l| &l.name))?;
        unique("chain", file.chains.iter().map(|c| &c.name))?;
        for c in &file.chains {
            if c.groups.is_some() == c.lattices.is_some() {
                return Err(ComplexError::Instance(format!("chain {} needs exactly one of groups or lattices", c.name)));
            }
        }
        Ok(file)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled instances parse")
    }

    pub fn to_canonical_toml(&self) -> String {
        let mut c = self.clone();
        c.groups.sort_by(|a, b| a.name.cmp(&b.name));
        c.lattices.sort_by(|a, b| a.name.cmp(&b.name));
        c.chains.sort_by(|a, b| a.name.cmp(&b.name));
        toml::to_string(&c).expect("instance serializes")
    }

    pub fn group(&self, name: &str) -> Result<NilpotentGroupData> {
        let e = self
            .groups
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| ComplexError::Instance(format!("unknown group {name}")))?;
        let gens = e.generators.iter().map(|m| UniMatrix::from_rows(m)).collect::<Result<Vec<_>>>()?;
        let mut g = NilpotentGroupData::new(e.name.clone(), gens)?;
        if let Some(r) = e.radius {
            g = g.with_radius(r);
        }
        match e.exponent {
            Some(x) if x != 1 => g.powered(x),
            _ => Ok(g),
        }
    }

    pub fn lattice(&self, name: &str) -> Result<AbelianLattice> {
        let e = self
            .lattices
            .iter()
            .find(|l| l.name == name)
            .ok_or_else(|| ComplexError::Instance(format!("unknown lattice {name}")))?;
        let rows: Vec<Vec<i128>> = e.rows.iter().map(|r| r.iter().map(|v| i128::from(*v)).collect()).collect();
        if let Some(r) = rows.iter().find(|r| r.len() != e.ambient) {
            return Err(ComplexError::Instance(format!("lattice {name}: row of length {} in ℤ^{}", r.len(), e.ambient)));
        }
        let l = AbelianLattice::from_rows(e.ambient, &rows)?;
        if l.rank() != rows.len() {
            return Err(ComplexError::Instance(format!("lattice {name}: rows are linearly dependent")));
        }
        Ok(l)
    }

    /// Chains of lattices, with group chains sent through `ζ` prefix by
    /// prefix. A prefix whose `ζ` lattice equals the previous one adds no
    /// vertex and is skipped.
    pub fn lattice_chains(&self) -> Result<Vec<LatticeChain>> {
        self.chains
            .iter()
            .map(|c| {
                let lattices = if let Some(names) = &c.lattices {
                    names.iter().map(|n| self.lattice(n)).collect::<Result<Vec<_>>>()?
                } else {
                    let groups = c.groups.iter().flatten().map(|n| self.group(n)).collect::<Result<Vec<_>>>()?;
                    let mut ls = zeta_chain(&groups)?;
                    ls.dedup();
                    ls
                };
                Ok(LatticeChain { name: c.name.clone(), lattices, model_dim: c.model_dim })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_class_complex, half_dimension_report, HalfDimensionVerdict};

    #[test]
    fn bundled_catalog_builds() {
        let f = InstanceFile::bundled();
        let m = build_class_complex(&f.lattice_chains().unwrap()).unwrap();
        assert!(m.rank_violations().is_empty());
        let rows = half_dimension_report(&m);
        let flagged = rows.iter().find(|r| r.chain == "flag-Z1Z2Z3-n4").unwrap();
        assert_eq!(flagged.verdict, HalfDimensionVerdict::RequiresDegeneracy);
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let f = InstanceFile::bundled();
        let once = f.to_canonical_toml();
        let twice = InstanceFile::parse(&once).unwrap().to_canonical_toml();
        assert_eq!(once, twice);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(InstanceFile::parse("schema_version = 2").is_err());
        assert!(InstanceFile::parse("schema_version = 1\nextra = 3").is_err());
        let both = "schema_version = 1\n[[chain]]\nname = \"c\"\ngroups = []\nlattices = []\n";
        assert!(InstanceFile::parse(both).unwrap_err().to_string().contains("exactly one"));
    }

    #[test]
    fn group_chains_use_zeta() {
        let f = InstanceFile::bundled();
        let chains = f.lattice_chains().unwrap();
        let h = chains.iter().find(|c| c.name == "heisenberg-chain").unwrap();
        assert_eq!(h.lattices.iter().map(AbelianLattice::rank).collect::<Vec<_>>(), vec![1, 2]);
    }
}
