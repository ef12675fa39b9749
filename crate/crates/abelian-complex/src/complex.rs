//! Complexes of chains of virtual classes of abelian lattices.

use std::collections::BTreeSet;

use crate::lattice::{AbelianLattice, VirtualClass};
use crate::{ComplexError, Result};

/// A chain `A₀ < … < A_k` of lattices, optionally annotated with the
/// dimension of the model space its top group acts on.
#[derive(Debug, Clone)]
pub struct LatticeChain {
    pub name: String,
    pub lattices: Vec<AbelianLattice>,
    pub model_dim: Option<usize>,
}

/// A chain after passing to virtual classes and merging repeats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsedChain {
    pub name: String,
    /// Vertex indices in chain order.
    pub vertices: Vec<usize>,
    pub input_len: usize,
    pub model_dim: Option<usize>,
}

impl CollapsedChain {
    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Dimension lost to repeated classes.
    pub fn dimension_drop(&self) -> usize {
        self.input_len - self.vertices.len()
    }
}

#[derive(Debug, Clone)]
pub struct ChainComplexModel {
    pub vertices: Vec<VirtualClass>,
    /// Every face of every chain, as vertex indices in chain order.
    pub simplices: BTreeSet<Vec<usize>>,
    pub chains: Vec<CollapsedChain>,
    pub dimension: usize,
    pub max_rank: usize,
}

impl ChainComplexModel {
    /// Maximal simplices: chains that are not faces of longer chains.
    pub fn maximal_chains(&self) -> Vec<&CollapsedChain> {
        self.chains
            .iter()
            .filter(|c| {
                !self.chains.iter().any(|d| d.vertices.len() > c.vertices.len() && is_subsequence(&c.vertices, &d.vertices))
            })
            .collect()
    }

    /// `rank([A_k]) ≥ k + 1` for every simplex `[A₀] < … < [A_k]`.
    pub fn rank_violations(&self) -> Vec<Vec<usize>> {
        self.simplices.iter().filter(|s| self.vertices[*s.last().expect("nonempty")].rank() < s.len()).cloned().collect()
    }
}

fn is_subsequence(a: &[usize], b: &[usize]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.any(|y| y == x))
}

fn faces(chain: &[usize], out: &mut BTreeSet<Vec<usize>>) {
    let k = chain.len();
    for mask in 1u64..(1u64 << k) {
        out.insert((0..k).filter(|i| mask >> i & 1 == 1).map(|i| chain[i]).collect());
    }
}

/// Assembles the complex spanned by the chains.
///
/// Each inclusion `A_i < A_{i+1}` must be strict as lattices. Consecutive
/// lattices with the same rational span collapse to one vertex. Errors if a
/// simplex violates `rank(A_k) ≥ k + 1` or the dimension exceeds the
/// largest rank minus one; with strict rational inclusions both hold by
/// construction, so either failure is a construction bug.
pub fn build_class_complex(chains: &[LatticeChain]) -> Result<ChainComplexModel> {
    let mut vertices: Vec<VirtualClass> = Vec::new();
    let mut collapsed = Vec::new();
    let mut simplices = BTreeSet::new();
    let mut max_rank = 0;
    for c in chains {
        if c.lattices.is_empty() {
            return Err(ComplexError::InvalidChain(format!("chain {} is empty", c.name)));
        }
        if c.lattices.len() > 24 {
            return Err(ComplexError::InvalidChain(format!("chain {} is longer than 24", c.name)));
        }
        for (i, w) in c.lattices.windows(2).enumerate() {
            if !w[1].contains(&w[0])? || w[0] == w[1] {
                return Err(ComplexError::InvalidChain(format!(
                    "chain {}: lattice {i} is not strictly contained in lattice {}",
                    c.name,
                    i + 1
                )));
            }
        }
        let mut idx: Vec<usize> = Vec::new();
        for l in &c.lattices {
            max_rank = max_rank.max(l.rank());
            let v = l.virtual_class()?;
            let at = match vertices.iter().position(|u| *u == v) {
                Some(p) => p,
                None => {
                    vertices.push(v);
                    vertices.len() - 1
                }
            };
            if idx.last() != Some(&at) {
                idx.push(at);
            }
        }
        faces(&idx, &mut simplices);
        collapsed.push(CollapsedChain {
            name: c.name.clone(),
            vertices: idx,
            input_len: c.lattices.len(),
            model_dim: c.model_dim,
        });
    }
    let dimension = simplices.iter().map(|s| s.len() - 1).max().unwrap_or(0);
    let model = ChainComplexModel { vertices, simplices, chains: collapsed, dimension, max_rank };
    if let Some(s) = model.rank_violations().first() {
        return Err(ComplexError::InvalidChain(format!("simplex {s:?} has top rank below its vertex count")));
    }
    if model.dimension + 1 > model.max_rank {
        return Err(ComplexError::InvalidChain(format!(
            "dimension {} exceeds the largest abelian rank {} minus one",
            model.dimension, model.max_rank
        )));
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfDimensionVerdict {
    /// `k + 1 + rank(A_k) ≤ n`, hence `k ≤ ⌊n/2⌋ − 1`.
    Holds { equality: bool },
    /// `k + 1 + rank(A_k) > n`: a Busemann simplex over this chain must be
    /// degenerate.
    RequiresDegeneracy,
    /// No ambient dimension annotation.
    Unannotated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfDimensionRow {
    pub chain: String,
    pub k: usize,
    pub top_rank: usize,
    pub n: Option<usize>,
    /// `⌊n/2⌋ − 1`.
    pub bound: Option<i64>,
    pub verdict: HalfDimensionVerdict,
}

/// For each maximal chain `[A₀] < … < [A_k]` acting on an `n`-dimensional
/// model: the bound `k ≤ ⌊n/2⌋ − 1` when `n ≥ k + 1 + rank(A_k)`, and a
/// "requires degeneracy" flag otherwise.
pub fn half_dimension_report(complex: &ChainComplexModel) -> Vec<HalfDimensionRow> {
    complex
        .maximal_chains()
        .into_iter()
        .map(|c| {
            let k = c.dimension();
            let top_rank = complex.vertices[*c.vertices.last().expect("nonempty")].rank();
            let bound = c.model_dim.map(|n| (n / 2) as i64 - 1);
            let verdict = match c.model_dim {
                None => HalfDimensionVerdict::Unannotated,
                Some(n) if k + 1 + top_rank <= n => {
                    debug_assert!(k as i64 <= bound.expect("annotated"));
                    HalfDimensionVerdict::Holds { equality: k as i64 == bound.expect("annotated") }
                }
                Some(_) => HalfDimensionVerdict::RequiresDegeneracy,
            };
            HalfDimensionRow { chain: c.name.clone(), k, top_rank, n: c.model_dim, bound, verdict }
        })
        .collect()
}
