//! Finitely generated groups of unitriangular integer matrices, their
//! centers, and the map `ζ(N₀ < … < N_k) = ⟨Z₀, …, Z_k⟩`.

use std::collections::HashSet;

use crate::lattice::{combine, hnf, left_kernel, primitive, AbelianLattice};
use crate::matrix::{bracket, UniMatrix};
use crate::{ComplexError, Result};

/// Default word-ball radius for membership and center searches.
pub const DEFAULT_RADIUS: usize = 4;
const BALL_LIMIT: usize = 500_000;

#[derive(Debug, Clone, PartialEq)]
pub struct NilpotentGroupData {
    pub name: String,
    pub size: usize,
    pub generators: Vec<UniMatrix>,
    /// Word-ball radius used for membership and the center search.
    pub radius: usize,
}

impl NilpotentGroupData {
    pub fn new(name: impl Into<String>, generators: Vec<UniMatrix>) -> Result<Self> {
        let name = name.into();
        let size = generators.first().map(UniMatrix::size).ok_or_else(|| ComplexError::Dimension(format!("group {name} has no generators")))?;
        if let Some(g) = generators.iter().find(|g| g.size() != size) {
            return Err(ComplexError::Dimension(format!("group {name} mixes sizes {size} and {}", g.size())));
        }
        Ok(NilpotentGroupData { name, size, generators, radius: DEFAULT_RADIUS })
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = radius;
        self
    }

    /// The subgroup generated by the `e`-th powers of the generators.
    pub fn powered(&self, e: i64) -> Result<Self> {
        let generators = self.generators.iter().map(|g| g.pow(e)).collect::<Result<Vec<_>>>()?;
        Ok(NilpotentGroupData { name: format!("{}^{e}", self.name), generators, ..self.clone() })
    }

    /// Elements of word length at most `radius`, in breadth-first order.
    pub fn word_ball(&self, radius: usize) -> Result<Vec<UniMatrix>> {
        let mut letters = Vec::new();
        for g in &self.generators {
            letters.push(g.clone());
            letters.push(g.inverse()?);
        }
        let id = UniMatrix::identity(self.size);
        let mut seen: HashSet<UniMatrix> = HashSet::from([id.clone()]);
        let mut out = vec![id];
        let mut frontier = 0;
        for _ in 0..radius {
            let end = out.len();
            for i in frontier..end {
                for l in &letters {
                    let w = out[i].mul(l)?;
                    if seen.insert(w.clone()) {
                        out.push(w);
                        if out.len() > BALL_LIMIT {
                            return Err(ComplexError::BallTooLarge(BALL_LIMIT));
                        }
                    }
                }
            }
            frontier = end;
        }
        Ok(out)
    }

    /// Membership decided inside the word ball of the configured radius.
    pub fn contains(&self, g: &UniMatrix) -> Result<bool> {
        Ok(self.word_ball(self.radius)?.contains(g))
    }

    /// Basis of the rational Lie algebra spanned by the logs of the
    /// generators and their iterated brackets, as primitive scaled logs.
    pub fn lie_algebra(&self) -> Result<Vec<Vec<i128>>> {
        let n = self.size;
        let dim = n * n;
        let mut basis: Vec<Vec<i128>> = Vec::new();
        let mut fresh: Vec<Vec<i128>> =
            self.generators.iter().map(|g| g.scaled_log_matrix().map(|m| primitive(&m))).collect::<Result<_>>()?;
        loop {
            let mut all = basis.clone();
            all.extend(fresh.iter().cloned());
            let next: Vec<Vec<i128>> = hnf(&all, dim)?.iter().map(|r| primitive(r)).collect();
            if next.len() == basis.len() {
                return Ok(basis);
            }
            fresh = Vec::new();
            for x in &next {
                for y in &next {
                    let b = bracket(n, x, y)?;
                    if b.iter().any(|v| *v != 0) {
                        fresh.push(primitive(&b));
                    }
                }
            }
            basis = next;
        }
    }

    /// Dimension of the center of the rational Lie algebra: the rank of the
    /// center of the group.
    pub fn center_dimension(&self) -> Result<usize> {
        Ok(self.center_algebra()?.len())
    }

    fn center_algebra(&self) -> Result<Vec<Vec<i128>>> {
        let n = self.size;
        let basis = self.lie_algebra()?;
        let logs = self.generators.iter().map(|g| g.scaled_log_matrix()).collect::<Result<Vec<_>>>()?;
        let rows = basis
            .iter()
            .map(|b| {
                let mut row = Vec::new();
                for l in &logs {
                    row.extend(bracket(n, b, l)?);
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let width = n * n * logs.len();
        let kernel = left_kernel(&rows, width)?;
        kernel.iter().map(|c| combine(c, &basis, n * n)).collect()
    }
}

/// Center of the group as a lattice in scaled log coordinates.
///
/// The rank is the dimension of the center of the rational Lie algebra,
/// from the linear conditions `[X, log gᵢ] = 0`. The lattice is generated by
/// the central elements of the word ball; a ball too small to reach the full
/// rank is an error.
pub fn center_of(group: &NilpotentGroupData) -> Result<AbelianLattice> {
    let expected = group.center_dimension()?;
    let central: Vec<UniMatrix> = group
        .word_ball(group.radius)?
        .into_iter()
        .filter(|w| group.generators.iter().all(|g| w.commutes_with(g).unwrap_or(false)))
        .collect();
    let lattice = AbelianLattice::from_commuting(group.size, &central)?;
    if lattice.rank() != expected {
        return Err(ComplexError::CenterIncomplete { radius: group.radius, found: lattice.rank(), expected });
    }
    Ok(lattice)
}

/// Checks `N_i < N_{i+1}` on generators.
fn check_chain(chain: &[NilpotentGroupData]) -> Result<()> {
    if chain.is_empty() {
        return Err(ComplexError::InvalidChain("empty chain".into()));
    }
    for w in chain.windows(2) {
        if w[0].size != w[1].size {
            return Err(ComplexError::InvalidChain(format!("{} and {} have different matrix sizes", w[0].name, w[1].name)));
        }
        let ball: HashSet<UniMatrix> = w[1].word_ball(w[1].radius)?.into_iter().collect();
        if let Some((i, _)) = w[0].generators.iter().enumerate().find(|(_, g)| !ball.contains(*g)) {
            return Err(ComplexError::InvalidChain(format!(
                "generator {i} of {} is not in {} within word length {}",
                w[0].name, w[1].name, w[1].radius
            )));
        }
    }
    Ok(())
}

/// `ζ(N₀ < … < N_k) = ⟨Z₀, …, Z_k⟩`, with the inclusions checked on
/// generators and every pair of center generators checked to commute.
pub fn zeta_map(chain: &[NilpotentGroupData]) -> Result<AbelianLattice> {
    check_chain(chain)?;
    let mut gens: Vec<UniMatrix> = Vec::new();
    for (i, n) in chain.iter().enumerate() {
        for z in center_of(n)?.generators()? {
            for (j, prev) in gens.iter().enumerate() {
                if !z.commutes_with(prev)? {
                    return Err(ComplexError::Commutation(format!(
                        "a center generator of {} (position {i}) fails to commute with earlier generator {j}",
                        n.name
                    )));
                }
            }
            gens.push(z);
        }
    }
    AbelianLattice::from_commuting(chain[0].size, &gens)
}

/// `ζ` of every prefix `N₀ < … < N_i`, a chain of abelian lattices.
pub fn zeta_chain(chain: &[NilpotentGroupData]) -> Result<Vec<AbelianLattice>> {
    (1..=chain.len()).map(|i| zeta_map(&chain[..i])).collect()
}
