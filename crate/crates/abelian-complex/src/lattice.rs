//! Integer lattices in row form, Hermite normal forms and saturations.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::matrix::{add, mul, UniMatrix};
use crate::{ComplexError, Result};

fn axpy(row: &mut [i128], q: i128, pivot: &[i128]) -> Result<()> {
    for (r, p) in row.iter_mut().zip(pivot) {
        *r = r.checked_sub(mul(q, *p)?).ok_or(ComplexError::Overflow("row reduction"))?;
    }
    Ok(())
}

/// Row-echelon form by integer row operations, pivoting only on the first
/// `pivot_cols` columns. Pivots are positive and the entries above each
/// pivot are reduced into `[0, pivot)`. Returns the rank; the rows from the
/// rank on vanish in the pivot columns.
fn echelon(a: &mut [Vec<i128>], pivot_cols: usize) -> Result<usize> {
    let mut r = 0;
    for col in 0..pivot_cols {
        if r == a.len() {
            break;
        }
        loop {
            let p = (r..a.len()).filter(|&i| a[i][col] != 0).min_by_key(|&i| a[i][col].unsigned_abs());
            let Some(p) = p else { break };
            a.swap(r, p);
            let mut clean = true;
            for i in r + 1..a.len() {
                if a[i][col] != 0 {
                    let q = Integer::div_floor(&a[i][col], &a[r][col]);
                    let pivot = a[r].clone();
                    axpy(&mut a[i], q, &pivot)?;
                    clean &= a[i][col] == 0;
                }
            }
            if clean {
                break;
            }
        }
        if a[r][col] == 0 {
            continue;
        }
        if a[r][col] < 0 {
            for v in a[r].iter_mut() {
                *v = -*v;
            }
        }
        let pivot = a[r].clone();
        for i in 0..r {
            let q = Integer::div_floor(&a[i][col], &pivot[col]);
            if q != 0 {
                axpy(&mut a[i], q, &pivot)?;
            }
        }
        r += 1;
    }
    Ok(r)
}

/// Hermite normal form of the lattice spanned by `rows` in `ℤ^n`, without
/// zero rows. Canonical: two row sets span the same lattice iff their forms
/// are equal.
pub fn hnf(rows: &[Vec<i128>], n: usize) -> Result<Vec<Vec<i128>>> {
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(ComplexError::Dimension(format!("row of length {} in ℤ^{n}", r.len())));
    }
    let mut a = rows.to_vec();
    let r = echelon(&mut a, n)?;
    a.truncate(r);
    Ok(a)
}

/// Basis, in Hermite normal form, of `{c ∈ ℤ^m : Σ c_i rows_i = 0}` for the
/// `m` given rows of length `n`.
pub fn left_kernel(rows: &[Vec<i128>], n: usize) -> Result<Vec<Vec<i128>>> {
    let m = rows.len();
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..m).map(|j| i128::from(i == j)));
            v
        })
        .collect();
    let r = echelon(&mut a, n)?;
    let kernel: Vec<Vec<i128>> = a[r..].iter().map(|v| v[n..].to_vec()).collect();
    hnf(&kernel, m)
}

fn transpose(rows: &[Vec<i128>], n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

/// Integer points of the rational span: `(L ⊗ ℚ) ∩ ℤ^n`.
fn saturate(rows: &[Vec<i128>], n: usize) -> Result<Vec<Vec<i128>>> {
    // x with B x = 0, then v with K v = 0
    let k = left_kernel(&transpose(rows, n), rows.len())?;
    left_kernel(&transpose(&k, n), k.len())
}

/// Row-span containment test in `ℤ^n`.
fn contains(outer: &[Vec<i128>], inner: &[Vec<i128>], n: usize) -> Result<bool> {
    let mut all = outer.to_vec();
    all.extend(inner.iter().cloned());
    Ok(hnf(&all, n)? == outer)
}

/// A free abelian group given by a basis in `ℤ^D`.
///
/// Lattices of commuting unitriangular matrices use the scaled log
/// coordinates of [`UniMatrix::log_coordinates`]; `matrix_size` then records
/// the size of the matrices so generators can be recovered.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianLattice {
    pub ambient: usize,
    /// Hermite normal form rows.
    pub basis: Vec<Vec<i128>>,
    pub matrix_size: Option<usize>,
}

impl AbelianLattice {
    pub fn from_rows(ambient: usize, rows: &[Vec<i128>]) -> Result<Self> {
        Ok(AbelianLattice { ambient, basis: hnf(rows, ambient)?, matrix_size: None })
    }

    /// Lattice generated by commuting matrices; their pairwise commutation
    /// is checked.
    pub fn from_commuting(n: usize, gens: &[UniMatrix]) -> Result<Self> {
        for (i, a) in gens.iter().enumerate() {
            if a.size() != n {
                return Err(ComplexError::Dimension(format!("generator {i} has size {}, expected {n}", a.size())));
            }
            for (j, b) in gens.iter().enumerate().skip(i + 1) {
                if !a.commutes_with(b)? {
                    return Err(ComplexError::Commutation(format!("generators {i} and {j} do not commute")));
                }
            }
        }
        let rows = gens.iter().map(|g| g.log_coordinates()).collect::<Result<Vec<_>>>()?;
        let ambient = crate::matrix::log_dim(n);
        Ok(AbelianLattice { ambient, basis: hnf(&rows, ambient)?, matrix_size: Some(n) })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Matrices corresponding to the basis rows.
    pub fn generators(&self) -> Result<Vec<UniMatrix>> {
        let n = self
            .matrix_size
            .ok_or_else(|| ComplexError::Dimension("lattice carries no matrix coordinates".into()))?;
        self.basis.iter().map(|r| UniMatrix::from_log_coordinates(n, r)).collect()
    }

    /// `m·A`.
    pub fn scaled(&self, m: i128) -> Result<Self> {
        let rows = self
            .basis
            .iter()
            .map(|r| r.iter().map(|v| mul(*v, m)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(AbelianLattice { ambient: self.ambient, basis: hnf(&rows, self.ambient)?, matrix_size: self.matrix_size })
    }

    /// `⟨A, B⟩`.
    pub fn join(&self, other: &AbelianLattice) -> Result<Self> {
        self.same_ambient(other)?;
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Ok(AbelianLattice {
            ambient: self.ambient,
            basis: hnf(&rows, self.ambient)?,
            matrix_size: self.matrix_size.or(other.matrix_size),
        })
    }

    pub fn contains(&self, other: &AbelianLattice) -> Result<bool> {
        self.same_ambient(other)?;
        contains(&self.basis, &other.basis, self.ambient)
    }

    fn same_ambient(&self, other: &AbelianLattice) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(ComplexError::Dimension(format!("ℤ^{} against ℤ^{}", self.ambient, other.ambient)));
        }
        Ok(())
    }

    /// Index of `A` in its saturation, the product of the pivots ratio.
    pub fn saturation_index(&self) -> Result<i128> {
        let sat = saturate(&self.basis, self.ambient)?;
        let det = |b: &[Vec<i128>]| -> Result<i128> {
            b.iter().try_fold(1i128, |acc, row| {
                let p = row.iter().find(|v| **v != 0).copied().unwrap_or(1);
                mul(acc, p)
            })
        };
        Ok(det(&self.basis)? / det(&sat)?)
    }

    pub fn virtual_class(&self) -> Result<VirtualClass> {
        Ok(VirtualClass { ambient: self.ambient, saturation: saturate(&self.basis, self.ambient)? })
    }
}

/// Rational span of a lattice, stored as the Hermite normal form of its
/// saturation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VirtualClass {
    pub ambient: usize,
    pub saturation: Vec<Vec<i128>>,
}

impl VirtualClass {
    pub fn rank(&self) -> usize {
        self.saturation.len()
    }

    /// Rational span containment.
    pub fn le(&self, other: &VirtualClass) -> Result<bool> {
        if self.ambient != other.ambient {
            return Err(ComplexError::Dimension(format!("ℤ^{} against ℤ^{}", self.ambient, other.ambient)));
        }
        contains(&other.saturation, &self.saturation, self.ambient)
    }

    pub fn lattice(&self) -> AbelianLattice {
        AbelianLattice { ambient: self.ambient, basis: self.saturation.clone(), matrix_size: None }
    }
}

/// Divides a row by the gcd of its entries.
pub(crate) fn primitive(row: &[i128]) -> Vec<i128> {
    let g = row.iter().fold(0i128, |g, v| g.gcd(v));
    if g <= 1 {
        row.to_vec()
    } else {
        row.iter().map(|v| v / g).collect()
    }
}

/// `Σ c_i rows_i`.
pub(crate) fn combine(c: &[i128], rows: &[Vec<i128>], n: usize) -> Result<Vec<i128>> {
    let mut out = vec![0; n];
    for (ci, r) in c.iter().zip(rows) {
        for (o, v) in out.iter_mut().zip(r) {
            *o = add(*o, mul(*ci, *v)?)?;
        }
    }
    Ok(out)
}
