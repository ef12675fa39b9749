//! Integer unitriangular matrices with checked arithmetic.

use num_integer::Integer;

use crate::{ComplexError, Result};

/// Largest supported matrix size.
pub const MAX_SIZE: usize = 8;

/// An upper unitriangular `n × n` integer matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UniMatrix {
    n: usize,
    a: Vec<i128>,
}

pub(crate) fn add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(ComplexError::Overflow("addition"))
}

pub(crate) fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(ComplexError::Overflow("multiplication"))
}

/// `lcm(1, …, n−1)`: the factor that clears the denominators of `log` for
/// `n × n` unipotent matrices.
pub fn log_scale(n: usize) -> i128 {
    (1..n.max(2) as i128).fold(1, |l, k| l.lcm(&k))
}

/// Number of strictly upper entries, the dimension of the log coordinates.
pub fn log_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Product of two square matrices given row-major.
fn matmul(n: usize, x: &[i128], y: &[i128]) -> Result<Vec<i128>> {
    let mut out = vec![0; n * n];
    for i in 0..n {
        for k in 0..n {
            let xik = x[i * n + k];
            if xik == 0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] = add(out[i * n + j], mul(xik, y[k * n + j])?)?;
            }
        }
    }
    Ok(out)
}

impl UniMatrix {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![0; n * n];
        for i in 0..n {
            a[i * n + i] = 1;
        }
        UniMatrix { n, a }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n > MAX_SIZE {
            return Err(ComplexError::Dimension(format!("matrix size {n} outside 1..={MAX_SIZE}")));
        }
        let mut a = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(ComplexError::Dimension(format!("row {i} has {} entries, expected {n}", r.len())));
            }
            for (j, &v) in r.iter().enumerate() {
                let want = if i == j { Some(1) } else if j < i { Some(0) } else { None };
                if want.is_some_and(|w| w != v) {
                    return Err(ComplexError::NotUnitriangular(format!("entry ({i},{j}) is {v}")));
                }
                a.push(v as i128);
            }
        }
        Ok(UniMatrix { n, a })
    }

    /// Identity plus `v` in entry `(i, j)`, `i < j`.
    pub fn elementary(n: usize, i: usize, j: usize, v: i128) -> Self {
        assert!(i < j && j < n, "elementary matrices live strictly above the diagonal");
        let mut m = Self::identity(n);
        m.a[i * n + j] = v;
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> i128 {
        self.a[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i128>> {
        self.a.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn mul(&self, other: &UniMatrix) -> Result<UniMatrix> {
        if self.n != other.n {
            return Err(ComplexError::Dimension(format!("{}×{} times {}×{}", self.n, self.n, other.n, other.n)));
        }
        Ok(UniMatrix { n: self.n, a: matmul(self.n, &self.a, &other.a)? })
    }

    fn nilpotent_part(&self) -> Vec<i128> {
        let mut m = self.a.clone();
        for i in 0..self.n {
            m[i * self.n + i] = 0;
        }
        m
    }

    /// `Σ (−N)^k` for `N = U − I`.
    pub fn inverse(&self) -> Result<UniMatrix> {
        let n = self.n;
        let neg: Vec<i128> = self.nilpotent_part().iter().map(|v| -v).collect();
        let mut out = Self::identity(n).a;
        let mut pow = Self::identity(n).a;
        for _ in 1..n {
            pow = matmul(n, &pow, &neg)?;
            for (o, p) in out.iter_mut().zip(&pow) {
                *o = add(*o, *p)?;
            }
        }
        Ok(UniMatrix { n, a: out })
    }

    pub fn pow(&self, e: i64) -> Result<UniMatrix> {
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut out = Self::identity(self.n);
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(out)
    }

    pub fn commutes_with(&self, other: &UniMatrix) -> Result<bool> {
        Ok(self.mul(other)? == other.mul(self)?)
    }

    /// `g h g⁻¹ h⁻¹`.
    pub fn commutator(&self, other: &UniMatrix) -> Result<UniMatrix> {
        self.mul(other)?.mul(&self.inverse()?)?.mul(&other.inverse()?)
    }

    /// `s·log U` as a full matrix, `s = lcm(1, …, n−1)`. Integral because
    /// `log U = Σ_{k<n} (−1)^{k+1} N^k / k`.
    pub fn scaled_log_matrix(&self) -> Result<Vec<i128>> {
        let n = self.n;
        let s = log_scale(n);
        let nil = self.nilpotent_part();
        let mut out = vec![0; n * n];
        let mut pow = Self::identity(n).a;
        for k in 1..n {
            pow = matmul(n, &pow, &nil)?;
            let c = s / k as i128 * if k % 2 == 1 { 1 } else { -1 };
            for (o, p) in out.iter_mut().zip(&pow) {
                *o = add(*o, mul(c, *p)?)?;
            }
        }
        Ok(out)
    }

    /// Strictly upper entries of `s·log U` in row-major order; additive on
    /// commuting matrices.
    pub fn log_coordinates(&self) -> Result<Vec<i128>> {
        Ok(upper_entries(self.n, &self.scaled_log_matrix()?))
    }

    /// Inverse of [`UniMatrix::log_coordinates`]; fails unless the result
    /// is an integer matrix.
    pub fn from_log_coordinates(n: usize, coords: &[i128]) -> Result<UniMatrix> {
        if coords.len() != log_dim(n) {
            return Err(ComplexError::Dimension(format!("{} log coordinates for size {n}", coords.len())));
        }
        let s = log_scale(n);
        let y = from_upper_entries(n, coords);
        // exp(Y/s) = Σ_k Y^k / (s^k k!), all over the common denominator s^{n−1}(n−1)!
        let mut denom: i128 = 1;
        for k in 1..n {
            denom = mul(mul(denom, s)?, k as i128)?;
        }
        let mut acc: Vec<i128> = Self::identity(n).a.iter().map(|v| v * denom).collect();
        let mut pow = Self::identity(n).a;
        let mut kden: i128 = 1;
        for k in 1..n {
            pow = matmul(n, &pow, &y)?;
            kden = mul(mul(kden, s)?, k as i128)?;
            let c = denom / kden;
            for (o, p) in acc.iter_mut().zip(&pow) {
                *o = add(*o, mul(c, *p)?)?;
            }
        }
        if acc.iter().any(|v| v % denom != 0) {
            return Err(ComplexError::Instance("log coordinates do not exponentiate to an integer matrix".into()));
        }
        Ok(UniMatrix { n, a: acc.iter().map(|v| v / denom).collect() })
    }
}

pub(crate) fn upper_entries(n: usize, m: &[i128]) -> Vec<i128> {
    let mut out = Vec::with_capacity(log_dim(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push(m[i * n + j]);
        }
    }
    out
}

pub(crate) fn from_upper_entries(n: usize, v: &[i128]) -> Vec<i128> {
    let mut m = vec![0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            m[i * n + j] = v[k];
            k += 1;
        }
    }
    m
}

/// `XY − YX` of square matrices given row-major.
pub(crate) fn bracket(n: usize, x: &[i128], y: &[i128]) -> Result<Vec<i128>> {
    let xy = matmul(n, x, y)?;
    let yx = matmul(n, y, x)?;
    xy.iter().zip(&yx).map(|(a, b)| a.checked_sub(*b).ok_or(ComplexError::Overflow("bracket"))).collect()
}
