//! Isometries of model spaces, acting factor by factor.

use nalgebra::{DMatrix, DVector};

use crate::models::{hyp, BoundaryPoint, Factor, FactorIdeal, ModelSpace, Point, Tangent};
use crate::{GeometryError, Result};

/// Isometry of a single factor.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorIsometry {
    /// `x ↦ qx + shift` on `ℝⁿ`, with `q` orthogonal.
    Euclidean { q: DMatrix<f64>, shift: DVector<f64> },
    /// Half-space similarity `u ↦ e^{log_scale}·rot·u + shift`, fixing `∞`.
    /// Parabolic translations, boosts along the vertical axis and rotations
    /// about it are the special cases.
    Similarity { log_scale: f64, rot: DMatrix<f64>, shift: DVector<f64> },
    /// A Lorentz matrix preserving the upper hyperboloid, acting on
    /// hyperboloid coordinates `(x₁,…,x_n, x₀)`.
    Lorentz(DMatrix<f64>),
}

fn minkowski_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(n + 1, n + 1);
    j[(n, n)] = -1.0;
    j
}

impl FactorIsometry {
    pub fn identity(f: Factor) -> Self {
        match f {
            Factor::Euclidean(n) => FactorIsometry::Euclidean {
                q: DMatrix::identity(n, n),
                shift: DVector::zeros(n),
            },
            Factor::Hyperbolic(n) => FactorIsometry::Similarity {
                log_scale: 0.0,
                rot: DMatrix::identity(n - 1, n - 1),
                shift: DVector::zeros(n - 1),
            },
        }
    }

    /// Parabolic translation `u ↦ u + c` of the half-space.
    pub fn parabolic(c: DVector<f64>) -> Self {
        let m = c.len();
        FactorIsometry::Similarity { log_scale: 0.0, rot: DMatrix::identity(m, m), shift: c }
    }

    /// Translation of length `ell` along the vertical axis through the origin.
    pub fn boost(n: usize, ell: f64) -> Self {
        FactorIsometry::Similarity {
            log_scale: ell,
            rot: DMatrix::identity(n - 1, n - 1),
            shift: DVector::zeros(n - 1),
        }
    }

    pub fn translation(v: DVector<f64>) -> Self {
        let n = v.len();
        FactorIsometry::Euclidean { q: DMatrix::identity(n, n), shift: v }
    }

    fn check(&self, f: Factor) -> Result<()> {
        let ok = match (self, f) {
            (FactorIsometry::Euclidean { q, shift }, Factor::Euclidean(n)) => {
                q.nrows() == n && q.ncols() == n && shift.len() == n
            }
            (FactorIsometry::Similarity { rot, shift, .. }, Factor::Hyperbolic(n)) => {
                rot.nrows() == n - 1 && rot.ncols() == n - 1 && shift.len() == n - 1
            }
            (FactorIsometry::Lorentz(l), Factor::Hyperbolic(n)) => {
                l.nrows() == n + 1 && l.ncols() == n + 1
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::Domain("isometry does not match its factor".into()))
        }
    }

    /// Lorentz matrix of a hyperbolic factor isometry.
    pub fn lorentz_matrix(&self) -> Option<DMatrix<f64>> {
        match self {
            FactorIsometry::Euclidean { .. } => None,
            FactorIsometry::Lorentz(l) => Some(l.clone()),
            FactorIsometry::Similarity { log_scale, rot, shift } => {
                let m = rot.nrows();
                let n = m + 1;
                let lam = log_scale.exp();
                let mut out = DMatrix::zeros(n + 1, n + 1);
                for col in 0..=n {
                    let mut x = DVector::zeros(n + 1);
                    x[col] = 1.0;
                    let a = 0.5 * (x[n] + x[0]);
                    let b = 0.5 * (x[n] - x[0]);
                    let e = x.rows(1, m).into_owned();
                    let ae = rot * &e;
                    let a2 = lam * a + ae.dot(shift) + shift.norm_squared() * b / lam;
                    let b2 = b / lam;
                    let e2 = ae + shift * (2.0 * b / lam);
                    out[(0, col)] = a2 - b2;
                    for j in 0..m {
                        out[(1 + j, col)] = e2[j];
                    }
                    out[(n, col)] = a2 + b2;
                }
                Some(out)
            }
        }
    }

    fn compose(&self, other: &Self) -> Self {
        use FactorIsometry::*;
        match (self, other) {
            (Euclidean { q: q1, shift: s1 }, Euclidean { q: q2, shift: s2 }) => {
                Euclidean { q: q1 * q2, shift: q1 * s2 + s1 }
            }
            (
                Similarity { log_scale: l1, rot: a1, shift: c1 },
                Similarity { log_scale: l2, rot: a2, shift: c2 },
            ) => Similarity {
                log_scale: l1 + l2,
                rot: a1 * a2,
                shift: a1 * c2 * l1.exp() + c1,
            },
            (a, b) => Lorentz(a.lorentz_matrix().expect("hyperbolic") * b.lorentz_matrix().expect("hyperbolic")),
        }
    }

    fn inverse(&self) -> Self {
        use FactorIsometry::*;
        match self {
            Euclidean { q, shift } => {
                let qt = q.transpose();
                let s = -(&qt * shift);
                Euclidean { q: qt, shift: s }
            }
            Similarity { log_scale, rot, shift } => {
                let rt = rot.transpose();
                let s = -(&rt * shift) * (-log_scale).exp();
                Similarity { log_scale: -log_scale, rot: rt, shift: s }
            }
            Lorentz(l) => {
                let j = minkowski_j(l.nrows() - 1);
                Lorentz(&j * l.transpose() * &j)
            }
        }
    }

    fn apply(&self, c: &[f64]) -> Vec<f64> {
        match self {
            FactorIsometry::Euclidean { q, shift } => {
                let x = DVector::from_column_slice(c);
                (q * x + shift).iter().copied().collect()
            }
            FactorIsometry::Similarity { log_scale, rot, shift } => {
                let m = rot.nrows();
                let eta = c[m];
                let eta2 = eta + log_scale;
                let k = (-eta2).exp();
                let w = DVector::from_column_slice(&c[..m]);
                let mut out: Vec<f64> = (rot * w + shift * k).iter().copied().collect();
                out.push(eta2);
                out
            }
            FactorIsometry::Lorentz(l) => {
                let x = DVector::from_vec(hyp::to_hyperboloid(c));
                let y = l * x;
                hyp::from_hyperboloid(y.as_slice())
            }
        }
    }

    fn push(&self, c: &[f64], v: &[f64]) -> Vec<f64> {
        match self {
            FactorIsometry::Euclidean { q, .. } => {
                (q * DVector::from_column_slice(v)).iter().copied().collect()
            }
            FactorIsometry::Similarity { rot, .. } => {
                let m = rot.nrows();
                let mut out: Vec<f64> =
                    (rot * DVector::from_column_slice(&v[..m])).iter().copied().collect();
                out.push(v[m]);
                out
            }
            FactorIsometry::Lorentz(l) => {
                let t = DVector::from_vec(hyp::tangent_to_hyperboloid(c, v));
                let image = self.apply(c);
                hyp::tangent_from_hyperboloid(&image, (l * t).as_slice())
            }
        }
    }

    fn apply_ideal(&self, id: &FactorIdeal) -> FactorIdeal {
        match (self, id) {
            (FactorIsometry::Euclidean { q, .. }, FactorIdeal::Direction(d)) => {
                FactorIdeal::Direction(q * d)
            }
            (FactorIsometry::Similarity { .. }, FactorIdeal::Infinity) => FactorIdeal::Infinity,
            (FactorIsometry::Similarity { log_scale, rot, shift }, FactorIdeal::Finite(u)) => {
                FactorIdeal::Finite(rot * u * log_scale.exp() + shift)
            }
            (FactorIsometry::Lorentz(l), other) => {
                let n = l.nrows() - 1;
                let b = DVector::from_vec(other.to_lightlike(n).expect("hyperbolic ideal"));
                let img = l * b;
                FactorIdeal::from_lightlike(img.as_slice())
            }
            _ => id.clone(),
        }
    }

    /// Deviation of the defining matrix from preserving its quadratic form.
    pub fn form_defect(&self) -> f64 {
        match self {
            FactorIsometry::Euclidean { q, .. } => {
                (q.transpose() * q - DMatrix::identity(q.nrows(), q.ncols())).amax()
            }
            FactorIsometry::Similarity { rot, .. } => {
                (rot.transpose() * rot - DMatrix::identity(rot.nrows(), rot.ncols())).amax()
            }
            FactorIsometry::Lorentz(l) => {
                let j = minkowski_j(l.nrows() - 1);
                let future = if l[(l.nrows() - 1, l.ncols() - 1)] > 0.0 { 0.0 } else { f64::INFINITY };
                (l.transpose() * &j * l - &j).amax() + future
            }
        }
    }

    /// Comparable numeric signature used for identifying group elements.
    fn signature(&self) -> Vec<f64> {
        match self {
            FactorIsometry::Euclidean { q, shift } => {
                q.iter().chain(shift.iter()).copied().collect()
            }
            other => other.lorentz_matrix().expect("hyperbolic").iter().copied().collect(),
        }
    }
}

/// An isometry of a model space: one isometry per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    pub factors: Vec<FactorIsometry>,
}

impl Isometry {
    pub fn new(space: &ModelSpace, factors: Vec<FactorIsometry>) -> Result<Self> {
        if factors.len() != space.num_factors() {
            return Err(GeometryError::Domain("wrong number of factor isometries".into()));
        }
        for (f, g) in space.factors().iter().zip(&factors) {
            g.check(*f)?;
        }
        Ok(Isometry { factors })
    }

    pub fn identity(space: &ModelSpace) -> Self {
        Isometry { factors: space.factors().iter().map(|f| FactorIsometry::identity(*f)).collect() }
    }

    /// Isometry of a single-factor space.
    pub fn single(g: FactorIsometry) -> Self {
        Isometry { factors: vec![g] }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            factors: self.factors.iter().zip(&other.factors).map(|(a, b)| a.compose(b)).collect(),
        }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { factors: self.factors.iter().map(|g| g.inverse()).collect() }
    }

    /// `selfⁿ` for any integer `n`, by repeated squaring.
    pub fn power(&self, n: i64) -> Isometry {
        let mut base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc: Option<Isometry> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.compose(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
            }
        }
        acc.unwrap_or_else(|| Isometry {
            factors: self
                .factors
                .iter()
                .map(|g| match g {
                    FactorIsometry::Euclidean { q, .. } => FactorIsometry::identity(Factor::Euclidean(q.nrows())),
                    FactorIsometry::Similarity { rot, .. } => {
                        FactorIsometry::identity(Factor::Hyperbolic(rot.nrows() + 1))
                    }
                    FactorIsometry::Lorentz(l) => FactorIsometry::Lorentz(DMatrix::identity(l.nrows(), l.ncols())),
                })
                .collect(),
        })
    }

    pub fn apply(&self, space: &ModelSpace, p: &Point) -> Point {
        let mut out = p.coords.clone();
        for (i, g) in self.factors.iter().enumerate() {
            let r = space.factor_range(i);
            let img = g.apply(&p.coords.as_slice()[r.clone()]);
            for (j, k) in r.enumerate() {
                out[k] = img[j];
            }
        }
        Point::new(out)
    }

    /// Differential at `p`, mapping `T_p` to `T_{γp}`.
    pub fn push_tangent(&self, space: &ModelSpace, p: &Point, v: &Tangent) -> Tangent {
        let mut out = v.clone();
        for (i, g) in self.factors.iter().enumerate() {
            let r = space.factor_range(i);
            let img = g.push(&p.coords.as_slice()[r.clone()], &v.as_slice()[r.clone()]);
            for (j, k) in r.enumerate() {
                out[k] = img[j];
            }
        }
        out
    }

    pub fn apply_boundary(&self, xi: &BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint {
            weights: xi.weights.clone(),
            ideals: xi
                .ideals
                .iter()
                .zip(&self.factors)
                .map(|(id, g)| id.as_ref().map(|id| g.apply_ideal(id)))
                .collect(),
        }
    }

    /// Largest violation of form preservation over the factors.
    pub fn form_defect(&self) -> f64 {
        self.factors.iter().map(|g| g.form_defect()).fold(0.0, f64::max)
    }

    pub fn signature(&self) -> Vec<f64> {
        self.factors.iter().flat_map(|g| g.signature()).collect()
    }

    /// Equality of the defining matrices within `tol`, relative to their size.
    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        let a = self.signature();
        let b = other.signature();
        a.len() == b.len()
            && a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol * 1f64.max(x.abs()).max(y.abs()))
    }

    /// Closed-form translation length, available for Euclidean translations
    /// and half-space similarities.
    pub fn translation_length(&self) -> Option<f64> {
        let mut s = 0.0;
        for g in &self.factors {
            let l = match g {
                FactorIsometry::Euclidean { q, shift } => {
                    if (q - DMatrix::identity(q.nrows(), q.ncols())).amax() == 0.0 {
                        shift.norm()
                    } else {
                        return None;
                    }
                }
                FactorIsometry::Similarity { log_scale, .. } => log_scale.abs(),
                FactorIsometry::Lorentz(_) => return None,
            };
            s += l * l;
        }
        Some(s.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(n: usize) -> ModelSpace {
        ModelSpace::hyperbolic(n).unwrap()
    }

    #[test]
    fn similarity_matrix_matches_chart_action() {
        let s = h(3);
        let rot = nalgebra::Rotation2::new(0.7).matrix().clone_owned();
        let rot = DMatrix::from_iterator(2, 2, rot.iter().copied());
        let g = FactorIsometry::Similarity {
            log_scale: 0.4,
            rot,
            shift: DVector::from_vec(vec![1.5, -0.5]),
        };
        let l = g.lorentz_matrix().unwrap();
        assert!(g.form_defect() < 1e-12);
        let lor = FactorIsometry::Lorentz(l);
        assert!(lor.form_defect() < 1e-12);
        let p = Point::from_slice(&[0.2, -0.1, 0.3]);
        let a = Isometry::single(g).apply(&s, &p);
        let b = Isometry::single(lor).apply(&s, &p);
        assert!((a.coords - b.coords).amax() < 1e-12);
    }

    #[test]
    fn inverse_and_power_are_consistent() {
        let s = h(2);
        let g = Isometry::single(FactorIsometry::Similarity {
            log_scale: 0.3,
            rot: DMatrix::identity(1, 1),
            shift: DVector::from_vec(vec![2.0]),
        });
        let p = Point::from_slice(&[0.5, -0.2]);
        let back = g.inverse().apply(&s, &g.apply(&s, &p));
        assert!((back.coords - &p.coords).amax() < 1e-14);
        let mut q = p.clone();
        for _ in 0..5 {
            q = g.apply(&s, &q);
        }
        let q5 = g.power(5).apply(&s, &p);
        assert!((q.coords - q5.coords).amax() < 1e-12);
        let id = g.power(0).apply(&s, &p);
        assert_eq!(id, p);
    }

    #[test]
    fn lorentz_inverse_is_j_transpose_j() {
        let g = FactorIsometry::Lorentz(
            FactorIsometry::parabolic(DVector::from_vec(vec![1.0])).lorentz_matrix().unwrap(),
        );
        let l = g.lorentz_matrix().unwrap();
        let li = g.inverse().lorentz_matrix().unwrap();
        assert!((l * li - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn differential_preserves_norms_and_maps_directions() {
        let s = h(2);
        let l = FactorIsometry::boost(2, 0.8).lorentz_matrix().unwrap();
        let g = Isometry::single(FactorIsometry::Lorentz(l));
        let p = Point::from_slice(&[0.3, 0.1]);
        let q = Point::from_slice(&[-1.0, 0.6]);
        let v = s.log(&p, &q);
        let pushed = g.push_tangent(&s, &p, &v);
        let want = s.log(&g.apply(&s, &p), &g.apply(&s, &q));
        assert!((pushed - want).amax() < 1e-10);
    }

    #[test]
    fn boundary_action_matches_limit_of_points() {
        let g = Isometry::single(FactorIsometry::Similarity {
            log_scale: -0.5,
            rot: DMatrix::identity(1, 1),
            shift: DVector::from_vec(vec![0.25]),
        });
        let xi = BoundaryPoint::single(FactorIdeal::Finite(DVector::from_vec(vec![1.0])));
        let img = g.apply_boundary(&xi);
        let want = (-0.5f64).exp() + 0.25;
        match &img.ideals[0] {
            Some(FactorIdeal::Finite(u)) => assert!((u[0] - want).abs() < 1e-15),
            _ => panic!("finite point must stay finite"),
        }
        let lor = Isometry::single(FactorIsometry::Lorentz(g.factors[0].lorentz_matrix().unwrap()));
        match &lor.apply_boundary(&xi).ideals[0] {
            Some(FactorIdeal::Finite(u)) => assert!((u[0] - want).abs() < 1e-12),
            _ => panic!("finite point must stay finite"),
        }
    }
}
