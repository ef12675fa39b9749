//! Model Hadamard spaces: Euclidean space, real hyperbolic space and finite
//! products of those, with geodesics, angles and the boundary at infinity.
//!
//! Points of a product are stored as the concatenation of factor charts.
//! Euclidean factors use Cartesian coordinates; hyperbolic factors use the
//! horospherical chart of [`hyp`], with exact conversions to and from the
//! hyperboloid model (signature `(+,…,+,−)`, last coordinate timelike).
//! Tangent vectors are stored in orthonormal frame components, so the
//! Riemannian inner product is the Euclidean dot product of components.

pub mod hyp;

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

pub use hyp::HypIdeal;

use crate::{GeometryError, Result};

/// A factor of a model space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Euclidean(usize),
    Hyperbolic(usize),
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Euclidean(n) | Factor::Hyperbolic(n) => n,
        }
    }
}

/// A point stored in chart coordinates of its [`ModelSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(coords: DVector<f64>) -> Self {
        Point { coords }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        Point { coords: DVector::from_column_slice(c) }
    }
}

/// Tangent vector components in the orthonormal frame at a point.
pub type Tangent = DVector<f64>;

/// Ideal point of a single factor.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorIdeal {
    /// Unit direction in a Euclidean factor.
    Direction(DVector<f64>),
    /// The distinguished ideal point `∞` of the half-space picture.
    Infinity,
    /// A finite ideal point `u ∈ ℝ^{n−1}` of the half-space picture.
    Finite(DVector<f64>),
}

impl FactorIdeal {
    fn to_hyp(&self) -> Option<HypIdeal> {
        match self {
            FactorIdeal::Infinity => Some(HypIdeal::Infinity),
            FactorIdeal::Finite(u) => Some(HypIdeal::Finite(u.as_slice().to_vec())),
            FactorIdeal::Direction(_) => None,
        }
    }

    fn from_hyp(h: HypIdeal) -> Self {
        match h {
            HypIdeal::Infinity => FactorIdeal::Infinity,
            HypIdeal::Finite(u) => FactorIdeal::Finite(DVector::from_vec(u)),
        }
    }

    /// Lightlike representative in `ℝ^{n,1}` normalized against the origin.
    pub fn to_lightlike(&self, n: usize) -> Option<Vec<f64>> {
        self.to_hyp().map(|h| hyp::ideal_to_lightlike(&h, n))
    }

    pub fn from_lightlike(b: &[f64]) -> Self {
        Self::from_hyp(hyp::ideal_from_lightlike(b))
    }
}

/// A point of the boundary at infinity of a model space.
///
/// A ray of the product moves in factor `i` at speed `weights[i]`, toward
/// `ideals[i]`. The weights form a unit vector with nonnegative entries and
/// factors of zero weight carry no ideal point.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub weights: Vec<f64>,
    pub ideals: Vec<Option<FactorIdeal>>,
}

impl BoundaryPoint {
    /// Builds a boundary point, normalizing the weights.
    pub fn new(weights: Vec<f64>, ideals: Vec<Option<FactorIdeal>>) -> Result<Self> {
        if weights.len() != ideals.len() {
            return Err(GeometryError::Invalid("weights and ideals differ in length".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(GeometryError::Invalid("weights must be finite and nonnegative".into()));
        }
        let n = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(GeometryError::Invalid("all weights vanish".into()));
        }
        let mut ideals = ideals;
        for (w, id) in weights.iter().zip(ideals.iter_mut()) {
            if *w == 0.0 {
                *id = None;
            } else if id.is_none() {
                return Err(GeometryError::Invalid("positive weight without ideal point".into()));
            }
        }
        let weights = weights.iter().map(|w| w / n).collect();
        Ok(BoundaryPoint { weights, ideals })
    }

    /// Boundary point of a single-factor space.
    pub fn single(ideal: FactorIdeal) -> Self {
        BoundaryPoint { weights: vec![1.0], ideals: vec![Some(ideal)] }
    }

    /// Join point of a two-factor product at angle `theta ∈ [0, π/2]`.
    pub fn join(theta: f64, a: FactorIdeal, b: FactorIdeal) -> Result<Self> {
        if !(0.0..=PI / 2.0).contains(&theta) {
            return Err(GeometryError::Invalid(format!("join angle {theta} outside [0, π/2]")));
        }
        let (w0, w1) = if theta == 0.0 {
            (1.0, 0.0)
        } else if theta == PI / 2.0 {
            (0.0, 1.0)
        } else {
            (theta.cos(), theta.sin())
        };
        let ia = if w0 > 0.0 { Some(a) } else { None };
        let ib = if w1 > 0.0 { Some(b) } else { None };
        Ok(BoundaryPoint { weights: vec![w0, w1], ideals: vec![ia, ib] })
    }

    /// Same weights within `tol` and matching factor ideals, with finite ideal
    /// points and directions compared within `tol` relative to their size.
    pub fn approx_eq(&self, other: &BoundaryPoint, tol: f64) -> bool {
        if self.weights.len() != other.weights.len() {
            return false;
        }
        self.weights.iter().zip(&other.weights).all(|(a, b)| (a - b).abs() <= tol)
            && self.ideals.iter().zip(&other.ideals).all(|(a, b)| match (a, b) {
                (None, None) => true,
                (Some(FactorIdeal::Infinity), Some(FactorIdeal::Infinity)) => true,
                (Some(FactorIdeal::Finite(x)), Some(FactorIdeal::Finite(y)))
                | (Some(FactorIdeal::Direction(x)), Some(FactorIdeal::Direction(y))) => {
                    x.len() == y.len() && (x - y).amax() <= tol * 1f64.max(x.amax()).max(y.amax())
                }
                _ => false,
            })
    }

    /// Join angle of a two-factor boundary point.
    pub fn theta(&self) -> f64 {
        self.weights[1].atan2(self.weights[0])
    }
}

/// Tolerance for identifying hyperbolic ideal points.
const IDEAL_EQ_TOL: f64 = 1e-12;

fn factor_tits(a: &FactorIdeal, b: &FactorIdeal) -> f64 {
    match (a, b) {
        (FactorIdeal::Direction(x), FactorIdeal::Direction(y)) => unit_angle(x, y),
        (FactorIdeal::Infinity, FactorIdeal::Infinity) => 0.0,
        (FactorIdeal::Finite(x), FactorIdeal::Finite(y)) => {
            let scale = 1.0f64.max(x.norm()).max(y.norm());
            if (x - y).norm() <= IDEAL_EQ_TOL * scale {
                0.0
            } else {
                PI
            }
        }
        _ => PI,
    }
}

fn unit_angle(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    // atan2 form keeps accuracy near 0 and π
    let c = x.dot(y);
    let s = (x - y * c).norm();
    s.atan2(c)
}

/// Angle between two nonzero tangent vectors.
pub fn angle_between(v: &Tangent, w: &Tangent) -> f64 {
    let nv = v.norm();
    let nw = w.norm();
    if nv == 0.0 || nw == 0.0 {
        return 0.0;
    }
    unit_angle(&(v / nv), &(w / nw))
}

/// A Euclidean space, a hyperbolic space, or a finite product of those.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    factors: Vec<Factor>,
    offsets: Vec<usize>,
}

impl ModelSpace {
    fn from_factors(factors: Vec<Factor>) -> Self {
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut o = 0;
        for f in &factors {
            offsets.push(o);
            o += f.dim();
        }
        offsets.push(o);
        ModelSpace { factors, offsets }
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GeometryError::Invalid("dimension must be positive".into()));
        }
        Ok(Self::from_factors(vec![Factor::Euclidean(n)]))
    }

    pub fn hyperbolic(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::Invalid("hyperbolic dimension must be at least 2".into()));
        }
        Ok(Self::from_factors(vec![Factor::Hyperbolic(n)]))
    }

    /// Product of single-factor spaces.
    pub fn product(parts: &[ModelSpace]) -> Result<Self> {
        if parts.is_empty() {
            return Err(GeometryError::Invalid("empty product".into()));
        }
        let mut factors = Vec::new();
        for p in parts {
            if p.factors.len() != 1 {
                return Err(GeometryError::Invalid("product factors must not be products".into()));
            }
            factors.push(p.factors[0]);
        }
        Ok(Self::from_factors(factors))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Manifold dimension; also the length of chart and tangent vectors.
    pub fn dim(&self) -> usize {
        self.offsets[self.factors.len()]
    }

    pub fn factor_range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// The origin: `0` in Euclidean factors, `(0,…,0,1)` on the hyperboloid.
    pub fn origin(&self) -> Point {
        Point::new(DVector::zeros(self.dim()))
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.coords.len() != self.dim() {
            return Err(GeometryError::Domain(format!(
                "point has {} coordinates, space has dimension {}",
                p.coords.len(),
                self.dim()
            )));
        }
        if p.coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::Domain("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    pub fn check_boundary(&self, xi: &BoundaryPoint) -> Result<()> {
        if xi.weights.len() != self.factors.len() {
            return Err(GeometryError::Domain("boundary point has wrong factor count".into()));
        }
        for (i, f) in self.factors.iter().enumerate() {
            match (f, &xi.ideals[i]) {
                (_, None) => {}
                (Factor::Euclidean(n), Some(FactorIdeal::Direction(d))) if d.len() == *n => {}
                (Factor::Hyperbolic(_), Some(FactorIdeal::Infinity)) => {}
                (Factor::Hyperbolic(n), Some(FactorIdeal::Finite(u))) if u.len() == n - 1 => {}
                _ => {
                    return Err(GeometryError::Domain(format!(
                        "boundary point does not match factor {i}"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Ambient coordinates: Cartesian for Euclidean factors, hyperboloid
    /// vectors in `ℝ^{n+1}` for hyperbolic factors.
    pub fn to_ambient(&self, p: &Point) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            let c = &p.coords.as_slice()[self.factor_range(i)];
            match f {
                Factor::Euclidean(_) => out.extend_from_slice(c),
                Factor::Hyperbolic(_) => out.extend(hyp::to_hyperboloid(c)),
            }
        }
        out
    }

    /// Inverse of [`Self::to_ambient`]. Hyperboloid vectors must satisfy
    /// `⟨x,x⟩ = −1` within `1e−12` relative to `x₀²`, with `x₀ > 0`.
    pub fn from_ambient(&self, a: &[f64]) -> Result<Point> {
        let mut coords = Vec::with_capacity(self.dim());
        let mut k = 0;
        for f in &self.factors {
            match *f {
                Factor::Euclidean(n) => {
                    if a.len() < k + n {
                        return Err(GeometryError::Domain("ambient vector too short".into()));
                    }
                    coords.extend_from_slice(&a[k..k + n]);
                    k += n;
                }
                Factor::Hyperbolic(n) => {
                    if a.len() < k + n + 1 {
                        return Err(GeometryError::Domain("ambient vector too short".into()));
                    }
                    let x = &a[k..k + n + 1];
                    let q = hyp::minkowski(x, x);
                    let t = x[n];
                    if !(t > 0.0) || (q + 1.0).abs() > 1e-12 * t.max(1.0).powi(2) {
                        return Err(GeometryError::Domain(format!(
                            "not on the upper hyperboloid: ⟨x,x⟩ = {q}, x₀ = {t}"
                        )));
                    }
                    coords.extend(hyp::from_hyperboloid(x));
                    k += n + 1;
                }
            }
        }
        if k != a.len() {
            return Err(GeometryError::Domain("ambient vector too long".into()));
        }
        Ok(Point::new(DVector::from_vec(coords)))
    }

    /// Frame components to ambient tangent vectors (hyperboloid tangents in
    /// hyperbolic factors).
    pub fn tangent_to_ambient(&self, p: &Point, v: &Tangent) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            let r = self.factor_range(i);
            let vc = &v.as_slice()[r.clone()];
            match f {
                Factor::Euclidean(_) => out.extend_from_slice(vc),
                Factor::Hyperbolic(_) => {
                    out.extend(hyp::tangent_to_hyperboloid(&p.coords.as_slice()[r], vc))
                }
            }
        }
        out
    }

    pub fn tangent_from_ambient(&self, p: &Point, a: &[f64]) -> Tangent {
        let mut out = Vec::with_capacity(self.dim());
        let mut k = 0;
        for (i, f) in self.factors.iter().enumerate() {
            let r = self.factor_range(i);
            match *f {
                Factor::Euclidean(n) => {
                    out.extend_from_slice(&a[k..k + n]);
                    k += n;
                }
                Factor::Hyperbolic(n) => {
                    out.extend(hyp::tangent_from_hyperboloid(
                        &p.coords.as_slice()[r],
                        &a[k..k + n + 1],
                    ));
                    k += n + 1;
                }
            }
        }
        DVector::from_vec(out)
    }

    pub fn factor_distances(&self, p: &Point, q: &Point) -> Vec<f64> {
        (0..self.factors.len())
            .map(|i| {
                let r = self.factor_range(i);
                let a = &p.coords.as_slice()[r.clone()];
                let b = &q.coords.as_slice()[r];
                match self.factors[i] {
                    Factor::Euclidean(_) => {
                        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
                    }
                    Factor::Hyperbolic(_) => hyp::distance(a, b),
                }
            })
            .collect()
    }

    /// Riemannian distance; the ℓ² combination of factor distances.
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let d = self.factor_distances(p, q);
        if d.len() == 1 {
            d[0]
        } else {
            d.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
    }

    /// Checked variant of [`Self::distance`].
    pub fn try_distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.distance(p, q))
    }

    pub fn exp(&self, p: &Point, v: &Tangent) -> Point {
        let mut out = p.coords.clone();
        for i in 0..self.factors.len() {
            let r = self.factor_range(i);
            let a = &p.coords.as_slice()[r.clone()];
            let vc = &v.as_slice()[r.clone()];
            match self.factors[i] {
                Factor::Euclidean(_) => {
                    for (j, k) in r.enumerate() {
                        out[k] = a[j] + vc[j];
                    }
                }
                Factor::Hyperbolic(_) => {
                    let e = hyp::exp(a, vc);
                    for (j, k) in r.enumerate() {
                        out[k] = e[j];
                    }
                }
            }
        }
        Point::new(out)
    }

    /// `log_p(q)`, the initial velocity of the unit-time geodesic from `p` to `q`.
    pub fn log(&self, p: &Point, q: &Point) -> Tangent {
        let mut out = DVector::zeros(self.dim());
        for i in 0..self.factors.len() {
            let r = self.factor_range(i);
            let a = &p.coords.as_slice()[r.clone()];
            let b = &q.coords.as_slice()[r.clone()];
            match self.factors[i] {
                Factor::Euclidean(_) => {
                    for (j, k) in r.enumerate() {
                        out[k] = b[j] - a[j];
                    }
                }
                Factor::Hyperbolic(_) => {
                    let l = hyp::log(a, b);
                    for (j, k) in r.enumerate() {
                        out[k] = l[j];
                    }
                }
            }
        }
        out
    }

    /// Unit vector at `p` pointing to `q`, or zero when `p = q`.
    pub fn direction(&self, p: &Point, q: &Point) -> Tangent {
        let mut out = DVector::zeros(self.dim());
        let fd = self.factor_distances(p, q);
        let total = fd.iter().map(|x| x * x).sum::<f64>().sqrt();
        if total == 0.0 {
            return out;
        }
        for i in 0..self.factors.len() {
            let r = self.factor_range(i);
            let a = &p.coords.as_slice()[r.clone()];
            let b = &q.coords.as_slice()[r.clone()];
            let w = fd[i] / total;
            match self.factors[i] {
                Factor::Euclidean(_) => {
                    if fd[i] > 0.0 {
                        for (j, k) in r.enumerate() {
                            out[k] = (b[j] - a[j]) / fd[i] * w;
                        }
                    }
                }
                Factor::Hyperbolic(_) => {
                    let (dir, _) = hyp::log_dir(a, b);
                    for (j, k) in r.enumerate() {
                        out[k] = dir[j] * w;
                    }
                }
            }
        }
        out
    }

    /// Point at parameter `s ∈ [0,1]` on the geodesic from `p` to `q`.
    pub fn geodesic(&self, p: &Point, q: &Point, s: f64) -> Point {
        self.exp(p, &(self.log(p, q) * s))
    }

    /// Unit initial direction at `p` of the ray toward `xi`.
    pub fn direction_to(&self, p: &Point, xi: &BoundaryPoint) -> Tangent {
        let mut out = DVector::zeros(self.dim());
        for i in 0..self.factors.len() {
            let w = xi.weights[i];
            let Some(id) = &xi.ideals[i] else { continue };
            if w == 0.0 {
                continue;
            }
            let r = self.factor_range(i);
            let dir: Vec<f64> = match id {
                FactorIdeal::Direction(d) => d.iter().copied().collect(),
                other => {
                    let h = other.to_hyp().expect("hyperbolic ideal");
                    hyp::direction_to(&p.coords.as_slice()[r.clone()], &h)
                }
            };
            for (j, k) in r.enumerate() {
                out[k] = w * dir[j];
            }
        }
        out
    }

    /// Point at distance `t` along the ray from `p` toward `xi`.
    pub fn geodesic_ray(&self, p: &Point, xi: &BoundaryPoint, t: f64) -> Point {
        self.exp(p, &(self.direction_to(p, xi) * t))
    }

    /// Endpoint of the ray from `p` with initial velocity `v ≠ 0`.
    pub fn ray_endpoint(&self, p: &Point, v: &Tangent) -> Result<BoundaryPoint> {
        let nv = v.norm();
        if nv == 0.0 || !nv.is_finite() {
            return Err(GeometryError::Invalid("ray direction must be nonzero and finite".into()));
        }
        let mut weights = Vec::with_capacity(self.factors.len());
        let mut ideals = Vec::with_capacity(self.factors.len());
        for i in 0..self.factors.len() {
            let r = self.factor_range(i);
            let vc = v.rows(r.start, r.len()).into_owned();
            let w = vc.norm() / nv;
            weights.push(w);
            if w == 0.0 {
                ideals.push(None);
                continue;
            }
            let unit = &vc / vc.norm();
            ideals.push(Some(match self.factors[i] {
                Factor::Euclidean(_) => FactorIdeal::Direction(unit),
                Factor::Hyperbolic(_) => FactorIdeal::from_hyp(hyp::ray_endpoint(
                    &p.coords.as_slice()[r],
                    unit.as_slice(),
                )),
            }));
        }
        Ok(BoundaryPoint { weights, ideals })
    }

    /// Riemannian angle at `p` between the rays toward `xi` and `eta`.
    pub fn angle_at(&self, p: &Point, xi: &BoundaryPoint, eta: &BoundaryPoint) -> f64 {
        angle_between(&self.direction_to(p, xi), &self.direction_to(p, eta))
    }

    /// Tits distance, capped at `π`: the spherical join of the factor metrics,
    /// which are the angle metric on Euclidean factors and the discrete metric
    /// with values `{0, π}` on hyperbolic factors.
    pub fn tits_distance(&self, xi: &BoundaryPoint, eta: &BoundaryPoint) -> f64 {
        let mut c = 0.0;
        for i in 0..self.factors.len() {
            if let (Some(a), Some(b)) = (&xi.ideals[i], &eta.ideals[i]) {
                c += xi.weights[i] * eta.weights[i] * factor_tits(a, b).min(PI).cos();
            }
        }
        c.clamp(-1.0, 1.0).acos()
    }

    /// Hessian of `½d(·, q)²` at `p` in frame components.
    pub fn half_dist_sq_hessian(&self, p: &Point, q: &Point) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..self.factors.len() {
            let r = self.factor_range(i);
            match self.factors[i] {
                Factor::Euclidean(_) => {
                    for k in r {
                        h[(k, k)] = 1.0;
                    }
                }
                Factor::Hyperbolic(_) => {
                    let a = &p.coords.as_slice()[r.clone()];
                    let b = &q.coords.as_slice()[r.clone()];
                    let (dir, d) = hyp::log_dir(a, b);
                    // the Hessian points away from q, so r = −direction
                    let rr: Vec<f64> = dir.iter().map(|c| -c).collect();
                    let block = hyp::half_dist_sq_hessian(&rr, d);
                    for (a_i, ki) in r.clone().enumerate() {
                        for (a_j, kj) in r.clone().enumerate() {
                            h[(ki, kj)] = block[a_i][a_j];
                        }
                    }
                }
            }
        }
        h
    }
}
