//! Busemann functions, their convex combinations, isometries and
//! displacement functions.

mod isometry;
mod series;

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

pub use isometry::{FactorIsometry, Isometry};
pub use series::{minimize_series, series_gradient, series_rhs, weighted_series, SeriesValue, WordBall};

use crate::models::{hyp, angle_between, BoundaryPoint, Factor, FactorIdeal, HypIdeal, ModelSpace, Point, Tangent};
use crate::{GeometryError, Result};

/// Busemann function of a boundary point, normalized to vanish at a basepoint.
///
/// On a product the function is `Σ wᵢ hᵢ` over the factors carrying an ideal
/// point, where `wᵢ` are the weights of the center.
#[derive(Debug, Clone)]
pub struct BusemannFunction {
    pub center: BoundaryPoint,
    pub basepoint: Point,
    offset: f64,
}

fn factor_raw(space: &ModelSpace, i: usize, id: &FactorIdeal, x: &Point) -> f64 {
    let c = &x.coords.as_slice()[space.factor_range(i)];
    match id {
        FactorIdeal::Direction(d) => -c.iter().zip(d.iter()).map(|(a, b)| a * b).sum::<f64>(),
        FactorIdeal::Infinity => hyp::busemann_raw(c, &HypIdeal::Infinity),
        FactorIdeal::Finite(u) => hyp::busemann_raw(c, &HypIdeal::Finite(u.as_slice().to_vec())),
    }
}

fn factor_grad(space: &ModelSpace, i: usize, id: &FactorIdeal, x: &Point) -> Vec<f64> {
    let c = &x.coords.as_slice()[space.factor_range(i)];
    match id {
        FactorIdeal::Direction(d) => d.iter().map(|v| -v).collect(),
        FactorIdeal::Infinity => hyp::busemann_gradient(c, &HypIdeal::Infinity),
        FactorIdeal::Finite(u) => hyp::busemann_gradient(c, &HypIdeal::Finite(u.as_slice().to_vec())),
    }
}

impl BusemannFunction {
    pub fn new(space: &ModelSpace, center: BoundaryPoint, basepoint: Point) -> Result<Self> {
        space.check_boundary(&center)?;
        space.check_point(&basepoint)?;
        let mut h = BusemannFunction { center, basepoint, offset: 0.0 };
        h.offset = h.raw(space, &h.basepoint.clone());
        Ok(h)
    }

    fn raw(&self, space: &ModelSpace, x: &Point) -> f64 {
        let mut s = 0.0;
        for (i, id) in self.center.ideals.iter().enumerate() {
            if let Some(id) = id {
                s += self.center.weights[i] * factor_raw(space, i, id, x);
            }
        }
        s
    }

    pub fn value(&self, space: &ModelSpace, x: &Point) -> f64 {
        self.raw(space, x) - self.offset
    }

    /// Unit gradient; `−∇h(x)` is the initial direction of the ray to the center.
    pub fn gradient(&self, space: &ModelSpace, x: &Point) -> Tangent {
        let mut g = DVector::zeros(space.dim());
        for (i, id) in self.center.ideals.iter().enumerate() {
            if let Some(id) = id {
                let w = self.center.weights[i];
                let fg = factor_grad(space, i, id, x);
                for (j, k) in space.factor_range(i).enumerate() {
                    g[k] = w * fg[j];
                }
            }
        }
        g
    }

    /// Riemannian Hessian in frame components: `wᵢ(I − gᵢgᵢᵀ)` on each
    /// hyperbolic factor with unit factor gradient `gᵢ`, zero on flat factors.
    pub fn hessian(&self, space: &ModelSpace, x: &Point) -> DMatrix<f64> {
        let n = space.dim();
        let mut h = DMatrix::zeros(n, n);
        for (i, id) in self.center.ideals.iter().enumerate() {
            let Some(id) = id else { continue };
            if let Factor::Euclidean(_) = space.factors()[i] {
                continue;
            }
            let w = self.center.weights[i];
            let g = factor_grad(space, i, id, x);
            let r = space.factor_range(i);
            for (a, ka) in r.clone().enumerate() {
                for (b, kb) in r.clone().enumerate() {
                    let id_ab = if a == b { 1.0 } else { 0.0 };
                    h[(ka, kb)] = w * (id_ab - g[a] * g[b]);
                }
            }
        }
        h
    }

    /// Same center, renormalized at another basepoint.
    pub fn rebased(&self, space: &ModelSpace, basepoint: Point) -> Self {
        let mut h = BusemannFunction { center: self.center.clone(), basepoint, offset: 0.0 };
        h.offset = h.raw(space, &h.basepoint.clone());
        h
    }
}

/// Gradient of a convex combination together with the bound checks.
#[derive(Debug, Clone)]
pub struct CombinationGradient {
    pub gradient: Tangent,
    pub norm: f64,
    /// All pairwise angles between the part gradients are at most `π/2`.
    pub angles_ok: bool,
    /// `|∇f| ∈ [1/√(k+1) − 1e−9, 1 + 1e−9]`; `None` when the angle
    /// precondition fails and the lower bound is not asserted.
    pub bounds_ok: Option<bool>,
}

/// A convex combination `f_t = Σ tᵢ hᵢ` of Busemann functions.
#[derive(Debug, Clone)]
pub struct ConvexCombination {
    pub parts: Vec<(f64, BusemannFunction)>,
}

impl ConvexCombination {
    pub fn new(parts: Vec<(f64, BusemannFunction)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(GeometryError::Invalid("empty convex combination".into()));
        }
        if parts.iter().any(|(t, _)| !(*t >= 0.0)) {
            return Err(GeometryError::Invalid("negative weight".into()));
        }
        let s: f64 = parts.iter().map(|(t, _)| t).sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(GeometryError::Invalid(format!("weights sum to {s}, not 1")));
        }
        Ok(ConvexCombination { parts })
    }

    /// `Σ tᵢ hᵢ` with the given barycentric weights.
    pub fn from_weights(vertices: &[BusemannFunction], t: &[f64]) -> Result<Self> {
        if vertices.len() != t.len() {
            return Err(GeometryError::Invalid("weight count differs from vertex count".into()));
        }
        Self::new(t.iter().copied().zip(vertices.iter().cloned()).collect())
    }

    pub fn value(&self, space: &ModelSpace, x: &Point) -> f64 {
        self.parts.iter().filter(|(t, _)| *t > 0.0).map(|(t, h)| t * h.value(space, x)).sum()
    }

    pub fn gradient(&self, space: &ModelSpace, x: &Point) -> Tangent {
        let mut g = DVector::zeros(space.dim());
        for (t, h) in self.parts.iter().filter(|(t, _)| *t > 0.0) {
            g += h.gradient(space, x) * *t;
        }
        g
    }

    pub fn hessian(&self, space: &ModelSpace, x: &Point) -> DMatrix<f64> {
        let n = space.dim();
        let mut m = DMatrix::zeros(n, n);
        for (t, h) in self.parts.iter().filter(|(t, _)| *t > 0.0) {
            m += h.hessian(space, x) * *t;
        }
        m
    }

    /// Gradient with the norm bounds checked under the angle precondition.
    pub fn gradient_checked(&self, space: &ModelSpace, x: &Point) -> CombinationGradient {
        let grads: Vec<Tangent> = self.parts.iter().map(|(_, h)| h.gradient(space, x)).collect();
        let mut angles_ok = true;
        for i in 0..grads.len() {
            for j in i + 1..grads.len() {
                if angle_between(&grads[i], &grads[j]) > FRAC_PI_2 + 1e-12 {
                    angles_ok = false;
                }
            }
        }
        let mut g = DVector::zeros(space.dim());
        for ((t, _), gi) in self.parts.iter().zip(&grads) {
            g += gi * *t;
        }
        let norm = g.norm();
        let k1 = self.parts.len() as f64;
        let bounds_ok = if angles_ok {
            Some(norm >= 1.0 / k1.sqrt() - 1e-9 && norm <= 1.0 + 1e-9)
        } else {
            None
        };
        CombinationGradient { gradient: g, norm, angles_ok, bounds_ok }
    }
}

/// `d_γ(x) = d(x, γx)`.
pub fn displacement(space: &ModelSpace, g: &Isometry, x: &Point) -> f64 {
    space.distance(x, &g.apply(space, x))
}

/// Gradient of `d_γ` at a point where it is positive; zero where it vanishes.
pub fn displacement_gradient(space: &ModelSpace, g: &Isometry, x: &Point) -> Tangent {
    let gx = g.apply(space, x);
    if space.distance(x, &gx) == 0.0 {
        return DVector::zeros(space.dim());
    }
    let u1 = space.direction(x, &gx);
    let u2 = space.direction(&gx, x);
    let pulled = g.inverse().push_tangent(space, &gx, &u2);
    -(u1 + pulled)
}

/// Infimum displacement estimate with its doubling bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementEstimate {
    /// `d(x, γⁿx)/n` at `n = n_max`.
    pub estimate: f64,
    /// `d(x, γ^{2n}x)/2n`.
    pub lower: f64,
    /// Same as `estimate`.
    pub upper: f64,
    pub n: u64,
}

/// `d(x, γⁿx)/n`, or an overflow error when the orbit leaves the `f64` range.
pub fn orbit_rate(space: &ModelSpace, g: &Isometry, x: &Point, n: u64) -> Result<f64> {
    if n == 0 || n > i64::MAX as u64 {
        return Err(GeometryError::Invalid("orbit index must be in 1..=i64::MAX".into()));
    }
    let gn = g.power(n as i64);
    let y = gn.apply(space, x);
    let d = space.distance(x, &y);
    if !d.is_finite() || y.coords.iter().any(|c| !c.is_finite()) {
        return Err(GeometryError::Overflow { n });
    }
    Ok(d / n as f64)
}

/// Estimate of `|γ| = lim d(x, γⁿx)/n` from the orbit at `n_max` and `2n_max`.
/// Subadditivity makes the rates decrease along the doubling schedule.
pub fn inf_displacement(space: &ModelSpace, g: &Isometry, x: &Point, n_max: u64) -> Result<DisplacementEstimate> {
    if n_max < 2 {
        return Err(GeometryError::Invalid("n_max must be at least 2".into()));
    }
    let upper = orbit_rate(space, g, x, n_max)?;
    let lower = orbit_rate(space, g, x, 2 * n_max)?;
    Ok(DisplacementEstimate { estimate: upper, lower, upper, n: n_max })
}

/// Rates `d(x, γⁿx)/n` for `n = 2^j`, `j = 0..=j_max`, stopping at overflow.
pub fn doubling_rates(space: &ModelSpace, g: &Isometry, x: &Point, j_max: u32) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    for j in 0..=j_max.min(62) {
        let n = 1u64 << j;
        match orbit_rate(space, g, x, n) {
            Ok(r) => out.push((n, r)),
            Err(_) => break,
        }
    }
    out
}
