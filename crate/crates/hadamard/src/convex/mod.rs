//! Constrained convex minimization on model spaces: minimizers on geodesic
//! spheres, projections to horoballs and their intersections, sublevel-set
//! flows and the obtuse-triangle comparison check.

mod flow;
mod projection;
mod sphere;

use nalgebra::{DMatrix, DVector};

pub use flow::{check_obtuse_comparison, sublevel_flow, FlowReport, ObtuseReport};
pub use projection::{
    kkt_residual, project_to_horoball, project_to_intersection, HoroballIntersection, ProjectionOptions,
    ProjectionResult,
};
pub use sphere::{minimize_on_sphere, SphereOptions, SphereResult};

use crate::busemann::{BusemannFunction, ConvexCombination};
use crate::models::{ModelSpace, Point, Tangent};

/// A function on a model space with a Riemannian gradient.
///
/// The defaults compute derivatives from values: the gradient by central
/// differences along frame geodesics, the Hessian by second differences along
/// geodesics and polarization.
pub trait Objective: Sync {
    fn value(&self, space: &ModelSpace, x: &Point) -> f64;

    fn gradient(&self, space: &ModelSpace, x: &Point) -> Tangent {
        let n = space.dim();
        let h = 1e-6;
        let mut g = DVector::zeros(n);
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = h;
            g[i] = (self.value(space, &space.exp(x, &e)) - self.value(space, &space.exp(x, &(-&e)))) / (2.0 * h);
        }
        g
    }

    fn hessian(&self, space: &ModelSpace, x: &Point) -> DMatrix<f64> {
        fd_hessian(self, space, x, 1e-4)
    }
}

/// Hessian from values: `Hess(v,v)` is the second derivative along the
/// geodesic with velocity `v`; mixed entries follow by polarization.
pub fn fd_hessian<O: Objective + ?Sized>(f: &O, space: &ModelSpace, x: &Point, h: f64) -> DMatrix<f64> {
    let n = space.dim();
    let f0 = f.value(space, x);
    let q = |v: &Tangent| {
        let a = f.value(space, &space.exp(x, &(v * h)));
        let b = f.value(space, &space.exp(x, &(v * -h)));
        (a - 2.0 * f0 + b) / (h * h)
    };
    let basis = |i: usize| {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        e
    };
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = q(&basis(i));
        for j in 0..i {
            let v = (q(&(basis(i) + basis(j))) - q(&(basis(i) - basis(j)))) / 4.0;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

impl Objective for ConvexCombination {
    fn value(&self, space: &ModelSpace, x: &Point) -> f64 {
        ConvexCombination::value(self, space, x)
    }

    fn gradient(&self, space: &ModelSpace, x: &Point) -> Tangent {
        ConvexCombination::gradient(self, space, x)
    }

    fn hessian(&self, space: &ModelSpace, x: &Point) -> DMatrix<f64> {
        ConvexCombination::hessian(self, space, x)
    }
}

impl Objective for BusemannFunction {
    fn value(&self, space: &ModelSpace, x: &Point) -> f64 {
        BusemannFunction::value(self, space, x)
    }

    fn gradient(&self, space: &ModelSpace, x: &Point) -> Tangent {
        BusemannFunction::gradient(self, space, x)
    }

    fn hessian(&self, space: &ModelSpace, x: &Point) -> DMatrix<f64> {
        BusemannFunction::hessian(self, space, x)
    }
}

/// An objective given by closures, with optional analytic gradient.
pub struct FnObjective<V, G>
where
    V: Fn(&ModelSpace, &Point) -> f64 + Sync,
    G: Fn(&ModelSpace, &Point) -> Tangent + Sync,
{
    pub value: V,
    pub gradient: Option<G>,
}

impl<V, G> Objective for FnObjective<V, G>
where
    V: Fn(&ModelSpace, &Point) -> f64 + Sync,
    G: Fn(&ModelSpace, &Point) -> Tangent + Sync,
{
    fn value(&self, space: &ModelSpace, x: &Point) -> f64 {
        (self.value)(space, x)
    }

    fn gradient(&self, space: &ModelSpace, x: &Point) -> Tangent {
        match &self.gradient {
            Some(g) => g(space, x),
            None => {
                let n = space.dim();
                let h = 1e-6;
                let mut g = DVector::zeros(n);
                for i in 0..n {
                    let mut e = DVector::zeros(n);
                    e[i] = h;
                    g[i] = ((self.value)(space, &space.exp(x, &e)) - (self.value)(space, &space.exp(x, &(-&e))))
                        / (2.0 * h);
                }
                g
            }
        }
    }
}

/// Orthonormal basis of the complement of a unit vector, as matrix columns.
pub(crate) fn complement_basis(n: &DVector<f64>) -> DMatrix<f64> {
    let d = n.len();
    let s = if n[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = n.clone();
    v[0] += s;
    let vv = v.norm_squared();
    let mut h = DMatrix::identity(d, d);
    if vv > 0.0 {
        h -= &v * v.transpose() * (2.0 / vv);
    }
    h.columns(1, d - 1).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_basis_is_orthonormal() {
        let n = DVector::from_vec(vec![-0.6, 0.0, 0.8]);
        let b = complement_basis(&n);
        assert!((b.transpose() * &b - DMatrix::identity(2, 2)).amax() < 1e-15);
        assert!((b.transpose() * &n).amax() < 1e-15);
    }

    #[test]
    fn fd_hessian_matches_analytic_busemann_hessian() {
        use crate::models::{BoundaryPoint, FactorIdeal};
        let s = ModelSpace::hyperbolic(3).unwrap();
        let c = BoundaryPoint::single(FactorIdeal::Finite(DVector::from_vec(vec![0.4, -1.0])));
        let h = BusemannFunction::new(&s, c, s.origin()).unwrap();
        let x = Point::from_slice(&[0.1, 0.5, -0.2]);
        let exact = BusemannFunction::hessian(&h, &s, &x);
        let fd = fd_hessian(&h, &s, &x, 1e-4);
        assert!((exact - fd).amax() < 1e-6);
    }
}
