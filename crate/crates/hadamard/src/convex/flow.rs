//! Sublevel-set flows and the obtuse-triangle comparison check.

use std::f64::consts::FRAC_PI_2;

use super::{minimize_on_sphere, project_to_intersection, HoroballIntersection, Objective, ProjectionOptions, SphereOptions};
use crate::models::{angle_between, BoundaryPoint, ModelSpace, Point};
use crate::{par, GeometryError, Result};

/// Points `λ_R` minimizing a convex function on spheres about a basepoint,
/// with the distance-dependence ratios and the Cauchy data of their directions.
#[derive(Debug, Clone)]
pub struct FlowReport {
    /// `(R, λ_R)` in schedule order.
    pub points: Vec<(f64, Point)>,
    /// `(R, d(λ_{R(1+δ)}, λ_R)/R, √(2δ+δ²))`.
    pub ratios: Vec<(f64, f64, f64)>,
    /// Angles at the basepoint between the directions of consecutive `λ_R`.
    pub cauchy_gaps: Vec<f64>,
    /// Distinct endpoints of the rays through the last two `λ_R`.
    pub limits: Vec<BoundaryPoint>,
}

/// Follows `λ_R` along an increasing radius schedule.
pub fn sublevel_flow<O: Objective + ?Sized>(
    space: &ModelSpace,
    f: &O,
    x0: &Point,
    radii: &[f64],
    delta: f64,
    opts: &SphereOptions,
) -> Result<FlowReport> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeometryError::Invalid("radius schedule must be increasing and nonempty".into()));
    }
    if !(delta > 0.0) {
        return Err(GeometryError::Invalid("delta must be positive".into()));
    }
    let pairs = par::try_map(radii, |&r| {
        let a = minimize_on_sphere(space, f, x0, r, opts)?;
        let b = minimize_on_sphere(space, f, x0, r * (1.0 + delta), opts)?;
        Ok((a.point, b.point))
    })?;
    let bound = (2.0 * delta + delta * delta).sqrt();
    let mut points = Vec::with_capacity(radii.len());
    let mut ratios = Vec::with_capacity(radii.len());
    for (&r, (a, b)) in radii.iter().zip(pairs) {
        ratios.push((r, space.distance(&a, &b) / r, bound));
        points.push((r, a));
    }
    let dirs: Vec<_> = points.iter().map(|(_, p)| space.log(x0, p)).collect();
    let cauchy_gaps = dirs.windows(2).map(|w| angle_between(&w[0], &w[1])).collect();
    let mut limits: Vec<BoundaryPoint> = Vec::new();
    let tail = dirs.len().saturating_sub(2);
    for d in &dirs[tail..] {
        let e = space.ray_endpoint(x0, d)?;
        let seen = limits.iter().any(|l| space.angle_at(x0, l, &e) < 1e-3);
        if !seen {
            limits.push(e);
        }
    }
    Ok(FlowReport { points, ratios, cauchy_gaps, limits })
}

/// Result of the obtuse-triangle comparison at a projection.
#[derive(Debug, Clone)]
pub struct ObtuseReport {
    /// `y` feasible and `x₀` infeasible.
    pub precondition_ok: bool,
    /// `∠_x(x₀, y)` at the projection `x` of `x₀`.
    pub angle: f64,
    /// `d(x, y)`.
    pub lhs: f64,
    /// `√(d(x₀,y)² − d(x₀,x)²)`.
    pub rhs: f64,
    pub angle_ok: bool,
    pub inequality_ok: bool,
    /// `y` coincides with the projection, so both sides vanish.
    pub degenerate: bool,
}

/// Checks `∠_x(x₀,y) ≥ π/2` and `d(x,y) ≤ √(d(x₀,y)² − d(x₀,x)²)` for the
/// projection `x` of `x₀` to `c` and a feasible `y`.
pub fn check_obtuse_comparison(
    space: &ModelSpace,
    c: &HoroballIntersection,
    x0: &Point,
    y: &Point,
) -> Result<ObtuseReport> {
    let precondition_ok = c.max_violation(space, y) <= 1e-9 && c.max_violation(space, x0) > 0.0;
    let x = project_to_intersection(space, c, x0, &ProjectionOptions::default())?.point;
    let lhs = space.distance(&x, y);
    let d0y = space.distance(x0, y);
    let d0x = space.distance(x0, &x);
    let rhs = (d0y * d0y - d0x * d0x).max(0.0).sqrt();
    let degenerate = lhs < 1e-12;
    let angle = if degenerate {
        FRAC_PI_2
    } else {
        angle_between(&space.log(&x, x0), &space.log(&x, y))
    };
    Ok(ObtuseReport {
        precondition_ok,
        angle,
        lhs,
        rhs,
        angle_ok: angle >= FRAC_PI_2 - 1e-6,
        inequality_ok: lhs <= rhs + 1e-8,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::busemann::BusemannFunction;
    use crate::models::FactorIdeal;
    use nalgebra::DVector;

    #[test]
    fn flat_right_angle() {
        let s = ModelSpace::euclidean(2).unwrap();
        let h = BusemannFunction::new(
            &s,
            BoundaryPoint::single(FactorIdeal::Direction(DVector::from_vec(vec![-1.0, 0.0]))),
            s.origin(),
        )
        .unwrap();
        let c = HoroballIntersection::from_levels(&[h], &[0.0]);
        let r = check_obtuse_comparison(&s, &c, &Point::from_slice(&[1.0, 0.0]), &Point::from_slice(&[0.0, 5.0])).unwrap();
        assert!((r.angle - FRAC_PI_2).abs() < 1e-15);
        assert!((r.lhs - 5.0).abs() < 1e-15 && (r.rhs - 5.0).abs() < 1e-12);
        assert!(r.inequality_ok && r.angle_ok && r.precondition_ok);
        let d = check_obtuse_comparison(&s, &c, &Point::from_slice(&[1.0, 0.0]), &s.origin()).unwrap();
        assert!(d.degenerate);
    }

    #[test]
    fn single_busemann_flow_follows_the_ray() {
        let s = ModelSpace::hyperbolic(2).unwrap();
        let xi = BoundaryPoint::single(FactorIdeal::Finite(DVector::from_vec(vec![1.0])));
        let h = BusemannFunction::new(&s, xi.clone(), s.origin()).unwrap();
        let rep = sublevel_flow(&s, &h, &s.origin(), &[2.0, 4.0, 8.0], 0.01, &SphereOptions::default()).unwrap();
        for (r, p) in &rep.points {
            assert!(s.distance(p, &s.geodesic_ray(&s.origin(), &xi, *r)) < 1e-8);
        }
        assert_eq!(rep.limits.len(), 1);
        assert!(s.tits_distance(&rep.limits[0], &xi) == 0.0);
        for (_, ratio, bound) in &rep.ratios {
            assert!(ratio <= bound);
        }
    }
}
