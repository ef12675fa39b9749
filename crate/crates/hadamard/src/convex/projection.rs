//! Closest-point projections to horoballs and to intersections of horoballs.

use nalgebra::{DMatrix, DVector};

use crate::busemann::BusemannFunction;
use crate::models::{ModelSpace, Point, Tangent};
use crate::{GeometryError, Result};

/// The set `{x : hᵢ(x) ≤ bᵢ for all i}`.
#[derive(Debug, Clone)]
pub struct HoroballIntersection {
    pub constraints: Vec<(BusemannFunction, f64)>,
    /// A point known to satisfy every constraint.
    pub witness: Option<Point>,
}

impl HoroballIntersection {
    pub fn new(constraints: Vec<(BusemannFunction, f64)>) -> Self {
        HoroballIntersection { constraints, witness: None }
    }

    /// Horoballs of `vertices` at the levels `b`.
    pub fn from_levels(vertices: &[BusemannFunction], b: &[f64]) -> Self {
        Self::new(vertices.iter().cloned().zip(b.iter().copied()).collect())
    }

    pub fn violations(&self, space: &ModelSpace, x: &Point) -> Vec<f64> {
        self.constraints.iter().map(|(h, b)| h.value(space, x) - b).collect()
    }

    pub fn max_violation(&self, space: &ModelSpace, x: &Point) -> f64 {
        self.violations(space, x).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProjectionOptions {
    pub max_iter: usize,
    pub feas_tol: f64,
    pub kkt_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions { max_iter: 100_000, feas_tol: 1e-9, kkt_tol: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub point: Point,
    pub iterations: usize,
    /// KKT cone residual at `point`.
    pub residual: f64,
    /// Largest constraint violation at `point` (nonpositive when feasible).
    pub violation: f64,
}

/// Closest point of the horoball `{h ≤ level}` to `x`.
pub fn project_to_horoball(space: &ModelSpace, h: &BusemannFunction, level: f64, x: &Point) -> Point {
    let v = h.value(space, x);
    if v <= level {
        x.clone()
    } else {
        space.geodesic_ray(x, &h.center, v - level)
    }
}

/// Nonnegative least squares `min_{λ≥0} |w − Gλ|` for a handful of columns,
/// by enumeration of supports.
fn nnls_small(g: &[Tangent], w: &Tangent) -> f64 {
    let k = g.len();
    let mut best = w.norm();
    for mask in 1u32..(1 << k) {
        let cols: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let m = DMatrix::from_columns(&cols.iter().map(|&i| g[i].clone()).collect::<Vec<_>>());
        let gram = m.transpose() * &m;
        let Some(chol) = gram.clone().cholesky() else { continue };
        let lam = chol.solve(&(m.transpose() * w));
        if lam.iter().any(|l| *l < 0.0) {
            continue;
        }
        let r = (w - &m * lam).norm();
        if r < best {
            best = r;
        }
    }
    best
}

/// Residual of the optimality condition for `z` as the projection of `x`:
/// the distance of `log_z(x)` from the cone spanned by the gradients of the
/// active constraints, divided by `max(1, |log_z(x)|)`.
pub fn kkt_residual(space: &ModelSpace, c: &HoroballIntersection, z: &Point, x: &Point) -> f64 {
    let w = space.log(z, x);
    let mut active = Vec::new();
    for (h, b) in &c.constraints {
        let v = h.value(space, z);
        if v >= b - 1e-8 * b.abs().max(1.0) {
            active.push(h.gradient(space, z));
        }
    }
    nnls_small(&active, &w) / w.norm().max(1.0)
}

/// Solves `min gᵀv + ½vᵀHv` subject to `Av ≤ r` by enumerating active sets.
/// Returns the step and multipliers, or `None` if the linearization is
/// infeasible.
fn solve_qp(h: &DMatrix<f64>, g: &Tangent, a: &[Tangent], r: &[f64]) -> Option<(Tangent, Vec<f64>)> {
    let n = g.len();
    let k = a.len();
    let mut best: Option<(f64, Tangent, Vec<f64>)> = None;
    for mask in 0u32..(1 << k) {
        let act: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let m = act.len();
        let mut kkt = DMatrix::zeros(n + m, n + m);
        kkt.view_mut((0, 0), (n, n)).copy_from(h);
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(-g));
        for (j, &i) in act.iter().enumerate() {
            for c in 0..n {
                kkt[(n + j, c)] = a[i][c];
                kkt[(c, n + j)] = a[i][c];
            }
            rhs[n + j] = r[i];
        }
        let Some(sol) = kkt.clone().lu().solve(&rhs) else { continue };
        if (&kkt * &sol - &rhs).amax() > 1e-8 * (1.0 + rhs.amax()) {
            continue;
        }
        let v = sol.rows(0, n).into_owned();
        let mut lam = vec![0.0; k];
        let mut ok = true;
        for (j, &i) in act.iter().enumerate() {
            lam[i] = sol[n + j];
            if lam[i] < -1e-12 * (1.0 + g.norm()) {
                ok = false;
            }
        }
        for i in 0..k {
            if a[i].dot(&v) > r[i] + 1e-10 * (1.0 + r[i].abs() + v.norm()) {
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let obj = g.dot(&v) + 0.5 * v.dot(&(h * &v));
        if best.as_ref().map_or(true, |(b, _, _)| obj < *b) {
            best = Some((obj, v, lam.iter().map(|l| l.max(0.0)).collect()));
        }
    }
    best.map(|(_, v, l)| (v, l))
}

/// Flows along `−Σ∇hᵢ` over the violated constraints until feasible.
fn feasibility_flow(space: &ModelSpace, c: &HoroballIntersection, x: &Point) -> Result<Point> {
    let mut z = x.clone();
    let mut viol = c.max_violation(space, &z);
    for _ in 0..1000 {
        if viol <= 0.0 {
            return Ok(z);
        }
        let mut dir = DVector::zeros(space.dim());
        for (h, b) in &c.constraints {
            if h.value(space, &z) > *b {
                dir -= h.gradient(space, &z);
            }
        }
        if dir.norm() == 0.0 {
            break;
        }
        let mut step = viol.max(1e-6) * 2.0 / dir.norm();
        let mut improved = false;
        for _ in 0..60 {
            let cand = space.exp(&z, &(&dir * step));
            let v = c.max_violation(space, &cand);
            if v <= viol - 1e-12 {
                z = cand;
                viol = v;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if viol <= 0.0 {
        Ok(z)
    } else {
        Err(GeometryError::Infeasible { violation: viol })
    }
}

/// Closest point of a horoball intersection to `x`.
///
/// Sequential quadratic programming in the tangent space of the iterate:
/// the model combines the exact Hessian of `½d(x,·)²` with the multiplier
/// weighted Busemann Hessians, constraints are linearized, and steps are
/// globalized with an ℓ¹ merit function. Success requires feasibility within
/// `feas_tol` and a KKT cone residual below `kkt_tol`.
pub fn project_to_intersection(
    space: &ModelSpace,
    c: &HoroballIntersection,
    x: &Point,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    if c.max_violation(space, x) <= 0.0 {
        return Ok(ProjectionResult { point: x.clone(), iterations: 0, residual: 0.0, violation: c.max_violation(space, x) });
    }
    if c.constraints.len() > 16 {
        return Err(GeometryError::Invalid("at most 16 constraints are supported".into()));
    }
    let mut z = x.clone();
    let mut lam = vec![0.0; c.constraints.len()];
    let mut rho: f64 = 1.0;
    let merit = |p: &Point, rho: f64| {
        let d = space.distance(x, p);
        0.5 * d * d + rho * c.violations(space, p).iter().map(|v| v.max(0.0)).sum::<f64>()
    };
    let mut iterations = 0;
    let mut flowed = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let g = -space.log(&z, x);
        let mut hess = space.half_dist_sq_hessian(&z, x);
        let mut grads = Vec::with_capacity(c.constraints.len());
        let mut rhs = Vec::with_capacity(c.constraints.len());
        for ((h, b), l) in c.constraints.iter().zip(&lam) {
            if *l > 0.0 {
                hess += h.hessian(space, &z) * *l;
            }
            grads.push(h.gradient(space, &z));
            rhs.push(b - h.value(space, &z));
        }
        let Some((v, mu)) = solve_qp(&hess, &g, &grads, &rhs) else {
            if flowed {
                return Err(GeometryError::NonConvergence { iterations, residual: f64::INFINITY, best: Some(z) });
            }
            z = feasibility_flow(space, c, &z)?;
            flowed = true;
            continue;
        };
        rho = rho.max(2.0 * mu.iter().copied().fold(0.0, f64::max) + 1.0);
        let scale = space.distance(x, &z).max(1.0);
        let vn = v.norm();
        if vn <= 1e-15 * scale {
            break;
        }
        let phi = merit(&z, rho);
        let viol_sum: f64 = rhs.iter().map(|r| (-r).max(0.0)).sum();
        let slope = g.dot(&v) - rho * viol_sum;
        let mut alpha = 1.0;
        let mut next = None;
        if vn < 1e-6 * scale {
            next = Some(space.exp(&z, &v));
        } else {
            for _ in 0..60 {
                let cand = space.exp(&z, &(&v * alpha));
                if merit(&cand, rho) <= phi + 1e-4 * alpha * slope.min(0.0) {
                    next = Some(cand);
                    break;
                }
                alpha *= 0.5;
            }
        }
        let Some(nz) = next else { break };
        z = nz;
        lam = mu;
        let viol = c.max_violation(space, &z);
        if viol <= opts.feas_tol && kkt_residual(space, c, &z, x) < opts.kkt_tol * 1e-3 {
            break;
        }
    }
    let violation = c.max_violation(space, &z);
    let residual = kkt_residual(space, c, &z, x);
    if violation <= opts.feas_tol && residual < opts.kkt_tol {
        Ok(ProjectionResult { point: z, iterations, residual, violation })
    } else {
        Err(GeometryError::NonConvergence { iterations, residual: residual.max(violation), best: Some(z) })
    }
}
