//! Minimizers of convex functions on geodesic spheres `S_{x₀}(R)`.

use nalgebra::{DMatrix, DVector};

use super::{complement_basis, Objective};
use crate::models::{ModelSpace, Point, Tangent};
use crate::{GeometryError, Result};

#[derive(Debug, Clone, Copy)]
pub struct SphereOptions {
    pub max_iter: usize,
    /// Required bound on `|∇f_T|/|∇f|`, the sine of the angle between the
    /// gradient and the radial direction.
    pub tol: f64,
    /// Residual at which iteration stops early.
    pub target: f64,
}

impl Default for SphereOptions {
    fn default() -> Self {
        SphereOptions { max_iter: 10_000, tol: 1e-8, target: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct SphereResult {
    pub point: Point,
    pub value: f64,
    pub iterations: usize,
    /// `|∇f_T|/|∇f|` at the returned point.
    pub residual: f64,
}

struct State {
    g: Tangent,
    n: Tangent,
    gn: f64,
    residual: f64,
    value: f64,
}

fn state<O: Objective + ?Sized>(space: &ModelSpace, f: &O, x0: &Point, p: &Point) -> State {
    let g = f.gradient(space, p);
    let n = -space.direction(p, x0);
    let gn = g.dot(&n);
    let gt = &g - &n * gn;
    let gnorm = g.norm();
    let residual = if gnorm == 0.0 { 0.0 } else { gt.norm() / gnorm };
    State { value: f.value(space, p), g, n, gn, residual }
}

/// Moves `p` by `v`, then back onto `S_{x₀}(R)` along the geodesic to `x₀`.
fn retract(space: &ModelSpace, x0: &Point, r: f64, p: &Point, v: &Tangent) -> Option<Point> {
    let q = space.exp(p, v);
    let d = space.distance(x0, &q);
    if !d.is_finite() || d == 0.0 {
        return None;
    }
    let dir = space.direction(&q, x0);
    let out = space.exp(&q, &(dir * (d - r)));
    if out.coords.iter().all(|c| c.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Newton direction for the restriction of `f` to the sphere, using the
/// Riemannian Hessian `P(Hess f − ⟨∇f,n⟩·Hess(½r²)/r)P` with eigenvalues
/// replaced by their absolute values.
fn newton_step<O: Objective + ?Sized>(
    space: &ModelSpace,
    f: &O,
    x0: &Point,
    p: &Point,
    st: &State,
    basis: &DMatrix<f64>,
) -> DVector<f64> {
    let r = space.distance(x0, p);
    let hf = f.hessian(space, p);
    let hr = space.half_dist_sq_hessian(p, x0);
    let h = basis.transpose() * (hf - hr * (st.gn / r)) * basis;
    let gb = basis.transpose() * &st.g;
    let eig = nalgebra::SymmetricEigen::new(h);
    let scale = eig.eigenvalues.amax().max(1e-300);
    let mut xi = DVector::zeros(gb.len());
    for k in 0..gb.len() {
        let lam = eig.eigenvalues[k].abs().max(1e-10 * scale);
        let v = eig.eigenvectors.column(k);
        xi -= v * (v.dot(&gb) / lam);
    }
    xi
}

/// Minimizer of `f` on the geodesic sphere of radius `r` about `x0`.
///
/// Starts from the point in direction `−∇f(x₀)` and runs a safeguarded
/// Newton iteration in the tangent space of the sphere, retracting by the
/// exponential map followed by a radial correction. Success requires the
/// gradient to point radially inward within `opts.tol`.
pub fn minimize_on_sphere<O: Objective + ?Sized>(
    space: &ModelSpace,
    f: &O,
    x0: &Point,
    r: f64,
    opts: &SphereOptions,
) -> Result<SphereResult> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeometryError::Invalid(format!("sphere radius {r} must be positive")));
    }
    let g0 = f.gradient(space, x0);
    let start_dir = if g0.norm() > 0.0 {
        -&g0 / g0.norm()
    } else {
        let mut e = DVector::zeros(space.dim());
        e[0] = 1.0;
        e
    };
    let mut p = space.exp(x0, &(start_dir * r));
    let mut st = state(space, f, x0, &p);
    let mut best = (if st.gn <= 0.0 { st.residual } else { f64::INFINITY }, p.clone(), st.value);
    let mut iterations = 0;
    let mut grad_step = r.min(1.0);
    while iterations < opts.max_iter {
        if st.residual <= opts.target && st.gn <= 0.0 {
            break;
        }
        iterations += 1;
        let basis = complement_basis(&st.n);
        let gb = basis.transpose() * &st.g;
        let mut moved = false;
        if st.gn < 0.0 {
            let xi = newton_step(space, f, x0, &p, &st, &basis);
            let slope = gb.dot(&xi);
            let mut alpha = 1.0;
            for _ in 0..50 {
                if let Some(q) = retract(space, x0, r, &p, &(&basis * (&xi * alpha))) {
                    let sq = state(space, f, x0, &q);
                    let noise = 1e-12 * st.value.abs().max(1.0);
                    let armijo = sq.value <= st.value + 1e-4 * alpha * slope;
                    let flat = (sq.value - st.value).abs() <= noise && sq.residual < st.residual;
                    if armijo || flat {
                        p = q;
                        st = sq;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
        }
        if !moved {
            // projected gradient step with backtracking
            let gbn = gb.norm();
            if gbn == 0.0 {
                break;
            }
            let dir = -&gb / gbn;
            for _ in 0..80 {
                if let Some(q) = retract(space, x0, r, &p, &(&basis * (&dir * grad_step))) {
                    let sq = state(space, f, x0, &q);
                    if sq.value < st.value - 1e-4 * grad_step * gbn {
                        p = q;
                        st = sq;
                        moved = true;
                        grad_step *= 2.0;
                        break;
                    }
                }
                grad_step *= 0.5;
            }
        }
        if !moved && st.gn > 0.0 {
            // critical point with outward gradient: a maximum or saddle of f
            // on the sphere, so step off it along the sphere
            let kick = &basis.column(0) * r.min(1.0) * 0.5;
            if let Some(q) = retract(space, x0, r, &p, &kick.into_owned()) {
                p = q;
                st = state(space, f, x0, &p);
                moved = true;
            }
        }
        if st.gn <= 0.0 && st.residual < best.0 {
            best = (st.residual, p.clone(), st.value);
        }
        if !moved {
            break;
        }
    }
    if st.gn > 0.0 || st.residual > best.0 {
        st = state(space, f, x0, &best.1);
        p = best.1;
    }
    if st.residual <= opts.tol && st.gn <= 0.0 {
        Ok(SphereResult { point: p, value: st.value, iterations, residual: st.residual })
    } else {
        Err(GeometryError::NonConvergence { iterations, residual: st.residual, best: Some(p) })
    }
}
