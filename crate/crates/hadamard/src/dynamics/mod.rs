//! Dynamics of isometries: classification, rays tracking orbits of positive
//! infimum displacement, centers of mass at infinity, and the horosphere
//! invariance and divergence checks.

mod center;

pub use center::{
    center_of_finite_set, class_center_of_mass, min_norm_point, BoundarySubset, CenterResult, ClassCenter,
};

use crate::busemann::{displacement, displacement_gradient, doubling_rates, BusemannFunction, Isometry};
use crate::models::{angle_between, BoundaryPoint, ModelSpace, Point, Tangent};
use crate::{GeometryError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryClass {
    Elliptic,
    Parabolic,
    /// Positive infimum displacement, attained or not.
    Hyperbolic,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub class: IsometryClass,
    /// `(n, d(x, γⁿx)/n)` for `n = 2^j`.
    pub rates: Vec<(u64, f64)>,
    /// Smallest displacement reached by descent, and where.
    pub min_displacement: f64,
    pub witness: Point,
    /// The last rate when the class is hyperbolic.
    pub translation_length: Option<f64>,
}

const DOUBLINGS: u32 = 40;

/// Gradient descent on `d_γ²` from `x` with steps of length at most one.
fn descend_displacement(space: &ModelSpace, g: &Isometry, x: &Point, iters: usize) -> (Point, f64) {
    let mut p = x.clone();
    let mut d = displacement(space, g, &p);
    let mut step = 1.0;
    for _ in 0..iters {
        if d * d < 1e-28 {
            break;
        }
        let grad = displacement_gradient(space, g, &p) * (2.0 * d);
        let gn = grad.norm();
        if gn == 0.0 {
            break;
        }
        let mut moved = false;
        for _ in 0..60 {
            let len = (step * gn).min(1.0);
            let q = space.exp(&p, &(&grad * (-len / gn)));
            let dq = displacement(space, g, &q);
            if dq * dq <= d * d - 1e-4 * len * gn {
                p = q;
                d = dq;
                step *= 2.0;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (p, d)
}

/// Elliptic when descent finds a point whose whole doubling orbit stays
/// within `1e−6` of it; otherwise hyperbolic when the doubling rates settle
/// above `1e−6`, parabolic when they fall below it.
pub fn classify(space: &ModelSpace, g: &Isometry, x: &Point) -> Classification {
    let (witness, min_displacement) = descend_displacement(space, g, x, 2000);
    let rates = doubling_rates(space, g, x, DOUBLINGS);
    if min_displacement <= 1e-9 {
        let orbit = doubling_rates(space, g, &witness, DOUBLINGS);
        if orbit.len() as u32 == DOUBLINGS + 1 && orbit.iter().all(|(n, r)| r * *n as f64 <= 1e-6) {
            return Classification {
                class: IsometryClass::Elliptic,
                rates,
                min_displacement,
                witness,
                translation_length: None,
            };
        }
    }
    let (class, translation_length) = match rates.as_slice() {
        [.., (_, r1), (_, r2)] if *r2 > 1e-6 && (r1 - r2).abs() <= 1e-3 * r2 => (IsometryClass::Hyperbolic, Some(*r2)),
        [.., (_, r2)] if *r2 <= 1e-6 => (IsometryClass::Parabolic, None),
        _ => (IsometryClass::Undetermined, None),
    };
    Classification { class, rates, min_displacement, witness, translation_length }
}

#[derive(Debug, Clone)]
pub struct TrackingResult {
    pub origin: Point,
    /// Unit initial velocity of the tracking ray.
    pub direction: Tangent,
    pub endpoint: BoundaryPoint,
    /// Infimum displacement estimate.
    pub a: f64,
    /// `(k, d(y_k, c(Ak))/k)` for `k = 2^j ≤ k_max` and `k_max`.
    pub ratios: Vec<(u64, f64)>,
    /// `(ε, n_ε, K_ε)`: the last ε-good orbit index up to `2k_max` and the
    /// start of the pinching range.
    pub good_points: Vec<(f64, u64, u64)>,
    /// Angles at the origin between the segment directions for successive ε.
    pub epsilon_angles: Vec<f64>,
    /// `(A−ε)k ≤ d(y,y_n) − d(y_k,y_n) ≤ (A+ε)k` for `K_ε ≤ k ≤ n_ε`, all ε.
    pub chain_ok: bool,
    /// `ratio(2k) ≤ ratio(k) + 1e−9` for `k ≥ K_ε` with the smallest ε.
    pub tail_nonincreasing: bool,
}

impl TrackingResult {
    pub fn final_ratio(&self) -> f64 {
        self.ratios.last().map_or(f64::NAN, |r| r.1)
    }
}

pub const EPSILON_SCHEDULE: [f64; 4] = [0.1, 0.05, 0.02, 0.01];

/// Builds a ray sublinearly tracking `y, γy, γ²y, …` from ε-good orbit
/// points over the orbit up to `2k_max`.
///
/// `A` is the doubling rate at `2⁴⁰` (or the last one before overflow).
pub fn km_tracking(space: &ModelSpace, g: &Isometry, y: &Point, k_max: u64) -> Result<TrackingResult> {
    if k_max < 2 {
        return Err(GeometryError::Invalid("k_max must be at least 2".into()));
    }
    let rates = doubling_rates(space, g, y, DOUBLINGS);
    let a = rates.last().map_or(0.0, |r| r.1);
    if !(a > 1e-6) {
        return Err(GeometryError::Precondition(format!(
            "infimum displacement estimate {a:.3e} ≤ 1e-6; tracking needs a positive infimum displacement"
        )));
    }
    let n_total = (2 * k_max) as usize;
    let mut orbit = Vec::with_capacity(n_total + 1);
    orbit.push(y.clone());
    for i in 0..n_total {
        let next = g.apply(space, &orbit[i]);
        orbit.push(next);
    }
    let d0: Vec<f64> = orbit.iter().map(|p| space.distance(y, p)).collect();
    let mut good_points = Vec::new();
    let mut dirs: Vec<Tangent> = Vec::new();
    let mut chain_ok = true;
    for &eps in &EPSILON_SCHEDULE {
        let mut best = f64::NEG_INFINITY;
        let mut n_eps = 0;
        for (n, d) in d0.iter().enumerate() {
            let s = d - (a - eps) * n as f64;
            if s >= best {
                best = s;
                n_eps = n;
            }
        }
        let mut k_eps = n_total;
        while k_eps > 1 {
            let k = k_eps - 1;
            let kf = k as f64;
            if (a - eps) * kf <= d0[k] && d0[k] <= (a + eps) * kf {
                k_eps = k;
            } else {
                break;
            }
        }
        let yn = &orbit[n_eps];
        for k in k_eps..=n_eps {
            let mid = d0[n_eps] - space.distance(&orbit[k], yn);
            let kf = k as f64;
            let slack = 1e-9 * d0[n_eps].max(1.0);
            if mid < (a - eps) * kf - slack || mid > (a + eps) * kf + slack {
                chain_ok = false;
            }
        }
        good_points.push((eps, n_eps as u64, k_eps as u64));
        if n_eps == 0 {
            return Err(GeometryError::NonConvergence { iterations: n_total, residual: eps, best: None });
        }
        dirs.push(space.direction(y, yn));
    }
    let direction = dirs.last().expect("schedule is nonempty").clone();
    let epsilon_angles = dirs.windows(2).map(|w| angle_between(&w[0], &w[1])).collect();
    let mut ks: Vec<u64> = (0..64).map(|j| 1u64 << j).take_while(|&k| k <= k_max).collect();
    if ks.last() != Some(&k_max) {
        ks.push(k_max);
    }
    let ratios: Vec<(u64, f64)> = ks
        .iter()
        .map(|&k| {
            let c = space.exp(y, &(&direction * (a * k as f64)));
            (k, space.distance(&orbit[k as usize], &c) / k as f64)
        })
        .collect();
    let transient = good_points.last().expect("nonempty").2;
    let tail_nonincreasing = ratios
        .windows(2)
        .filter(|w| w[0].0 >= transient && w[1].0 == 2 * w[0].0)
        .all(|w| w[1].1 <= w[0].1 + 1e-9);
    let endpoint = space.ray_endpoint(y, &direction)?;
    Ok(TrackingResult {
        origin: y.clone(),
        direction,
        endpoint,
        a,
        ratios,
        good_points,
        epsilon_angles,
        chain_ok,
        tail_nonincreasing,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct InvarianceReport {
    /// `max |h(γx) − h(x)|` over the samples.
    pub max_drift: f64,
    /// `max_drift < 1e−7`.
    pub invariant: bool,
    /// `γ` fixes the center of `h`.
    pub fixes_center: bool,
    /// Upper end of the infimum displacement bracket of `γ`.
    pub displacement_upper: f64,
    /// `max_drift ≤ |γ|`, audited only when `γ` fixes the center.
    pub bound_ok: Option<bool>,
}

/// Measures how far `γ` moves the level sets of `h` on the sample points.
pub fn horosphere_invariance_check(
    space: &ModelSpace,
    g: &Isometry,
    h: &BusemannFunction,
    samples: &[Point],
) -> Result<InvarianceReport> {
    if samples.is_empty() {
        return Err(GeometryError::Invalid("no sample points".into()));
    }
    let max_drift = samples
        .iter()
        .map(|x| (h.value(space, &g.apply(space, x)) - h.value(space, x)).abs())
        .fold(0.0, f64::max);
    let fixes_center = g.apply_boundary(&h.center).approx_eq(&h.center, 1e-9);
    let displacement_upper = doubling_rates(space, g, &samples[0], DOUBLINGS).last().map_or(f64::INFINITY, |r| r.1);
    Ok(InvarianceReport {
        max_drift,
        invariant: max_drift < 1e-7,
        fixes_center,
        displacement_upper,
        bound_ok: fixes_center.then_some(max_drift <= displacement_upper + 1e-9),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DivergenceRow {
    pub t: f64,
    /// `h(r(t))`.
    pub h: f64,
    /// `h(r(0)) − t·sin α`.
    pub bound: f64,
    /// `d_γ(r(t))`.
    pub displacement: f64,
}

#[derive(Debug, Clone)]
pub struct DivergenceReport {
    /// `γ` preserves `h` on the ray samples and `Td(η, center) ≤ π/2 − α`.
    pub applicable: bool,
    pub td: f64,
    pub rows: Vec<DivergenceRow>,
    /// `h(r(t)) ≤ h(r(0)) − t·sin α + 1e−6` at every sample.
    pub decay_ok: bool,
    /// When `γ` fixes `η`: `d_γ(r(t)) ≤ d_γ(r(0)) + 1e−6` throughout.
    pub displacement_bounded: Option<bool>,
    pub displacement_nonincreasing: Option<bool>,
}

/// Checks Busemann decay at rate `sin α` and bounded displacement along the
/// ray from `start` toward `eta`.
pub fn divergence_monotonicity_check(
    space: &ModelSpace,
    g: &Isometry,
    h: &BusemannFunction,
    eta: &BoundaryPoint,
    alpha: f64,
    start: &Point,
    times: &[f64],
) -> Result<DivergenceReport> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(GeometryError::Invalid("sample times must be nonnegative and increasing".into()));
    }
    let td = space.tits_distance(eta, &h.center);
    let pts: Vec<Point> = std::iter::once(0.0)
        .chain(times.iter().copied())
        .map(|t| space.geodesic_ray(start, eta, t))
        .collect();
    let inv = horosphere_invariance_check(space, g, h, &pts)?;
    let applicable = inv.invariant && td <= std::f64::consts::FRAC_PI_2 - alpha + 1e-12;
    let h0 = h.value(space, &pts[0]);
    let d0 = displacement(space, g, &pts[0]);
    let rows: Vec<DivergenceRow> = times
        .iter()
        .zip(&pts[1..])
        .map(|(&t, p)| DivergenceRow {
            t,
            h: h.value(space, p),
            bound: h0 - t * alpha.sin(),
            displacement: displacement(space, g, p),
        })
        .collect();
    let decay_ok = rows.iter().all(|r| r.h <= r.bound + 1e-6);
    let fixes_eta = g.apply_boundary(eta).approx_eq(eta, 1e-9);
    let (displacement_bounded, displacement_nonincreasing) = if fixes_eta {
        let bounded = rows.iter().all(|r| r.displacement <= d0 + 1e-6);
        let mut prev = d0;
        let mut mono = true;
        for r in &rows {
            mono &= r.displacement <= prev + 1e-9;
            prev = r.displacement;
        }
        (Some(bounded), Some(mono))
    } else {
        (None, None)
    };
    Ok(DivergenceReport { applicable, td, rows, decay_ok, displacement_bounded, displacement_nonincreasing })
}

/// Whether `γ` fixes `ξ`, comparing representatives within `tol`.
pub fn fixes(g: &Isometry, xi: &BoundaryPoint, tol: f64) -> bool {
    g.apply_boundary(xi).approx_eq(xi, tol)
}
