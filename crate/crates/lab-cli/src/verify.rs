//! The verify suite: one quick check per operation family over the catalog,
//! plus a coverage manifest asserting that every operation of every module
//! is exercised.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use abelian_complex::instance::InstanceFile;
use abelian_complex::{
    build_class_complex, center_of, half_dimension_report, zeta_map, AbelianLattice, HalfDimensionVerdict,
    NilpotentGroupData, UniMatrix,
};
use anyhow::{anyhow, ensure, Result};
use hadamard::busemann::{
    displacement, inf_displacement, minimize_series, series_rhs, weighted_series, BusemannFunction, FactorIsometry,
    Isometry, WordBall,
};
use hadamard::convex::{
    check_obtuse_comparison, minimize_on_sphere, project_to_horoball, project_to_intersection, sublevel_flow,
    HoroballIntersection, ProjectionOptions, SphereOptions,
};
use hadamard::dynamics::{
    center_of_finite_set, class_center_of_mass, classify, divergence_monotonicity_check, horosphere_invariance_check,
    km_tracking, BoundarySubset, IsometryClass,
};
use hadamard::models::{BoundaryPoint, FactorIdeal, ModelSpace, Point};
use hadamard::simplex::{
    approximate_simplex, cone_image_region, cone_injectivity_audit, degeneracy_sequential_probe,
    dimension_bound_assert, error_bound_audit, find_large_corner, gradient_independence, horo_contraction_gap,
    horo_coordinates, inverse_check, root_lemma_audit, sample_cone, simplex_limit, CornerOptions, ProbeOptions,
    SimplexSpec,
};
use nalgebra::DVector;
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::experiments::{self, orbit, random_cone_point, Outcome, Verdict};
use crate::row;
use crate::sampling::{random_barycentric, random_point, rng};
use crate::scenarios::{self, factor_parabolics, h2, h2xh2};
use crate::table::Table;

/// Every operation of every module, as `(module, op)`.
pub const ALL_OPS: &[(&str, &str)] = &[
    (scenarios::MODELS, "distance"),
    (scenarios::MODELS, "geodesic_ray"),
    (scenarios::MODELS, "angle_at"),
    (scenarios::MODELS, "tits_distance"),
    (scenarios::BUSEMANN, "busemann_value"),
    (scenarios::BUSEMANN, "busemann_gradient"),
    (scenarios::BUSEMANN, "combination_gradient"),
    (scenarios::BUSEMANN, "displacement"),
    (scenarios::BUSEMANN, "inf_displacement"),
    (scenarios::BUSEMANN, "weighted_series"),
    (scenarios::CONVEX, "minimize_on_sphere"),
    (scenarios::CONVEX, "project_to_horoball"),
    (scenarios::CONVEX, "project_to_intersection"),
    (scenarios::CONVEX, "check_obtuse_comparison"),
    (scenarios::CONVEX, "sublevel_flow"),
    (scenarios::SIMPLEX, "approximate_simplex"),
    (scenarios::SIMPLEX, "simplex_limit"),
    (scenarios::SIMPLEX, "horo_coordinates"),
    (scenarios::SIMPLEX, "gradient_independence"),
    (scenarios::SIMPLEX, "cone_injectivity_audit"),
    (scenarios::SIMPLEX, "cone_image_region"),
    (scenarios::SIMPLEX, "find_large_corner"),
    (scenarios::SIMPLEX, "error_bound_audit"),
    (scenarios::SIMPLEX, "root_lemma_audit"),
    (scenarios::SIMPLEX, "degeneracy_sequential_probe"),
    (scenarios::SIMPLEX, "dimension_bound_assert"),
    (scenarios::DYNAMICS, "classify"),
    (scenarios::DYNAMICS, "km_tracking"),
    (scenarios::DYNAMICS, "center_of_finite_set"),
    (scenarios::DYNAMICS, "class_center_of_mass"),
    (scenarios::DYNAMICS, "horosphere_invariance_check"),
    (scenarios::DYNAMICS, "divergence_monotonicity_check"),
    (scenarios::COMPLEX, "center_of"),
    (scenarios::COMPLEX, "zeta_map"),
    (scenarios::COMPLEX, "virtual_class_of"),
    (scenarios::COMPLEX, "build_class_complex"),
    (scenarios::COMPLEX, "half_dimension_report"),
    ("lab-cli", "run"),
    ("lab-cli", "list_scenarios"),
];

/// `(metric, threshold)`; the check passes when `metric ≤ threshold`.
type CheckFn = fn(u64) -> Result<(f64, f64)>;

pub struct CheckDef {
    pub name: &'static str,
    pub scenario: &'static str,
    pub ops: &'static [&'static str],
    run: CheckFn,
}

macro_rules! check {
    ($name:literal, $scenario:literal, [$($op:literal),*], $f:expr) => {
        CheckDef { name: $name, scenario: $scenario, ops: &[$($op),*], run: $f }
    };
}

fn bool_metric(ok: bool) -> (f64, f64) {
    (if ok { 0.0 } else { 1.0 }, 0.0)
}

fn geo(name: &str) -> Result<(scenarios::Geometric, SimplexSpec)> {
    let g = scenarios::geometric(name)?;
    let spec = g.spec.clone().ok_or_else(|| anyhow!("{name} has no simplex"))?;
    Ok((g, spec))
}

fn up() -> BoundaryPoint {
    BoundaryPoint::single(FactorIdeal::Infinity)
}

fn fin(v: f64) -> FactorIdeal {
    FactorIdeal::Finite(DVector::from_vec(vec![v]))
}

/// Vertical distance in `H²` is `|Δη|` (the chart stores `w = u·e^{−η}`),
/// and the flat metric is Euclidean.
fn c_distance(seed: u64) -> Result<(f64, f64)> {
    let s = h2();
    let mut r = rng(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (u, a, b): (f64, f64, f64) = (r.gen_range(-3.0..3.0), r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0));
        let d = s.distance(&Point::from_slice(&[u * (-a).exp(), a]), &Point::from_slice(&[u * (-b).exp(), b]));
        worst = worst.max((d - f64::abs(a - b)).abs());
        let p = random_point(&s, &mut r, 2.0);
        let q = random_point(&s, &mut r, 2.0);
        let m = random_point(&s, &mut r, 2.0);
        worst = worst.max(s.distance(&p, &q) - s.distance(&p, &m) - s.distance(&m, &q));
    }
    let e = ModelSpace::euclidean(3)?;
    let d = e.distance(&Point::from_slice(&[1.0, 2.0, 2.0]), &e.origin());
    Ok((worst.max((d - 3.0).abs()), 1e-12))
}

/// Rays toward join points have unit speed.
fn c_rays(seed: u64) -> Result<(f64, f64)> {
    let s = h2xh2();
    let mut r = rng(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let xi = BoundaryPoint::join(r.gen_range(0.0..FRAC_PI_2), FactorIdeal::Infinity, fin(r.gen_range(-1.0..1.0)))?;
        let x = random_point(&s, &mut r, 1.0);
        let (t1, t2) = (r.gen_range(0.0..5.0), r.gen_range(5.0..10.0));
        let d = s.distance(&s.geodesic_ray(&x, &xi, t1), &s.geodesic_ray(&x, &xi, t2));
        worst = worst.max((d - (t2 - t1)).abs());
    }
    Ok((worst, 1e-8))
}

/// Opposite ends of a geodesic subtend `π`; the join angle is the Tits distance.
fn c_angles(_: u64) -> Result<(f64, f64)> {
    let s = h2();
    let a = s.angle_at(&s.origin(), &up(), &BoundaryPoint::single(fin(0.0)));
    let p = h2xh2();
    let x = BoundaryPoint::join(0.3, FactorIdeal::Infinity, FactorIdeal::Infinity)?;
    let y = BoundaryPoint::join(1.1, FactorIdeal::Infinity, FactorIdeal::Infinity)?;
    let td = p.tits_distance(&x, &y);
    let hyp = s.tits_distance(&up(), &BoundaryPoint::single(fin(0.0)));
    Ok(((a - PI).abs().max((td - 0.8).abs()).max((hyp - PI).abs()), 1e-9))
}

/// `h_∞` decreases at unit rate along the ray to `∞` with unit gradient.
fn c_busemann(seed: u64) -> Result<(f64, f64)> {
    let s = h2();
    let h = BusemannFunction::new(&s, up(), s.origin())?;
    let mut r = rng(seed, 4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_point(&s, &mut r, 3.0);
        let t = r.gen_range(0.0..6.0);
        let y = s.geodesic_ray(&x, &up(), t);
        worst = worst.max((h.value(&s, &y) - h.value(&s, &x) + t).abs());
        worst = worst.max((h.gradient(&s, &x).norm() - 1.0).abs());
    }
    Ok((worst, 1e-9))
}

/// `|∇f_t| ∈ [1/√(k+1), 1]` on the product simplex.
fn c_combination(seed: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let mut r = rng(seed, 5);
    let mut fails = 0;
    for _ in 0..50 {
        let t = random_barycentric(&mut r, spec.k());
        let x = random_point(&g.space, &mut r, 3.0);
        let c = spec.combination(&t)?.gradient_checked(&g.space, &x);
        fails += usize::from(!(c.angles_ok && c.bounds_ok == Some(true)));
    }
    Ok((fails as f64, 0.0))
}

/// Parabolic displacement `2 asinh(1/(2y))` and boost translation length 1.
fn c_displacement(seed: u64) -> Result<(f64, f64)> {
    let s = h2();
    let p = Isometry::single(scenarios::parabolic());
    let mut r = rng(seed, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_point(&s, &mut r, 3.0);
        let want = 2.0 * (0.5 * (-x.coords[1]).exp()).asinh();
        worst = worst.max((displacement(&s, &p, &x) - want).abs());
    }
    Ok((worst, 1e-12))
}

fn c_inf_displacement(_: u64) -> Result<(f64, f64)> {
    let s = h2();
    let b = Isometry::single(FactorIsometry::boost(2, 1.0));
    let e = inf_displacement(&s, &b, &Point::from_slice(&[0.7, 0.2]), 256)?;
    // Off the axis the rate is `1 + c/n` up to exponentially small terms, so
    // the doubling bracket predicts the remaining error.
    Ok((((e.lower - 1.0) - (e.upper - e.lower)).abs(), 1e-9))
}

/// Truncated series minimum against `Σ ω(γ)|γ|` for the boost group.
fn c_series(_: u64) -> Result<(f64, f64)> {
    let s = h2();
    let b = Isometry::single(FactorIsometry::boost(2, 1.0));
    let ball = WordBall::new(&s, &[b], 8);
    let all = |_: &Isometry| true;
    let (x, min) = minimize_series(&s, &ball, 2.0, &all, &Point::from_slice(&[0.8, 0.3]), 400)?;
    let tail = weighted_series(&s, &ball, 2.0, &all, &x)?.tail_bound;
    let rhs = series_rhs(&ball, 2.0, &all, &|g: &Isometry| g.translation_length().unwrap_or(0.0));
    Ok(((min - rhs).abs(), tail + 1e-6))
}

/// `σ_R(t)` against the flat closed form.
fn c_sphere(seed: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("flat-orthogonal-k2")?;
    let mut r = rng(seed, 9);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t = random_barycentric(&mut r, spec.k());
        let rad = r.gen_range(1.0..100.0);
        let p = minimize_on_sphere(&g.space, &spec.combination(&t)?, &spec.basepoint, rad, &SphereOptions::default())?;
        let want = experiments::flat_closed_form(&spec, &t, rad).ok_or_else(|| anyhow!("no closed form"))?;
        worst = worst.max((want - p.point.coords).norm());
    }
    Ok((worst, 1e-9))
}

/// Projection to one horoball lands on the horosphere at distance `h(x) − level`.
fn c_horoball(seed: u64) -> Result<(f64, f64)> {
    let s = h2();
    let h = BusemannFunction::new(&s, up(), s.origin())?;
    let mut r = rng(seed, 10);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_point(&s, &mut r, 2.0);
        let level = h.value(&s, &x) - r.gen_range(0.1..3.0);
        let p = project_to_horoball(&s, &h, level, &x);
        worst = worst.max((h.value(&s, &p) - level).abs());
        worst = worst.max((s.distance(&x, &p) - (h.value(&s, &x) - level)).abs());
    }
    Ok((worst, 1e-9))
}

fn product_intersection(spec: &SimplexSpec, b: &[f64]) -> HoroballIntersection {
    HoroballIntersection::from_levels(&spec.vertices, b)
}

/// KKT residual and feasibility of the intersection projection.
fn c_intersection(seed: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let mut r = rng(seed, 11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let b = [r.gen_range(-3.0..0.0), r.gen_range(-3.0..0.0)];
        let x = random_point(&g.space, &mut r, 2.0);
        let p = project_to_intersection(&g.space, &product_intersection(&spec, &b), &x, &ProjectionOptions::default())?;
        worst = worst.max(p.residual).max(p.violation.max(0.0) * 1e-2);
    }
    Ok((worst, 1e-7))
}

fn c_obtuse(seed: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let mut r = rng(seed, 12);
    let mut fails = 0;
    let mut n = 0;
    for _ in 0..2000 {
        if n == 20 {
            break;
        }
        let c = product_intersection(&spec, &[r.gen_range(-2.0..0.0), r.gen_range(-2.0..0.0)]);
        let x0 = random_point(&g.space, &mut r, 2.0);
        let y = random_point(&g.space, &mut r, 2.0);
        let y = g.space.exp(&y, &DVector::from_vec(vec![0.0, 4.0, 0.0, 4.0]));
        if c.max_violation(&g.space, &y) > 0.0 || c.max_violation(&g.space, &x0) <= 0.0 {
            continue;
        }
        let rep = check_obtuse_comparison(&g.space, &c, &x0, &y)?;
        fails += usize::from(!(rep.precondition_ok && rep.angle_ok && rep.inequality_ok));
        n += 1;
    }
    ensure!(n == 20, "only {n} admissible obtuse instances");
    Ok((fails as f64, 0.0))
}

/// `d(λ_R, λ_{R(1+δ)})/R ≤ √(2δ + δ²)`.
fn c_flow(_: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let f = spec.combination(&[0.5, 0.5])?;
    let rep = sublevel_flow(&g.space, &f, &spec.basepoint, &[10.0, 20.0, 40.0, 80.0], 0.1, &SphereOptions::default())?;
    let excess = rep.ratios.iter().map(|(_, ratio, bound)| ratio - bound).fold(f64::NEG_INFINITY, f64::max);
    Ok((excess, 1e-9))
}

/// Lipschitz audit, Cauchy gaps and the diameter bound on the product.
fn c_simplex(_: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let opts = SphereOptions::default();
    let a = approximate_simplex(&g.space, &spec, 25.0, 4, &opts)?;
    let lim = simplex_limit(&g.space, &spec, &[10.0, 20.0, 40.0, 80.0], 4, experiments::GAP_TOL, &opts)?;
    let d = hadamard::simplex::diameter_audit(&g.space, &spec, &lim.limits);
    let ok = a.lipschitz_ok() && lim.approximations.iter().all(|a| a.lipschitz_ok()) && d.ok() && lim.conclusive();
    Ok(bool_metric(ok))
}

/// `h⃗(x₀) = 0` and `h⃗` is 1-Lipschitz in each coordinate.
fn c_horo(seed: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let mut worst = horo_coordinates(&g.space, &spec, &spec.basepoint).values.amax();
    let mut r = rng(seed, 15);
    for _ in 0..50 {
        let x = random_point(&g.space, &mut r, 3.0);
        let y = random_point(&g.space, &mut r, 3.0);
        worst = worst.max(horo_contraction_gap(&g.space, &spec, &x, &y));
    }
    Ok((worst, 1e-12))
}

/// Unit gradients at angle `π/3` have Gram eigenvalues `3/2` and `1/2`.
fn c_independence(seed: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("flat-orthogonal-k1")?;
    let mut r = rng(seed, 16);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (ok, smin) = gradient_independence(&g.space, &spec, &random_point(&g.space, &mut r, 5.0));
        worst = worst.max((smin - 0.5f64.sqrt()).abs() + if ok { 0.0 } else { 1.0 });
    }
    Ok((worst, 1e-12))
}

fn c_injectivity(_: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("flat-orthogonal-k1")?;
    let cone = sample_cone(&g.space, &spec, &[5.0, 10.0, 20.0], 8, &SphereOptions::default())?;
    Ok(bool_metric(cone_injectivity_audit(&g.space, &cone).ok()))
}

/// Interior samples of `W` invert through `p(·, x₀)`.
fn c_region(_: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let cone = sample_cone(&g.space, &spec, &[5.0, 10.0, 20.0], 4, &SphereOptions::default())?;
    let w = cone_image_region(&g.space, &spec, &cone);
    ensure!(w.interior.iter().any(|b| *b), "no interior samples");
    let popts = ProjectionOptions::default();
    let mut worst: f64 = 0.0;
    for (b, _) in w.points.iter().zip(&w.interior).filter(|(_, i)| **i) {
        worst = worst.max(inverse_check(&g.space, &spec, b, &popts)?.error);
    }
    Ok((worst, 1e-7))
}

/// Corner scale grows with the sampled radius in the flat pair.
fn c_corner(_: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("flat-orthogonal-k1")?;
    let (so, po) = (SphereOptions::default(), ProjectionOptions::default());
    let copts = CornerOptions { delta: 1.0, candidates: 4 };
    let a = find_large_corner(&g.space, &spec, 8.0, 1.0, &copts, &so, &po)?;
    let b = find_large_corner(&g.space, &spec, 16.0, 1.0, &copts, &so, &po)?;
    Ok(bool_metric(b.largest > a.largest && a.corner.is_some()))
}

/// On the orbit the projection realizes the levels exactly.
fn c_error_bound(seed: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let popts = ProjectionOptions::default();
    let orb = orbit(&g.space, &g.group, &spec.basepoint, 4);
    let mut r = rng(seed, 20);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let b = horo_coordinates(&g.space, &spec, &random_cone_point(&g.space, &spec, &mut r, &SphereOptions::default())?).values;
        let x = &orb[r.gen_range(0..orb.len())];
        let rep = error_bound_audit(&g.space, &spec, &b, &g.group, &orb, x, &popts)?;
        ensure!(rep.applicable, "group does not preserve the vertex horospheres");
        worst = worst.max(rep.lhs - rep.rhs);
    }
    Ok((worst, 1e-6))
}

fn c_root(seed: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let popts = ProjectionOptions::default();
    let mut r = rng(seed, 21);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let a = DVector::from_fn(2, |_, _| r.gen_range(-3.0..1.0));
        let b = DVector::from_fn(2, |i, _| a[i] - r.gen_range(0.0..2.0));
        let x = random_point(&g.space, &mut r, 2.0);
        let rep = root_lemma_audit(&g.space, &spec, &a, &b, &x, &popts)?;
        worst = worst.max(rep.lhs - rep.bound).max(rep.monotone_lhs - rep.monotone_bound);
    }
    Ok((worst, 1e-6))
}

/// Coincident vertices: the interior midpoint is tracked by the boundary
/// samples; for the acute pair it is not.
fn c_probe(_: u64) -> Result<(f64, f64)> {
    let opts = SphereOptions::default();
    let radii = [10.0, 20.0, 40.0, 80.0];
    let probe = |name: &str| -> Result<bool> {
        let (g, spec) = geo(name)?;
        let mid = spec.combination(&[0.5, 0.5])?;
        let edge = spec.combination(&[1.0, 0.0])?;
        let mut path = Vec::new();
        let mut cand = Vec::new();
        for &rad in &radii {
            path.push((rad, minimize_on_sphere(&g.space, &mid, &spec.basepoint, rad, &opts)?.point));
            cand.push(minimize_on_sphere(&g.space, &edge, &spec.basepoint, rad, &opts)?.point);
        }
        Ok(degeneracy_sequential_probe(&g.space, &path, &cand, &ProbeOptions { final_max: 0.02, decay: 1.0 })?
            .degeneracy_consistent)
    };
    Ok(bool_metric(probe("degenerate-coincident")? && !probe("flat-orthogonal-k1")?))
}

/// `4 = 1 + 1 + 2` on the product.
fn c_dimension(_: u64) -> Result<(f64, f64)> {
    let (g, spec) = geo("product-H2xH2-Z2")?;
    let cone = sample_cone(&g.space, &spec, &[10.0, 20.0], 4, &SphereOptions::default())?;
    let rep = dimension_bound_assert(&g.space, &spec, &g.group, 2, &cone);
    Ok(bool_metric(rep.applicable && rep.holds && rep.equality))
}

fn c_classify(_: u64) -> Result<(f64, f64)> {
    let s = h2();
    let x = s.origin();
    let b = classify(&s, &Isometry::single(FactorIsometry::boost(2, 1.0)), &x);
    let p = classify(&s, &Isometry::single(scenarios::parabolic()), &x);
    let e = classify(&s, &Isometry::identity(&s), &x);
    let ok = b.class == IsometryClass::Hyperbolic
        && p.class == IsometryClass::Parabolic
        && e.class == IsometryClass::Elliptic
        && (b.translation_length.unwrap_or(0.0) - 1.0).abs() < 1e-6;
    Ok(bool_metric(ok))
}

/// Pure-axis tracking is exact; the parabolic is rejected.
fn c_tracking(_: u64) -> Result<(f64, f64)> {
    let s = h2();
    let tr = km_tracking(&s, &Isometry::single(FactorIsometry::boost(2, 1.0)), &s.origin(), 1000)?;
    let worst = tr.ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let rejected = matches!(
        km_tracking(&s, &Isometry::single(scenarios::parabolic()), &s.origin(), 100),
        Err(hadamard::GeometryError::Precondition(_))
    );
    Ok((if rejected { worst } else { f64::INFINITY }, 1e-9))
}

/// Two join points at `0` and `π/2` have their center at `π/4`.
fn c_finite_center(_: u64) -> Result<(f64, f64)> {
    let s = h2xh2();
    let a = BoundaryPoint::join(0.0, FactorIdeal::Infinity, FactorIdeal::Infinity)?;
    let b = BoundaryPoint::join(FRAC_PI_2, FactorIdeal::Infinity, FactorIdeal::Infinity)?;
    let c = center_of_finite_set(&s, &[a, b])?;
    Ok(((c.center.theta() - FRAC_PI_4).abs(), 1e-9))
}

fn c_class_center(_: u64) -> Result<(f64, f64)> {
    let s = h2xh2();
    let opts = vec![FactorIdeal::Infinity, fin(0.0)];
    let fan = BoundarySubset::Join { factor_options: vec![opts.clone(), opts], steps: 16 };
    let c = class_center_of_mass(&s, &factor_parabolics(&s), &fan, 3)?;
    ensure!(c.certificate_ok, "certificate failed");
    Ok(((c.center.theta() - FRAC_PI_4).abs(), 1e-6))
}

fn c_invariance(seed: u64) -> Result<(f64, f64)> {
    let s = h2xh2();
    let gens = factor_parabolics(&s);
    let h = BusemannFunction::new(&s, BoundaryPoint::join(0.4, FactorIdeal::Infinity, FactorIdeal::Infinity)?, s.origin())?;
    let mut r = rng(seed, 28);
    let pts: Vec<Point> = (0..100).map(|_| random_point(&s, &mut r, 3.0)).collect();
    let mut worst: f64 = 0.0;
    for g in &gens {
        let rep = horosphere_invariance_check(&s, g, &h, &pts)?;
        ensure!(rep.bound_ok == Some(true), "displacement bound failed");
        worst = worst.max(rep.max_drift);
    }
    Ok((worst, 1e-7))
}

fn c_divergence(_: u64) -> Result<(f64, f64)> {
    let s = h2xh2();
    let g = &factor_parabolics(&s)[0];
    let h = BusemannFunction::new(&s, BoundaryPoint::join(FRAC_PI_4, FactorIdeal::Infinity, FactorIdeal::Infinity)?, s.origin())?;
    let eta = BoundaryPoint::join(0.5, FactorIdeal::Infinity, FactorIdeal::Infinity)?;
    let rep = divergence_monotonicity_check(&s, g, &h, &eta, 0.5, &s.origin(), &[1.0, 2.0, 4.0, 8.0, 16.0])?;
    Ok(bool_metric(
        rep.applicable && rep.decay_ok && rep.displacement_nonincreasing != Some(false) && rep.displacement_bounded != Some(false),
    ))
}

fn heisenberg() -> Result<NilpotentGroupData> {
    Ok(NilpotentGroupData::new("H3", vec![UniMatrix::elementary(3, 0, 1, 1), UniMatrix::elementary(3, 1, 2, 1)])?)
}

/// The center of `H₃` is the rank-one corner subgroup.
fn c_center_of(_: u64) -> Result<(f64, f64)> {
    let z = center_of(&heisenberg()?)?;
    let corner = AbelianLattice::from_commuting(3, &[UniMatrix::elementary(3, 0, 2, 1)])?;
    Ok(bool_metric(z.rank() == 1 && z.virtual_class()? == corner.virtual_class()?))
}

fn c_zeta(_: u64) -> Result<(f64, f64)> {
    let file = InstanceFile::bundled();
    let chain = [file.group("H3-block")?, file.group("H3xH3")?];
    let z = zeta_map(&chain)?;
    Ok(bool_metric(z.rank() == 2))
}

/// `[2ℤ × 3ℤ] = [ℤ²]`, and classes are idempotent.
fn c_virtual(seed: u64) -> Result<(f64, f64)> {
    let a = AbelianLattice::from_rows(2, &[vec![2, 0], vec![0, 3]])?;
    let full = AbelianLattice::from_rows(2, &[vec![1, 0], vec![0, 1]])?;
    let mut ok = a.virtual_class()? == full.virtual_class()?;
    let mut r = rng(seed, 32);
    for _ in 0..20 {
        let rows: Vec<Vec<i128>> = (0..2).map(|_| (0..4).map(|_| r.gen_range(-5i128..=5)).collect()).collect();
        let l = AbelianLattice::from_rows(4, &rows)?;
        let c = l.virtual_class()?;
        ok &= c.lattice().virtual_class()? == c && l.scaled(3)?.virtual_class()? == c;
    }
    Ok(bool_metric(ok))
}

fn c_complex(_: u64) -> Result<(f64, f64)> {
    let model = build_class_complex(&InstanceFile::bundled().lattice_chains()?)?;
    let rows = half_dimension_report(&model);
    let flagged = rows.iter().any(|r| r.chain == "flag-Z1Z2Z3-n4" && r.verdict == HalfDimensionVerdict::RequiresDegeneracy);
    Ok(bool_metric(model.rank_violations().is_empty() && model.dimension < model.max_rank && flagged))
}

fn c_scenarios(_: u64) -> Result<(f64, f64)> {
    let listing = scenarios::listing();
    let required = [
        "flat-orthogonal-k1",
        "flat-orthogonal-k2",
        "H2-parabolic-cusp",
        "product-H2xH2-Z2",
        "product-km-mixed",
        "heisenberg-chain",
        "flag-Z1Z2Z3",
    ];
    let ok = required.iter().all(|n| scenarios::info(n).is_ok())
        && scenarios::CATALOG.iter().all(|s| !s.modules.is_empty())
        && listing == scenarios::listing();
    Ok(bool_metric(ok))
}

/// A small run passes, and a malformed config is rejected.
fn c_run(seed: u64) -> Result<(f64, f64)> {
    let text = format!(
        "schema_version = 1\nexperiment = \"tracking\"\nscenario = \"product-km-mixed\"\nk_max = 2000\nseed = {seed}\n"
    );
    let out = experiments::execute(&ExperimentConfig::parse(&text)?);
    let rejected = ExperimentConfig::parse("schema_version = 1\nexperiment = \"simplex\"\ngrid_m = \"eight\"\n").is_err();
    Ok(bool_metric(out.passed() && rejected))
}

pub const CHECKS: &[CheckDef] = &[
    check!("distance_closed_form", "H2", ["distance"], c_distance),
    check!("ray_unit_speed", "product-H2xH2-Z2", ["geodesic_ray", "distance"], c_rays),
    check!("angles_and_tits", "H2", ["angle_at", "tits_distance"], c_angles),
    check!("busemann_unit_rate", "H2-parabolic-cusp", ["busemann_value", "busemann_gradient", "geodesic_ray"], c_busemann),
    check!("combination_gradient_bounds", "product-H2xH2-Z2", ["combination_gradient"], c_combination),
    check!("parabolic_displacement", "H2-parabolic-cusp", ["displacement"], c_displacement),
    check!("boost_translation_length", "H2-boost-axis", ["inf_displacement"], c_inf_displacement),
    check!("series_infimum", "H2-boost-axis", ["weighted_series"], c_series),
    check!("sphere_flat_oracle", "flat-orthogonal-k2", ["minimize_on_sphere"], c_sphere),
    check!("horoball_projection", "H2-parabolic-cusp", ["project_to_horoball", "busemann_value"], c_horoball),
    check!("intersection_kkt", "product-H2xH2-Z2", ["project_to_intersection"], c_intersection),
    check!("obtuse_comparison", "product-H2xH2-Z2", ["check_obtuse_comparison"], c_obtuse),
    check!("sublevel_flow_ratio", "product-H2xH2-Z2", ["sublevel_flow"], c_flow),
    check!("simplex_audits", "product-H2xH2-Z2", ["approximate_simplex", "simplex_limit"], c_simplex),
    check!("horo_coordinates", "product-H2xH2-Z2", ["horo_coordinates"], c_horo),
    check!("gradient_independence", "flat-orthogonal-k1", ["gradient_independence"], c_independence),
    check!("cone_injectivity", "flat-orthogonal-k1", ["cone_injectivity_audit"], c_injectivity),
    check!("cone_region_inverse", "product-H2xH2-Z2", ["cone_image_region", "horo_coordinates"], c_region),
    check!("large_corner_growth", "flat-orthogonal-k1", ["find_large_corner"], c_corner),
    check!("error_bound_on_orbit", "product-H2xH2-Z2", ["error_bound_audit"], c_error_bound),
    check!("root_and_monotone", "product-H2xH2-Z2", ["root_lemma_audit"], c_root),
    check!("degeneracy_probe", "degenerate-coincident", ["degeneracy_sequential_probe"], c_probe),
    check!("dimension_equality", "product-H2xH2-Z2", ["dimension_bound_assert"], c_dimension),
    check!("classification", "H2", ["classify"], c_classify),
    check!("axis_tracking", "H2-boost-axis", ["km_tracking"], c_tracking),
    check!("finite_set_center", "product-H2xH2-Z2", ["center_of_finite_set"], c_finite_center),
    check!("class_center_symmetric", "product-H2xH2-Z2", ["class_center_of_mass"], c_class_center),
    check!("horosphere_invariance", "product-H2xH2-Z2", ["horosphere_invariance_check"], c_invariance),
    check!("divergence_monotone", "product-H2xH2-Z2", ["divergence_monotonicity_check"], c_divergence),
    check!("heisenberg_center", "H3", ["center_of"], c_center_of),
    check!("zeta_heisenberg", "heisenberg-chain", ["zeta_map"], c_zeta),
    check!("virtual_classes", "random-lattices", ["virtual_class_of"], c_virtual),
    check!("bundled_complex", "bundled", ["build_class_complex", "half_dimension_report"], c_complex),
    check!("scenario_catalog", "catalog", ["list_scenarios"], c_scenarios),
    check!("small_run", "product-km-mixed", ["run"], c_run),
];

/// Runs every check in parallel, reporting in catalog order.
pub fn suite(seed: u64) -> Outcome {
    let results = hadamard::par::map(CHECKS, |c| (c.run)(seed));
    let mut checks = Table::new("verify", &["check", "scenario", "ops", "metric", "threshold", "pass"], 1);
    let mut verdicts = Vec::new();
    for (c, res) in CHECKS.iter().zip(results) {
        let (metric, threshold, detail) = match res {
            Ok((m, t)) => (m, t, String::new()),
            Err(e) => (f64::NAN, 0.0, format!("error: {e:#}")),
        };
        let pass = metric <= threshold;
        checks.push(row![c.name, c.scenario, c.ops.join(";"), metric, threshold, pass]);
        let detail = if detail.is_empty() { format!("{metric:e} <= {threshold:e}") } else { detail };
        verdicts.push(Verdict::new(c.name, pass, detail));
    }
    let mut coverage = Table::new("coverage", &["module", "op", "checks"], 2);
    let mut uncovered = Vec::new();
    for (module, op) in ALL_OPS {
        let by: Vec<&str> = CHECKS.iter().filter(|c| c.ops.contains(op)).map(|c| c.name).collect();
        if by.is_empty() {
            uncovered.push(*op);
        }
        coverage.push(row![*module, *op, by.join(";")]);
    }
    verdicts.push(Verdict::new(
        "coverage",
        uncovered.is_empty(),
        if uncovered.is_empty() { format!("{} ops covered", ALL_OPS.len()) } else { format!("uncovered: {}", uncovered.join(", ")) },
    ));
    Outcome { tables: vec![checks, coverage], verdicts }
}
