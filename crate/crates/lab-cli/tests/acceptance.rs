//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Oracles are computed here, independently of the audited code
//! paths, and tolerances are the published ones.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use abelian_complex::instance::InstanceFile;
use abelian_complex::{build_class_complex, half_dimension_report, AbelianLattice, HalfDimensionVerdict};
use anyhow::{anyhow, ensure, Result};
use hadamard::busemann::{
    minimize_series, series_rhs, weighted_series, BusemannFunction, FactorIsometry, Isometry, WordBall,
};
use hadamard::convex::{minimize_on_sphere, ProjectionOptions, SphereOptions};
use hadamard::dynamics::{center_of_finite_set, class_center_of_mass, km_tracking, BoundarySubset};
use hadamard::models::{BoundaryPoint, FactorIdeal, ModelSpace, Point};
use hadamard::simplex::{
    basepoint_audit, dimension_bound_assert, find_large_corner, horosphere_invariance_along_simplex, project_levels,
    sample_cone, simplex_limit, CornerOptions, SimplexSpec,
};
use hadamard::GeometryError;
use lab_cli::scenarios::{self, factor_parabolics, geometric, h2, h2xh2};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCHEDULE: [f64; 8] = [10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0, 1280.0];

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20_240_601);
    r.set_stream(stream);
    r
}

fn dirichlet(r: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..=k).map(|_| -(1.0 - r.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn rand_point(space: &ModelSpace, r: &mut ChaCha8Rng, scale: f64) -> Point {
    let c: Vec<f64> = (0..space.dim()).map(|_| r.gen_range(-scale..=scale)).collect();
    Point::from_slice(&c)
}

fn rand_unit(dim: usize, r: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| r.gen_range(-1.0..=1.0));
        let n = v.norm();
        if (1e-3..=1.0).contains(&n) {
            return v / n;
        }
    }
}

fn angle(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos()
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn direction(p: &BoundaryPoint) -> Result<DVector<f64>> {
    match p.ideals.as_slice() {
        [Some(FactorIdeal::Direction(d))] => Ok(d.clone()),
        _ => Err(anyhow!("not a Euclidean boundary point")),
    }
}

/// `θ` of a join over `(∞, ∞)` in `H² × H²`.
fn join_theta(p: &BoundaryPoint) -> Result<f64> {
    let inf = |i: &Option<FactorIdeal>| matches!(i, Some(FactorIdeal::Infinity) | None);
    ensure!(p.weights.len() == 2 && p.ideals.iter().all(inf), "not a join over (inf, inf)");
    Ok(p.weights[1].atan2(p.weights[0]))
}

fn join(theta: f64) -> BoundaryPoint {
    BoundaryPoint::join(theta, FactorIdeal::Infinity, FactorIdeal::Infinity).expect("join")
}

/// `H² × H²` with vertices at join angles `π/8, π/4, 3π/8` over `(∞, ∞)`.
fn product_k2() -> Result<(ModelSpace, SimplexSpec)> {
    let s = h2xh2();
    let spec = SimplexSpec::new(&s, vec![join(PI / 8.0), join(FRAC_PI_4), join(3.0 * PI / 8.0)], s.origin())?;
    Ok((s, spec))
}

fn scenario_spec(name: &str) -> Result<(ModelSpace, SimplexSpec, Vec<Isometry>)> {
    let g = geometric(name)?;
    let spec = g.spec.ok_or_else(|| anyhow!("{name} has no simplex"))?;
    Ok((g.space, spec, g.group))
}

fn levels(space: &ModelSpace, spec: &SimplexSpec, x: &Point) -> DVector<f64> {
    DVector::from_iterator(spec.vertices.len(), spec.vertices.iter().map(|h| h.value(space, x)))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

/// 1. Flat closed form `x₀ + R·normalize(Σ tᵢvᵢ)` for the sphere minimizer and
/// the limit directions.
fn flat_oracle() -> Result<Outcome> {
    let start = Instant::now();
    let mut r = rng(1);
    let opts = SphereOptions::default();
    let (mut worst_sphere, mut worst_limit) = (0.0f64, 0.0f64);
    for i in 0..500 {
        let k = 1 + i % 3;
        let n = k + 1 + r.gen_range(0..3);
        let space = ModelSpace::euclidean(n)?;
        let axis = rand_unit(n, &mut r);
        let vs: Vec<DVector<f64>> = (0..=k).map(|_| (&axis + rand_unit(n, &mut r) * 0.7 * r.gen::<f64>()).normalize()).collect();
        let x0 = rand_point(&space, &mut r, 5.0);
        let centers = vs.iter().map(|v| BoundaryPoint::single(FactorIdeal::Direction(v.clone()))).collect();
        let spec = SimplexSpec::new(&space, centers, x0.clone())?;
        let mix = |t: &[f64]| t.iter().zip(&vs).fold(DVector::zeros(n), |a, (ti, v)| a + v * *ti).normalize();

        let t = dirichlet(&mut r, k);
        let rad = r.gen_range(1.0..1000.0);
        let got = minimize_on_sphere(&space, &spec.combination(&t)?, &x0, rad, &opts)?.point;
        worst_sphere = worst_sphere.max((&x0.coords + mix(&t) * rad - got.coords).amax());

        let lim = simplex_limit(&space, &spec, &[10.0, 20.0, 40.0], 2, 1e-3, &opts)?;
        for (t, l) in lim.grid.iter().zip(&lim.limits) {
            worst_limit = worst_limit.max((direction(l)? - mix(t)).amax());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_sphere <= 1e-9 && worst_limit <= 1e-9 && secs < 30.0,
        format!("500 instances: sphere err {worst_sphere:.2e}, limit err {worst_limit:.2e}, {secs:.1}s"),
    )
}

/// Lipschitz constant of `t ↦ σ_R(t)/R` for the `L²` metric on `Δᵏ`,
/// recomputed from the samples as the angle at `x₀` over grid distance.
fn measured_lipschitz(space: &ModelSpace, spec: &SimplexSpec, grid: &[Vec<f64>], pts: &[Point]) -> f64 {
    let dirs: Vec<DVector<f64>> = pts.iter().map(|p| space.log(&spec.basepoint, p)).collect();
    let mut best: f64 = 0.0;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            best = best.max(angle(&dirs[i], &dirs[j]) / l2(&grid[i], &grid[j]));
        }
    }
    best
}

/// 2. `Lip(σ_R) ≤ 2√(k+1)` over the `m = 8` grid in all three model families.
fn lipschitz() -> Result<Outcome> {
    let start = Instant::now();
    let mut cases: Vec<(String, ModelSpace, SimplexSpec)> = Vec::new();
    for name in ["flat-orthogonal-k1", "flat-orthogonal-k2", "H2-parabolic-cusp", "product-H2xH2-Z2"] {
        let (s, spec, _) = scenario_spec(name)?;
        cases.push((name.into(), s, spec));
    }
    let h3 = ModelSpace::hyperbolic(3)?;
    let inf = BoundaryPoint::single(FactorIdeal::Infinity);
    cases.push(("H3-coincident".into(), h3.clone(), SimplexSpec::new(&h3, vec![inf.clone(), inf], h3.origin())?));
    let (s, spec) = product_k2()?;
    cases.push(("product-k2".into(), s, spec));
    let mut worst = f64::NEG_INFINITY;
    let mut lines = Vec::new();
    for (name, space, spec) in &cases {
        let bound = 2.0 * ((spec.k() + 1) as f64).sqrt();
        let lim = simplex_limit(space, spec, &SCHEDULE, 8, 1e-3, &SphereOptions::default())?;
        let l = lim
            .approximations
            .iter()
            .map(|a| measured_lipschitz(space, spec, &a.grid, &a.samples))
            .fold(0.0, f64::max);
        worst = worst.max(l - bound);
        lines.push(format!("{name} {l:.3}/{bound:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-6 && secs < 60.0, format!("{}; {secs:.1}s", lines.join(", ")))
}

/// 3. `|∇f_t| ∈ [1/√(k+1), 1]` with the pairwise angle precondition checked.
fn gradient_norms() -> Result<Outcome> {
    let mut r = rng(3);
    let mut specs: Vec<(ModelSpace, SimplexSpec)> = Vec::new();
    for name in ["flat-orthogonal-k1", "flat-orthogonal-k2", "product-H2xH2-Z2"] {
        let (s, spec, _) = scenario_spec(name)?;
        specs.push((s, spec));
    }
    specs.push(product_k2()?);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut fails = 0;
    for i in 0..1000 {
        let (space, spec) = &specs[i % specs.len()];
        let k = spec.k();
        for a in 0..=k {
            for b in a + 1..=k {
                ensure!(
                    space.tits_distance(&spec.vertices[a].center, &spec.vertices[b].center) <= FRAC_PI_2,
                    "precondition"
                );
            }
        }
        let t = dirichlet(&mut r, k);
        let x = rand_point(space, &mut r, 4.0);
        let g = spec.vertices.iter().zip(&t).fold(DVector::zeros(space.dim()), |acc, (h, ti)| acc + h.gradient(space, &x) * *ti);
        let n = g.norm();
        let floor = 1.0 / ((k + 1) as f64).sqrt();
        let checked = spec.combination(&t)?.gradient_checked(space, &x);
        fails += usize::from(!(n >= floor - 1e-9 && n <= 1.0 + 1e-9 && checked.angles_ok));
        lo = lo.min(n / floor);
        hi = hi.max(n);
    }
    outcome(fails == 0, format!("1000 samples, {fails} outside; min |g|·sqrt(k+1) = {lo:.6}, max |g| = {hi:.6}"))
}

/// 4. `d(σ_R^{x₀}(t), σ_R^{y}(t)) ≤ D + √(2DR + D²)` and limits within `1e−3`.
fn basepoint_independence() -> Result<Outcome> {
    let mut r = rng(4);
    let opts = SphereOptions::default();
    let names = ["flat-orthogonal-k1", "flat-orthogonal-k2", "H2-parabolic-cusp", "product-H2xH2-Z2"];
    let (mut worst_excess, mut worst_angle) = (f64::NEG_INFINITY, 0.0f64);
    for i in 0..50 {
        let (space, spec, _) = scenario_spec(names[i % names.len()])?;
        let spec = spec.rebased(&space, rand_point(&space, &mut r, 2.0));
        let y = space.exp(&spec.basepoint, &(rand_unit(space.dim(), &mut r) * r.gen_range(0.1..5.0)));
        let d = space.distance(&spec.basepoint, &y);
        ensure!(d <= 5.0 + 1e-12, "D = {d} exceeds 5");
        let lim = simplex_limit(&space, &spec, &SCHEDULE, 4, 1e-3, &opts)?;
        let rep = basepoint_audit(&space, &spec, &lim, &y, &opts)?;
        for row in &rep.rows {
            let bound = d + (2.0 * d * row.r + d * d).sqrt();
            ensure!((row.bound - bound).abs() <= 1e-9 * bound, "bound mismatch");
            worst_excess = worst_excess.max(row.lhs - bound);
        }
        worst_angle = worst_angle.max(rep.limit_angle);
    }
    outcome(
        worst_excess <= 0.0 && worst_angle <= 1e-3,
        format!("50 pairs: max(lhs - bound) = {worst_excess:.3e}, max limit angle = {worst_angle:.3e}"),
    )
}

/// 5. `Td(σ(t), ξᵢ) ≤ π/2 − α` with `Td` on the `(∞,∞)` quarter arc equal to `|Δθ|`.
fn diameter() -> Result<Outcome> {
    let mut worst = f64::NEG_INFINITY;
    let (s, k1, _) = scenario_spec("product-H2xH2-Z2")?;
    let (s2, k2) = product_k2()?;
    for (space, spec) in [(&s, &k1), (&s2, &k2)] {
        let thetas: Vec<f64> = spec.vertices.iter().map(|h| join_theta(&h.center)).collect::<Result<_>>()?;
        let spread = thetas.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - thetas.iter().cloned().fold(f64::INFINITY, f64::min);
        let bound = FRAC_PI_2 - (FRAC_PI_2 - spread);
        let lim = simplex_limit(space, spec, &SCHEDULE, 8, 1e-3, &SphereOptions::default())?;
        for l in &lim.limits {
            let th = join_theta(l)?;
            for t in &thetas {
                worst = worst.max((th - t).abs() - bound);
            }
        }
    }
    outcome(worst <= 1e-3, format!("max(Td - (pi/2 - alpha)) = {worst:.3e} over both product scenarios"))
}

/// Points of the truncated cone `σ_R(t)`, `R ∈ [1, 20]`.
fn cone_point(space: &ModelSpace, spec: &SimplexSpec, r: &mut ChaCha8Rng) -> Result<Point> {
    let t = dirichlet(r, spec.k());
    let rad = r.gen_range(1.0..20.0);
    Ok(minimize_on_sphere(space, &spec.combination(&t)?, &spec.basepoint, rad, &SphereOptions::default())?.point)
}

/// 6. Root lemma, monotonicity, error bound and contraction of `p(b, ·)`.
fn projection_lemmas() -> Result<Outcome> {
    let (space, spec, group) = scenario_spec("product-H2xH2-Z2")?;
    let po = ProjectionOptions::default();
    let mut r = rng(6);
    let orbit: Vec<Point> = WordBall::new(&space, &group, 6).elements.iter().map(|(g, _, _)| g.apply(&space, &spec.basepoint)).collect();
    let mut worst = [f64::NEG_INFINITY; 4];
    for _ in 0..200 {
        let x = rand_point(&space, &mut r, 2.0);
        let a = DVector::from_fn(2, |_, _| r.gen_range(-4.0..1.0));
        let b = DVector::from_fn(2, |i, _| a[i] - r.gen_range(0.0..2.0));
        let l1 = (&a - &b).lp_norm(1);
        let xa = project_levels(&space, &spec, &a, &x, &po)?.point;
        let xb = project_levels(&space, &spec, &b, &x, &po)?.point;
        let xab = project_levels(&space, &spec, &b, &xa, &po)?.point;
        let dxa = space.distance(&x, &xa);
        worst[0] = worst[0].max(space.distance(&xa, &xb) - (2.0 * dxa * l1 + l1 * l1).sqrt());
        worst[1] = worst[1].max(space.distance(&xa, &xab) - l1);

        let bw = levels(&space, &spec, &cone_point(&space, &spec, &mut r)?);
        let base = &orbit[r.gen_range(0..orbit.len())];
        let xn = space.exp(base, &(rand_unit(space.dim(), &mut r) * r.gen_range(0.0..2.0)));
        let p = project_levels(&space, &spec, &bw, &xn, &po)?.point;
        let lhs = (levels(&space, &spec, &p) - &bw).amax();
        let rhs = orbit.iter().map(|o| space.distance(&xn, o)).fold(f64::INFINITY, f64::min);
        worst[2] = worst[2].max(lhs - rhs);

        let y = rand_point(&space, &mut r, 2.0);
        let px = project_levels(&space, &spec, &bw, &x, &po)?.point;
        let py = project_levels(&space, &spec, &bw, &y, &po)?.point;
        worst[3] = worst[3].max(space.distance(&px, &py) - space.distance(&x, &y));
    }
    outcome(
        worst.iter().all(|w| *w <= 1e-6),
        format!(
            "200 each, max excess: root {:.2e}, monotone {:.2e}, error bound {:.2e}, contraction {:.2e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

/// 7. `h⃗(p(b, x₀)) = b` on the cone image.
fn cone_inverse() -> Result<Outcome> {
    let mut r = rng(7);
    let po = ProjectionOptions::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["flat-orthogonal-k1", "flat-orthogonal-k2", "H2-parabolic-cusp", "product-H2xH2-Z2", "degenerate-coincident"] {
        let (space, spec, _) = scenario_spec(name)?;
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let b = levels(&space, &spec, &cone_point(&space, &spec, &mut r)?);
            let p = project_levels(&space, &spec, &b, &spec.basepoint, &po)?.point;
            worst = worst.max((levels(&space, &spec, &p) - b).amax());
        }
        ok &= worst <= 1e-7;
        lines.push(format!("{name} {worst:.1e}"));
    }
    outcome(ok, format!("200 points each: {}", lines.join(", ")))
}

/// Membership of `b` in the cone image truncated at `r_max`, by projection.
fn in_image(space: &ModelSpace, spec: &SimplexSpec, b: &DVector<f64>, r_max: f64) -> Result<bool> {
    let p = project_levels(space, spec, b, &spec.basepoint, &ProjectionOptions::default())?.point;
    Ok((levels(space, spec, &p) - b).amax() <= 1e-7 && space.distance(&spec.basepoint, &p) <= r_max * (1.0 + 1e-12))
}

/// 8. Corner scale grows over four doublings of `r_max`; the coincident
/// control stays below 10 cells.
fn large_corners() -> Result<Outcome> {
    let (so, po) = (SphereOptions::default(), ProjectionOptions::default());
    let copts = CornerOptions::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["flat-orthogonal-k1", "product-H2xH2-Z2"] {
        let (space, spec, _) = scenario_spec(name)?;
        let mut ls = Vec::new();
        let mut last = None;
        for r_max in [8.0, 16.0, 32.0, 64.0] {
            let rep = find_large_corner(&space, &spec, r_max, r_max, &copts, &so, &po)?;
            ls.push(rep.largest);
            last = Some((rep, r_max));
        }
        ok &= ls.windows(2).all(|w| w[1] > w[0]);
        let (rep, r_max) = last.expect("four radii");
        let a = rep.largest_corner.clone().ok_or_else(|| anyhow!("{name}: no corner"))?;
        let cells = rep.largest / copts.delta;
        let steps = cells.round() as usize;
        let mut checked = 0;
        for n0 in (0..=steps).step_by((steps / 8).max(1)) {
            for n1 in (0..=steps - n0).step_by((steps / 8).max(1)) {
                let b = DVector::from_vec(vec![a[0] - copts.delta * n0 as f64, a[1] - copts.delta * n1 as f64]);
                ensure!(in_image(&space, &spec, &b, r_max)?, "{name}: lattice point {b:?} outside the image");
                checked += 1;
            }
        }
        lines.push(format!("{name} L = {ls:?} ({checked} corner points rechecked)"));
    }
    let (space, spec, _) = scenario_spec("degenerate-coincident")?;
    let deg = find_large_corner(&space, &spec, 64.0, 64.0, &copts, &so, &po)?;
    ok &= deg.cells() < 10.0;
    lines.push(format!("degenerate {} cells", deg.cells()));
    outcome(ok, lines.join("; "))
}

/// 9. Sublinear tracking for (boost, parabolic), exact tracking on an axis,
/// and rejection of a parabolic.
fn karlsson_margulis() -> Result<Outcome> {
    let start = Instant::now();
    let g = geometric("product-km-mixed")?;
    let iso = g.isometry.ok_or_else(|| anyhow!("no isometry"))?;
    let space = &g.space;
    let y = space.origin();
    let tr = km_tracking(space, &iso, &y, 10_000)?;
    let k = 10_000u64;
    let yk = (0..k).fold(y.clone(), |p, _| iso.apply(space, &p));
    let ck = space.exp(&y, &(&tr.direction * (tr.a * k as f64)));
    let ratio = space.distance(&yk, &ck) / k as f64;
    let reported = tr.final_ratio();
    let mixed_ok = ratio < 0.01 && (ratio - reported).abs() <= 1e-9 && tr.tail_nonincreasing;

    let axis = geometric("H2-boost-axis")?;
    let b = axis.isometry.ok_or_else(|| anyhow!("no isometry"))?;
    let ta = km_tracking(&axis.space, &b, &axis.space.origin(), 10_000)?;
    let axis_max = ta.ratios.iter().map(|r| r.1).fold(0.0, f64::max);

    let cusp = geometric("H2-parabolic-cusp")?;
    let p = cusp.isometry.ok_or_else(|| anyhow!("no isometry"))?;
    let rejected = matches!(km_tracking(&cusp.space, &p, &cusp.space.origin(), 10_000), Err(GeometryError::Precondition(_)));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mixed_ok && axis_max < 1e-9 && rejected && secs < 60.0,
        format!(
            "mixed ratio {ratio:.3e} (tail nonincreasing {}), axis max {axis_max:.1e}, parabolic rejected {rejected}, {secs:.1}s",
            tr.tail_nonincreasing
        ),
    )
}

/// Argmin over a `1e−3` grid of `θ ↦ max_i |θ − θᵢ|` on a circle.
fn circle_grid_center(thetas: &[f64]) -> f64 {
    let dist = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    let steps = (2.0 * PI / 1e-3) as usize;
    (0..steps)
        .map(|i| i as f64 * 1e-3)
        .map(|th| (thetas.iter().map(|t| dist(th, *t)).fold(0.0, f64::max), th))
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
        .1
}

/// Minimum of the radius function over a `1e−3` grid in a spherical chart
/// around `axis` on `S²`.
fn sphere_grid_radius(pts: &[DVector<f64>], axis: &DVector<f64>) -> f64 {
    let e1 = rand_perp(axis);
    let e2 = axis.cross(&e1);
    let mut best = f64::INFINITY;
    let n = 800;
    for i in -n..=n {
        for j in -n..=n {
            let (a, b) = (i as f64 * 1e-3, j as f64 * 1e-3);
            let v = (axis * (1.0 - 0.5 * (a * a + b * b)).max(0.0) + &e1 * a + &e2 * b).normalize();
            let rad = pts.iter().map(|p| angle(&v, p)).fold(0.0, f64::max);
            best = best.min(rad);
        }
    }
    best
}

fn rand_perp(v: &DVector<f64>) -> DVector<f64> {
    let trial = if v[0].abs() < 0.9 { DVector::from_vec(vec![1.0, 0.0, 0.0]) } else { DVector::from_vec(vec![0.0, 1.0, 0.0]) };
    (&trial - v * v.dot(&trial)).normalize()
}

/// 10. Finite-set centers against grid oracles; finite-index invariance and
/// the symmetric class center.
fn centers() -> Result<Outcome> {
    let mut r = rng(10);
    let e2 = ModelSpace::euclidean(2)?;
    let e3 = ModelSpace::euclidean(3)?;
    let prod = h2xh2();
    let mut worst_loc: f64 = 0.0;
    let mut worst_rad: f64 = 0.0;
    for i in 0..50 {
        let size = r.gen_range(2..=5);
        if i < 20 {
            let base = r.gen_range(0.0..2.0 * PI);
            let th: Vec<f64> = (0..size).map(|_| base + r.gen_range(0.0..FRAC_PI_2)).collect();
            let set: Vec<BoundaryPoint> =
                th.iter().map(|t| BoundaryPoint::single(FactorIdeal::Direction(DVector::from_vec(vec![t.cos(), t.sin()])))).collect();
            let c = direction(&center_of_finite_set(&e2, &set)?.center)?;
            let oracle = circle_grid_center(&th);
            worst_loc = worst_loc.max(angle(&c, &DVector::from_vec(vec![oracle.cos(), oracle.sin()])));
        } else if i < 30 {
            let axis = rand_unit(3, &mut r);
            let pts: Vec<DVector<f64>> =
                (0..size).map(|_| (&axis + rand_unit(3, &mut r) * 0.7 * r.gen::<f64>()).normalize()).collect();
            let set: Vec<BoundaryPoint> = pts.iter().map(|p| BoundaryPoint::single(FactorIdeal::Direction(p.clone()))).collect();
            let res = center_of_finite_set(&e3, &set)?;
            let c = direction(&res.center)?;
            let rad = pts.iter().map(|p| angle(&c, p)).fold(0.0, f64::max);
            let grid = sphere_grid_radius(&pts, &axis);
            ensure!(rad <= grid + 1e-9, "center radius {rad} above the grid minimum {grid}");
            worst_rad = worst_rad.max(grid - rad);
        } else {
            let th: Vec<f64> = (0..size).map(|_| r.gen_range(0.0..FRAC_PI_2)).collect();
            let set: Vec<BoundaryPoint> = th.iter().map(|t| join(*t)).collect();
            let c = join_theta(&center_of_finite_set(&prod, &set)?.center)?;
            worst_loc = worst_loc.max((c - circle_grid_center(&th)).abs());
        }
    }
    let opts = vec![FactorIdeal::Infinity, FactorIdeal::Finite(DVector::from_vec(vec![0.0]))];
    let fan = BoundarySubset::Join { factor_options: vec![opts.clone(), opts], steps: 16 };
    let gens = factor_parabolics(&prod);
    let doubled: Vec<Isometry> = gens.iter().map(|g| g.power(2)).collect();
    let a = class_center_of_mass(&prod, &gens, &fan, 3)?;
    let a2 = class_center_of_mass(&prod, &doubled, &fan, 3)?;
    let drift = prod.tits_distance(&a.center, &a2.center);
    let sym = (join_theta(&a.center)? - FRAC_PI_4).abs();
    outcome(
        worst_loc <= 1e-3 && worst_rad <= 1e-3 && drift <= 1e-4 && sym <= 1e-6 && a.certificate_ok,
        format!(
            "50 sets: location err {worst_loc:.1e}, S^2 radius gap {worst_rad:.1e}; A vs 2A {drift:.1e}; theta - pi/4 = {sym:.1e}"
        ),
    )
}

/// 11. Catalog generators preserve the vertex horospheres and the class
/// center horosphere; the reconstructed limit horospheres along the simplex
/// are preserved too.
fn horosphere_invariance() -> Result<Outcome> {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    let mut along: f64 = 0.0;
    for name in ["flat-orthogonal-k1", "flat-orthogonal-k2", "H2-parabolic-cusp", "product-H2xH2-Z2"] {
        let (space, spec, group) = scenario_spec(name)?;
        let mut hs: Vec<BusemannFunction> = spec.vertices.clone();
        if name == "product-H2xH2-Z2" {
            hs.push(BusemannFunction::new(&space, join(FRAC_PI_4), space.origin())?);
        }
        let pts: Vec<Point> = (0..500).map(|_| rand_point(&space, &mut r, 3.0)).collect();
        for g in &group {
            for h in &hs {
                for x in &pts {
                    worst = worst.max((h.value(&space, &g.apply(&space, x)) - h.value(&space, x)).abs());
                }
            }
        }
        let samples: Vec<Point> = pts.iter().take(10).cloned().collect();
        for t in hadamard::simplex::barycentric_grid(spec.k(), 2) {
            let d = horosphere_invariance_along_simplex(&space, &spec, &t, 1280.0, &group, &samples, &SphereOptions::default())?;
            along = along.max(d);
        }
    }
    outcome(worst < 1e-7 && along <= 1e-5, format!("max drift {worst:.1e} over 500 samples; along the simplex {along:.1e}"))
}

/// 12. `n ≥ k + 1 + r` with equality on the product, strictly on the padded
/// flat scenarios, and the over-rank flag.
fn dimension_bound() -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, rank, equality) in [("product-H2xH2-Z2", 2, true), ("flat-orthogonal-k2", 1, false), ("flat-orthogonal-k1", 1, false)] {
        let (space, spec, group) = scenario_spec(name)?;
        ensure!(group.len() == rank, "{name}: rank");
        let cone = sample_cone(&space, &spec, &[10.0, 20.0, 40.0], 12, &SphereOptions::default())?;
        let rep = dimension_bound_assert(&space, &spec, &group, rank, &cone);
        let expect_n = spec.k() + 1 + rank;
        let this = rep.applicable && rep.holds && rep.equality == equality && (space.dim() == expect_n) == equality;
        ok &= this && space.dim() >= expect_n;
        lines.push(format!(
            "{name} {} vs {}+1+{rank} (applicable {} [defect {:.1e}, certified {}], holds {}, equality {})",
            space.dim(),
            spec.k(),
            rep.applicable,
            rep.invariance_defect,
            rep.certified_points,
            rep.holds,
            rep.equality
        ));
    }
    let model = build_class_complex(&InstanceFile::bundled().lattice_chains()?)?;
    let flagged = half_dimension_report(&model)
        .into_iter()
        .find(|r| r.chain == "flag-Z1Z2Z3-n4")
        .ok_or_else(|| anyhow!("flagged chain missing"))?;
    ok &= flagged.verdict == HalfDimensionVerdict::RequiresDegeneracy;
    lines.push(format!("flag-Z1Z2Z3-n4 {:?}", flagged.verdict));
    outcome(ok, lines.join("; "))
}

/// 13. Descent minimum of the truncated series against `Σ ω(γ)|γ|`, with
/// translation lengths read off the words.
fn series_infimum() -> Result<Outcome> {
    let cusp = h2();
    let prod = h2xh2();
    let boost = Isometry::single(FactorIsometry::boost(2, 1.0));
    let cases: Vec<(&str, &ModelSpace, Vec<Isometry>, f64, Point)> = vec![
        ("cusp-parabolic", &cusp, vec![Isometry::single(scenarios::parabolic())], 0.0, Point::from_slice(&[0.3, 0.0])),
        ("product-parabolics", &prod, factor_parabolics(&prod), 0.0, Point::from_slice(&[0.3, 0.0, -0.2, 0.5])),
        ("boost-axis", &cusp, vec![boost], 1.0, Point::from_slice(&[0.8, 0.3])),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, space, gens, ell, x0) in cases {
        let ball = WordBall::new(space, &gens, 6);
        let c = 2.0;
        let all = |_: &Isometry| true;
        let (x, min) = minimize_series(space, &ball, c, &all, &x0, 5000)?;
        let tail = weighted_series(space, &ball, c, &all, &x)?.tail_bound;
        let words: std::collections::HashMap<Vec<i32>, f64> =
            ball.elements.iter().map(|(_, _, w)| (w.clone(), ell * w.iter().map(|l| l.signum() as f64).sum::<f64>().abs())).collect();
        let rhs = series_rhs(&ball, c, &all, &|g: &Isometry| {
            ball.elements.iter().find(|(h, _, _)| h.approx_eq(g, 1e-10)).map_or(f64::NAN, |(_, _, w)| words[w])
        });
        let gap = (min - rhs).abs();
        ok &= gap <= tail + 1e-6;
        lines.push(format!("{name} |min - rhs| = {gap:.2e} (tail {tail:.1e})"));
    }
    outcome(ok, lines.join("; "))
}

/// 14. Rank assertions on the bundled chains, recomputed per chain, and
/// virtual-class idempotence.
fn complex_combinatorics() -> Result<Outcome> {
    let chains = InstanceFile::bundled().lattice_chains()?;
    let model = build_class_complex(&chains)?;
    let mut bad = Vec::new();
    for c in &chains {
        let mut classes = Vec::new();
        for l in &c.lattices {
            let v = l.virtual_class()?;
            if classes.last() != Some(&v) {
                classes.push(v);
            }
        }
        for (k, v) in classes.iter().enumerate() {
            if v.rank() < k + 1 {
                bad.push(format!("{}: rank {} at step {k}", c.name, v.rank()));
            }
        }
        let top = classes.last().map_or(0, |v| v.rank());
        if classes.len() > top {
            bad.push(format!("{}: dimension {} vs rank {top}", c.name, classes.len() - 1));
        }
    }
    let mut r = rng(14);
    let mut idem_fail = 0;
    let mut n = 0;
    while n < 100 {
        let d = r.gen_range(2..=5);
        let rk = r.gen_range(1..=d);
        let rows: Vec<Vec<i128>> = (0..rk).map(|_| (0..d).map(|_| r.gen_range(-6i128..=6)).collect()).collect();
        let l = AbelianLattice::from_rows(d, &rows)?;
        if l.rank() != rk {
            continue;
        }
        n += 1;
        let v = l.virtual_class()?;
        let m: i128 = r.gen_range(2..=7);
        let same = v.lattice().virtual_class()? == v && l.scaled(m)?.virtual_class()? == v && v.rank() == rk;
        idem_fail += usize::from(!same);
    }
    outcome(
        bad.is_empty() && model.rank_violations().is_empty() && model.dimension < model.max_rank && idem_fail == 0,
        format!(
            "{} chains, {} simplices, {} rank failures; idempotence failures {idem_fail}/100",
            chains.len(),
            model.simplices.len(),
            bad.len()
        ),
    )
}

fn scratch(tag: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("lab-acceptance-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&p);
    p
}

fn csv_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p)?));
        }
    }
    out.sort();
    Ok(out)
}

/// 15. Two `lab verify` runs with the same seed write identical CSV bytes.
fn determinism() -> Result<Outcome> {
    let bin = env!("CARGO_BIN_EXE_lab");
    let mut runs = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "4")] {
        let dir = scratch(tag);
        let st = Command::new(bin)
            .args(["verify", "--seed", "7", "--out"])
            .arg(&dir)
            .env("LAB_THREADS", threads)
            .output()?;
        ensure!(st.status.success(), "lab verify failed: {}", String::from_utf8_lossy(&st.stdout));
        runs.push(csv_files(&dir)?);
        std::fs::remove_dir_all(&dir)?;
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    outcome(
        runs[0] == runs[1] && names.contains(&"coverage.csv"),
        format!("{} CSV files compared ({}), LAB_THREADS 1 vs 4", names.len(), names.join(", ")),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 15] = [
        ("flat-space oracle", flat_oracle),
        ("Lipschitz bound", lipschitz),
        ("gradient norm bounds", gradient_norms),
        ("basepoint independence", basepoint_independence),
        ("diameter bound", diameter),
        ("projection lemmas", projection_lemmas),
        ("Busemann-cone inverse", cone_inverse),
        ("large corners", large_corners),
        ("Karlsson-Margulis tracking", karlsson_margulis),
        ("centers of mass", centers),
        ("horosphere invariance", horosphere_invariance),
        ("dimension bound", dimension_bound),
        ("series infimum", series_infimum),
        ("complex combinatorics", complex_combinatorics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e:#}") });
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {:>2} {name}: {} ({}) [{secs:.1}s]", i + 1, if res.pass { "PASS" } else { "FAIL" }, res.detail);
        failed += usize::from(!res.pass);
    }
    println!("acceptance: {} of 15 passed", 15 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
