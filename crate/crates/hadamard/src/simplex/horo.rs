//! Horospherical coordinates `h⃗ = (h₀,…,h_k)`, the projections `p(b, ·)` to
//! `{h⃗ ≤ b}`, and the audits built on them.

use nalgebra::{DMatrix, DVector};

use super::{ConeSamples, SimplexSpec};
use crate::busemann::{ConvexCombination, Isometry};
use crate::convex::{
    minimize_on_sphere, project_to_intersection, HoroballIntersection, Objective, ProjectionOptions,
    ProjectionResult, SphereOptions,
};
use crate::models::{ModelSpace, Point};
use crate::{GeometryError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HoroCoordinates {
    pub values: DVector<f64>,
}

pub fn horo_coordinates(space: &ModelSpace, spec: &SimplexSpec, x: &Point) -> HoroCoordinates {
    HoroCoordinates { values: DVector::from_iterator(spec.vertices.len(), spec.vertices.iter().map(|h| h.value(space, x))) }
}

/// `|h⃗(x) − h⃗(y)|_∞ − d(x, y)`, nonpositive for a contraction.
pub fn horo_contraction_gap(space: &ModelSpace, spec: &SimplexSpec, x: &Point, y: &Point) -> f64 {
    let a = horo_coordinates(space, spec, x).values;
    let b = horo_coordinates(space, spec, y).values;
    (a - b).amax() - space.distance(x, y)
}

/// Whether the vertex gradients at `x` are linearly independent, decided by
/// the smallest singular value of their frame matrix exceeding `1e−8`.
pub fn gradient_independence(space: &ModelSpace, spec: &SimplexSpec, x: &Point) -> (bool, f64) {
    let cols: Vec<DVector<f64>> = spec.vertices.iter().map(|h| h.gradient(space, x)).collect();
    if cols.len() > space.dim() {
        return (false, 0.0);
    }
    let m = DMatrix::from_columns(&cols);
    let smin = m.singular_values().min();
    (smin > 1e-8, smin)
}

/// `p(b, x)`, the closest point to `x` of `{h⃗ ≤ b}`.
pub fn project_levels(
    space: &ModelSpace,
    spec: &SimplexSpec,
    b: &DVector<f64>,
    x: &Point,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    if b.len() != spec.vertices.len() {
        return Err(GeometryError::Invalid("level vector length differs from vertex count".into()));
    }
    let c = HoroballIntersection::from_levels(&spec.vertices, b.as_slice());
    project_to_intersection(space, &c, x, opts)
}

/// `d(p(b,x), p(b,y))` and `d(x, y)`.
pub fn projection_contraction(
    space: &ModelSpace,
    spec: &SimplexSpec,
    b: &DVector<f64>,
    x: &Point,
    y: &Point,
    opts: &ProjectionOptions,
) -> Result<(f64, f64)> {
    let px = project_levels(space, spec, b, x, opts)?.point;
    let py = project_levels(space, spec, b, y, opts)?.point;
    Ok((space.distance(&px, &py), space.distance(x, y)))
}

#[derive(Debug, Clone, Copy)]
pub struct RootReport {
    /// `d(p(a,x), p(b,x))`.
    pub lhs: f64,
    /// `√(2d(x,p(a,x))|a−b|₁ + |a−b|₁²)`.
    pub bound: f64,
    /// `d(x_a, x_{ab})` with `x_a = p(a,x)` and `x_{ab} = p(b, x_a)`.
    pub monotone_lhs: f64,
    /// `|a − b|₁`.
    pub monotone_bound: f64,
}

impl RootReport {
    pub fn root_ok(&self) -> bool {
        self.lhs <= self.bound + 1e-6
    }

    pub fn monotone_ok(&self) -> bool {
        self.monotone_lhs <= self.monotone_bound + 1e-6
    }
}

/// Evaluates both projection estimates for `b ≤ a`.
pub fn root_lemma_audit(
    space: &ModelSpace,
    spec: &SimplexSpec,
    a: &DVector<f64>,
    b: &DVector<f64>,
    x: &Point,
    opts: &ProjectionOptions,
) -> Result<RootReport> {
    if a.len() != b.len() || a.iter().zip(b.iter()).any(|(ai, bi)| bi > ai) {
        return Err(GeometryError::Precondition("root lemma needs b ≤ a componentwise".into()));
    }
    let xa = project_levels(space, spec, a, x, opts)?.point;
    let xb = project_levels(space, spec, b, x, opts)?.point;
    let xab = project_levels(space, spec, b, &xa, opts)?.point;
    let l1 = (a - b).lp_norm(1);
    let dxa = space.distance(x, &xa);
    Ok(RootReport {
        lhs: space.distance(&xa, &xb),
        bound: (2.0 * dxa * l1 + l1 * l1).sqrt(),
        monotone_lhs: space.distance(&xa, &xab),
        monotone_bound: l1,
    })
}

/// Largest `|hᵢ(γy) − hᵢ(y)|` over vertices, generators and points.
fn invariance_defect(space: &ModelSpace, spec: &SimplexSpec, group: &[Isometry], points: &[&Point]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in group {
        for p in points {
            let gp = g.apply(space, p);
            for h in &spec.vertices {
                worst = worst.max((h.value(space, &gp) - h.value(space, p)).abs());
            }
        }
    }
    worst
}

const INVARIANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct ErrorBoundReport {
    /// The group preserves every `hᵢ` within `1e−8` on the audited points.
    pub applicable: bool,
    pub invariance_defect: f64,
    /// `|h⃗(p(b,x)) − b|_∞`; NaN when inapplicable.
    pub lhs: f64,
    /// `d(x, A·x₀)` over the supplied orbit points; NaN when inapplicable.
    pub rhs: f64,
}

impl ErrorBoundReport {
    pub fn ok(&self) -> bool {
        self.applicable && self.lhs <= self.rhs + 1e-6
    }
}

/// Compares `|h⃗(p(b,x)) − b|_∞` with the distance from `x` to the orbit,
/// after auditing that the generators preserve the vertex functions.
pub fn error_bound_audit(
    space: &ModelSpace,
    spec: &SimplexSpec,
    b: &DVector<f64>,
    group: &[Isometry],
    orbit: &[Point],
    x: &Point,
    opts: &ProjectionOptions,
) -> Result<ErrorBoundReport> {
    if orbit.is_empty() {
        return Err(GeometryError::Invalid("orbit sample is empty".into()));
    }
    let mut pts: Vec<&Point> = orbit.iter().collect();
    pts.push(x);
    let defect = invariance_defect(space, spec, group, &pts);
    if defect > INVARIANCE_TOL {
        return Ok(ErrorBoundReport { applicable: false, invariance_defect: defect, lhs: f64::NAN, rhs: f64::NAN });
    }
    let p = project_levels(space, spec, b, x, opts)?.point;
    let lhs = (horo_coordinates(space, spec, &p).values - b).amax();
    let rhs = orbit.iter().map(|y| space.distance(x, y)).fold(f64::INFINITY, f64::min);
    Ok(ErrorBoundReport { applicable: true, invariance_defect: defect, lhs, rhs })
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    /// The last ratio must fall below this.
    pub final_max: f64,
    /// Each ratio must be at most `decay` times the previous one.
    pub decay: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { final_max: 0.02, decay: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    /// `d(qᵢ, σ_{Rᵢ}(t)) / Rᵢ`.
    pub ratios: Vec<f64>,
    /// The ratios decay as configured: a finite-scale sign of degeneracy.
    pub degeneracy_consistent: bool,
}

/// Sublinearity test of `d(qᵢ, σ_{Rᵢ}(t))` for candidate boundary samples.
pub fn degeneracy_sequential_probe(
    space: &ModelSpace,
    path: &[(f64, Point)],
    candidates: &[Point],
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if path.len() != candidates.len() || path.is_empty() {
        return Err(GeometryError::Invalid("need one candidate per radius".into()));
    }
    let ratios: Vec<f64> = path.iter().zip(candidates).map(|((r, p), q)| space.distance(p, q) / r).collect();
    let decays = ratios.windows(2).all(|w| w[1] <= opts.decay * w[0] + 1e-12);
    let last = *ratios.last().expect("nonempty");
    Ok(ProbeReport { degeneracy_consistent: decays && last < opts.final_max, ratios })
}

#[derive(Debug, Clone, Copy)]
pub struct DimensionReport {
    pub applicable: bool,
    pub invariance_defect: f64,
    /// Grid points certified non-degenerate at the largest sampled radius.
    pub certified_points: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    /// `n ≥ k + 1 + r`.
    pub holds: bool,
    pub equality: bool,
}

/// Checks `dim ≥ k + 1 + r` for an abelian group of rank `r` preserving the
/// vertex horospheres, given a cone sample with a certified grid point.
pub fn dimension_bound_assert(
    space: &ModelSpace,
    spec: &SimplexSpec,
    group: &[Isometry],
    rank: usize,
    cone: &ConeSamples,
) -> DimensionReport {
    let last = cone.approximations.len() - 1;
    let mut pts: Vec<&Point> = cone.approximations[last].samples.iter().collect();
    pts.push(&spec.basepoint);
    let defect = invariance_defect(space, spec, group, &pts);
    let certified_points = cone.nondegenerate[last].iter().filter(|&&c| c).count();
    let (n, k) = (space.dim(), spec.k());
    DimensionReport {
        applicable: defect <= INVARIANCE_TOL && certified_points > 0,
        invariance_defect: defect,
        certified_points,
        n,
        k,
        r: rank,
        holds: n >= k + 1 + rank,
        equality: n == k + 1 + rank,
    }
}

/// Distance from `x` to `{f ≤ s}` for a convex combination of Busemann
/// functions with pairwise angles at most `π/2`.
///
/// Solves `min_{S_x(r)} f = s` for `r` by safeguarded Newton steps, using
/// that the minimum decreases in `r` with slope `−|∇f|` at the minimizer and
/// that `|∇f| ∈ [1/√(k+1), 1]` brackets the root.
pub fn sublevel_distance(
    space: &ModelSpace,
    f: &ConvexCombination,
    x: &Point,
    s: f64,
    opts: &SphereOptions,
) -> Result<f64> {
    let gap = Objective::value(f, space, x) - s;
    if gap <= 0.0 {
        return Ok(0.0);
    }
    let mut lo = gap * (1.0 - 1e-12);
    let mut hi = gap * (f.parts.len() as f64).sqrt() * (1.0 + 1e-12);
    let mut r = lo;
    let tol = 1e-12 * s.abs().max(1.0);
    for _ in 0..200 {
        let res = minimize_on_sphere(space, f, x, r, opts)?;
        let e = res.value - s;
        if e.abs() <= tol {
            return Ok(r);
        }
        if e > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        if hi - lo <= 1e-13 * hi {
            return Ok(0.5 * (lo + hi));
        }
        let slope = Objective::gradient(f, space, &res.point).norm();
        let next = r + e / slope;
        r = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    Err(GeometryError::NonConvergence { iterations: 200, residual: hi - lo, best: None })
}

/// Reconstruction of the Busemann function at a limit point `σ(t)` from the
/// sublevel set of `f_t` through `σ_R(t)`:
/// `x ↦ d(x, {f_t ≤ s}) − d(x₀, {f_t ≤ s})` with `s = f_t(σ_R(t))`.
#[derive(Debug, Clone)]
pub struct LimitBusemann {
    pub f: ConvexCombination,
    pub basepoint: Point,
    pub level: f64,
    base_distance: f64,
}

impl LimitBusemann {
    pub fn new(space: &ModelSpace, spec: &SimplexSpec, t: &[f64], r: f64, opts: &SphereOptions) -> Result<Self> {
        let f = spec.combination(t)?;
        let p = minimize_on_sphere(space, &f, &spec.basepoint, r, opts)?;
        let base_distance = sublevel_distance(space, &f, &spec.basepoint, p.value, opts)?;
        Ok(LimitBusemann { f, basepoint: spec.basepoint.clone(), level: p.value, base_distance })
    }

    pub fn value(&self, space: &ModelSpace, x: &Point, opts: &SphereOptions) -> Result<f64> {
        Ok(sublevel_distance(space, &self.f, x, self.level, opts)? - self.base_distance)
    }
}

/// Largest `|ĥ(γx) − ĥ(x)|` over generators and sample points for the
/// reconstructed limit Busemann function at `σ(t)`.
pub fn horosphere_invariance_along_simplex(
    space: &ModelSpace,
    spec: &SimplexSpec,
    t: &[f64],
    r: f64,
    group: &[Isometry],
    samples: &[Point],
    opts: &SphereOptions,
) -> Result<f64> {
    let h = LimitBusemann::new(space, spec, t, r, opts)?;
    let mut worst: f64 = 0.0;
    for x in samples {
        let hx = h.value(space, x, opts)?;
        for g in group {
            worst = worst.max((h.value(space, &g.apply(space, x), opts)? - hx).abs());
        }
    }
    Ok(worst)
}
