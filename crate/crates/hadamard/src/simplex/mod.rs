//! Busemann simplices: the finite approximations `σ_R : Δᵏ → S_{x₀}(R)`,
//! their limits at infinity, the Busemann cone with its horospherical
//! coordinates, and the audits of the metric lemmas about them.

mod cone;
mod horo;

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

pub use cone::{
    cone_image_region, cone_injectivity_audit, find_large_corner, in_cone_image, inverse_check, sample_cone,
    ConeSamples, CornerOptions, CornerReport, InjectivityReport, InverseCheck, WRegion,
};
pub use horo::{
    degeneracy_sequential_probe, dimension_bound_assert, error_bound_audit, gradient_independence,
    horo_coordinates, horo_contraction_gap, horosphere_invariance_along_simplex, projection_contraction,
    project_levels, root_lemma_audit, sublevel_distance, DimensionReport, ErrorBoundReport, HoroCoordinates,
    LimitBusemann, ProbeOptions, ProbeReport, RootReport,
};

use crate::busemann::{BusemannFunction, ConvexCombination};
use crate::convex::{minimize_on_sphere, SphereOptions};
use crate::models::{angle_between, BoundaryPoint, ModelSpace, Point, Tangent};
use crate::{par, GeometryError, Result};

/// Vertex data of a Busemann simplex.
#[derive(Debug, Clone)]
pub struct SimplexSpec {
    /// `h₀,…,h_k`, normalized to vanish at the basepoint.
    pub vertices: Vec<BusemannFunction>,
    pub basepoint: Point,
    /// Pairwise Tits distances of the vertex centers.
    pub tits: DMatrix<f64>,
    /// `π/2 − max Td(ξᵢ, ξⱼ)`, or `π/2` for a single vertex.
    pub alpha: f64,
}

impl SimplexSpec {
    /// Rejects vertex sets with a pairwise Tits distance of `π/2` or more.
    pub fn new(space: &ModelSpace, centers: Vec<BoundaryPoint>, basepoint: Point) -> Result<Self> {
        if centers.is_empty() {
            return Err(GeometryError::Invalid("a simplex needs at least one vertex".into()));
        }
        let vertices = centers
            .into_iter()
            .map(|c| BusemannFunction::new(space, c, basepoint.clone()))
            .collect::<Result<Vec<_>>>()?;
        let n = vertices.len();
        let mut tits = DMatrix::zeros(n, n);
        let mut max_td: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let d = space.tits_distance(&vertices[i].center, &vertices[j].center);
                tits[(i, j)] = d;
                tits[(j, i)] = d;
                max_td = max_td.max(d);
            }
        }
        if max_td >= FRAC_PI_2 {
            return Err(GeometryError::Precondition(format!(
                "vertices at Tits distance {max_td:.6} ≥ π/2 do not span a Busemann simplex"
            )));
        }
        Ok(SimplexSpec { vertices, basepoint, tits, alpha: FRAC_PI_2 - max_td })
    }

    /// Dimension `k` of the parameter simplex.
    pub fn k(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn centers(&self) -> Vec<BoundaryPoint> {
        self.vertices.iter().map(|h| h.center.clone()).collect()
    }

    /// The same vertices with another basepoint.
    pub fn rebased(&self, space: &ModelSpace, basepoint: Point) -> Self {
        SimplexSpec {
            vertices: self.vertices.iter().map(|h| h.rebased(space, basepoint.clone())).collect(),
            basepoint,
            tits: self.tits.clone(),
            alpha: self.alpha,
        }
    }

    /// `f_t = Σ tᵢ hᵢ`.
    pub fn combination(&self, t: &[f64]) -> Result<ConvexCombination> {
        ConvexCombination::from_weights(&self.vertices, t)
    }
}

fn at(t: &[f64], e: GeometryError) -> GeometryError {
    GeometryError::AtGridPoint { t: t.to_vec(), source: Box::new(e) }
}

/// Compositions of `total` into `k+1` nonnegative parts, in lexicographically
/// decreasing order.
pub fn compositions(k: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, total, &mut vec![0; k + 1], &mut out);
    out
}

/// Points of `Δᵏ` whose coordinates are multiples of `1/m`, ordered as
/// [`compositions`] of `m`.
pub fn barycentric_grid(k: usize, m: usize) -> Vec<Vec<f64>> {
    let mf = m as f64;
    compositions(k, m).into_iter().map(|c| c.into_iter().map(|v| v as f64 / mf).collect()).collect()
}

/// `t` lies on a proper face of `Δᵏ`. The single point of `Δ⁰` does not.
pub fn on_boundary(t: &[f64]) -> bool {
    t.len() > 1 && t.iter().any(|&v| v == 0.0)
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `σ_R` sampled on the barycentric grid.
#[derive(Debug, Clone)]
pub struct SimplexApproximation {
    pub spec: SimplexSpec,
    pub r: f64,
    pub m: usize,
    pub grid: Vec<Vec<f64>>,
    pub samples: Vec<Point>,
    /// Sphere-optimality residual of each sample.
    pub residuals: Vec<f64>,
    /// `max ∠_{x₀}(σ_R(t), σ_R(t′)) / |t − t′|₂` over grid pairs.
    pub lipschitz: f64,
    /// `2√(k+1)`.
    pub lipschitz_bound: f64,
}

impl SimplexApproximation {
    pub fn lipschitz_ok(&self) -> bool {
        self.lipschitz <= self.lipschitz_bound + 1e-6
    }

    /// Unit directions of the samples at the basepoint.
    pub fn directions(&self, space: &ModelSpace) -> Vec<Tangent> {
        self.samples.iter().map(|p| space.direction(&self.spec.basepoint, p)).collect()
    }
}

fn lipschitz_constant(grid: &[Vec<f64>], dirs: &[Tangent]) -> f64 {
    par::map_range(grid.len(), |i| {
        let mut best: f64 = 0.0;
        for j in i + 1..grid.len() {
            best = best.max(angle_between(&dirs[i], &dirs[j]) / l2_dist(&grid[i], &grid[j]));
        }
        best
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Minimizes every `f_t` on `S_{x₀}(R)` over the grid of resolution `m` and
/// measures the Lipschitz constant of the result.
pub fn approximate_simplex(
    space: &ModelSpace,
    spec: &SimplexSpec,
    r: f64,
    m: usize,
    opts: &SphereOptions,
) -> Result<SimplexApproximation> {
    if m == 0 {
        return Err(GeometryError::Invalid("grid resolution must be at least 1".into()));
    }
    let grid = barycentric_grid(spec.k(), m);
    let results = par::try_map(&grid, |t| {
        let f = spec.combination(t).map_err(|e| at(t, e))?;
        minimize_on_sphere(space, &f, &spec.basepoint, r, opts).map_err(|e| at(t, e))
    })?;
    let residuals = results.iter().map(|s| s.residual).collect();
    let samples: Vec<Point> = results.into_iter().map(|s| s.point).collect();
    let dirs: Vec<Tangent> = samples.iter().map(|p| space.log(&spec.basepoint, p)).collect();
    let lipschitz = lipschitz_constant(&grid, &dirs);
    Ok(SimplexApproximation {
        spec: spec.clone(),
        r,
        m,
        grid,
        samples,
        residuals,
        lipschitz,
        lipschitz_bound: 2.0 * ((spec.k() + 1) as f64).sqrt(),
    })
}

/// `σ_{R_i}` along a radius schedule with the extrapolated limit simplex.
#[derive(Debug, Clone)]
pub struct LimitReport {
    pub grid: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub approximations: Vec<SimplexApproximation>,
    /// Endpoint of the ray from `x₀` through `σ_{R_max}(t)`, per grid point.
    pub limits: Vec<BoundaryPoint>,
    /// Angles at `x₀` between consecutive `σ_{R_i}(t)`, per grid point.
    pub gaps: Vec<Vec<f64>>,
    pub gap_tolerance: f64,
    /// Grid indices whose last gap exceeds the tolerance.
    pub inconclusive: Vec<usize>,
}

impl LimitReport {
    pub fn final_gap(&self, i: usize) -> f64 {
        self.gaps[i].last().copied().unwrap_or(0.0)
    }

    pub fn conclusive(&self) -> bool {
        self.inconclusive.is_empty()
    }

    pub fn last(&self) -> &SimplexApproximation {
        self.approximations.last().expect("schedule has at least three radii")
    }
}

/// Follows `σ_R` along an increasing schedule of at least three radii.
///
/// A grid point whose final Cauchy gap exceeds `gap_tol` is listed in
/// [`LimitReport::inconclusive`]; its extrapolated limit is still reported.
pub fn simplex_limit(
    space: &ModelSpace,
    spec: &SimplexSpec,
    radii: &[f64],
    m: usize,
    gap_tol: f64,
    opts: &SphereOptions,
) -> Result<LimitReport> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(GeometryError::Invalid("radius schedule must be positive, increasing, with ≥ 3 entries".into()));
    }
    let approximations = radii
        .iter()
        .map(|&r| approximate_simplex(space, spec, r, m, opts))
        .collect::<Result<Vec<_>>>()?;
    let grid = approximations[0].grid.clone();
    let dirs: Vec<Vec<Tangent>> = approximations.iter().map(|a| a.directions(space)).collect();
    let mut gaps = vec![Vec::with_capacity(radii.len() - 1); grid.len()];
    for w in dirs.windows(2) {
        for (i, g) in gaps.iter_mut().enumerate() {
            g.push(angle_between(&w[0][i], &w[1][i]));
        }
    }
    let last = dirs.last().expect("nonempty");
    let limits = last
        .iter()
        .zip(&grid)
        .map(|(d, t)| space.ray_endpoint(&spec.basepoint, d).map_err(|e| at(t, e)))
        .collect::<Result<Vec<_>>>()?;
    let inconclusive =
        (0..grid.len()).filter(|&i| gaps[i].last().copied().unwrap_or(0.0) > gap_tol).collect();
    Ok(LimitReport { grid, radii: radii.to_vec(), approximations, limits, gaps, gap_tolerance: gap_tol, inconclusive })
}

/// One comparison of `σ_{R,x₀}(t)` with `σ_{R,y}(t)`.
#[derive(Debug, Clone, Copy)]
pub struct BasepointRow {
    pub r: f64,
    pub t_index: usize,
    /// `d(σ_{R,x₀}(t), σ_{R,y}(t))`.
    pub lhs: f64,
    /// `D + √(2DR + D²)` with `D = d(x₀, y)`.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct BasepointReport {
    pub d: f64,
    pub rows: Vec<BasepointRow>,
    /// Largest `lhs − bound`.
    pub max_excess: f64,
    /// Largest `∠_{x₀}` between the limits extrapolated from `x₀` and from `y`.
    pub limit_angle: f64,
}

impl BasepointReport {
    pub fn ok(&self, limit_tol: f64) -> bool {
        self.max_excess <= 1e-9 * self.rows.iter().map(|r| r.bound).fold(1.0, f64::max) && self.limit_angle <= limit_tol
    }
}

/// Recomputes the schedule of `base` from a second basepoint `y` and compares.
pub fn basepoint_audit(
    space: &ModelSpace,
    spec: &SimplexSpec,
    base: &LimitReport,
    y: &Point,
    opts: &SphereOptions,
) -> Result<BasepointReport> {
    let other = spec.rebased(space, y.clone());
    let m = base.last().m;
    let d = space.distance(&spec.basepoint, y);
    let mut rows = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    let mut last = None;
    for (a, &r) in base.approximations.iter().zip(&base.radii) {
        let b = approximate_simplex(space, &other, r, m, opts)?;
        let bound = d + (2.0 * d * r + d * d).sqrt();
        for (i, (p, q)) in a.samples.iter().zip(&b.samples).enumerate() {
            let lhs = space.distance(p, q);
            max_excess = max_excess.max(lhs - bound);
            rows.push(BasepointRow { r, t_index: i, lhs, bound });
        }
        last = Some(b);
    }
    let last = last.expect("schedule is nonempty");
    let mut limit_angle: f64 = 0.0;
    for (i, q) in last.samples.iter().enumerate() {
        let e = space.ray_endpoint(y, &space.log(y, q)).map_err(|e| at(&base.grid[i], e))?;
        limit_angle = limit_angle.max(space.angle_at(&spec.basepoint, &base.limits[i], &e));
    }
    Ok(BasepointReport { d, rows, max_excess, limit_angle })
}

#[derive(Debug, Clone, Copy)]
pub struct DiameterReport {
    /// `π/2 − α`.
    pub bound: f64,
    pub max_td: f64,
    /// `(grid index, vertex index)` attaining `max_td`.
    pub worst: (usize, usize),
}

impl DiameterReport {
    pub fn ok(&self) -> bool {
        self.max_td <= self.bound + 1e-3
    }
}

/// Largest Tits distance from a limit point to a vertex.
pub fn diameter_audit(space: &ModelSpace, spec: &SimplexSpec, limits: &[BoundaryPoint]) -> DiameterReport {
    let mut max_td = 0.0;
    let mut worst = (0, 0);
    for (i, l) in limits.iter().enumerate() {
        for (j, h) in spec.vertices.iter().enumerate() {
            let d = space.tits_distance(l, &h.center);
            if d > max_td {
                max_td = d;
                worst = (i, j);
            }
        }
    }
    DiameterReport { bound: FRAC_PI_2 - spec.alpha, max_td, worst }
}
