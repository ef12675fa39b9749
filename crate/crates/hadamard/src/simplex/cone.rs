//! The Busemann cone `σ_{≥0}`, its horospherical image `W`, injectivity and
//! the search for large corner simplices inside `W`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::horo::{gradient_independence, horo_coordinates, project_levels};
use super::{approximate_simplex, compositions, on_boundary, SimplexApproximation, SimplexSpec};
use crate::convex::{minimize_on_sphere, ProjectionOptions, SphereOptions};
use crate::models::{angle_between, ModelSpace, Point};
use crate::{par, GeometryError, Result};

/// `σ_R` on a grid for several radii, with finite-scale non-degeneracy flags.
#[derive(Debug, Clone)]
pub struct ConeSamples {
    pub radii: Vec<f64>,
    pub approximations: Vec<SimplexApproximation>,
    /// Smallest singular value of the vertex gradients, per radius and grid point.
    pub singular: Vec<Vec<f64>>,
    /// Smallest angle at `x₀` to a sample of the same radius over `∂Δ`;
    /// infinite for boundary grid points and for `k = 0`.
    pub exclusion: Vec<Vec<f64>>,
    /// Angle below which an interior sample counts as matched by the boundary.
    pub exclusion_radius: f64,
    pub nondegenerate: Vec<Vec<bool>>,
}

impl ConeSamples {
    pub fn grid(&self) -> &[Vec<f64>] {
        &self.approximations[0].grid
    }

    pub fn m(&self) -> usize {
        self.approximations[0].m
    }
}

/// Covering radius of the `1/m` grid on a `d`-dimensional face, in `ℓ²`.
fn face_covering_radius(d: usize, m: usize) -> f64 {
    let n = d + 1;
    let a = n / 2;
    ((a * (n - a)) as f64 / n as f64).sqrt() / m as f64
}

/// Samples the cone and certifies grid points as non-degenerate when the
/// vertex gradients are independent and the sample stays farther than
/// `2√(k+1)` times the boundary-grid covering radius from every boundary
/// sample of the same radius.
pub fn sample_cone(
    space: &ModelSpace,
    spec: &SimplexSpec,
    radii: &[f64],
    m: usize,
    opts: &SphereOptions,
) -> Result<ConeSamples> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(GeometryError::Invalid("radii must be positive and increasing".into()));
    }
    let k = spec.k();
    let exclusion_radius = if k == 0 { 0.0 } else { 2.0 * ((k + 1) as f64).sqrt() * face_covering_radius(k - 1, m) };
    let threshold = exclusion_radius.max(1e-9);
    let approximations =
        radii.iter().map(|&r| approximate_simplex(space, spec, r, m, opts)).collect::<Result<Vec<_>>>()?;
    let mut singular = Vec::new();
    let mut exclusion = Vec::new();
    let mut nondegenerate = Vec::new();
    for a in &approximations {
        let dirs: Vec<_> = a.samples.iter().map(|p| space.log(&spec.basepoint, p)).collect();
        let bdry: Vec<usize> = (0..a.grid.len()).filter(|&i| on_boundary(&a.grid[i])).collect();
        let sv: Vec<f64> = par::map(&a.samples, |p| gradient_independence(space, spec, p).1);
        let ex: Vec<f64> = (0..a.grid.len())
            .map(|i| {
                if on_boundary(&a.grid[i]) {
                    return f64::INFINITY;
                }
                bdry.iter().map(|&j| angle_between(&dirs[i], &dirs[j])).fold(f64::INFINITY, f64::min)
            })
            .collect();
        let nd = (0..a.grid.len()).map(|i| !on_boundary(&a.grid[i]) && sv[i] > 1e-8 && ex[i] > threshold).collect();
        singular.push(sv);
        exclusion.push(ex);
        nondegenerate.push(nd);
    }
    Ok(ConeSamples { radii: radii.to_vec(), approximations, singular, exclusion, exclusion_radius, nondegenerate })
}

#[derive(Debug, Clone)]
pub struct InjectivityReport {
    pub samples: usize,
    pub nondegenerate: usize,
    /// Smallest distance from a non-degenerate sample to any other sample.
    pub min_nondegenerate_distance: f64,
    /// Pairs `((radius, grid), (radius, grid))` closer than the threshold
    /// with at least one non-degenerate member.
    pub collisions: Vec<((usize, usize), (usize, usize))>,
    /// Coinciding pairs of degenerate samples.
    pub degenerate_collisions: usize,
}

impl InjectivityReport {
    pub fn ok(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Pairwise comparison of all cone samples; two samples collide when closer
/// than `1e−9·max(1, R)`.
pub fn cone_injectivity_audit(space: &ModelSpace, cone: &ConeSamples) -> InjectivityReport {
    let mut flat: Vec<((usize, usize), &Point, bool, f64)> = Vec::new();
    for (ri, a) in cone.approximations.iter().enumerate() {
        for (ti, p) in a.samples.iter().enumerate() {
            flat.push(((ri, ti), p, cone.nondegenerate[ri][ti], a.r));
        }
    }
    let rows = par::map_range(flat.len(), |i| {
        let (li, p, ndi, ri) = flat[i];
        let mut col = Vec::new();
        let mut deg = 0usize;
        let mut nearest = f64::INFINITY;
        for &(lj, q, ndj, rj) in &flat[i + 1..] {
            let d = space.distance(p, q);
            if ndi || ndj {
                nearest = nearest.min(d);
            }
            if d <= 1e-9 * ri.max(rj).max(1.0) {
                if ndi || ndj {
                    col.push((li, lj));
                } else {
                    deg += 1;
                }
            }
        }
        (col, deg, nearest)
    });
    let mut collisions = Vec::new();
    let mut degenerate_collisions = 0;
    let mut min_nd = f64::INFINITY;
    for (c, d, n) in rows {
        collisions.extend(c);
        degenerate_collisions += d;
        min_nd = min_nd.min(n);
    }
    InjectivityReport {
        samples: flat.len(),
        nondegenerate: flat.iter().filter(|f| f.2).count(),
        min_nondegenerate_distance: min_nd,
        collisions,
        degenerate_collisions,
    }
}

/// Sampled `W = h⃗(σ_{≥0})`.
#[derive(Debug, Clone)]
pub struct WRegion {
    /// `h⃗(σ_R(t))` per sample.
    pub points: Vec<DVector<f64>>,
    /// `(radius index, grid index)` per sample.
    pub labels: Vec<(usize, usize)>,
    /// The sample's grid neighbors, including the adjacent radii, map onto
    /// differences spanning `ℝ^{k+1}`.
    pub interior: Vec<bool>,
}

/// Images of the cone samples with interior labels at grid scale.
///
/// The radius below the first is the basepoint itself, whose image is `0`.
pub fn cone_image_region(space: &ModelSpace, spec: &SimplexSpec, cone: &ConeSamples) -> WRegion {
    let k = spec.k();
    let m = cone.m();
    let ints = compositions(k, m);
    let index: HashMap<&[usize], usize> = ints.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
    let images: Vec<Vec<DVector<f64>>> = cone
        .approximations
        .iter()
        .map(|a| par::map(&a.samples, |p| horo_coordinates(space, spec, p).values))
        .collect();
    let zero = DVector::zeros(k + 1);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut interior = Vec::new();
    for (ri, imgs) in images.iter().enumerate() {
        for (ti, b) in imgs.iter().enumerate() {
            points.push(b.clone());
            labels.push((ri, ti));
            let t = &ints[ti];
            if ri + 1 == images.len() || (k > 0 && t.iter().any(|&v| v == 0)) {
                interior.push(false);
                continue;
            }
            let below = if ri == 0 { &zero } else { &images[ri - 1][ti] };
            let mut diffs = vec![below - b, &images[ri + 1][ti] - b];
            for i in 0..=k {
                for l in 0..=k {
                    if i == l {
                        continue;
                    }
                    let mut n = t.clone();
                    n[i] += 1;
                    n[l] -= 1;
                    diffs.push(&imgs[index[n.as_slice()]] - b);
                }
            }
            let scale = diffs.iter().map(|d| d.norm()).fold(0.0, f64::max);
            let mat = DMatrix::from_columns(&diffs);
            let sv = mat.singular_values();
            let full = sv.len() >= k + 1 && sv.iter().filter(|&&s| s > 1e-8 * scale).count() >= k + 1;
            interior.push(full);
        }
    }
    WRegion { points, labels, interior }
}

/// `p(b, x₀)` with the distance from `x₀` and the defect `|h⃗(p(b,x₀)) − b|_∞`.
#[derive(Debug, Clone)]
pub struct InverseCheck {
    pub point: Point,
    pub distance: f64,
    pub error: f64,
}

pub fn inverse_check(
    space: &ModelSpace,
    spec: &SimplexSpec,
    b: &DVector<f64>,
    opts: &ProjectionOptions,
) -> Result<InverseCheck> {
    let p = project_levels(space, spec, b, &spec.basepoint, opts)?.point;
    let error = (horo_coordinates(space, spec, &p).values - b).amax();
    let distance = space.distance(&spec.basepoint, &p);
    Ok(InverseCheck { point: p, distance, error })
}

/// Membership of `b` in the image of the cone truncated at `r_max`: the
/// projection `p(b, x₀)` realizes all levels within `1e−7` and lies within
/// `r_max` of `x₀`.
pub fn in_cone_image(
    space: &ModelSpace,
    spec: &SimplexSpec,
    b: &DVector<f64>,
    r_max: f64,
    opts: &ProjectionOptions,
) -> Result<bool> {
    let c = inverse_check(space, spec, b, opts)?;
    Ok(c.error <= 1e-7 && c.distance <= r_max * (1.0 + 1e-12))
}

#[derive(Debug, Clone, Copy)]
pub struct CornerOptions {
    /// Lattice spacing of the membership test.
    pub delta: f64,
    /// Number of corner candidates along the barycentric axis.
    pub candidates: usize,
}

impl Default for CornerOptions {
    fn default() -> Self {
        CornerOptions { delta: 1.0, candidates: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct CornerReport {
    pub target: f64,
    /// A corner `a` with `{b ≤ a, |b − a|₁ ≤ target}` covered, if found.
    pub corner: Option<DVector<f64>>,
    /// Largest covered scale over all candidates, a multiple of `delta`.
    pub largest: f64,
    pub largest_corner: Option<DVector<f64>>,
    pub delta: f64,
}

impl CornerReport {
    /// `largest` in lattice cells.
    pub fn cells(&self) -> f64 {
        self.largest / self.delta
    }
}

/// Searches corners `a = h⃗(σ_s(t̄))` at the barycenter `t̄` for
/// `s = r_max·j/N`, `j = 1..N`, for the largest `L` such that every lattice
/// point `a − δn`, `n ∈ ℕ^{k+1}`, `δ|n|₁ ≤ L`, lies in the image of the
/// cone truncated at `r_max`.
pub fn find_large_corner(
    space: &ModelSpace,
    spec: &SimplexSpec,
    r_max: f64,
    target: f64,
    copts: &CornerOptions,
    sopts: &SphereOptions,
    popts: &ProjectionOptions,
) -> Result<CornerReport> {
    if !(copts.delta > 0.0) || copts.candidates == 0 || !(r_max > 0.0) {
        return Err(GeometryError::Invalid("corner search needs δ > 0, candidates ≥ 1, r_max > 0".into()));
    }
    let k = spec.k();
    let bary = vec![1.0 / (k + 1) as f64; k + 1];
    let f = spec.combination(&bary)?;
    let cap = (2.0 * r_max / copts.delta).ceil() as usize + 2;
    let shell_ok = |a: &DVector<f64>, j: usize| -> Result<bool> {
        let pts = compositions(k, j);
        let ok = par::try_map(&pts, |n| {
            let b = a - DVector::from_iterator(k + 1, n.iter().map(|&v| v as f64 * copts.delta));
            in_cone_image(space, spec, &b, r_max, popts)
        })?;
        Ok(ok.into_iter().all(|x| x))
    };
    let mut best: Option<(usize, DVector<f64>)> = None;
    for j in 1..=copts.candidates {
        let s = r_max * j as f64 / copts.candidates as f64;
        let p = minimize_on_sphere(space, &f, &spec.basepoint, s, sopts)?.point;
        let a = horo_coordinates(space, spec, &p).values;
        if let Some((bj, _)) = &best {
            if !shell_ok(&a, bj + 1)? {
                continue;
            }
        }
        let mut reached = None;
        let mut shell = 0;
        while shell <= cap {
            if best.as_ref().map_or(false, |(bj, _)| shell == bj + 1) || shell_ok(&a, shell)? {
                reached = Some(shell);
                shell += 1;
            } else {
                break;
            }
        }
        if let Some(r) = reached {
            if best.as_ref().map_or(true, |(bj, _)| r > *bj) {
                best = Some((r, a));
            }
        }
    }
    let largest = best.as_ref().map_or(0.0, |(j, _)| *j as f64 * copts.delta);
    let largest_corner = best.map(|(_, a)| a);
    let corner = if largest >= target { largest_corner.clone() } else { None };
    Ok(CornerReport { target, corner, largest, largest_corner, delta: copts.delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BoundaryPoint, FactorIdeal};
    use std::f64::consts::PI;

    fn dir(v: &[f64]) -> BoundaryPoint {
        let d = DVector::from_column_slice(v);
        BoundaryPoint::single(FactorIdeal::Direction(&d / d.norm()))
    }

    fn flat_pair(angle: f64) -> (ModelSpace, SimplexSpec) {
        let s = ModelSpace::euclidean(2).unwrap();
        let spec = SimplexSpec::new(&s, vec![dir(&[1.0, 0.0]), dir(&[angle.cos(), angle.sin()])], s.origin()).unwrap();
        (s, spec)
    }

    #[test]
    fn covering_radii() {
        assert_eq!(face_covering_radius(0, 8), 0.0);
        assert!((face_covering_radius(1, 1) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((face_covering_radius(2, 1) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn flat_cone_is_injective_and_coincident_vertices_are_degenerate() {
        let (s, spec) = flat_pair(PI / 3.0);
        let o = SphereOptions::default();
        let cone = sample_cone(&s, &spec, &[10.0, 20.0, 40.0, 80.0, 160.0], 8, &o).unwrap();
        let rep = cone_injectivity_audit(&s, &cone);
        assert!(rep.ok() && rep.nondegenerate == 5 * 7, "{rep:?}");
        let same = SimplexSpec::new(&s, vec![dir(&[1.0, 1.0]), dir(&[1.0, 1.0])], s.origin()).unwrap();
        let cone = sample_cone(&s, &same, &[10.0, 20.0], 8, &o).unwrap();
        assert!(cone.nondegenerate.iter().flatten().all(|c| !c));
        let rep = cone_injectivity_audit(&s, &cone);
        assert!(rep.ok() && rep.degenerate_collisions > 0);
    }

    #[test]
    fn flat_region_matches_closed_form_and_inverts() {
        let phi = PI / 3.0;
        let (s, spec) = flat_pair(phi);
        let cone = sample_cone(&s, &spec, &[5.0, 10.0, 15.0], 4, &SphereOptions::default()).unwrap();
        let w = cone_image_region(&s, &spec, &cone);
        for (b, &(ri, ti)) in w.points.iter().zip(&w.labels) {
            let p = &cone.approximations[ri].samples[ti].coords;
            let want = DVector::from_vec(vec![-p[0], -(p[0] * phi.cos() + p[1] * phi.sin())]);
            assert!((b - want).amax() < 1e-12);
            let c = inverse_check(&s, &spec, b, &ProjectionOptions::default()).unwrap();
            assert!(c.error < 1e-7, "{c:?}");
        }
        // interior labels: middle radius, interior grid points
        let n_int = w.interior.iter().filter(|&&x| x).count();
        assert_eq!(n_int, 2 * 3);
    }

    #[test]
    fn half_line_for_a_single_vertex() {
        let s = ModelSpace::hyperbolic(2).unwrap();
        let spec = SimplexSpec::new(&s, vec![BoundaryPoint::single(FactorIdeal::Infinity)], s.origin()).unwrap();
        let cone = sample_cone(&s, &spec, &[1.0, 2.0, 3.0], 1, &SphereOptions::default()).unwrap();
        let w = cone_image_region(&s, &spec, &cone);
        for (b, &(ri, _)) in w.points.iter().zip(&w.labels) {
            assert!((b[0] + cone.radii[ri]).abs() < 1e-12);
        }
        assert_eq!(w.interior, vec![true, true, false]);
    }

    #[test]
    fn corners_grow_with_radius_and_vanish_when_degenerate() {
        let (s, spec) = flat_pair(PI / 3.0);
        let (so, po) = (SphereOptions::default(), ProjectionOptions::default());
        let co = CornerOptions { delta: 1.0, candidates: 4 };
        let small = find_large_corner(&s, &spec, 8.0, 1.0, &co, &so, &po).unwrap();
        let large = find_large_corner(&s, &spec, 16.0, 1.0, &co, &so, &po).unwrap();
        assert!(small.largest >= 1.0 && large.largest > small.largest, "{small:?} {large:?}");
        let same = SimplexSpec::new(&s, vec![dir(&[1.0, 1.0]), dir(&[1.0, 1.0])], s.origin()).unwrap();
        let deg = find_large_corner(&s, &same, 16.0, 1.0, &co, &so, &po).unwrap();
        assert!(deg.cells() < 1.0 && deg.corner.is_none());
    }
}
