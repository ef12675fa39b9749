//! Centers of sets of Tits diameter at most `π/2` and the two-step center of
//! mass of an abelian group of isometries.
//!
//! The Tits boundary of a product is the spherical join of its factors. Once
//! an ideal point (or none) is chosen in every hyperbolic factor, the part of
//! the boundary using those ideals is a sphere, and every point of the set
//! embeds in the ambient vector space of that sphere with `cos Td = ⟨x, e⟩`.
//! The circumcenter inside one such sphere is the direction of the min-norm
//! point of the convex hull of the embedded set.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::busemann::Isometry;
use crate::models::{BoundaryPoint, Factor, FactorIdeal, ModelSpace};
use crate::{GeometryError, Result};

const RESTARTS: usize = 10;
const RESTART_SEED: u64 = 0x00c3_57e2;

/// Min-norm point of the convex hull of `points` by Wolfe's algorithm,
/// started from vertex `start`. Returns the point and its convex weights.
pub fn min_norm_point(points: &[DVector<f64>], start: usize) -> (DVector<f64>, Vec<f64>) {
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-14 * scale;
    let mut set = vec![start];
    let mut lam = vec![1.0];
    let mut x = points[start].clone();
    for _ in 0..10 * points.len() + 100 {
        let (j, best) = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, x.dot(p)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if x.norm_squared() - best <= tol || set.contains(&j) {
            break;
        }
        set.push(j);
        lam.push(0.0);
        loop {
            let mu = affine_min_norm(points, &set);
            if mu.iter().all(|m| *m > 1e-15) {
                lam = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lam.iter().zip(&mu) {
                if *m <= 1e-15 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lam.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let keep: Vec<bool> = lam.iter().map(|l| *l > 1e-15).collect();
            let mut k = 0;
            set.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            k = 0;
            lam.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= total);
            if set.len() == 1 {
                lam = vec![1.0];
                break;
            }
        }
        x = combine(points, &set, &lam);
    }
    let mut weights = vec![0.0; points.len()];
    for (i, l) in set.iter().zip(&lam) {
        weights[*i] = *l;
    }
    (x, weights)
}

fn combine(points: &[DVector<f64>], set: &[usize], lam: &[f64]) -> DVector<f64> {
    let mut x = DVector::zeros(points[0].len());
    for (i, l) in set.iter().zip(lam) {
        x += &points[*i] * *l;
    }
    x
}

/// Weights of the min-norm point of the affine hull of `points[set]`.
fn affine_min_norm(points: &[DVector<f64>], set: &[usize]) -> Vec<f64> {
    let n = set.len();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    let mut rhs = DVector::zeros(n + 1);
    for a in 0..n {
        for b in 0..n {
            m[(a, b)] = points[set[a]].dot(&points[set[b]]);
        }
        m[(a, n)] = 1.0;
        m[(n, a)] = 1.0;
    }
    rhs[n] = 1.0;
    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| m.svd(true, true).solve(&rhs, 1e-14).expect("svd solve"));
    sol.rows(0, n).iter().copied().collect()
}

/// Circumcenter of a finite set with its radius `ρ = max Td(center, η)`.
#[derive(Debug, Clone)]
pub struct CenterResult {
    pub center: BoundaryPoint,
    pub radius: f64,
    /// Largest distance between min-norm points found from the random
    /// restarts, for the winning choice of factor ideals.
    pub restart_spread: f64,
}

impl CenterResult {
    pub fn unique(&self) -> bool {
        self.restart_spread <= 1e-4
    }
}

fn same_ideal(a: &FactorIdeal, b: &FactorIdeal) -> bool {
    match (a, b) {
        (FactorIdeal::Infinity, FactorIdeal::Infinity) => true,
        (FactorIdeal::Finite(x), FactorIdeal::Finite(y)) => {
            (x - y).norm() <= 1e-12 * 1f64.max(x.norm()).max(y.norm())
        }
        _ => false,
    }
}

/// Distinct ideals used by the set in each hyperbolic factor.
fn factor_ideals(space: &ModelSpace, set: &[BoundaryPoint]) -> Vec<Vec<FactorIdeal>> {
    (0..space.num_factors())
        .map(|i| {
            let mut out: Vec<FactorIdeal> = Vec::new();
            if let Factor::Hyperbolic(_) = space.factors()[i] {
                for id in set.iter().filter_map(|p| p.ideals[i].as_ref()) {
                    if !out.iter().any(|o| same_ideal(o, id)) {
                        out.push(id.clone());
                    }
                }
            }
            out
        })
        .collect()
}

fn embed(space: &ModelSpace, p: &BoundaryPoint, choice: &[Option<FactorIdeal>]) -> DVector<f64> {
    let mut v = Vec::new();
    for (i, f) in space.factors().iter().enumerate() {
        match f {
            Factor::Euclidean(n) => match &p.ideals[i] {
                Some(FactorIdeal::Direction(d)) => v.extend(d.iter().map(|c| c * p.weights[i])),
                _ => v.extend(std::iter::repeat(0.0).take(*n)),
            },
            Factor::Hyperbolic(_) => v.push(match (&choice[i], &p.ideals[i]) {
                (Some(c), Some(id)) if same_ideal(c, id) => p.weights[i],
                (Some(_), Some(_)) => -p.weights[i],
                _ => 0.0,
            }),
        }
    }
    DVector::from_vec(v)
}

fn unembed(space: &ModelSpace, x: &DVector<f64>, choice: &[Option<FactorIdeal>]) -> Result<BoundaryPoint> {
    let mut weights = Vec::new();
    let mut ideals = Vec::new();
    let mut k = 0;
    for (i, f) in space.factors().iter().enumerate() {
        match f {
            Factor::Euclidean(n) => {
                let block = x.rows(k, *n).into_owned();
                k += n;
                let w = block.norm();
                if w > 1e-12 {
                    weights.push(w);
                    ideals.push(Some(FactorIdeal::Direction(block / w)));
                } else {
                    weights.push(0.0);
                    ideals.push(None);
                }
            }
            Factor::Hyperbolic(_) => {
                let w = x[k];
                k += 1;
                if w > 1e-12 {
                    weights.push(w);
                    ideals.push(choice[i].clone());
                } else {
                    weights.push(0.0);
                    ideals.push(None);
                }
            }
        }
    }
    BoundaryPoint::new(weights, ideals)
}

/// The unique minimizer of `ρ(ξ) = max_{η∈K} Td(η, ξ)` over the boundary.
///
/// Every combination of factor ideals is tried; within each, Wolfe's
/// algorithm gives the exact circumcenter, run from ten seeded random
/// starting vertices whose results must agree within `1e−4`.
pub fn center_of_finite_set(space: &ModelSpace, set: &[BoundaryPoint]) -> Result<CenterResult> {
    if set.is_empty() {
        return Err(GeometryError::Invalid("empty set has no center".into()));
    }
    for p in set {
        space.check_boundary(p)?;
    }
    for (a, p) in set.iter().enumerate() {
        for q in &set[a + 1..] {
            let td = space.tits_distance(p, q);
            if td > FRAC_PI_2 + 1e-9 {
                return Err(GeometryError::Precondition(format!(
                    "Tits diameter exceeds π/2: found a pair at distance {td:.6}"
                )));
            }
        }
    }
    let options = factor_ideals(space, set);
    let mut choices: Vec<Vec<Option<FactorIdeal>>> = vec![Vec::new()];
    for opts in &options {
        let mut next = Vec::new();
        for c in &choices {
            let mut none = c.clone();
            none.push(None);
            next.push(none);
            for o in opts {
                let mut with = c.clone();
                with.push(Some(o.clone()));
                next.push(with);
            }
        }
        choices = next;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let mut best: Option<(f64, DVector<f64>, Vec<Option<FactorIdeal>>, f64)> = None;
    for choice in choices {
        let pts: Vec<DVector<f64>> = set.iter().map(|p| embed(space, p, &choice)).collect();
        let (p, _) = min_norm_point(&pts, 0);
        let norm = p.norm();
        if norm <= 1e-12 {
            continue;
        }
        let negative = space.factors().iter().enumerate().scan(0, |k, (i, f)| {
            let at = *k;
            *k += f_width(f);
            Some(matches!(f, Factor::Hyperbolic(_)) && choice[i].is_some() && p[at] < -1e-12 * norm)
        });
        if negative.into_iter().any(|b| b) {
            continue;
        }
        if best.as_ref().map_or(true, |b| norm > b.0 + 1e-15) {
            let mut spread: f64 = 0.0;
            for _ in 0..RESTARTS {
                let (q, _) = min_norm_point(&pts, rng.gen_range(0..pts.len()));
                spread = spread.max((&q - &p).norm());
            }
            best = Some((norm, p, choice, spread));
        }
    }
    let (norm, p, choice, restart_spread) =
        best.ok_or_else(|| GeometryError::Precondition("no admissible center: the set is not within a hemisphere".into()))?;
    let center = unembed(space, &(&p / norm), &choice)?;
    let radius = set.iter().map(|q| space.tits_distance(q, &center)).fold(0.0, f64::max);
    Ok(CenterResult { center, radius, restart_spread })
}

fn f_width(f: &Factor) -> usize {
    match f {
        Factor::Euclidean(n) => *n,
        Factor::Hyperbolic(_) => 1,
    }
}

/// A sampled subset of the boundary.
#[derive(Debug, Clone)]
pub enum BoundarySubset {
    Points(Vec<BoundaryPoint>),
    /// Joins of per-factor ideal options. Weights run over
    /// `w_i = √(c_i/steps)` for compositions `c` of `steps`, and each factor of
    /// positive weight takes every one of its options.
    Join { factor_options: Vec<Vec<FactorIdeal>>, steps: usize },
}

impl BoundarySubset {
    pub fn samples(&self) -> Result<Vec<BoundaryPoint>> {
        match self {
            BoundarySubset::Points(p) => Ok(p.clone()),
            BoundarySubset::Join { factor_options, steps } => {
                let m = factor_options.len();
                if m == 0 || *steps == 0 {
                    return Err(GeometryError::Invalid("empty join sampler".into()));
                }
                let mut out = Vec::new();
                for c in crate::simplex::compositions(m - 1, *steps) {
                    let weights: Vec<f64> = if m == 2 {
                        let th = FRAC_PI_2 * c[1] as f64 / *steps as f64;
                        if c[1] == 0 {
                            vec![1.0, 0.0]
                        } else if c[0] == 0 {
                            vec![0.0, 1.0]
                        } else {
                            vec![th.cos(), th.sin()]
                        }
                    } else {
                        c.iter().map(|ci| (*ci as f64 / *steps as f64).sqrt()).collect()
                    };
                    let mut ideal_sets: Vec<Vec<Option<FactorIdeal>>> = vec![Vec::new()];
                    for (w, opts) in weights.iter().zip(factor_options) {
                        let mut next = Vec::new();
                        for s in &ideal_sets {
                            if *w == 0.0 {
                                let mut s = s.clone();
                                s.push(None);
                                next.push(s);
                            } else {
                                for o in opts {
                                    let mut s = s.clone();
                                    s.push(Some(o.clone()));
                                    next.push(s);
                                }
                            }
                        }
                        ideal_sets = next;
                    }
                    for ideals in ideal_sets {
                        out.push(BoundaryPoint::new(weights.clone(), ideals)?);
                    }
                }
                Ok(out)
            }
        }
    }

    /// The image of the subset under `g`.
    pub fn mapped(&self, g: &Isometry) -> Result<BoundarySubset> {
        Ok(BoundarySubset::Points(self.samples()?.iter().map(|p| g.apply_boundary(p)).collect()))
    }
}

/// Center of mass of the class of an abelian group, with its certificate.
#[derive(Debug, Clone)]
pub struct ClassCenter {
    pub center: BoundaryPoint,
    /// Samples fixed by every generator.
    pub fixed: Vec<BoundaryPoint>,
    /// Samples fixed by `γ^{n!}` for every generator, for some `n ≤ depth`.
    pub finite_index_fixed: Vec<BoundaryPoint>,
    /// Samples of the closure within `π/2` of every sample of the above.
    pub b_samples: Vec<BoundaryPoint>,
    /// Some point of the fixed set lies within `π/2` of every sample of the
    /// finite-index fixed set.
    pub step1_ok: bool,
    /// `π/2 − ρ` for the circumradius `ρ` of the `b_samples`.
    pub alpha: f64,
    pub max_td_fixed: f64,
    /// `Td(ξ, y) ≤ π/2 + 1e−6` on the finite-index fixed samples and
    /// `α > 0`.
    pub certificate_ok: bool,
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// Two-step center of mass of the group generated by commuting
/// `generators`, over the samples of `sampler`.
pub fn class_center_of_mass(
    space: &ModelSpace,
    generators: &[Isometry],
    sampler: &BoundarySubset,
    depth: u32,
) -> Result<ClassCenter> {
    if generators.is_empty() || depth == 0 || depth > 12 {
        return Err(GeometryError::Invalid("need generators and 1 ≤ depth ≤ 12".into()));
    }
    let samples = sampler.samples()?;
    for p in &samples {
        space.check_boundary(p)?;
    }
    let tol = 1e-9;
    let fixed_by = |gs: &[Isometry], p: &BoundaryPoint| gs.iter().all(|g| g.apply_boundary(p).approx_eq(p, tol));
    let fixed: Vec<BoundaryPoint> = samples.iter().filter(|p| fixed_by(generators, p)).cloned().collect();
    let powers: Vec<Vec<Isometry>> =
        (1..=depth).map(|n| generators.iter().map(|g| g.power(factorial(n))).collect()).collect();
    let finite_index_fixed: Vec<BoundaryPoint> =
        samples.iter().filter(|p| powers.iter().any(|gs| fixed_by(gs, p))).cloned().collect();
    let within = |p: &BoundaryPoint, slack: f64| {
        finite_index_fixed.iter().all(|q| space.tits_distance(p, q) <= FRAC_PI_2 + slack)
    };
    let step1_ok = fixed.iter().any(|p| within(p, 1e-9));
    let b_samples: Vec<BoundaryPoint> = finite_index_fixed.iter().filter(|p| within(p, 1e-9)).cloned().collect();
    if b_samples.is_empty() {
        return Err(GeometryError::Precondition(
            "no sample lies within π/2 of every finite-index fixed sample".into(),
        ));
    }
    let res = center_of_finite_set(space, &b_samples)?;
    let max_td_fixed =
        finite_index_fixed.iter().map(|q| space.tits_distance(&res.center, q)).fold(0.0, f64::max);
    let alpha = FRAC_PI_2 - res.radius;
    Ok(ClassCenter {
        center: res.center,
        fixed,
        finite_index_fixed,
        b_samples,
        step1_ok,
        alpha,
        max_td_fixed,
        certificate_ok: max_td_fixed <= FRAC_PI_2 + 1e-6 && alpha > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::busemann::FactorIsometry;
    use std::f64::consts::PI;

    fn h2xh2() -> ModelSpace {
        let h = ModelSpace::hyperbolic(2).unwrap();
        ModelSpace::product(&[h.clone(), h]).unwrap()
    }

    fn parab() -> FactorIsometry {
        FactorIsometry::parabolic(DVector::from_vec(vec![1.0]))
    }

    fn id() -> FactorIsometry {
        FactorIsometry::identity(Factor::Hyperbolic(2))
    }

    fn fan() -> BoundarySubset {
        let opts = vec![FactorIdeal::Infinity, FactorIdeal::Finite(DVector::from_vec(vec![0.0]))];
        BoundarySubset::Join { factor_options: vec![opts.clone(), opts], steps: 16 }
    }

    #[test]
    fn wolfe_matches_closed_forms() {
        let pts = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0])];
        let (p, w) = min_norm_point(&pts, 1);
        assert!((p - DVector::from_vec(vec![0.5, 0.5])).amax() < 1e-15);
        assert!((w[0] - 0.5).abs() < 1e-15);
        let pts = vec![
            DVector::from_vec(vec![2.0, 1.0, 0.0]),
            DVector::from_vec(vec![2.0, -1.0, 0.0]),
            DVector::from_vec(vec![3.0, 0.0, 1.0]),
        ];
        let (p, _) = min_norm_point(&pts, 2);
        assert!((p - DVector::from_vec(vec![2.0, 0.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn singletons_and_symmetric_pairs() {
        let s = h2xh2();
        let xi = BoundaryPoint::join(0.3, FactorIdeal::Infinity, FactorIdeal::Infinity).unwrap();
        let c = center_of_finite_set(&s, &[xi.clone()]).unwrap();
        assert!(c.center.approx_eq(&xi, 1e-12) && c.radius < 1e-7);
        let a = BoundaryPoint::join(0.0, FactorIdeal::Infinity, FactorIdeal::Infinity).unwrap();
        let b = BoundaryPoint::join(PI / 2.0, FactorIdeal::Infinity, FactorIdeal::Infinity).unwrap();
        let c = center_of_finite_set(&s, &[a, b]).unwrap();
        assert!((c.center.theta() - PI / 4.0).abs() < 1e-12 && c.unique());
    }

    #[test]
    fn wide_sets_are_rejected() {
        let s = ModelSpace::euclidean(2).unwrap();
        let d = |a: f64| BoundaryPoint::single(FactorIdeal::Direction(DVector::from_vec(vec![a.cos(), a.sin()])));
        assert!(matches!(
            center_of_finite_set(&s, &[d(0.0), d(1.7)]),
            Err(GeometryError::Precondition(_))
        ));
        let c = center_of_finite_set(&s, &[d(0.0), d(1.5), d(0.4)]).unwrap();
        assert!((c.radius - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sphere_sets_match_a_grid_oracle() {
        let s = ModelSpace::euclidean(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dir = |th: f64, ph: f64| DVector::from_vec(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
        for _ in 0..5 {
            let pts: Vec<DVector<f64>> =
                (0..3).map(|_| dir(rng.gen_range(0.0..0.7), rng.gen_range(0.0..2.0 * PI))).collect();
            let set: Vec<BoundaryPoint> =
                pts.iter().map(|p| BoundaryPoint::single(FactorIdeal::Direction(p.clone()))).collect();
            let c = center_of_finite_set(&s, &set).unwrap();
            let h = 1e-2;
            let mut grid = f64::INFINITY;
            for i in 0..=(PI / h) as usize {
                for j in 0..(2.0 * PI / h) as usize {
                    let x = dir(i as f64 * h, j as f64 * h);
                    let r = pts.iter().map(|p| p.dot(&x).clamp(-1.0, 1.0).acos()).fold(0.0, f64::max);
                    grid = grid.min(r);
                }
            }
            assert!(c.radius <= grid + 1e-12 && grid - c.radius < h, "{} vs {grid}", c.radius);
        }
    }

    #[test]
    fn class_centers_of_product_parabolics() {
        let s = h2xh2();
        let both = [Isometry::new(&s, vec![parab(), id()]).unwrap(), Isometry::new(&s, vec![id(), parab()]).unwrap()];
        let c = class_center_of_mass(&s, &both, &fan(), 3).unwrap();
        assert!((c.center.theta() - PI / 4.0).abs() < 1e-6 && c.certificate_ok && c.step1_ok);
        assert_eq!(c.center.ideals, vec![Some(FactorIdeal::Infinity), Some(FactorIdeal::Infinity)]);

        let one = [both[0].clone()];
        let c = class_center_of_mass(&s, &one, &fan(), 3).unwrap();
        let want = BoundaryPoint::join(0.0, FactorIdeal::Infinity, FactorIdeal::Infinity).unwrap();
        assert!(c.center.approx_eq(&want, 1e-9) && c.certificate_ok);
        assert!(one.iter().all(|g| g.apply_boundary(&c.center).approx_eq(&c.center, 1e-9)));

        let squared = [both[0].power(2)];
        let c2 = class_center_of_mass(&s, &squared, &fan(), 3).unwrap();
        assert!(c2.center.approx_eq(&c.center, 1e-4));
    }

    #[test]
    fn class_center_is_equivariant() {
        let s = h2xh2();
        let g = Isometry::new(&s, vec![FactorIsometry::boost(2, 0.7), parab()]).unwrap();
        let gi = g.inverse();
        let gens = [Isometry::new(&s, vec![parab(), id()]).unwrap(), Isometry::new(&s, vec![id(), parab()]).unwrap()];
        let conj: Vec<Isometry> = gens.iter().map(|a| g.compose(a).compose(&gi)).collect();
        let c = class_center_of_mass(&s, &gens, &fan(), 2).unwrap();
        let cg = class_center_of_mass(&s, &conj, &fan().mapped(&g).unwrap(), 2).unwrap();
        assert!(cg.center.approx_eq(&g.apply_boundary(&c.center), 1e-6));
    }
}
