use std::f64::consts::PI;

use hadamard::busemann::{doubling_rates, weighted_series, BusemannFunction, FactorIsometry, Isometry, WordBall};
use hadamard::convex::{minimize_on_sphere, ProjectionOptions, SphereOptions};
use hadamard::busemann::ConvexCombination;
use hadamard::models::{BoundaryPoint, Factor, FactorIdeal, ModelSpace, Point};
use hadamard::simplex::{projection_contraction, root_lemma_audit, SimplexSpec};
use nalgebra::DVector;
use proptest::prelude::*;

fn mixed() -> ModelSpace {
    ModelSpace::product(&[ModelSpace::hyperbolic(2).unwrap(), ModelSpace::euclidean(2).unwrap()]).unwrap()
}

fn h2xh2() -> ModelSpace {
    let h = ModelSpace::hyperbolic(2).unwrap();
    ModelSpace::product(&[h.clone(), h]).unwrap()
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-3.0..3.0f64, dim).prop_map(|c| Point::from_slice(&c))
}

fn hyp_ideal() -> impl Strategy<Value = FactorIdeal> {
    prop_oneof![
        Just(FactorIdeal::Infinity),
        (-1.0..1.0f64).prop_map(|u| FactorIdeal::Finite(DVector::from_vec(vec![u]))),
        Just(FactorIdeal::Finite(DVector::from_vec(vec![0.5]))),
    ]
}

/// Boundary points of `H² × ℝ²`.
fn mixed_boundary() -> impl Strategy<Value = BoundaryPoint> {
    (0.0..=PI / 2.0, hyp_ideal(), 0.0..2.0 * PI).prop_map(|(th, id, phi)| {
        let d = FactorIdeal::Direction(DVector::from_vec(vec![phi.cos(), phi.sin()]));
        BoundaryPoint::join(th, id, d).unwrap()
    })
}

/// `lim d(c₁(t), c₂(t))/t = 2 sin(Td/2)`, Richardson-extrapolated from
/// `t, 2t, 4t` against an expansion in `1/t`. The chord is compared rather
/// than the angle, whose inverse sine is singular at `π`.
fn chord_limit(space: &ModelSpace, x: &Point, a: &BoundaryPoint, b: &BoundaryPoint, t: f64) -> f64 {
    let chord = |t: f64| space.distance(&space.geodesic_ray(x, a, t), &space.geodesic_ray(x, b, t)) / t;
    (8.0 * chord(4.0 * t) - 6.0 * chord(2.0 * t) + chord(t)) / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn triangle_inequality(x in point(4), y in point(4), z in point(4)) {
        let s = mixed();
        prop_assert!(s.distance(&x, &z) <= s.distance(&x, &y) + s.distance(&y, &z) + 1e-9);
    }

    #[test]
    fn rays_have_unit_speed(x in point(4), xi in mixed_boundary(), t1 in 0.0..8.0f64, t2 in 0.0..8.0f64) {
        let s = mixed();
        let d = s.distance(&s.geodesic_ray(&x, &xi, t1), &s.geodesic_ray(&x, &xi, t2));
        prop_assert!((d - (t1 - t2).abs()).abs() < 1e-9, "{d} vs {}", (t1 - t2).abs());
    }

    #[test]
    fn tits_distance_matches_the_limit_of_rays(
        x in prop::collection::vec(-1.0..1.0f64, 4), a in mixed_boundary(), b in mixed_boundary()
    ) {
        let s = mixed();
        let x = Point::from_slice(&x);
        let td = s.tits_distance(&a, &b);
        // the hyperbolic distance between rays toward distinct ideals carries
        // an e^{-2wt} correction, so t scales with the smaller weight; rays
        // toward finite ideals δ apart only separate after ln(1/δ)/w
        let (w, sep) = match (&a.ideals[0], &b.ideals[0]) {
            (Some(FactorIdeal::Finite(p)), Some(FactorIdeal::Finite(q))) if p != q => {
                (a.weights[0].min(b.weights[0]), (1.0 + 1.0 / (p[0] - q[0]).abs()).ln())
            }
            (Some(p), Some(q)) if p != q => (a.weights[0].min(b.weights[0]), 0.0),
            _ => (1.0, 0.0),
        };
        let t = if w < 1.0 { (10.0 + 2.0 * sep) / w } else { 8.0 };
        // rays deep toward finite ideal points lose precision like e^R·ε
        prop_assume!(4.0 * t * a.weights[0].max(b.weights[0]) <= 64.0);
        let lim = chord_limit(&s, &x, &a, &b, t);
        let want = 2.0 * (td / 2.0).sin();
        prop_assert!((want - lim).abs() < 1e-3, "join chord {want} vs limit {lim}");
    }

    #[test]
    fn angles_at_a_point_form_a_metric(
        x in point(4), a in mixed_boundary(), b in mixed_boundary(), c in mixed_boundary()
    ) {
        let s = mixed();
        let ab = s.angle_at(&x, &a, &b);
        let bc = s.angle_at(&x, &b, &c);
        let ac = s.angle_at(&x, &a, &c);
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn busemann_functions_decrease_at_unit_rate(x in point(4), xi in mixed_boundary(), t in 0.0..8.0f64) {
        let s = mixed();
        let h = BusemannFunction::new(&s, xi.clone(), s.origin()).unwrap();
        let y = s.geodesic_ray(&x, &xi, t);
        prop_assert!((h.value(&s, &y) - (h.value(&s, &x) - t)).abs() < 1e-9);
    }

    #[test]
    fn busemann_functions_are_convex(x in point(4), y in point(4), xi in mixed_boundary(), u in 0.0..1.0f64) {
        let s = mixed();
        let h = BusemannFunction::new(&s, xi, s.origin()).unwrap();
        let m = s.geodesic(&x, &y, u);
        let bound = (1.0 - u) * h.value(&s, &x) + u * h.value(&s, &y);
        prop_assert!(h.value(&s, &m) <= bound + 1e-9);
    }

    #[test]
    fn doubling_rates_are_nonincreasing(x in point(4), ell in 0.0..2.0f64, shift in -2.0..2.0f64, v in -1.0..1.0f64) {
        let s = mixed();
        let g = Isometry::new(&s, vec![
            FactorIsometry::Similarity { log_scale: ell, rot: nalgebra::DMatrix::identity(1, 1), shift: DVector::from_vec(vec![shift]) },
            FactorIsometry::translation(DVector::from_vec(vec![v, 0.5])),
        ]).unwrap();
        let rates = doubling_rates(&s, &g, &x, 30);
        for w in rates.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-9, "{:?}", rates);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn sphere_minimizers_match_the_flat_closed_form(
        raw in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 3),
        t in prop::collection::vec(0.05..1.0f64, 3),
        x0 in point(3),
        r in 0.5..200.0f64,
    ) {
        let s = ModelSpace::euclidean(3).unwrap();
        let dirs: Vec<DVector<f64>> = raw.iter().map(|v| DVector::from_column_slice(v)).collect();
        prop_assume!(dirs.iter().all(|d| d.norm() > 0.1));
        let dirs: Vec<DVector<f64>> = dirs.iter().map(|d| d / d.norm()).collect();
        let total: f64 = t.iter().sum();
        let t: Vec<f64> = t.iter().map(|v| v / total).collect();
        let mut v = DVector::zeros(3);
        for (ti, d) in t.iter().zip(&dirs) {
            v += d * *ti;
        }
        prop_assume!(v.norm() > 0.05);
        let hs: Vec<BusemannFunction> = dirs
            .iter()
            .map(|d| BusemannFunction::new(&s, BoundaryPoint::single(FactorIdeal::Direction(d.clone())), s.origin()).unwrap())
            .collect();
        let f = ConvexCombination::from_weights(&hs, &t).unwrap();
        let res = minimize_on_sphere(&s, &f, &x0, r, &SphereOptions::default()).unwrap();
        let want = &x0.coords + &v / v.norm() * r;
        prop_assert!((res.point.coords - want).amax() < 1e-9 * r.max(1.0));
        prop_assert!(res.residual < 1e-8);
    }
}

fn product_spec() -> (ModelSpace, SimplexSpec) {
    let s = h2xh2();
    let a = BoundaryPoint::join(PI / 8.0, FactorIdeal::Infinity, FactorIdeal::Infinity).unwrap();
    let b = BoundaryPoint::join(3.0 * PI / 8.0, FactorIdeal::Infinity, FactorIdeal::Infinity).unwrap();
    let spec = SimplexSpec::new(&s, vec![a, b], s.origin()).unwrap();
    (s, spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn horoball_projections_are_contractions(
        x in point(4), y in point(4), b in prop::collection::vec(-2.0..0.0f64, 2)
    ) {
        let (s, spec) = product_spec();
        let b = DVector::from_vec(b);
        let (dp, dxy) = projection_contraction(&s, &spec, &b, &x, &y, &ProjectionOptions::default()).unwrap();
        prop_assert!(dp <= dxy + 1e-9, "{dp} > {dxy}");
    }

    #[test]
    fn projections_move_monotonically_in_the_levels(
        x in point(4),
        a in prop::collection::vec(-1.0..1.0f64, 2),
        drop in prop::collection::vec(0.0..2.0f64, 2),
    ) {
        let (s, spec) = product_spec();
        let a = DVector::from_vec(a);
        let b = &a - DVector::from_vec(drop);
        let rep = root_lemma_audit(&s, &spec, &a, &b, &x, &ProjectionOptions::default()).unwrap();
        prop_assert!(rep.monotone_lhs <= rep.monotone_bound + 1e-8, "{rep:?}");
    }
}

#[test]
fn weighted_series_partial_sums_grow_within_the_tail_bound() {
    let s = h2xh2();
    let p = FactorIsometry::parabolic(DVector::from_vec(vec![1.0]));
    let id = FactorIsometry::identity(Factor::Hyperbolic(2));
    let gens = [Isometry::new(&s, vec![p.clone(), id.clone()]).unwrap(), Isometry::new(&s, vec![id, p]).unwrap()];
    let x = Point::from_slice(&[0.2, 0.1, -0.3, 0.4]);
    let all = |_: &Isometry| true;
    let c = 2.0;
    let values: Vec<_> = (1..=5)
        .map(|r| weighted_series(&s, &WordBall::new(&s, &gens, r), c, &all, &x).unwrap())
        .collect();
    for w in values.windows(2) {
        let step = w[1].value - w[0].value;
        assert!(step >= 0.0);
        assert!(step <= w[0].tail_bound + 1e-12, "{step} > {}", w[0].tail_bound);
    }
}

