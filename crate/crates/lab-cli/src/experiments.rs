//! The experiment kinds behind `lab run`.
//!
//! Every experiment produces tables and verdicts in memory; [`crate::run`]
//! persists them. A numeric failure inside an experiment becomes a failed
//! verdict and an `errors` table row rather than a crash.

use anyhow::{anyhow, Context, Result};
use hadamard::busemann::{Isometry, WordBall};
use hadamard::convex::{minimize_on_sphere, ProjectionOptions, SphereOptions};
use hadamard::dynamics::{
    center_of_finite_set, class_center_of_mass, classify, km_tracking, BoundarySubset, IsometryClass,
};
use hadamard::models::{BoundaryPoint, FactorIdeal, ModelSpace, Point};
use hadamard::simplex::{
    diameter_audit, error_bound_audit, horo_coordinates, inverse_check, projection_contraction, root_lemma_audit,
    simplex_limit, SimplexSpec,
};
use hadamard::GeometryError;
use nalgebra::DVector;
use rand::Rng;
use std::f64::consts::FRAC_PI_2;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::row;
use crate::sampling::{fmt_boundary, fmt_f64, fmt_vec, random_barycentric, random_point, random_tangent, rng};
use crate::scenarios;
use crate::table::Table;
use crate::verify;

/// Cauchy gap at the last radius below which a limit counts as settled.
pub const GAP_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Verdict { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verdict_table(&self) -> Table {
        let mut t = Table::new("verdicts", &["verdict", "pass", "detail"], 1);
        for v in &self.verdicts {
            t.push(row![v.name.clone(), v.pass, v.detail.clone()]);
        }
        t
    }

    fn failed(kind: &str, err: &anyhow::Error) -> Self {
        let mut t = Table::new("errors", &["experiment", "error"], 1);
        t.push(row![kind, format!("{err:#}")]);
        Outcome { tables: vec![t], verdicts: vec![Verdict::new(format!("{kind}_completed"), false, format!("{err:#}"))] }
    }
}

/// Runs the configured experiment. Errors are folded into the outcome.
pub fn execute(cfg: &ExperimentConfig) -> Outcome {
    let scenario = cfg.scenario.as_deref().unwrap_or("");
    let res = match cfg.experiment {
        ExperimentKind::Simplex => simplex(cfg, scenario),
        ExperimentKind::Tracking => tracking(cfg, scenario),
        ExperimentKind::Center => center(cfg, scenario),
        ExperimentKind::ProjectionAudit => projection_audit(cfg, scenario),
        ExperimentKind::Complex => complex(cfg),
        ExperimentKind::VerifySuite => Ok(verify::suite(cfg.seed)),
    };
    res.unwrap_or_else(|e| Outcome::failed(cfg.experiment.name(), &e))
}

fn spec_of(g: &scenarios::Geometric) -> Result<&SimplexSpec> {
    g.spec.as_ref().ok_or_else(|| anyhow!("scenario has no simplex"))
}

/// Euclidean closed form `x₀ + R·normalize(Σ tᵢvᵢ)` for direction vertices.
pub fn flat_closed_form(spec: &SimplexSpec, t: &[f64], r: f64) -> Option<DVector<f64>> {
    let mut s = DVector::zeros(spec.basepoint.coords.len());
    for (ti, h) in t.iter().zip(&spec.vertices) {
        match h.center.ideals.first() {
            Some(Some(FactorIdeal::Direction(v))) if h.center.ideals.len() == 1 => s += v * *ti,
            _ => return None,
        }
    }
    let n = s.norm();
    (n > 0.0).then(|| &spec.basepoint.coords + s * (r / n))
}

fn simplex(cfg: &ExperimentConfig, name: &str) -> Result<Outcome> {
    let g = scenarios::geometric(name)?;
    let spec = spec_of(&g)?;
    let space = &g.space;
    let opts = SphereOptions::default();
    let lim = simplex_limit(space, spec, &cfg.radii, cfg.grid_m, GAP_TOL, &opts)?;
    let mut samples = Table::new(
        "simplex",
        &["r", "t_index", "t", "coords", "residual", "lipschitz", "lipschitz_bound", "closed_form_error"],
        2,
    );
    let mut worst_closed = 0.0f64;
    let mut flat = true;
    let mut worst_residual = 0.0f64;
    for a in &lim.approximations {
        for (i, (t, p)) in a.grid.iter().zip(&a.samples).enumerate() {
            let err = match flat_closed_form(spec, t, a.r) {
                Some(x) => (x - &p.coords).norm(),
                None => {
                    flat = false;
                    f64::NAN
                }
            };
            if err.is_finite() {
                worst_closed = worst_closed.max(err / a.r.max(1.0));
            }
            worst_residual = worst_residual.max(a.residuals[i]);
            samples.push(row![
                a.r,
                i,
                fmt_vec(t),
                fmt_vec(p.coords.as_slice()),
                a.residuals[i],
                a.lipschitz,
                a.lipschitz_bound,
                err
            ]);
        }
    }
    let diam = diameter_audit(space, spec, &lim.limits);
    let mut limits = Table::new("simplex_limit", &["t_index", "t", "limit", "final_gap", "max_td_to_vertex"], 1);
    for (i, (t, l)) in lim.grid.iter().zip(&lim.limits).enumerate() {
        let td = spec.vertices.iter().map(|h| space.tits_distance(l, &h.center)).fold(0.0, f64::max);
        limits.push(row![i, fmt_vec(t), fmt_boundary(l), lim.final_gap(i), td]);
    }
    let lip_worst = lim
        .approximations
        .iter()
        .map(|a| a.lipschitz - a.lipschitz_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut verdicts = vec![
        Verdict::new(
            "lipschitz_bound",
            lim.approximations.iter().all(|a| a.lipschitz_ok()),
            format!("max(L - 2sqrt(k+1)) = {}", fmt_f64(lip_worst)),
        ),
        Verdict::new("sphere_residual", worst_residual <= 1e-8, format!("max residual {}", fmt_f64(worst_residual))),
        Verdict::new(
            "limit_settled",
            lim.conclusive(),
            format!("{} of {} grid points above gap {GAP_TOL:e}", lim.inconclusive.len(), lim.grid.len()),
        ),
        Verdict::new(
            "diameter_bound",
            diam.ok(),
            format!("max Td {} vs pi/2 - alpha = {}", fmt_f64(diam.max_td), fmt_f64(diam.bound)),
        ),
    ];
    if flat {
        verdicts.push(Verdict::new(
            "flat_closed_form",
            worst_closed <= 1e-9,
            format!("max |sigma_R(t) - closed form|/R = {}", fmt_f64(worst_closed)),
        ));
    }
    Ok(Outcome { tables: vec![samples, limits], verdicts })
}

fn class_name(c: IsometryClass) -> &'static str {
    match c {
        IsometryClass::Elliptic => "elliptic",
        IsometryClass::Hyperbolic => "hyperbolic",
        IsometryClass::Parabolic => "parabolic",
        IsometryClass::Undetermined => "undetermined",
    }
}

fn tracking(cfg: &ExperimentConfig, name: &str) -> Result<Outcome> {
    let g = scenarios::geometric(name)?;
    let iso = g.isometry.as_ref().ok_or_else(|| anyhow!("scenario {name} has no isometry"))?;
    let space = &g.space;
    let y = space.origin();
    let cls = classify(space, iso, &y);
    let mut class_t = Table::new("classification", &["scenario", "class", "min_displacement", "translation_length"], 1);
    class_t.push(row![name, class_name(cls.class), cls.min_displacement, cls.translation_length.unwrap_or(f64::NAN)]);
    let mut out = Outcome { tables: vec![class_t], verdicts: Vec::new() };
    match km_tracking(space, iso, &y, cfg.k_max) {
        Ok(tr) => {
            let mut ratios = Table::new("tracking", &["k", "ratio"], 1);
            for (k, r) in &tr.ratios {
                ratios.push(row![*k, *r]);
            }
            let mut good = Table::new("good_points", &["epsilon", "n_epsilon", "k_epsilon"], 1);
            for (e, n, k) in &tr.good_points {
                good.push(row![*e, *n, *k]);
            }
            out.tables.extend([ratios, good]);
            out.verdicts.push(Verdict::new("tail_nonincreasing", tr.tail_nonincreasing, ""));
            out.verdicts.push(Verdict::new("good_point_chain", tr.chain_ok, ""));
            let fr = tr.final_ratio();
            out.verdicts.push(Verdict::new(
                "final_ratio",
                fr < 0.01,
                format!("d(y_k, c(Ak))/k = {} at k = {}", fmt_f64(fr), cfg.k_max),
            ));
        }
        Err(GeometryError::Precondition(msg)) if cls.class == IsometryClass::Parabolic => {
            out.verdicts.push(Verdict::new("parabolic_rejected", true, msg));
        }
        Err(e) => return Err(e).context("km_tracking"),
    }
    Ok(out)
}

fn finite(v: f64) -> FactorIdeal {
    FactorIdeal::Finite(DVector::from_vec(vec![v]))
}

fn center(cfg: &ExperimentConfig, name: &str) -> Result<Outcome> {
    let g = scenarios::geometric(name)?;
    let space = &g.space;
    let sampler = if space.num_factors() == 1 {
        BoundarySubset::Points(
            [FactorIdeal::Infinity, finite(0.0), finite(1.0), finite(-1.0)].into_iter().map(BoundaryPoint::single).collect(),
        )
    } else {
        let opts = vec![FactorIdeal::Infinity, finite(0.0), finite(1.0)];
        BoundarySubset::Join { factor_options: vec![opts.clone(), opts], steps: 32 }
    };
    let doubled: Vec<Isometry> = g.group.iter().map(|x| x.power(2)).collect();
    let mut class_t =
        Table::new("class_center", &["group", "center", "alpha", "max_td_fixed", "certificate_ok"], 1);
    let mut verdicts = Vec::new();
    let mut centers = Vec::new();
    for (label, gens) in [("A", &g.group), ("2A", &doubled)] {
        let c = class_center_of_mass(space, gens, &sampler, 4)?;
        class_t.push(row![label, fmt_boundary(&c.center), c.alpha, c.max_td_fixed, c.certificate_ok]);
        verdicts.push(Verdict::new(format!("certificate_{label}"), c.certificate_ok, format!("alpha {}", fmt_f64(c.alpha))));
        centers.push(c.center);
    }
    let drift = space.tits_distance(&centers[0], &centers[1]);
    verdicts.push(Verdict::new("finite_index_invariance", drift <= 1e-4, format!("Td(A, 2A) = {}", fmt_f64(drift))));

    if space.num_factors() == 2 {
        let mut sets = Table::new("center_sets", &["index", "size", "center_theta", "radius", "restart_spread"], 1);
        let mut r = rng(cfg.seed, 11);
        let mut unique = 0;
        for i in 0..cfg.samples {
            let size: usize = r.gen_range(1..=5);
            let set = (0..size)
                .map(|_| BoundaryPoint::join(r.gen_range(0.0..=FRAC_PI_2), FactorIdeal::Infinity, FactorIdeal::Infinity))
                .collect::<hadamard::Result<Vec<_>>>()?;
            let c = center_of_finite_set(space, &set)?;
            unique += usize::from(c.unique());
            sets.push(row![i, size, c.center.theta(), c.radius, c.restart_spread]);
        }
        verdicts.push(Verdict::new(
            "finite_set_centers_unique",
            unique == cfg.samples,
            format!("{unique} of {} restarts agree within 1e-4", cfg.samples),
        ));
        return Ok(Outcome { tables: vec![class_t, sets], verdicts });
    }
    Ok(Outcome { tables: vec![class_t], verdicts })
}

/// A random point of the truncated cone: `σ_R(t)` for `R ∈ [1, 20]`.
pub fn random_cone_point(
    space: &ModelSpace,
    spec: &SimplexSpec,
    rng: &mut rand_chacha::ChaCha8Rng,
    opts: &SphereOptions,
) -> Result<Point> {
    let t = random_barycentric(rng, spec.k());
    let r = rng.gen_range(1.0..=20.0);
    let f = spec.combination(&t)?;
    Ok(minimize_on_sphere(space, &f, &spec.basepoint, r, opts)?.point)
}

/// Orbit `{γ x₀ : |γ| ≤ radius}` of the basepoint.
pub fn orbit(space: &ModelSpace, group: &[Isometry], x0: &Point, radius: usize) -> Vec<Point> {
    WordBall::new(space, group, radius).elements.iter().map(|(g, _, _)| g.apply(space, x0)).collect()
}

fn projection_audit(cfg: &ExperimentConfig, name: &str) -> Result<Outcome> {
    let g = scenarios::geometric(name)?;
    let spec = spec_of(&g)?;
    let space = &g.space;
    let k1 = spec.k() + 1;
    let popts = ProjectionOptions::default();
    let sopts = SphereOptions::default();
    let orb = orbit(space, &g.group, &spec.basepoint, 6);
    let slack = cfg.tolerance;
    let mut t = Table::new("projection_audit", &["index", "lemma", "lhs", "bound", "pass"], 2);
    let mut stats: Vec<(&str, usize, f64)> =
        ["root", "monotone", "contraction", "inverse", "error_bound"].iter().map(|n| (*n, 0, f64::NEG_INFINITY)).collect();
    let mut record = |t: &mut Table, i: usize, lemma: &'static str, lhs: f64, bound: f64, pass: bool| {
        t.push(row![i, lemma, lhs, bound, pass]);
        let s = stats.iter_mut().find(|s| s.0 == lemma).expect("known lemma");
        s.1 += usize::from(!pass);
        s.2 = s.2.max(lhs - bound);
    };
    let mut r = rng(cfg.seed, 21);
    for i in 0..cfg.samples {
        let x = random_point(space, &mut r, 2.0);
        let a = DVector::from_fn(k1, |_, _| r.gen_range(-4.0..=1.0));
        let b = DVector::from_fn(k1, |j, _| a[j] - r.gen_range(0.0..=2.0));
        let root = root_lemma_audit(space, spec, &a, &b, &x, &popts)?;
        record(&mut t, i, "root", root.lhs, root.bound, root.lhs <= root.bound + slack);
        record(&mut t, i, "monotone", root.monotone_lhs, root.monotone_bound, root.monotone_lhs <= root.monotone_bound + slack);

        let y = random_point(space, &mut r, 2.0);
        let (dp, dxy) = projection_contraction(space, spec, &b, &x, &y, &popts)?;
        record(&mut t, i, "contraction", dp, dxy, dp <= dxy + slack);

        let cone = random_cone_point(space, spec, &mut r, &sopts)?;
        let bc = horo_coordinates(space, spec, &cone).values;
        let inv = inverse_check(space, spec, &bc, &popts)?;
        record(&mut t, i, "inverse", inv.error, 1e-7, inv.error <= 1e-7);

        if !g.group.is_empty() {
            let base = &orb[r.gen_range(0..orb.len())];
            let xn = space.exp(base, &random_tangent(space.dim(), &mut r, 2.0));
            let eb = error_bound_audit(space, spec, &bc, &g.group, &orb, &xn, &popts)?;
            record(&mut t, i, "error_bound", eb.lhs, eb.rhs, eb.applicable && eb.lhs <= eb.rhs + slack);
        }
    }
    let verdicts = stats
        .iter()
        .filter(|s| s.0 != "error_bound" || !g.group.is_empty())
        .map(|(n, fails, excess)| {
            Verdict::new(*n, *fails == 0, format!("{fails} failures, max(lhs - bound) = {}", fmt_f64(*excess)))
        })
        .collect();
    Ok(Outcome { tables: vec![t], verdicts })
}

fn complex(cfg: &ExperimentConfig) -> Result<Outcome> {
    let chains = match cfg.scenario.as_deref() {
        Some(s) => scenarios::chains(s)?,
        None => abelian_complex::instance::InstanceFile::bundled().lattice_chains()?,
    };
    let model = abelian_complex::build_class_complex(&chains)?;
    let mut ct = Table::new("complex_chains", &["chain", "k", "vertices", "input_len", "dimension_drop"], 1);
    for c in &model.chains {
        let verts: Vec<String> = c.vertices.iter().map(|v| v.to_string()).collect();
        ct.push(row![c.name.clone(), c.dimension(), verts.join(";"), c.input_len, c.dimension_drop()]);
    }
    let mut ht = Table::new("half_dimension", &["chain", "k", "top_rank", "n", "bound", "verdict"], 1);
    let mut flagged = 0;
    for h in abelian_complex::half_dimension_report(&model) {
        let verdict = match h.verdict {
            abelian_complex::HalfDimensionVerdict::Holds { equality: true } => "holds-equality",
            abelian_complex::HalfDimensionVerdict::Holds { equality: false } => "holds",
            abelian_complex::HalfDimensionVerdict::RequiresDegeneracy => {
                flagged += 1;
                "requires-degeneracy"
            }
            abelian_complex::HalfDimensionVerdict::Unannotated => "unannotated",
        };
        let bound = h.bound.map_or("-".to_string(), |b| b.to_string());
        ht.push(row![h.chain.clone(), h.k, h.top_rank, h.n.map_or("-".to_string(), |n| n.to_string()), bound, verdict]);
    }
    let violations = model.rank_violations();
    let verdicts = vec![
        Verdict::new("rank_bounds", violations.is_empty(), format!("{} violations", violations.len())),
        Verdict::new(
            "dimension_below_rank",
            model.dimension < model.max_rank,
            format!("dim {} vs max rank {}", model.dimension, model.max_rank),
        ),
        Verdict::new("simplices", true, format!("{} simplices, {flagged} chains require degeneracy", model.simplices.len())),
    ];
    Ok(Outcome { tables: vec![ct, ht], verdicts })
}
