//! The bundled scenario catalog.

use std::f64::consts::PI;

use abelian_complex::instance::InstanceFile;
use abelian_complex::LatticeChain;
use anyhow::{anyhow, Result};
use hadamard::busemann::{FactorIsometry, Isometry};
use hadamard::models::{BoundaryPoint, Factor, FactorIdeal, ModelSpace};
use hadamard::simplex::SimplexSpec;
use nalgebra::DVector;

pub const MODELS: &str = "hadamard-models";
pub const BUSEMANN: &str = "busemann-core";
pub const CONVEX: &str = "convex-geometry";
pub const SIMPLEX: &str = "busemann-simplex";
pub const DYNAMICS: &str = "isometry-dynamics";
pub const COMPLEX: &str = "abelian-complex";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub modules: &'static [&'static str],
}

pub const CATALOG: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "flat-orthogonal-k1",
        description: "R^4, two vertices at angle pi/3 in span(e1,e2), translations along e3",
        modules: &[MODELS, BUSEMANN, CONVEX, SIMPLEX],
    },
    ScenarioInfo {
        name: "flat-orthogonal-k2",
        description: "R^5, three vertices pairwise at pi/3 in span(e1,e2,e3), translations along e4",
        modules: &[MODELS, BUSEMANN, CONVEX, SIMPLEX],
    },
    ScenarioInfo {
        name: "H2-parabolic-cusp",
        description: "H^2, one vertex at the fixed point of the parabolic u -> u+1",
        modules: &[MODELS, BUSEMANN, CONVEX, SIMPLEX, DYNAMICS],
    },
    ScenarioInfo {
        name: "H2-boost-axis",
        description: "H^2, boost of length 1 along the vertical axis through the origin",
        modules: &[MODELS, BUSEMANN, DYNAMICS],
    },
    ScenarioInfo {
        name: "product-H2xH2-Z2",
        description: "H^2 x H^2, vertices at join angles pi/8 and 3pi/8 over (inf, inf), Z^2 of factor parabolics",
        modules: &[MODELS, BUSEMANN, CONVEX, SIMPLEX, DYNAMICS],
    },
    ScenarioInfo {
        name: "product-km-mixed",
        description: "H^2 x H^2, (boost of length 1, parabolic) for orbit tracking",
        modules: &[MODELS, BUSEMANN, DYNAMICS],
    },
    ScenarioInfo {
        name: "degenerate-coincident",
        description: "R^2, two coincident vertices: the degenerate control",
        modules: &[MODELS, CONVEX, SIMPLEX],
    },
    ScenarioInfo {
        name: "heisenberg-chain",
        description: "H3 < H3 x H3 in 6x6 block unitriangular matrices, sent through zeta",
        modules: &[COMPLEX],
    },
    ScenarioInfo {
        name: "flag-Z1Z2Z3",
        description: "saturated flag Z < Z^2 < Z^3 annotated with n = 4 and n = 6",
        modules: &[COMPLEX],
    },
];

pub fn info(name: &str) -> Result<&'static ScenarioInfo> {
    CATALOG.iter().find(|s| s.name == name).ok_or_else(|| anyhow!("unknown scenario {name}"))
}

/// One line per scenario: name, modules, description.
pub fn listing() -> String {
    let mut out = String::new();
    for s in CATALOG {
        out.push_str(&format!("{}\t{}\t{}\n", s.name, s.modules.join(","), s.description));
    }
    out
}

/// Geometric content of a scenario.
#[derive(Debug, Clone)]
pub struct Geometric {
    pub space: ModelSpace,
    pub spec: Option<SimplexSpec>,
    /// Generators of a free abelian group preserving every vertex function.
    pub group: Vec<Isometry>,
    /// Isometry used for orbit experiments.
    pub isometry: Option<Isometry>,
}

fn dir(v: &[f64]) -> BoundaryPoint {
    let d = DVector::from_column_slice(v);
    BoundaryPoint::single(FactorIdeal::Direction(&d / d.norm()))
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn translations(space: &ModelSpace, n: usize, axes: &[usize]) -> Result<Vec<Isometry>> {
    axes.iter().map(|&i| Ok(Isometry::new(space, vec![FactorIsometry::translation(unit(n, i))])?)).collect()
}

pub fn h2() -> ModelSpace {
    ModelSpace::hyperbolic(2).expect("H^2")
}

pub fn h2xh2() -> ModelSpace {
    ModelSpace::product(&[h2(), h2()]).expect("H^2 x H^2")
}

pub fn parabolic() -> FactorIsometry {
    FactorIsometry::parabolic(DVector::from_vec(vec![1.0]))
}

pub fn id_h2() -> FactorIsometry {
    FactorIsometry::identity(Factor::Hyperbolic(2))
}

/// `(parabolic, id)` and `(id, parabolic)` on `H² × H²`.
pub fn factor_parabolics(space: &ModelSpace) -> Vec<Isometry> {
    vec![
        Isometry::new(space, vec![parabolic(), id_h2()]).expect("factor isometry"),
        Isometry::new(space, vec![id_h2(), parabolic()]).expect("factor isometry"),
    ]
}

/// Flat vertices pairwise at angle `π/3`: `e₁`, `(½, √3/2)` and the apex of
/// the regular tetrahedron cone.
pub fn flat_vertices(n: usize, k: usize) -> Vec<BoundaryPoint> {
    let mut pts = vec![vec![1.0, 0.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0, 0.0]];
    pts.push(vec![0.5, 1.0 / (2.0 * 3f64.sqrt()), (2.0f64 / 3.0).sqrt()]);
    pts.truncate(k + 1);
    pts.into_iter()
        .map(|mut v| {
            v.resize(n, 0.0);
            dir(&v)
        })
        .collect()
}

pub fn geometric(name: &str) -> Result<Geometric> {
    let g = match name {
        "flat-orthogonal-k1" => {
            let s = ModelSpace::euclidean(4)?;
            let spec = SimplexSpec::new(&s, flat_vertices(4, 1), s.origin())?;
            Geometric { group: translations(&s, 4, &[2])?, spec: Some(spec), isometry: None, space: s }
        }
        "flat-orthogonal-k2" => {
            let s = ModelSpace::euclidean(5)?;
            let spec = SimplexSpec::new(&s, flat_vertices(5, 2), s.origin())?;
            Geometric { group: translations(&s, 5, &[3])?, spec: Some(spec), isometry: None, space: s }
        }
        "H2-parabolic-cusp" => {
            let s = h2();
            let spec = SimplexSpec::new(&s, vec![BoundaryPoint::single(FactorIdeal::Infinity)], s.origin())?;
            let p = Isometry::single(parabolic());
            Geometric { group: vec![p.clone()], spec: Some(spec), isometry: Some(p), space: s }
        }
        "H2-boost-axis" => {
            let s = h2();
            let b = Isometry::single(FactorIsometry::boost(2, 1.0));
            Geometric { group: vec![b.clone()], spec: None, isometry: Some(b), space: s }
        }
        "product-H2xH2-Z2" => {
            let s = h2xh2();
            let a = BoundaryPoint::join(PI / 8.0, FactorIdeal::Infinity, FactorIdeal::Infinity)?;
            let b = BoundaryPoint::join(3.0 * PI / 8.0, FactorIdeal::Infinity, FactorIdeal::Infinity)?;
            let spec = SimplexSpec::new(&s, vec![a, b], s.origin())?;
            Geometric { group: factor_parabolics(&s), spec: Some(spec), isometry: None, space: s }
        }
        "product-km-mixed" => {
            let s = h2xh2();
            let g = Isometry::new(&s, vec![FactorIsometry::boost(2, 1.0), parabolic()])?;
            Geometric { group: vec![g.clone()], spec: None, isometry: Some(g), space: s }
        }
        "degenerate-coincident" => {
            let s = ModelSpace::euclidean(2)?;
            let spec = SimplexSpec::new(&s, vec![dir(&[1.0, 1.0]), dir(&[1.0, 1.0])], s.origin())?;
            Geometric { group: Vec::new(), spec: Some(spec), isometry: None, space: s }
        }
        other => return Err(anyhow!("scenario {other} has no geometric content")),
    };
    Ok(g)
}

/// Chains of a combinatorial scenario, from the bundled instance file.
pub fn chains(name: &str) -> Result<Vec<LatticeChain>> {
    let all = InstanceFile::bundled().lattice_chains()?;
    let keep: &[&str] = match name {
        "heisenberg-chain" => &["heisenberg-chain"],
        "flag-Z1Z2Z3" => &["flag-Z1Z2Z3-n4", "flag-Z1Z2Z3-n6"],
        other => return Err(anyhow!("scenario {other} has no chains")),
    };
    Ok(all.into_iter().filter(|c| keep.contains(&c.name.as_str())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scenario_builds_and_names_modules() {
        for s in CATALOG {
            assert!(!s.modules.is_empty(), "{}", s.name);
            if s.modules.contains(&COMPLEX) {
                assert!(!chains(s.name).unwrap().is_empty());
            } else {
                geometric(s.name).unwrap();
            }
        }
    }

    #[test]
    fn flat_vertices_are_at_pi_over_three() {
        let s = ModelSpace::euclidean(5).unwrap();
        let v = flat_vertices(5, 2);
        for i in 0..3 {
            for j in i + 1..3 {
                assert!((s.tits_distance(&v[i], &v[j]) - PI / 3.0).abs() < 1e-12);
            }
        }
    }
}
