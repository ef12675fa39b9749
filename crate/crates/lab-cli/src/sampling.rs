//! Seeded random instances and text encodings shared by the experiments.

use hadamard::models::{BoundaryPoint, FactorIdeal, ModelSpace, Point};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` of the run seeded with `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform chart coordinates in `[-scale, scale]^dim`.
pub fn random_point(space: &ModelSpace, rng: &mut ChaCha8Rng, scale: f64) -> Point {
    let c: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-scale..=scale)).collect();
    Point::from_slice(&c)
}

/// A tangent vector of norm at most `len` in a uniformly random direction.
pub fn random_tangent(dim: usize, rng: &mut ChaCha8Rng, len: f64) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (len * rng.gen::<f64>() / n);
        }
    }
}

/// Uniform point of the standard simplex `Δ^k`.
pub fn random_barycentric(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..=k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Semicolon-separated floats.
pub fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

fn fmt_ideal(i: &Option<FactorIdeal>) -> String {
    match i {
        None => "-".into(),
        Some(FactorIdeal::Infinity) => "inf".into(),
        Some(FactorIdeal::Direction(d)) => format!("dir({})", fmt_vec(d.as_slice())),
        Some(FactorIdeal::Finite(u)) => format!("fin({})", fmt_vec(u.as_slice())),
    }
}

/// `weights|ideal,ideal,...`, one ideal per factor.
pub fn fmt_boundary(p: &BoundaryPoint) -> String {
    let ideals: Vec<String> = p.ideals.iter().map(fmt_ideal).collect();
    format!("{}|{}", fmt_vec(&p.weights), ideals.join(","))
}
