//! Weighted displacement series `f_A(x) = Σ_{γ∈A} e^{−c‖γ‖} d_γ(x)`.

use nalgebra::DVector;

use super::{displacement, displacement_gradient, Isometry};
use crate::models::{ModelSpace, Point, Tangent};
use crate::{par, GeometryError, Result};

/// Group elements up to a word length, found by breadth-first search over the
/// generators and their inverses. Elements are identified when their matrices
/// agree within `1e−10`, so recorded lengths are word lengths in the
/// generators, exact up to that identification.
#[derive(Debug, Clone)]
pub struct WordBall {
    /// `(element, word length, word)` in order of length, then of discovery.
    /// Letters are `±(i+1)` for generator `i` and its inverse.
    pub elements: Vec<(Isometry, usize, Vec<i32>)>,
    pub generators: Vec<Isometry>,
    pub r_cut: usize,
}

const DEDUP_TOL: f64 = 1e-10;

impl WordBall {
    pub fn new(space: &ModelSpace, generators: &[Isometry], r_cut: usize) -> Self {
        let mut letters = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            letters.push((i as i32 + 1, g.clone()));
            letters.push((-(i as i32 + 1), g.inverse()));
        }
        let mut elements = vec![(Isometry::identity(space), 0usize, Vec::new())];
        let mut start = 0;
        for len in 1..=r_cut {
            let end = elements.len();
            let mut fresh: Vec<(Isometry, usize, Vec<i32>)> = Vec::new();
            for idx in start..end {
                for (code, l) in &letters {
                    let cand = elements[idx].0.compose(l);
                    let known = elements.iter().chain(fresh.iter()).any(|(e, _, _)| e.approx_eq(&cand, DEDUP_TOL));
                    if !known {
                        let mut word = elements[idx].2.clone();
                        word.push(*code);
                        fresh.push((cand, len, word));
                    }
                }
            }
            start = end;
            elements.extend(fresh);
        }
        WordBall { elements, generators: generators.to_vec(), r_cut }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }
}

/// Truncated series value and an upper bound for the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

fn check_weight(ball: &WordBall, c: f64) -> Result<f64> {
    let r = ball.rank().max(1) as f64;
    if !(c > (2.0 * r).ln()) {
        return Err(GeometryError::Precondition(format!(
            "weight exponent c = {c} must exceed ln(2r) = {} for convergence",
            (2.0 * r).ln()
        )));
    }
    Ok(2.0 * r * (-c).exp())
}

/// `Σ_{m>R} m qᵐ`.
fn tail_sum(q: f64, r: usize) -> f64 {
    let rf = r as f64;
    q.powi(r as i32 + 1) * ((rf + 1.0) - rf * q) / ((1.0 - q) * (1.0 - q))
}

/// Truncated series over the members of the ball accepted by `member`.
///
/// The tail bound uses that there are at most `(2r)ᵐ` words of length `m`
/// and that `d_γ ≤ ‖γ‖·maxᵢ d_{γᵢ}`.
pub fn weighted_series(
    space: &ModelSpace,
    ball: &WordBall,
    c: f64,
    member: &(dyn Fn(&Isometry) -> bool + Sync),
    x: &Point,
) -> Result<SeriesValue> {
    let q = check_weight(ball, c)?;
    let terms = par::map(&ball.elements, |(g, len, _)| {
        if member(g) {
            (-c * *len as f64).exp() * displacement(space, g, x)
        } else {
            0.0
        }
    });
    let value = terms.iter().sum();
    let dmax = ball.generators.iter().map(|g| displacement(space, g, x)).fold(0.0, f64::max);
    Ok(SeriesValue { value, tail_bound: tail_sum(q, ball.r_cut) * dmax })
}

/// Gradient of the truncated series.
pub fn series_gradient(
    space: &ModelSpace,
    ball: &WordBall,
    c: f64,
    member: &(dyn Fn(&Isometry) -> bool + Sync),
    x: &Point,
) -> Tangent {
    let terms = par::map(&ball.elements, |(g, len, _)| {
        if member(g) {
            displacement_gradient(space, g, x) * (-c * *len as f64).exp()
        } else {
            DVector::zeros(space.dim())
        }
    });
    terms.into_iter().fold(DVector::zeros(space.dim()), |a, b| a + b)
}

/// `Σ ω(γ)|γ|` over the truncated members, for a translation-length oracle.
pub fn series_rhs(
    ball: &WordBall,
    c: f64,
    member: &(dyn Fn(&Isometry) -> bool + Sync),
    translation_length: &(dyn Fn(&Isometry) -> f64 + Sync),
) -> f64 {
    ball.elements
        .iter()
        .filter(|(g, _, _)| member(g))
        .map(|(g, len, _)| (-c * *len as f64).exp() * translation_length(g))
        .sum()
}

/// Gradient descent with Armijo backtracking and step growth on the
/// truncated series. Returns the best point and its value.
pub fn minimize_series(
    space: &ModelSpace,
    ball: &WordBall,
    c: f64,
    member: &(dyn Fn(&Isometry) -> bool + Sync),
    x0: &Point,
    max_iter: usize,
) -> Result<(Point, f64)> {
    let f = |p: &Point| weighted_series(space, ball, c, member, p).map(|s| s.value);
    let mut x = x0.clone();
    let mut fx = f(&x)?;
    let mut step = 1.0;
    for _ in 0..max_iter {
        let g = series_gradient(space, ball, c, member, &x);
        let gn2 = g.norm_squared();
        if gn2 < 1e-28 || fx == 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let cand = space.exp(&x, &(&g * (-step)));
            let fc = f(&cand)?;
            if fc <= fx - 1e-4 * step * gn2 {
                x = cand;
                fx = fc;
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((x, fx))
}
