//! Real hyperbolic space Hⁿ in a horospherical chart.
//!
//! A point is stored as `(w₁,…,w_{n−1}, η)`. In upper half-space terms the
//! height is `y = e^η` and the horizontal position is `u = y·w`; equivalently
//! `w` is the spacelike part of the hyperboloid vector and `e^{−η}/2` its
//! null coordinate along the ideal point `0`. Tangent vectors are given in the
//! orthonormal frame `(y∂_{u₁},…,y∂_{u_{n−1}}, ∂_η)`, so the metric on
//! components is the Euclidean one.
//!
//! The chart keeps two kinds of far-away points exact: points far up toward
//! the distinguished ideal point `∞`, with any horizontal offset comparable to
//! their height, and orbits of loxodromic similarities `u ↦ λAu + c`. Points
//! far down toward a finite ideal point eventually leave the `f64` range; the
//! operations return non-finite values there rather than silently wrong ones.

use std::f64::consts::LN_2;

/// An ideal point of Hⁿ: the distinguished point `∞` or a finite `u ∈ ℝ^{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum HypIdeal {
    Infinity,
    Finite(Vec<f64>),
}

pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// `ln(2·sinh(x/2))` for `x ≥ 0`.
fn ln_two_sinh_half(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x > 40.0 {
        0.5 * x + (-(-x).exp()).ln_1p()
    } else {
        (2.0 * (0.5 * x).sinh()).ln()
    }
}

/// `asinh(e^lz)` without overflow.
fn asinh_exp(lz: f64) -> f64 {
    if lz > 20.0 {
        lz + LN_2 + 0.25 * (-2.0 * lz).exp()
    } else {
        lz.exp().asinh()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn split(x: &[f64]) -> (&[f64], f64) {
    let m = x.len() - 1;
    (&x[..m], x[m])
}

/// `ln |w e^{δ} − w' e^{−δ}|²`, the horizontal part of the distance kernel.
fn ln_horizontal(w: &[f64], wp: &[f64], delta: f64) -> f64 {
    let (a, b, sign) = if delta >= 0.0 { (w, wp, 1.0) } else { (wp, w, -1.0) };
    let d = delta * sign;
    let k = (-2.0 * d).exp();
    let s: f64 = if d < 1e-3 {
        // e^{δ}w − e^{−δ}w' = (w − w') + w·expm1(δ) − w'·expm1(−δ), rescaled by e^{−δ}
        let em = d.exp_m1();
        let emn = (-d).exp_m1();
        let f = (-d).exp();
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let v = ((x - y) + x * em - y * emn) * f;
                v * v
            })
            .sum()
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let v = x - y * k;
                v * v
            })
            .sum()
    };
    if s == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * d + s.ln()
    }
}

/// Riemannian distance.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    let (wa, ea) = split(a);
    let (wb, eb) = split(b);
    let delta = 0.5 * (ea - eb);
    let lh = ln_horizontal(wa, wb, delta);
    let lv = 2.0 * ln_two_sinh_half((ea - eb).abs());
    let lq = log_add_exp(lh, lv);
    if lq == f64::NEG_INFINITY {
        return 0.0;
    }
    2.0 * asinh_exp(0.5 * lq - LN_2)
}

/// Geodesic endpoint `exp_x(v)`.
pub fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let (w0, e0) = split(x);
    let m = w0.len();
    let t = norm(v);
    if t == 0.0 {
        return x.to_vec();
    }
    let su = norm(&v[..m]) / t;
    let ae = v[m] / t;
    if su == 0.0 {
        let k = (-t * ae).exp();
        let mut out: Vec<f64> = w0.iter().map(|w| w * k).collect();
        out.push(e0 + t * ae);
        return out;
    }
    let psi = (-su).atan2(ae);
    let (sh, ch) = (0.5 * psi).sin_cos();
    let e2t = (-2.0 * t).exp();
    let den = sh * sh + ch * ch * e2t;
    let re = -0.5 * psi.sin() * (-(-2.0 * t).exp_m1()) / den;
    let log_im = -t - den.ln();
    let inv_im = (-log_im).exp();
    let vn = norm(&v[..m]);
    let mut out = Vec::with_capacity(m + 1);
    for j in 0..m {
        out.push((w0[j] + re * v[j] / vn) * inv_im);
    }
    out.push(e0 + log_im);
    out
}

/// Unit direction at `x` toward `y` together with the distance.
pub fn log_dir(x: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    let (w0, e0) = split(x);
    let (w1, e1) = split(y);
    let m = w0.len();
    let de = e1 - e0;
    // horizontal displacement in units of the height of x: w1·e^{Δη} − w0
    let (hvec, ln_scale) = if de > 0.0 {
        let k = (-de).exp();
        let v: Vec<f64> = w1.iter().zip(w0).map(|(a, b)| a - b * k).collect();
        (v, de)
    } else {
        let k = de.exp();
        let v: Vec<f64> = w1.iter().zip(w0).map(|(a, b)| a * k - b).collect();
        (v, 0.0)
    };
    let hn = norm(&hvec);
    let ln_s = if hn == 0.0 { f64::NEG_INFINITY } else { hn.ln() + ln_scale };
    let l = 0.0f64.max(ln_s).max(de);
    let ce = if hn == 0.0 { 0.0 } else { 2.0 * (ln_s - 2.0 * l).exp() };
    let s2 = if hn == 0.0 { 0.0 } else { (2.0 * (ln_s - l)).exp() };
    let r2m1 = if de.abs() < 300.0 {
        (-2.0 * l).exp() * (2.0 * de).exp_m1()
    } else {
        (2.0 * (de - l)).exp() - (-2.0 * l).exp()
    };
    let cv = s2 + r2m1;
    let nn = (ce * ce + cv * cv).sqrt();
    let d = distance(x, y);
    let mut out = vec![0.0; m + 1];
    if nn == 0.0 || d == 0.0 {
        return (out, 0.0);
    }
    if hn > 0.0 {
        for j in 0..m {
            out[j] = ce / nn * hvec[j] / hn;
        }
    }
    out[m] = cv / nn;
    (out, d)
}

/// `log_x(y)` in frame components.
pub fn log(x: &[f64], y: &[f64]) -> Vec<f64> {
    let (dir, d) = log_dir(x, y);
    dir.into_iter().map(|c| c * d).collect()
}

/// Horizontal offset `w − c·e^{−η}` of `x` relative to a finite ideal point,
/// measured in units of the height of `x`.
fn offset(x: &[f64], c: &[f64]) -> Vec<f64> {
    let (w, e) = split(x);
    let k = (-e).exp();
    w.iter().zip(c).map(|(a, b)| a - b * k).collect()
}

/// Unnormalized Busemann function of `ideal`: `−η` for `∞`, and
/// `ln(|u − c|²/y + y)` for a finite point `c`.
pub fn busemann_raw(x: &[f64], ideal: &HypIdeal) -> f64 {
    let (_, e) = split(x);
    match ideal {
        HypIdeal::Infinity => -e,
        HypIdeal::Finite(c) => {
            let q = norm(&offset(x, c));
            if q > 1e150 {
                e + 2.0 * q.ln()
            } else {
                e + (q * q).ln_1p()
            }
        }
    }
}

/// Unit gradient of the Busemann function of `ideal` at `x`.
pub fn busemann_gradient(x: &[f64], ideal: &HypIdeal) -> Vec<f64> {
    let m = x.len() - 1;
    let mut g = vec![0.0; m + 1];
    match ideal {
        HypIdeal::Infinity => {
            g[m] = -1.0;
        }
        HypIdeal::Finite(c) => {
            let off = offset(x, c);
            let q = norm(&off);
            let (hor, ver) = if q > 1.0 {
                let iq = 1.0 / q;
                (2.0 * iq / (1.0 + iq * iq), (iq * iq - 1.0) / (iq * iq + 1.0))
            } else {
                (2.0 * q / (1.0 + q * q), (1.0 - q * q) / (1.0 + q * q))
            };
            if q > 0.0 {
                for j in 0..m {
                    g[j] = hor * off[j] / q;
                }
            }
            g[m] = ver;
        }
    }
    g
}

/// Unit direction at `x` of the ray toward `ideal`.
pub fn direction_to(x: &[f64], ideal: &HypIdeal) -> Vec<f64> {
    busemann_gradient(x, ideal).into_iter().map(|c| -c).collect()
}

/// Ideal endpoint of the ray from `x` with unit initial direction `a`.
pub fn ray_endpoint(x: &[f64], a: &[f64]) -> HypIdeal {
    let (w0, e0) = split(x);
    let m = w0.len();
    let su = norm(&a[..m]);
    if su == 0.0 {
        if a[m] > 0.0 {
            return HypIdeal::Infinity;
        }
        let y0 = e0.exp();
        return HypIdeal::Finite(w0.iter().map(|w| w * y0).collect());
    }
    let psi = (-su).atan2(a[m]);
    let half = 0.5 * psi;
    let re = -half.cos() / half.sin();
    let y0 = e0.exp();
    let u: Vec<f64> = (0..m).map(|j| y0 * (w0[j] + re * a[j] / su)).collect();
    if u.iter().any(|c| !c.is_finite() || c.abs() > 1e300) {
        HypIdeal::Infinity
    } else {
        HypIdeal::Finite(u)
    }
}

/// Hyperboloid coordinates `(x₁,…,x_n, x₀)` with the last coordinate timelike.
pub fn to_hyperboloid(x: &[f64]) -> Vec<f64> {
    let (w, e) = split(x);
    let y = e.exp();
    let w2: f64 = w.iter().map(|a| a * a).sum();
    let a = 0.5 * y * (w2 + 1.0);
    let b = 0.5 / y;
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(a - b);
    out.extend_from_slice(w);
    out.push(a + b);
    out
}

/// Inverse of [`to_hyperboloid`]; the time coordinate is recomputed from the
/// spatial ones, which renormalizes drifted input onto the hyperboloid.
pub fn from_hyperboloid(xh: &[f64]) -> Vec<f64> {
    let n = xh.len() - 1;
    let x1 = xh[0];
    let w = &xh[1..n];
    let w2: f64 = w.iter().map(|a| a * a).sum();
    let x0 = (1.0 + x1 * x1 + w2).sqrt();
    let diff = if x1 > 0.0 { (1.0 + w2) / (x0 + x1) } else { x0 - x1 };
    let mut out = w.to_vec();
    out.push(-diff.ln());
    out
}

pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() - 1;
    let s: f64 = a[..n].iter().zip(&b[..n]).map(|(x, y)| x * y).sum();
    s - a[n] * b[n]
}

/// Orthonormal frame vectors at `x` as hyperboloid tangent vectors.
fn frame(x: &[f64]) -> Vec<Vec<f64>> {
    let (w, e) = split(x);
    let m = w.len();
    let y = e.exp();
    let u: Vec<f64> = w.iter().map(|a| a * y).collect();
    let u2: f64 = u.iter().map(|a| a * a).sum();
    let mut out = Vec::with_capacity(m + 1);
    for j in 0..m {
        let mut v = vec![0.0; m + 2];
        v[0] = u[j];
        v[1 + j] = 1.0;
        v[m + 1] = u[j];
        out.push(v);
    }
    let iy = 1.0 / y;
    let mut v = vec![0.0; m + 2];
    v[0] = 0.5 * (-u2 * iy + y + iy);
    for j in 0..m {
        v[1 + j] = -u[j] * iy;
    }
    v[m + 1] = 0.5 * (-u2 * iy + y - iy);
    out.push(v);
    out
}

/// Frame components to an ambient tangent vector of the hyperboloid.
pub fn tangent_to_hyperboloid(x: &[f64], v: &[f64]) -> Vec<f64> {
    let f = frame(x);
    let mut out = vec![0.0; x.len() + 1];
    for (c, e) in v.iter().zip(&f) {
        for (o, ei) in out.iter_mut().zip(e) {
            *o += c * ei;
        }
    }
    out
}

/// Ambient hyperboloid tangent vector to frame components.
pub fn tangent_from_hyperboloid(x: &[f64], t: &[f64]) -> Vec<f64> {
    frame(x).iter().map(|e| minkowski(e, t)).collect()
}

/// Null vector normalized so that `⟨b, o⟩ = −1` for the origin `o`.
pub fn ideal_to_lightlike(ideal: &HypIdeal, n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    match ideal {
        HypIdeal::Infinity => {
            b[0] = 1.0;
            b[n] = 1.0;
        }
        HypIdeal::Finite(u) => {
            let u2: f64 = u.iter().map(|a| a * a).sum();
            let d = u2 + 1.0;
            b[0] = (u2 - 1.0) / d;
            for (j, uj) in u.iter().enumerate() {
                b[1 + j] = 2.0 * uj / d;
            }
            b[n] = 1.0;
        }
    }
    b
}

/// Ideal point of a future-pointing null vector.
pub fn ideal_from_lightlike(b: &[f64]) -> HypIdeal {
    let n = b.len() - 1;
    let b0 = b[n];
    let b1 = b[0] / b0;
    let e: Vec<f64> = b[1..n].iter().map(|x| x / b0).collect();
    let e2: f64 = e.iter().map(|a| a * a).sum();
    let diff = if b1 > 0.0 { e2 / (1.0 + b1) } else { 1.0 - b1 };
    if diff <= 1e-300 {
        return HypIdeal::Infinity;
    }
    let u: Vec<f64> = e.iter().map(|x| x / diff).collect();
    if u.iter().any(|c| !c.is_finite() || c.abs() > 1e300) {
        HypIdeal::Infinity
    } else {
        HypIdeal::Finite(u)
    }
}

/// Hessian of `½d(·, p)²` at `x` in frame components, for a factor distance `d`
/// and unit direction `r` from `x` toward `p`.
pub fn half_dist_sq_hessian(r: &[f64], d: f64) -> Vec<Vec<f64>> {
    let n = r.len();
    let c = if d < 1e-4 { 1.0 + d * d / 3.0 } else { d / d.tanh() };
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let rr = r[i] * r[j];
            h[i][j] = rr + c * ((if i == j { 1.0 } else { 0.0 }) - rr);
        }
    }
    h
}
