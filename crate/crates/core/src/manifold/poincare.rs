//! Closed forms for the Poincaré ball of curvature -1.
//!
//! Points and tangent vectors are column matrices in ambient Euclidean
//! coordinates. The metric at `x` is the conformal rescaling
//! `<u, v>_x = λ_x² <u, v>₂` with `λ_x = 2 / (1 - ‖x‖²)`.

use nalgebra::DMatrix;

/// Largest Euclidean norm a point is allowed to reach after a numerical step.
const MAX_NORM: f64 = 1.0 - 1e-15;

pub(crate) fn conformal_factor(x: &DMatrix<f64>) -> f64 {
    2.0 / (1.0 - x.norm_squared())
}

/// Möbius addition `a ⊕ b`.
pub(crate) fn mobius_add(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let ab = a.dot(b);
    let a2 = a.norm_squared();
    let b2 = b.norm_squared();
    let denom = 1.0 + 2.0 * ab + a2 * b2;
    (a * (1.0 + 2.0 * ab + b2) + b * (1.0 - a2)) / denom
}

/// Gyration `gyr[u, v] w`, linear in `w`.
fn gyration(u: &DMatrix<f64>, v: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let uw = u.dot(w);
    let vw = v.dot(w);
    let uv = u.dot(v);
    let u2 = u.norm_squared();
    let v2 = v.norm_squared();
    let a = -uw * v2 + vw + 2.0 * uv * vw;
    let b = -vw * u2 - uw;
    let d = 1.0 + 2.0 * uv + u2 * v2;
    w + (u * a + v * b) * (2.0 / d)
}

fn clamp_into_ball(mut x: DMatrix<f64>) -> DMatrix<f64> {
    let n = x.norm();
    if n >= MAX_NORM {
        x *= MAX_NORM / n;
    }
    x
}

pub(crate) fn exp(x: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let vn = v.norm();
    if vn == 0.0 {
        return x.clone();
    }
    let lambda = conformal_factor(x);
    let step = v * ((lambda * vn / 2.0).tanh() / vn);
    clamp_into_ball(mobius_add(x, &step))
}

pub(crate) fn log(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let w = mobius_add(&(-x), y);
    let wn = w.norm();
    if wn == 0.0 {
        return DMatrix::zeros(x.nrows(), 1);
    }
    let lambda = conformal_factor(x);
    w * (2.0 / lambda * wn.min(MAX_NORM).atanh() / wn)
}

pub(crate) fn dist(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let w = mobius_add(&(-x), y);
    2.0 * w.norm().min(MAX_NORM).atanh()
}

/// `arcosh(1 + 2‖x−y‖² / ((1−‖x‖²)(1−‖y‖²)))`; kept as an independent
/// route for cross-checking [`dist`].
pub fn dist_arcosh(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let num = 2.0 * (x - y).norm_squared();
    let den = (1.0 - x.norm_squared()) * (1.0 - y.norm_squared());
    (1.0 + num / den).acosh()
}

pub(crate) fn inner(x: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let lambda = conformal_factor(x);
    lambda * lambda * u.dot(v)
}

pub(crate) fn transport(x: &DMatrix<f64>, y: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = conformal_factor(x) / conformal_factor(y);
    gyration(y, &(-x), v) * scale
}
