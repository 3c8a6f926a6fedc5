//! Hadamard manifolds: Euclidean space, the Poincaré ball, SPD matrices with
//! the affine-invariant metric, and its diagonal submanifold.
//!
//! Every point carries the [`ManifoldSpec`] it belongs to and every tangent
//! vector carries its base point, so mixing incompatible operands is reported
//! as an error instead of producing garbage.
//!
//! Coordinate conventions are fixed per geometry:
//!
//! | geometry        | point                  | tangent                    |
//! |-----------------|------------------------|----------------------------|
//! | `euclidean`     | column vector          | column vector              |
//! | `poincare_ball` | column vector, ‖x‖ < 1 | ambient Euclidean vector   |
//! | `spd_affine`    | SPD matrix             | symmetric matrix           |
//! | `diag_spd`      | positive diagonal      | diagonal matrix            |

pub mod poincare;
pub mod sample;
pub(crate) mod spd;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSpec {
    Euclidean { dim: usize },
    PoincareBall { dim: usize },
    SpdAffine { n: usize },
    DiagSpd { n: usize },
}

impl fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldSpec::Euclidean { dim } => write!(f, "euclidean({dim})"),
            ManifoldSpec::PoincareBall { dim } => write!(f, "poincare_ball({dim})"),
            ManifoldSpec::SpdAffine { n } => write!(f, "spd_affine({n})"),
            ManifoldSpec::DiagSpd { n } => write!(f, "diag_spd({n})"),
        }
    }
}

impl ManifoldSpec {
    /// Lower bound κ on the sectional curvature used for algorithm constants.
    ///
    /// The diagonal SPD submanifold is flat (diagonal matrices commute), so it
    /// reports 0 even though it sits inside a curved ambient space.
    pub fn curvature_lower_bound(&self) -> f64 {
        match self {
            ManifoldSpec::Euclidean { .. } | ManifoldSpec::DiagSpd { .. } => 0.0,
            ManifoldSpec::PoincareBall { .. } => -1.0,
            ManifoldSpec::SpdAffine { .. } => -0.5,
        }
    }

    /// Shape `(rows, cols)` of the coordinate matrix.
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            ManifoldSpec::Euclidean { dim } | ManifoldSpec::PoincareBall { dim } => (dim, 1),
            ManifoldSpec::SpdAffine { n } | ManifoldSpec::DiagSpd { n } => (n, n),
        }
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self, ManifoldSpec::SpdAffine { .. } | ManifoldSpec::DiagSpd { .. })
    }

    /// Number of free coordinates in a tangent vector.
    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            ManifoldSpec::Euclidean { dim } | ManifoldSpec::PoincareBall { dim } => dim,
            ManifoldSpec::SpdAffine { n } => n * (n + 1) / 2,
            ManifoldSpec::DiagSpd { n } => n,
        }
    }

    /// The distinguished base point: the zero vector or the identity matrix.
    pub fn origin(&self) -> Point {
        let (r, c) = self.shape();
        let coords = if self.is_matrix() {
            DMatrix::identity(r, c)
        } else {
            DMatrix::zeros(r, c)
        };
        Point { manifold: *self, coords }
    }

    /// Validates `coords` and wraps them as a point.
    pub fn point(&self, coords: DMatrix<f64>) -> Result<Point> {
        self.check_shape(&coords)?;
        match self {
            ManifoldSpec::Euclidean { .. } => {}
            ManifoldSpec::PoincareBall { .. } => {
                let n = coords.norm();
                if !(n < 1.0) {
                    return Err(Error::OutsideDomain(format!(
                        "Poincaré point has Euclidean norm {n} >= 1"
                    )));
                }
            }
            ManifoldSpec::SpdAffine { .. } => {
                check_symmetric(&coords)?;
                let min = spd::sym_eigenvalues(&coords)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min);
                if !(min > 0.0) {
                    return Err(Error::OutsideDomain(format!(
                        "smallest eigenvalue {min} is not positive"
                    )));
                }
            }
            ManifoldSpec::DiagSpd { .. } => {
                check_diagonal(&coords)?;
                if (0..coords.nrows()).any(|i| !(coords[(i, i)] > 0.0)) {
                    return Err(Error::OutsideDomain(
                        "diagonal entries must be positive".into(),
                    ));
                }
            }
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutsideDomain("non-finite coordinate".into()));
        }
        let coords = if self.is_matrix() { spd::symmetrize(&coords) } else { coords };
        Ok(Point { manifold: *self, coords })
    }

    /// Builds a point from flat coordinates: the vector for Euclidean and
    /// Poincaré points, the diagonal for `diag_spd`, row-major entries for
    /// `spd_affine`.
    pub fn point_from_slice(&self, values: &[f64]) -> Result<Point> {
        self.point(self.matrix_from_slice(values)?)
    }

    /// Same layout rules as [`ManifoldSpec::point_from_slice`], for tangents.
    pub fn tangent_from_slice(&self, base: &Point, values: &[f64]) -> Result<Tangent> {
        self.check_point(base)?;
        Tangent::new(base.clone(), self.matrix_from_slice(values)?)
    }

    fn matrix_from_slice(&self, values: &[f64]) -> Result<DMatrix<f64>> {
        let (r, c) = self.shape();
        match self {
            ManifoldSpec::Euclidean { .. } | ManifoldSpec::PoincareBall { .. } => {
                expect_len(values.len(), r)?;
                Ok(DMatrix::from_column_slice(r, 1, values))
            }
            ManifoldSpec::DiagSpd { .. } => {
                if values.len() == r * c {
                    Ok(DMatrix::from_row_slice(r, c, values))
                } else {
                    expect_len(values.len(), r)?;
                    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
                }
            }
            ManifoldSpec::SpdAffine { .. } => {
                expect_len(values.len(), r * c)?;
                Ok(DMatrix::from_row_slice(r, c, values))
            }
        }
    }

    fn check_shape(&self, m: &DMatrix<f64>) -> Result<()> {
        let shape = self.shape();
        if m.shape() != shape {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", shape.0, shape.1),
                got: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        Ok(())
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.manifold != *self {
            return Err(Error::ManifoldMismatch(self.to_string(), x.manifold.to_string()));
        }
        Ok(())
    }
}

fn expect_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::DimensionMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        });
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * (1.0 + m.amax()) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

fn check_diagonal(m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)] != 0.0 {
                return Err(Error::NotDiagonal);
            }
        }
    }
    Ok(())
}

/// A point on a concrete manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    manifold: ManifoldSpec,
    coords: DMatrix<f64>,
}

impl Point {
    pub fn manifold(&self) -> ManifoldSpec {
        self.manifold
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    /// Flat coordinates in the layout accepted by
    /// [`ManifoldSpec::point_from_slice`].
    pub fn to_vec(&self) -> Vec<f64> {
        match self.manifold {
            ManifoldSpec::DiagSpd { n } => (0..n).map(|i| self.coords[(i, i)]).collect(),
            ManifoldSpec::SpdAffine { n } => {
                let mut out = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        out.push(self.coords[(i, j)]);
                    }
                }
                out
            }
            _ => self.coords.iter().copied().collect(),
        }
    }

    pub fn exp(&self, v: &Tangent) -> Result<Point> {
        exp(self, v)
    }

    pub fn log(&self, y: &Point) -> Result<Tangent> {
        log(self, y)
    }

    pub fn dist(&self, y: &Point) -> Result<f64> {
        dist(self, y)
    }
}

/// A tangent vector together with the point it is anchored at.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    base: Point,
    coords: DMatrix<f64>,
}

impl Tangent {
    pub fn new(base: Point, coords: DMatrix<f64>) -> Result<Tangent> {
        let m = base.manifold;
        m.check_shape(&coords)?;
        match m {
            ManifoldSpec::SpdAffine { .. } => check_symmetric(&coords)?,
            ManifoldSpec::DiagSpd { .. } => check_diagonal(&coords)?,
            _ => {}
        }
        let coords = if m.is_matrix() { spd::symmetrize(&coords) } else { coords };
        Ok(Tangent { base, coords })
    }

    pub fn zero(base: &Point) -> Tangent {
        let (r, c) = base.manifold.shape();
        Tangent { base: base.clone(), coords: DMatrix::zeros(r, c) }
    }

    pub(crate) fn from_raw(base: Point, coords: DMatrix<f64>) -> Tangent {
        Tangent { base, coords }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn scale(&self, a: f64) -> Tangent {
        Tangent { base: self.base.clone(), coords: &self.coords * a }
    }

    pub fn add(&self, other: &Tangent) -> Result<Tangent> {
        self.same_base(other)?;
        Ok(Tangent { base: self.base.clone(), coords: &self.coords + &other.coords })
    }

    pub fn sub(&self, other: &Tangent) -> Result<Tangent> {
        self.same_base(other)?;
        Ok(Tangent { base: self.base.clone(), coords: &self.coords - &other.coords })
    }

    /// `self += a * other` without reallocating the base.
    pub fn axpy(&mut self, a: f64, other: &Tangent) -> Result<()> {
        self.same_base(other)?;
        self.coords += &other.coords * a;
        Ok(())
    }

    pub fn inner(&self, other: &Tangent) -> Result<f64> {
        inner(self, other)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    fn same_base(&self, other: &Tangent) -> Result<()> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }
}

fn same_manifold(x: &Point, y: &Point) -> Result<()> {
    if x.manifold != y.manifold {
        return Err(Error::ManifoldMismatch(x.manifold.to_string(), y.manifold.to_string()));
    }
    Ok(())
}

/// Exponential map: endpoint of the unit-time geodesic leaving `x` with velocity `v`.
pub fn exp(x: &Point, v: &Tangent) -> Result<Point> {
    if v.base != *x {
        return Err(Error::BaseMismatch);
    }
    let coords = match x.manifold {
        ManifoldSpec::Euclidean { .. } => &x.coords + &v.coords,
        ManifoldSpec::PoincareBall { .. } => poincare::exp(&x.coords, &v.coords),
        ManifoldSpec::SpdAffine { .. } => spd::exp(&x.coords, &v.coords),
        ManifoldSpec::DiagSpd { .. } => spd::diag_exp(&x.coords, &v.coords),
    };
    Ok(Point { manifold: x.manifold, coords })
}

/// Inverse exponential map at `x`.
pub fn log(x: &Point, y: &Point) -> Result<Tangent> {
    same_manifold(x, y)?;
    let coords = match x.manifold {
        ManifoldSpec::Euclidean { .. } => &y.coords - &x.coords,
        ManifoldSpec::PoincareBall { .. } => poincare::log(&x.coords, &y.coords),
        ManifoldSpec::SpdAffine { .. } => spd::log(&x.coords, &y.coords),
        ManifoldSpec::DiagSpd { .. } => spd::diag_log(&x.coords, &y.coords),
    };
    Ok(Tangent { base: x.clone(), coords })
}

/// Riemannian distance.
pub fn dist(x: &Point, y: &Point) -> Result<f64> {
    same_manifold(x, y)?;
    Ok(match x.manifold {
        ManifoldSpec::Euclidean { .. } => (&x.coords - &y.coords).norm(),
        ManifoldSpec::PoincareBall { .. } => poincare::dist(&x.coords, &y.coords),
        ManifoldSpec::SpdAffine { .. } => spd::dist(&x.coords, &y.coords),
        ManifoldSpec::DiagSpd { .. } => spd::diag_dist(&x.coords, &y.coords),
    })
}

/// Parallel transport of `v` (anchored at `x`) along the geodesic to `y`.
pub fn transport(x: &Point, y: &Point, v: &Tangent) -> Result<Tangent> {
    same_manifold(x, y)?;
    if v.base != *x {
        return Err(Error::BaseMismatch);
    }
    let coords = match x.manifold {
        ManifoldSpec::Euclidean { .. } => v.coords.clone(),
        ManifoldSpec::PoincareBall { .. } => poincare::transport(&x.coords, &y.coords, &v.coords),
        ManifoldSpec::SpdAffine { .. } => spd::transport(&x.coords, &y.coords, &v.coords),
        ManifoldSpec::DiagSpd { .. } => spd::diag_transport(&x.coords, &y.coords, &v.coords),
    };
    Ok(Tangent { base: y.clone(), coords })
}

/// Riemannian inner product of two vectors anchored at the same point.
pub fn inner(u: &Tangent, v: &Tangent) -> Result<f64> {
    if u.base != v.base {
        return Err(Error::BaseMismatch);
    }
    Ok(raw_inner(&u.base, &u.coords, &v.coords))
}

fn raw_inner(x: &Point, u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    match x.manifold {
        ManifoldSpec::Euclidean { .. } => u.dot(v),
        ManifoldSpec::PoincareBall { .. } => poincare::inner(&x.coords, u, v),
        ManifoldSpec::SpdAffine { .. } => spd::inner(&x.coords, u, v),
        ManifoldSpec::DiagSpd { .. } => spd::diag_inner(&x.coords, u, v),
    }
}

pub fn norm(u: &Tangent) -> f64 {
    raw_inner(&u.base, &u.coords, &u.coords).max(0.0).sqrt()
}

/// Point `t` of the way along the geodesic from `x` to `y`.
pub fn geodesic(x: &Point, y: &Point, t: f64) -> Result<Point> {
    exp(x, &log(x, y)?.scale(t))
}

/// Curvature distortion constant `√(−κ)D · coth(√(−κ)D)`.
///
/// Equals 1 in flat space and grows linearly in `D` for large diameters.
pub fn zeta(kappa: f64, diameter: f64) -> Result<f64> {
    if kappa > 0.0 {
        return Err(invalid(format!("curvature bound must be nonpositive, got {kappa}")));
    }
    if !(diameter >= 0.0) {
        return Err(invalid(format!("diameter must be nonnegative, got {diameter}")));
    }
    let s = (-kappa).sqrt() * diameter;
    if s < 1e-6 {
        // s·coth(s) = 1 + s²/3 − s⁴/45 + …
        return Ok(1.0 + s * s / 3.0);
    }
    Ok(s / s.tanh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn poincare2() -> ManifoldSpec {
        ManifoldSpec::PoincareBall { dim: 2 }
    }

    #[test]
    fn euclidean_exp_translates() {
        let m = ManifoldSpec::Euclidean { dim: 2 };
        let x = m.point_from_slice(&[1.0, 2.0]).unwrap();
        let v = m.tangent_from_slice(&x, &[0.5, -1.0]).unwrap();
        assert_eq!(exp(&x, &v).unwrap().to_vec(), vec![1.5, 1.0]);
        let o = m.origin();
        let y = m.point_from_slice(&[3.0, 4.0]).unwrap();
        assert_eq!(log(&o, &y).unwrap().coords().as_slice(), &[3.0, 4.0]);
        assert_abs_diff_eq!(dist(&o, &y).unwrap(), 5.0);
    }

    #[test]
    fn poincare_exp_log_at_origin() {
        let m = poincare2();
        let o = m.origin();
        let a = 0.5f64.atanh();
        let v = m.tangent_from_slice(&o, &[a, 0.0]).unwrap();
        let y = exp(&o, &v).unwrap();
        assert_abs_diff_eq!(y.to_vec()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(y.to_vec()[1], 0.0, epsilon = 1e-12);

        let half = m.point_from_slice(&[0.5, 0.0]).unwrap();
        let l = log(&o, &half).unwrap();
        assert_abs_diff_eq!(l.coords()[0], 0.549306, epsilon = 1e-6);
        assert_abs_diff_eq!(dist(&o, &half).unwrap(), 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            poincare::dist_arcosh(o.coords(), half.coords()),
            3f64.ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(norm(&l), 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn poincare_metric_at_origin_is_four_times_euclidean() {
        let m = poincare2();
        let o = m.origin();
        let e1 = m.tangent_from_slice(&o, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(inner(&e1, &e1).unwrap(), 4.0);
    }

    #[test]
    fn diag_spd_closed_forms() {
        let m = ManifoldSpec::DiagSpd { n: 2 };
        let i = m.origin();
        let v = m.tangent_from_slice(&i, &[1.0, 1.0]).unwrap();
        let y = exp(&i, &v).unwrap();
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(y.to_vec()[0], e, epsilon = 1e-12);
        assert_abs_diff_eq!(y.to_vec()[1], e, epsilon = 1e-12);
        assert_abs_diff_eq!(dist(&i, &y).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn diag_spd_transport_scales_by_ratio() {
        let m = ManifoldSpec::DiagSpd { n: 3 };
        let p = m.point_from_slice(&[1.0, 2.0, 0.5]).unwrap();
        let q = m.point_from_slice(&[3.0, 0.5, 0.25]).unwrap();
        let u = m.tangent_from_slice(&p, &[1.0, -2.0, 0.3]).unwrap();
        let moved = transport(&p, &q, &u).unwrap();
        let expected = [3.0, -0.5, 0.15];
        for (i, e) in expected.iter().enumerate() {
            assert_abs_diff_eq!(moved.coords()[(i, i)], *e, epsilon = 1e-12);
        }
        // agrees with the full SPD closed form restricted to diagonals
        let full = spd::transport(p.coords(), q.coords(), u.coords());
        assert!((full - moved.coords()).norm() < 1e-10);
    }

    #[test]
    fn spd_inner_at_identity_is_trace() {
        let m = ManifoldSpec::SpdAffine { n: 2 };
        let i = m.origin();
        let u = m.tangent_from_slice(&i, &[1.0, 2.0, 2.0, 3.0]).unwrap();
        let v = m.tangent_from_slice(&i, &[0.5, -1.0, -1.0, 4.0]).unwrap();
        let expected = (u.coords() * v.coords()).trace();
        assert_abs_diff_eq!(inner(&u, &v).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn log_of_self_is_zero() {
        for m in [
            ManifoldSpec::Euclidean { dim: 3 },
            poincare2(),
            ManifoldSpec::SpdAffine { n: 3 },
            ManifoldSpec::DiagSpd { n: 3 },
        ] {
            let x = m.origin();
            assert!(log(&x, &x).unwrap().coords().norm() < 1e-14);
            assert_eq!(dist(&x, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta(0.0, 5.0).unwrap(), 1.0);
        assert_abs_diff_eq!(zeta(-1.0, 1.0).unwrap(), 1.0 / 1f64.tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(zeta(-1.0, 1.0).unwrap(), 1.313035, epsilon = 1e-6);
        assert_abs_diff_eq!(zeta(-1.0, 1e-9).unwrap(), 1.0, epsilon = 1e-15);
        // continuity across the series switch
        let below = zeta(-1.0, 0.999_999e-6).unwrap();
        let above = zeta(-1.0, 1.000_001e-6).unwrap();
        assert!((below - above).abs() < 1e-12);
        assert!(zeta(0.5, 1.0).is_err());
    }

    #[test]
    fn validation_errors() {
        let m = poincare2();
        assert!(matches!(
            m.point_from_slice(&[1.0, 0.0]),
            Err(Error::OutsideDomain(_))
        ));
        assert!(matches!(
            m.point_from_slice(&[0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
        let s = ManifoldSpec::SpdAffine { n: 2 };
        assert!(matches!(
            s.point_from_slice(&[1.0, 0.5, 0.0, 1.0]),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            s.point_from_slice(&[1.0, 2.0, 2.0, 1.0]),
            Err(Error::OutsideDomain(_))
        ));
        let i = s.origin();
        assert!(matches!(
            s.tangent_from_slice(&i, &[0.0, 1.0, 0.0, 0.0]),
            Err(Error::NotSymmetric(_))
        ));
        let d = ManifoldSpec::DiagSpd { n: 2 };
        assert!(matches!(
            d.point_from_slice(&[1.0, 0.1, 0.1, 1.0]),
            Err(Error::NotDiagonal)
        ));
    }

    #[test]
    fn operand_mismatches_are_errors() {
        let a = ManifoldSpec::Euclidean { dim: 2 }.origin();
        let b = poincare2().origin();
        assert!(matches!(dist(&a, &b), Err(Error::ManifoldMismatch(..))));
        let m = ManifoldSpec::Euclidean { dim: 2 };
        let y = m.point_from_slice(&[1.0, 0.0]).unwrap();
        let v = Tangent::zero(&y);
        assert!(matches!(exp(&a, &v), Err(Error::BaseMismatch)));
        let u = Tangent::zero(&a);
        assert!(matches!(inner(&u, &v), Err(Error::BaseMismatch)));
    }

    #[test]
    fn spec_json_shape() {
        let m: ManifoldSpec = serde_json::from_str(r#"{"kind":"poincare_ball","dim":2}"#).unwrap();
        assert_eq!(m, poincare2());
        let s = serde_json::to_string(&ManifoldSpec::SpdAffine { n: 3 }).unwrap();
        assert_eq!(s, r#"{"kind":"spd_affine","n":3}"#);
    }
}
