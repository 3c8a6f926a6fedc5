//! Geodesically convex losses with declared regularity constants.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::manifold::{dist, exp, inner, log, zeta, ManifoldSpec, Point, Tangent};

/// Constants a loss promises to respect on its evaluation domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConstants {
    /// Bound on the Riemannian gradient norm.
    pub gradient_bound: f64,
    /// Geodesic smoothness constant, if the loss is smooth.
    pub smoothness: Option<f64>,
    pub nonnegative: bool,
}

/// A loss with value and Riemannian gradient.
pub trait Loss: fmt::Debug + Send + Sync {
    fn manifold(&self) -> ManifoldSpec;
    fn value(&self, x: &Point) -> Result<f64>;
    fn grad(&self, x: &Point) -> Result<Tangent>;
    fn constants(&self) -> LossConstants;
}

/// `x ↦ Σ w_i d(x, a_i)²`.
#[derive(Clone, Debug)]
pub struct SquaredDistanceLoss {
    anchors: Vec<Point>,
    weights: Vec<f64>,
    constants: LossConstants,
}

/// Builds a weighted squared-distance loss.
///
/// `eval_radius` bounds the distance between any evaluation point and any
/// anchor; it yields `G = 2·Σw·r` and `L = 2·Σw·ζ(κ, r)`.
pub fn squared_distance_loss(
    anchors: Vec<Point>,
    weights: Vec<f64>,
    eval_radius: f64,
) -> Result<SquaredDistanceLoss> {
    if anchors.is_empty() {
        return Err(invalid("squared-distance loss needs at least one anchor"));
    }
    if anchors.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} weights", anchors.len()),
            got: weights.len().to_string(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(invalid("anchor weights must be nonnegative"));
    }
    let m = anchors[0].manifold();
    if let Some(bad) = anchors.iter().find(|a| a.manifold() != m) {
        return Err(Error::ManifoldMismatch(m.to_string(), bad.manifold().to_string()));
    }
    if !(eval_radius > 0.0) {
        return Err(invalid(format!("evaluation radius must be positive, got {eval_radius}")));
    }
    let total: f64 = weights.iter().sum();
    let constants = LossConstants {
        gradient_bound: 2.0 * total * eval_radius,
        smoothness: Some(2.0 * total * zeta(m.curvature_lower_bound(), eval_radius)?),
        nonnegative: true,
    };
    Ok(SquaredDistanceLoss { anchors, weights, constants })
}

impl SquaredDistanceLoss {
    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Loss for SquaredDistanceLoss {
    fn manifold(&self) -> ManifoldSpec {
        self.anchors[0].manifold()
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let mut v = 0.0;
        for (a, w) in self.anchors.iter().zip(&self.weights) {
            v += w * dist(x, a)?.powi(2);
        }
        Ok(v)
    }

    fn grad(&self, x: &Point) -> Result<Tangent> {
        let mut g = Tangent::zero(x);
        for (a, w) in self.anchors.iter().zip(&self.weights) {
            g.axpy(-2.0 * w, &log(x, a)?)?;
        }
        Ok(g)
    }

    fn constants(&self) -> LossConstants {
        self.constants
    }
}

/// Scaled Busemann function of the diagonal-SPD ray `t ↦ exp(tX)`:
/// `p ↦ −scale · tr(X log p)`.
#[derive(Clone, Debug)]
pub struct BusemannLoss {
    n: usize,
    direction: Vec<f64>,
    scale: f64,
}

/// `direction` must be a unit-norm diagonal tangent at the identity of a
/// `diag_spd` manifold.
pub fn busemann_loss(direction: &Tangent, scale: f64) -> Result<BusemannLoss> {
    let m = direction.base().manifold();
    let ManifoldSpec::DiagSpd { n } = m else {
        return Err(Error::Incompatible(format!("Busemann losses live on diag_spd, not {m}")));
    };
    if *direction.base() != m.origin() {
        return Err(invalid("Busemann direction must be anchored at the identity"));
    }
    let d: Vec<f64> = (0..n).map(|i| direction.coords()[(i, i)]).collect();
    let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (len - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("Busemann direction must have unit norm, got {len}")));
    }
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(invalid(format!("Busemann scale must be nonnegative, got {scale}")));
    }
    Ok(BusemannLoss { n, direction: d, scale })
}

impl BusemannLoss {
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn check(&self, x: &Point) -> Result<()> {
        if x.manifold() != self.manifold() {
            return Err(Error::ManifoldMismatch(self.manifold().to_string(), x.manifold().to_string()));
        }
        Ok(())
    }
}

impl Loss for BusemannLoss {
    fn manifold(&self) -> ManifoldSpec {
        ManifoldSpec::DiagSpd { n: self.n }
    }

    fn value(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        let c = x.coords();
        let tr: f64 = (0..self.n).map(|i| self.direction[i] * c[(i, i)].ln()).sum();
        Ok(-self.scale * tr)
    }

    fn grad(&self, x: &Point) -> Result<Tangent> {
        self.check(x)?;
        // Euclidean partials −s·X_i/p_i, raised by the metric factor p_i².
        let c = x.coords();
        let g = DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                -self.scale * self.direction[i] * c[(i, i)]
            } else {
                0.0
            }
        });
        Ok(Tangent::from_raw(x.clone(), g))
    }

    fn constants(&self) -> LossConstants {
        LossConstants { gradient_bound: self.scale, smoothness: None, nonnegative: false }
    }
}

/// `x ↦ ⟨a, x⟩ + b` on Euclidean space.
#[derive(Clone, Debug)]
pub struct LinearLoss {
    coefficients: DMatrix<f64>,
    offset: f64,
}

pub fn linear_loss(coefficients: &[f64], offset: f64) -> LinearLoss {
    LinearLoss {
        coefficients: DMatrix::from_column_slice(coefficients.len(), 1, coefficients),
        offset,
    }
}

impl Loss for LinearLoss {
    fn manifold(&self) -> ManifoldSpec {
        ManifoldSpec::Euclidean { dim: self.coefficients.nrows() }
    }

    fn value(&self, x: &Point) -> Result<f64> {
        if x.manifold() != self.manifold() {
            return Err(Error::ManifoldMismatch(self.manifold().to_string(), x.manifold().to_string()));
        }
        Ok(self.coefficients.dot(x.coords()) + self.offset)
    }

    fn grad(&self, x: &Point) -> Result<Tangent> {
        if x.manifold() != self.manifold() {
            return Err(Error::ManifoldMismatch(self.manifold().to_string(), x.manifold().to_string()));
        }
        Ok(Tangent::from_raw(x.clone(), self.coefficients.clone()))
    }

    fn constants(&self) -> LossConstants {
        LossConstants {
            gradient_bound: self.coefficients.norm(),
            smoothness: Some(0.0),
            nonnegative: false,
        }
    }
}

/// The identically zero loss.
#[derive(Clone, Debug)]
pub struct ZeroLoss(pub ManifoldSpec);

impl Loss for ZeroLoss {
    fn manifold(&self) -> ManifoldSpec {
        self.0
    }

    fn value(&self, _x: &Point) -> Result<f64> {
        Ok(0.0)
    }

    fn grad(&self, x: &Point) -> Result<Tangent> {
        Ok(Tangent::zero(x))
    }

    fn constants(&self) -> LossConstants {
        LossConstants { gradient_bound: 0.0, smoothness: Some(0.0), nonnegative: true }
    }
}

pub const FD_STEP: f64 = 1e-5;

/// Central-difference discrepancy `|(f(Exp_x(hv)) − f(Exp_x(−hv)))/2h − ⟨∇f(x), v⟩|`.
pub fn finite_difference_check(f: &dyn Loss, x: &Point, v: &Tangent) -> Result<f64> {
    let h = FD_STEP;
    let plus = f.value(&exp(x, &v.scale(h))?)?;
    let minus = f.value(&exp(x, &v.scale(-h))?)?;
    let directional = inner(&f.grad(x)?, v)?;
    Ok(((plus - minus) / (2.0 * h) - directional).abs())
}

/// Loss description as it appears in scenario configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LossSpec {
    SquaredDistance {
        anchors: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Busemann {
        direction: Vec<f64>,
        scale: f64,
    },
    Linear {
        coefficients: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    Zero,
}

impl LossSpec {
    /// Instantiates the loss; `eval_radius` is used by losses whose constants
    /// depend on the evaluation domain.
    pub fn build(&self, manifold: ManifoldSpec, eval_radius: f64) -> Result<Box<dyn Loss>> {
        Ok(match self {
            LossSpec::SquaredDistance { anchors, weights } => {
                let pts = anchors
                    .iter()
                    .map(|a| manifold.point_from_slice(a))
                    .collect::<Result<Vec<_>>>()?;
                let w = weights.clone().unwrap_or_else(|| vec![1.0 / pts.len() as f64; pts.len()]);
                Box::new(squared_distance_loss(pts, w, eval_radius)?)
            }
            LossSpec::Busemann { direction, scale } => {
                let id = manifold.origin();
                let x = manifold.tangent_from_slice(&id, direction)?;
                Box::new(busemann_loss(&x, *scale)?)
            }
            LossSpec::Linear { coefficients, offset } => {
                let l = linear_loss(coefficients, *offset);
                if l.manifold() != manifold {
                    return Err(Error::Incompatible(format!("linear losses need {}", l.manifold())));
                }
                Box::new(l)
            }
            LossSpec::Zero => Box::new(ZeroLoss(manifold)),
        })
    }
}
