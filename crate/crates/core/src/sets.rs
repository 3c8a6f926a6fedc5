//! Geodesic balls as decision sets, and their enlargements for improper plays.
//!
//! Balls are geodesically convex on Hadamard manifolds and admit an exact
//! metric projection: pull the point back along the geodesic ray from the
//! center.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::manifold::{dist, exp, log, ManifoldSpec, Point};

/// Boundary tolerance for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicBall {
    center: Point,
    radius: f64,
}

impl GeodesicBall {
    pub fn new(center: Point, radius: f64) -> Result<GeodesicBall> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(GeodesicBall { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn manifold(&self) -> ManifoldSpec {
        self.center.manifold()
    }

    /// Upper bound on the distance between two members.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        Ok(dist(&self.center, x)? <= self.radius + MEMBERSHIP_TOL)
    }

    /// Metric projection onto the ball. Contained points are returned unchanged.
    pub fn project(&self, x: &Point) -> Result<Point> {
        let d = dist(&self.center, x)?;
        if d <= self.radius + MEMBERSHIP_TOL {
            return Ok(x.clone());
        }
        let v = log(&self.center, x)?;
        exp(&self.center, &v.scale(self.radius / d))
    }

    /// The set of points within distance `margin` of the ball.
    pub fn enlarge(&self, margin: f64) -> Result<EnlargedSet> {
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(invalid(format!("margin must be nonnegative, got {margin}")));
        }
        Ok(EnlargedSet { base: self.clone(), margin })
    }
}

/// `{x : d(x, N) ≤ margin}` for a ball `N`, which is again a ball.
#[derive(Clone, Debug, PartialEq)]
pub struct EnlargedSet {
    base: GeodesicBall,
    margin: f64,
}

impl EnlargedSet {
    pub fn base(&self) -> &GeodesicBall {
        &self.base
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn as_ball(&self) -> GeodesicBall {
        GeodesicBall { center: self.base.center.clone(), radius: self.base.radius + self.margin }
    }

    /// `D + 2c` for base diameter `D` and margin `c`.
    pub fn diameter(&self) -> f64 {
        self.base.diameter() + 2.0 * self.margin
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.as_ball().contains(x)
    }

    pub fn project(&self, x: &Point) -> Result<Point> {
        self.as_ball().project(x)
    }
}

/// JSON form of a decision set: `{"center": [...], "radius": r}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallConfig {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallConfig {
    pub fn build(&self, manifold: ManifoldSpec) -> Result<GeodesicBall> {
        let center = manifold.point_from_slice(&self.center).map_err(|e| match e {
            Error::DimensionMismatch { .. } => invalid(format!(
                "decision_set center has {} coordinates, incompatible with {manifold}",
                self.center.len()
            )),
            other => other,
        })?;
        GeodesicBall::new(center, self.radius)
    }

    pub fn from_ball(ball: &GeodesicBall) -> BallConfig {
        BallConfig { center: ball.center.to_vec(), radius: ball.radius }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_ball(m: ManifoldSpec, r: f64) -> GeodesicBall {
        GeodesicBall::new(m.origin(), r).unwrap()
    }

    #[test]
    fn euclidean_membership_and_projection() {
        let m = ManifoldSpec::Euclidean { dim: 2 };
        let b = unit_ball(m, 1.0);
        let inside = m.point_from_slice(&[0.5, 0.0]).unwrap();
        assert!(b.contains(&inside).unwrap());
        assert_eq!(b.project(&inside).unwrap(), inside);
        let edge = m.point_from_slice(&[0.6, 0.8]).unwrap();
        assert!(b.contains(&edge).unwrap());
        let out = m.point_from_slice(&[2.0, 0.0]).unwrap();
        assert!(!b.contains(&out).unwrap());
        let p = b.project(&out).unwrap();
        assert_abs_diff_eq!(p.to_vec()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.to_vec()[1], 0.0);
    }

    #[test]
    fn poincare_membership_and_projection() {
        let m = ManifoldSpec::PoincareBall { dim: 2 };
        let b = unit_ball(m, 1.0);
        let far = m.point_from_slice(&[0.9, 0.0]).unwrap();
        assert_abs_diff_eq!(dist(b.center(), &far).unwrap(), 2.0 * 0.9f64.atanh(), epsilon = 1e-12);
        assert!(!b.contains(&far).unwrap());

        let x = m.point_from_slice(&[1f64.tanh(), 0.0]).unwrap();
        assert_abs_diff_eq!(dist(b.center(), &x).unwrap(), 2.0, epsilon = 1e-12);
        let p = b.project(&x).unwrap();
        assert_abs_diff_eq!(p.to_vec()[0], 0.5f64.tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.to_vec()[0], 0.462117, epsilon = 1e-6);
        assert_abs_diff_eq!(dist(b.center(), &p).unwrap(), 1.0, epsilon = 1e-12);
        // idempotent
        assert_eq!(b.project(&p).unwrap(), p);
    }

    #[test]
    fn enlargement() {
        let m = ManifoldSpec::Euclidean { dim: 2 };
        let b = unit_ball(m, 1.0);
        let same = b.enlarge(0.0).unwrap();
        let x = m.point_from_slice(&[1.4, 0.0]).unwrap();
        assert_eq!(same.contains(&x).unwrap(), b.contains(&x).unwrap());
        let big = b.enlarge(0.5).unwrap();
        assert!(big.contains(&x).unwrap());
        assert_eq!(big.diameter(), 3.0);
        assert!(matches!(b.enlarge(-0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn manifold_mismatch_is_reported() {
        let b = unit_ball(ManifoldSpec::Euclidean { dim: 2 }, 1.0);
        let x = ManifoldSpec::PoincareBall { dim: 2 }.origin();
        assert!(matches!(b.contains(&x), Err(Error::ManifoldMismatch(..))));
        assert!(matches!(b.project(&x), Err(Error::ManifoldMismatch(..))));
    }

    #[test]
    fn config_round_trip() {
        let m = ManifoldSpec::PoincareBall { dim: 2 };
        let cfg: BallConfig = serde_json::from_str(r#"{"center":[0.1,0.0],"radius":0.5}"#).unwrap();
        let b = cfg.build(m).unwrap();
        assert_eq!(BallConfig::from_ball(&b), cfg);
        let bad = BallConfig { center: vec![0.0; 3], radius: 1.0 };
        assert!(bad.build(m).is_err());
    }
}
