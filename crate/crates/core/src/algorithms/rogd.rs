//! Riemannian online gradient descent.

use crate::error::{invalid, Error, Result};
use crate::losses::Loss;
use crate::manifold::{exp, Point, Tangent};
use crate::sets::GeodesicBall;

use super::{rogd_bound, Constants, Learner, LearnerReport};

/// `Π_N Exp_x(−η g)`.
pub fn rogd_step(x: &Point, g: &Tangent, eta: f64, set: &GeodesicBall) -> Result<Point> {
    if g.base() != x {
        return Err(Error::BaseMismatch);
    }
    set.project(&exp(x, &g.scale(-eta))?)
}

/// R-OGD with a fixed step size.
#[derive(Clone, Debug)]
pub struct Rogd {
    x: Point,
    eta: f64,
    set: GeodesicBall,
    constants: Constants,
    zeta: f64,
    rounds: usize,
    loss: f64,
}

impl Rogd {
    /// Starts at the projection of `start` onto `set`.
    pub fn new(start: &Point, eta: f64, set: GeodesicBall, constants: Constants) -> Result<Rogd> {
        constants.validate()?;
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(invalid(format!("step size must be positive, got {eta}")));
        }
        Ok(Rogd {
            x: set.project(start)?,
            eta,
            set,
            constants,
            zeta: constants.zeta(),
            rounds: 0,
            loss: 0.0,
        })
    }

    pub fn point(&self) -> &Point {
        &self.x
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn step(&mut self, g: &Tangent) -> Result<()> {
        self.x = rogd_step(&self.x, g, self.eta, &self.set)?;
        self.rounds += 1;
        Ok(())
    }
}

impl Learner for Rogd {
    fn name(&self) -> &'static str {
        "rogd"
    }

    fn play(&self) -> &Point {
        &self.x
    }

    fn observe(&mut self, f: &dyn Loss) -> Result<()> {
        self.loss += f.value(&self.x)?;
        let g = f.grad(&self.x)?;
        self.step(&g)
    }

    fn bound(&self, path_length: f64) -> f64 {
        let c = &self.constants;
        rogd_bound(c.diameter, c.gradient_bound, self.zeta, self.eta, path_length, self.rounds)
    }

    fn report(&self) -> LearnerReport {
        LearnerReport {
            algorithm: "rogd".into(),
            etas: vec![self.eta],
            expert_kinds: vec!["rogd".into()],
            zeta: self.zeta,
            initial_weights: vec![1.0],
            weights: vec![1.0],
            expert_losses: vec![self.loss],
            meta_loss: self.loss,
            rounds: self.rounds,
            ..Default::default()
        }
    }
}
