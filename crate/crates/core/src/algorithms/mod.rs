//! Online learners: single-step-size experts and the ensembles built on them.
//!
//! Every learner follows the same protocol: [`Learner::play`] exposes the
//! decision for the current round, then [`Learner::observe`] reveals the loss
//! and advances the state. [`Learner::bound`] evaluates the learner's
//! pathwise regret guarantee after the rounds seen so far.

pub mod ensemble;
pub mod grid;
pub mod hedge;
pub mod metrics;
pub mod omd;
pub mod rogd;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::losses::Loss;
use crate::manifold::{zeta, Point};

pub use ensemble::{AdaptiveTarget, MetaRate, OptimismMode, OptimisticEnsemble, Radar};
pub use grid::StepSizeGrid;
pub use omd::Omd;
pub use rogd::Rogd;

/// Problem constants shared by all learners on one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Diameter `D` of the decision set.
    pub diameter: f64,
    /// Gradient bound `G` on the enlarged set.
    pub gradient_bound: f64,
    /// Smoothness `L`, when the losses declare one.
    pub smoothness: Option<f64>,
    /// Curvature lower bound κ.
    pub kappa: f64,
    /// Improper-learning factor δ; plays may leave the set by `δG`.
    pub delta: f64,
    pub horizon: usize,
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        if !(self.diameter > 0.0) || !(self.gradient_bound > 0.0) {
            return Err(invalid("D and G must be positive"));
        }
        if !(self.delta >= 0.0) {
            return Err(invalid(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        Ok(())
    }

    /// `ζ(κ, D)` for plays inside the decision set.
    pub fn zeta(&self) -> f64 {
        zeta(self.kappa, self.diameter).expect("validated constants")
    }

    /// `ζ(κ, D + 2δG)` for plays inside the enlarged set.
    pub fn zeta_improper(&self) -> f64 {
        zeta(self.kappa, self.diameter + 2.0 * self.margin()).expect("validated constants")
    }

    pub fn margin(&self) -> f64 {
        self.delta * self.gradient_bound
    }

    pub fn require_smoothness(&self) -> Result<f64> {
        match self.smoothness {
            Some(l) if l > 0.0 => Ok(l),
            _ => Err(crate::Error::Incompatible(
                "this algorithm needs losses with a declared positive smoothness constant".into(),
            )),
        }
    }
}

/// How often plays and anchors stayed inside their sets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confinement {
    pub plays: usize,
    pub plays_inside: usize,
    pub anchors: usize,
    pub anchors_inside: usize,
}

impl Confinement {
    pub fn merge(&mut self, other: &Confinement) {
        self.plays += other.plays;
        self.plays_inside += other.plays_inside;
        self.anchors += other.anchors;
        self.anchors_inside += other.anchors_inside;
    }

    pub fn all_inside(&self) -> bool {
        self.plays == self.plays_inside && self.anchors == self.anchors_inside
    }
}

/// Effective constants and running statistics of a learner.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnerReport {
    pub algorithm: String,
    pub etas: Vec<f64>,
    pub expert_kinds: Vec<String>,
    pub beta: Option<f64>,
    pub beta_fixed: bool,
    pub tau: Option<f64>,
    pub gamma: Option<f64>,
    pub zeta: f64,
    pub initial_weights: Vec<f64>,
    pub weights: Vec<f64>,
    /// `Σ_t f_t(x_{t,i})` per expert.
    pub expert_losses: Vec<f64>,
    /// `Σ_t f_t(x_t)`.
    pub meta_loss: f64,
    pub rounds: usize,
    /// Plays of the ensemble (or single learner) against the enlarged set,
    /// optimistic anchors against the decision set.
    pub confinement: Confinement,
}

pub trait Learner: Send {
    fn name(&self) -> &'static str;
    fn play(&self) -> &Point;
    fn observe(&mut self, f: &dyn Loss) -> Result<()>;
    /// Pathwise regret bound after the rounds observed so far, for a
    /// comparator sequence of path length `path_length`.
    fn bound(&self, path_length: f64) -> f64;
    fn report(&self) -> LearnerReport;
}

/// `(D² + 2DP)/(2η) + ηζG²t/2`.
pub fn rogd_bound(d: f64, g: f64, zeta: f64, eta: f64, path_length: f64, rounds: usize) -> f64 {
    (d * d + 2.0 * d * path_length) / (2.0 * eta) + eta * zeta * g * g * rounds as f64 / 2.0
}

/// `ηζ·Σ‖∇f_t(y_t) − M_t‖² + (D² + 2DP)/(2η)`.
pub fn omd_bound(d: f64, zeta: f64, eta: f64, path_length: f64, variation: f64) -> f64 {
    eta * zeta * variation + (d * d + 2.0 * d * path_length) / (2.0 * eta)
}

/// An expert inside an ensemble.
#[derive(Clone, Debug)]
pub enum Expert {
    Rogd(Rogd),
    Omd(Omd),
}

impl Expert {
    pub fn point(&self) -> &Point {
        match self {
            Expert::Rogd(e) => e.point(),
            Expert::Omd(e) => e.played(),
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            Expert::Rogd(e) => e.eta(),
            Expert::Omd(e) => e.eta(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Expert::Rogd(_) => "rogd",
            Expert::Omd(_) => "omd",
        }
    }

    pub fn observe(&mut self, f: &dyn Loss) -> Result<()> {
        match self {
            Expert::Rogd(e) => e.observe(f),
            Expert::Omd(e) => e.observe(f),
        }
    }

    pub fn bound(&self, path_length: f64) -> f64 {
        match self {
            Expert::Rogd(e) => e.bound(path_length),
            Expert::Omd(e) => e.bound(path_length),
        }
    }

    pub fn confinement(&self) -> Confinement {
        match self {
            Expert::Rogd(_) => Confinement::default(),
            Expert::Omd(e) => e.report().confinement,
        }
    }
}
