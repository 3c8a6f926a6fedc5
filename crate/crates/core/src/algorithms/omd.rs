//! Optimistic mirror descent with improper plays.
//!
//! Each round proposes `x' = Exp_y(−ηM)`, plays its projection onto the
//! enlarged set and moves the anchor to
//! `y⁺ = Π_N Exp_{x'}(−η∇f(x') + Exp_{x'}^{-1} y)`. The optimism is the previous
//! loss's gradient at the new anchor.

use crate::error::{invalid, Error, Result};
use crate::losses::Loss;
use crate::manifold::{exp, log, norm, Point, Tangent};
use crate::sets::{EnlargedSet, GeodesicBall};

use super::grid::omd_step_cap;
use super::{omd_bound, Confinement, Constants, Learner, LearnerReport};

#[derive(Clone, Debug, PartialEq)]
pub struct OmdStep {
    /// `x' = Exp_y(−ηM)` before projection.
    pub proposal: Point,
    /// The projection of `x'` onto the enlarged set.
    pub played: Point,
    pub next_anchor: Point,
}

/// Proposal and played point for anchor `y` and optimism `m`.
pub fn omd_propose(y: &Point, m: &Tangent, eta: f64, domain: &EnlargedSet) -> Result<(Point, Point)> {
    if m.base() != y {
        return Err(Error::BaseMismatch);
    }
    let proposal = exp(y, &m.scale(-eta))?;
    let played = domain.project(&proposal)?;
    Ok((proposal, played))
}

/// `Π_N Exp_{x'}(−η g + Exp_{x'}^{-1} y)` with `g` the gradient at `x'`.
pub fn omd_anchor_update(
    proposal: &Point,
    y: &Point,
    g: &Tangent,
    eta: f64,
    set: &GeodesicBall,
) -> Result<Point> {
    if g.base() != proposal {
        return Err(Error::BaseMismatch);
    }
    let mut v = log(proposal, y)?;
    v.axpy(-eta, g)?;
    set.project(&exp(proposal, &v)?)
}

/// One full round for anchor `y` and optimism `m`; `grad` evaluates the
/// current loss's gradient.
pub fn omd_round<F>(
    y: &Point,
    m: &Tangent,
    grad: F,
    eta: f64,
    set: &GeodesicBall,
    margin: f64,
) -> Result<OmdStep>
where
    F: FnOnce(&Point) -> Result<Tangent>,
{
    let domain = set.enlarge(margin)?;
    let (proposal, played) = omd_propose(y, m, eta, &domain)?;
    let g = grad(&proposal)?;
    let next_anchor = omd_anchor_update(&proposal, y, &g, eta, set)?;
    Ok(OmdStep { proposal, played, next_anchor })
}

/// A single optimistic learner with `M_t = ∇f_{t−1}(y_t)`.
#[derive(Clone, Debug)]
pub struct Omd {
    y: Point,
    optimism: Tangent,
    proposal: Point,
    played: Point,
    eta: f64,
    set: GeodesicBall,
    domain: EnlargedSet,
    constants: Constants,
    zeta: f64,
    rounds: usize,
    variation: f64,
    loss: f64,
    confinement: Confinement,
}

impl Omd {
    /// Fails when `eta` exceeds `δ/(1 + √(1 + 2ζδ²L²))`.
    pub fn new(start: &Point, eta: f64, set: GeodesicBall, constants: Constants) -> Result<Omd> {
        constants.validate()?;
        let l = constants.require_smoothness()?;
        if !(constants.delta > 0.0) {
            return Err(invalid("optimistic experts need a positive delta"));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(invalid(format!("step size must be positive, got {eta}")));
        }
        let zeta = constants.zeta_improper();
        let max = omd_step_cap(constants.delta, l, zeta);
        if eta > max * (1.0 + 1e-12) {
            return Err(Error::StepSizeTooLarge { eta, max });
        }
        let domain = set.enlarge(constants.margin())?;
        let y = set.project(start)?;
        let optimism = Tangent::zero(&y);
        let (proposal, played) = omd_propose(&y, &optimism, eta, &domain)?;
        let mut out = Omd {
            y,
            optimism,
            proposal,
            played,
            eta,
            set,
            domain,
            constants,
            zeta,
            rounds: 0,
            variation: 0.0,
            loss: 0.0,
            confinement: Confinement::default(),
        };
        out.audit()?;
        Ok(out)
    }

    fn audit(&mut self) -> Result<()> {
        self.confinement.anchors += 1;
        self.confinement.anchors_inside += self.set.contains(&self.y)? as usize;
        self.confinement.plays += 1;
        self.confinement.plays_inside += self.domain.contains(&self.proposal)? as usize;
        Ok(())
    }

    pub fn anchor(&self) -> &Point {
        &self.y
    }

    pub fn played(&self) -> &Point {
        &self.played
    }

    pub fn optimism(&self) -> &Tangent {
        &self.optimism
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `Σ_t ‖∇f_t(y_t) − M_t‖²`.
    pub fn variation(&self) -> f64 {
        self.variation
    }
}

impl Learner for Omd {
    fn name(&self) -> &'static str {
        "omd"
    }

    fn play(&self) -> &Point {
        &self.played
    }

    fn observe(&mut self, f: &dyn Loss) -> Result<()> {
        self.loss += f.value(&self.played)?;
        let gy = f.grad(&self.y)?;
        self.variation += norm(&gy.sub(&self.optimism)?).powi(2);
        let g = f.grad(&self.proposal)?;
        self.y = omd_anchor_update(&self.proposal, &self.y, &g, self.eta, &self.set)?;
        self.optimism = f.grad(&self.y)?;
        let (proposal, played) = omd_propose(&self.y, &self.optimism, self.eta, &self.domain)?;
        self.proposal = proposal;
        self.played = played;
        self.rounds += 1;
        self.audit()
    }

    fn bound(&self, path_length: f64) -> f64 {
        omd_bound(self.constants.diameter, self.zeta, self.eta, path_length, self.variation)
    }

    fn report(&self) -> LearnerReport {
        LearnerReport {
            algorithm: "omd".into(),
            etas: vec![self.eta],
            expert_kinds: vec!["omd".into()],
            zeta: self.zeta,
            initial_weights: vec![1.0],
            weights: vec![1.0],
            expert_losses: vec![self.loss],
            meta_loss: self.loss,
            rounds: self.rounds,
            confinement: self.confinement,
            ..Default::default()
        }
    }
}
