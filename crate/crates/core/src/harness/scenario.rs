//! Loss sequences with their decision sets and comparator sequences.
//!
//! The drifting-mean and alternating environments live on the Poincaré ball.
//! Their decision sets are the smallest geodesic balls around the origin that
//! hold every anchor, which stand in for the anchors' convex hulls.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algorithms::metrics::{path_length, probe_grid, variation_step, PROBE_COUNT};
use crate::algorithms::Constants;
use crate::error::{invalid, Error, Result};
use crate::game::{play_game, GameConfig, OptimalAdversary, OptimalPlayer};
use crate::losses::{busemann_loss, squared_distance_loss, Loss, LossSpec};
use crate::manifold::{dist, exp, inner, log, norm, sample, ManifoldSpec, Point};
use crate::means::{frechet_mean, WeightVector, DEFAULT_TOL};
use crate::sets::GeodesicBall;

use super::config::{ComparatorRule, RunConfig, ScenarioConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    DriftingMean,
    Alternating,
    AdversarialGame,
    Custom,
}

/// Sampled checks of the declared constants on the enlarged set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub gradient_samples: usize,
    pub smoothness_samples: usize,
    /// Largest `‖∇f_t(x)‖ / G` seen.
    pub max_gradient_ratio: f64,
    /// Largest `2(f(y) − f(x) − ⟨∇f(x), log_x y⟩) / (L d(x,y)²)` seen.
    pub max_smoothness_ratio: f64,
    pub passed: bool,
}

const AUDIT_ROUNDS: usize = 16;
const AUDIT_POINTS: usize = 8;
const AUDIT_GRADIENT_SLACK: f64 = 1e-9;
const AUDIT_SMOOTHNESS_SLACK: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub manifold: ManifoldSpec,
    pub set: GeodesicBall,
    pub horizon: usize,
    pub losses: Vec<Arc<dyn Loss>>,
    pub comparators: Vec<Point>,
    pub rule: ComparatorRule,
    pub start: Point,
    pub seed: u64,
    pub delta: f64,
    /// `G` on the enlarged set `N_{δG}`.
    pub gradient_bound: f64,
    pub smoothness: Option<f64>,
    pub audit: AuditReport,
}

impl Scenario {
    pub fn constants(&self) -> Constants {
        Constants {
            diameter: self.set.diameter(),
            gradient_bound: self.gradient_bound,
            smoothness: self.smoothness,
            kappa: self.manifold.curvature_lower_bound(),
            delta: self.delta,
            horizon: self.horizon,
        }
    }

    pub fn path_length(&self) -> Result<f64> {
        path_length(&self.comparators)
    }

    /// `F_T = Σ f_t(u_t)`.
    pub fn small_loss(&self) -> Result<f64> {
        let mut s = 0.0;
        for (f, u) in self.losses.iter().zip(&self.comparators) {
            s += f.value(u)?;
        }
        Ok(s)
    }

    /// Points where gradient variation is measured: the seed-0 probe grid of
    /// the decision set.
    pub fn probes(&self) -> Vec<Point> {
        probe_grid(&self.set, PROBE_COUNT)
    }

    /// Per-round terms of the `V_T` proxy; the first entry is zero.
    pub fn variation_terms(&self) -> Result<Vec<f64>> {
        let probes = self.probes();
        let mut out = vec![0.0];
        for t in 1..self.horizon {
            let mut pts = probes.clone();
            pts.push(self.comparators[t].clone());
            out.push(variation_step(self.losses[t - 1].as_ref(), self.losses[t].as_ref(), &pts)?);
        }
        Ok(out)
    }

    pub fn variation_proxy(&self) -> Result<f64> {
        Ok(self.variation_terms()?.iter().sum())
    }

    /// Samples gradient norms and smoothness quotients on `N_{δG}`.
    pub fn run_audit(&self) -> Result<AuditReport> {
        let mut rng = sample::seeded(self.seed ^ 0xa0d1);
        let outer = self.set.radius() + self.delta * self.gradient_bound;
        let stride = (self.horizon / AUDIT_ROUNDS).max(1);
        let mut rep = AuditReport { passed: true, ..Default::default() };
        for t in (0..self.horizon).step_by(stride) {
            let f = self.losses[t].as_ref();
            let pts: Vec<Point> = (0..AUDIT_POINTS)
                .map(|_| sample::random_point_in_ball(&mut rng, self.set.center(), outer))
                .collect();
            for x in &pts {
                rep.gradient_samples += 1;
                if self.gradient_bound > 0.0 {
                    rep.max_gradient_ratio = rep.max_gradient_ratio.max(norm(&f.grad(x)?) / self.gradient_bound);
                } else if norm(&f.grad(x)?) > 0.0 {
                    rep.max_gradient_ratio = f64::INFINITY;
                }
            }
            if let Some(l) = self.smoothness {
                for w in pts.windows(2) {
                    let (x, y) = (&w[0], &w[1]);
                    let d = dist(x, y)?;
                    if d < 1e-8 {
                        continue;
                    }
                    let gap = f.value(y)? - f.value(x)? - inner(&f.grad(x)?, &log(x, y)?)?;
                    rep.smoothness_samples += 1;
                    let q = 2.0 * gap / (d * d);
                    let ratio = if l > 0.0 { q / l } else if q > 1e-9 { f64::INFINITY } else { 0.0 };
                    rep.max_smoothness_ratio = rep.max_smoothness_ratio.max(ratio);
                }
            }
        }
        rep.passed = rep.max_gradient_ratio <= 1.0 + AUDIT_GRADIENT_SLACK
            && rep.max_smoothness_ratio <= 1.0 + AUDIT_SMOOTHNESS_SLACK;
        Ok(rep)
    }

    fn finish(mut self) -> Result<Scenario> {
        for (t, u) in self.comparators.iter().enumerate() {
            if !self.set.contains(u)? {
                return Err(invalid(format!("comparator of round {} lies outside the decision set", t + 1)));
            }
        }
        self.audit = self.run_audit()?;
        if !self.audit.passed {
            return Err(invalid(format!(
                "declared constants fail the audit: gradient ratio {:.6}, smoothness ratio {:.6}",
                self.audit.max_gradient_ratio, self.audit.max_smoothness_ratio
            )));
        }
        Ok(self)
    }
}

/// `G = 2W(a + r)/(1 − 2δW)`: the gradient bound of squared-distance losses
/// with total weight `W` and anchors within `a` of the center, evaluated on
/// the ball of radius `r + δG`.
pub fn squared_distance_gradient_bound(total_weight: f64, anchor_reach: f64, radius: f64, delta: f64) -> Result<f64> {
    let denom = 1.0 - 2.0 * delta * total_weight;
    if !(denom > 0.0) {
        return Err(invalid(format!(
            "delta = {delta} is too large for squared-distance losses of total weight {total_weight}; need delta < {}",
            0.5 / total_weight
        )));
    }
    Ok(2.0 * total_weight * (anchor_reach + radius) / denom)
}

fn poincare_dim(m: ManifoldSpec, what: &str) -> Result<usize> {
    match m {
        ManifoldSpec::PoincareBall { dim } => Ok(dim),
        other => Err(Error::Incompatible(format!("{what} runs on the Poincaré ball, not {other}"))),
    }
}

fn axis(dim: usize, i: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = scale;
    v
}

/// Squared-distance losses with anchors `±(t/2T)e_i`, weights `1/(2d)`.
/// The comparator is the origin in every round.
pub fn gen_drifting_mean(horizon: usize, dim: usize, delta: f64, seed: u64) -> Result<Scenario> {
    if horizon < 2 || dim < 2 {
        return Err(invalid("drifting mean needs T >= 2 and dim >= 2"));
    }
    let m = ManifoldSpec::PoincareBall { dim };
    let origin = m.origin();
    let set = GeodesicBall::new(origin.clone(), 3f64.ln())?;
    drifting_on(m, set, horizon, delta, seed)
}

fn drifting_on(m: ManifoldSpec, set: GeodesicBall, horizon: usize, delta: f64, seed: u64) -> Result<Scenario> {
    let dim = poincare_dim(m, "drifting_mean")?;
    let origin = m.origin();
    let tf = horizon as f64;
    let anchors_at = |t: usize| -> Result<Vec<Point>> {
        let s = t as f64 / (2.0 * tf);
        let mut out = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            out.push(m.point_from_slice(&axis(dim, i, s))?);
            out.push(m.point_from_slice(&axis(dim, i, -s))?);
        }
        Ok(out)
    };
    let reach = {
        let last = anchors_at(horizon)?;
        last.iter().map(|a| dist(set.center(), a)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max)
    };
    let g = squared_distance_gradient_bound(1.0, reach, set.radius(), delta)?;
    let eval = reach + set.radius() + delta * g;
    let w = vec![1.0 / (2 * dim) as f64; 2 * dim];
    let mut losses: Vec<Arc<dyn Loss>> = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        losses.push(Arc::new(squared_distance_loss(anchors_at(t)?, w.clone(), eval)?));
    }
    let smoothness = losses[0].constants().smoothness;
    let mut rng = sample::seeded(seed);
    let start = sample::random_point_in_ball(&mut rng, set.center(), set.radius());
    Scenario {
        kind: ScenarioKind::DriftingMean,
        manifold: m,
        comparators: vec![origin; horizon],
        set,
        horizon,
        losses,
        rule: ComparatorRule::FixedPoint,
        start,
        seed,
        delta,
        gradient_bound: g,
        smoothness,
        audit: AuditReport::default(),
    }
    .finish()
}

/// Squared-distance losses whose `n` anchors sit in the geodesic ball of
/// radius `T^{−α}` around `e₁/2` on odd rounds and are negated on even
/// rounds. The comparator is each round's Fréchet mean of the anchors.
pub fn gen_alternating(horizon: usize, dim: usize, n: usize, alpha: f64, delta: f64, seed: u64) -> Result<Scenario> {
    if !(alpha > 0.0) || n == 0 || dim < 1 || horizon == 0 {
        return Err(invalid("alternating needs alpha > 0, at least one anchor and T >= 1"));
    }
    let m = ManifoldSpec::PoincareBall { dim };
    let spread = (horizon as f64).powf(-alpha);
    let set = GeodesicBall::new(m.origin(), 3f64.ln() + spread)?;
    alternating_on(m, set, horizon, n, alpha, delta, seed)
}

fn alternating_on(
    m: ManifoldSpec,
    set: GeodesicBall,
    horizon: usize,
    n: usize,
    alpha: f64,
    delta: f64,
    seed: u64,
) -> Result<Scenario> {
    let dim = poincare_dim(m, "alternating")?;
    let spread = (horizon as f64).powf(-alpha);
    let center = m.point_from_slice(&axis(dim, 0, 0.5))?;
    let mut rng = sample::seeded(seed);
    let ys: Vec<Point> = (0..n).map(|_| sample::random_point_in_ball(&mut rng, &center, spread)).collect();
    let neg: Vec<Point> = ys
        .iter()
        .map(|y| m.point_from_slice(&y.to_vec().iter().map(|v| -v).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let w = vec![1.0 / n as f64; n];
    let mut reach = 0.0f64;
    for p in ys.iter().chain(&neg) {
        reach = reach.max(dist(set.center(), p)?);
    }
    let g = squared_distance_gradient_bound(1.0, reach, set.radius(), delta)?;
    let eval = reach + set.radius() + delta * g;
    let odd: Arc<dyn Loss> = Arc::new(squared_distance_loss(ys.clone(), w.clone(), eval)?);
    let even: Arc<dyn Loss> = Arc::new(squared_distance_loss(neg.clone(), w.clone(), eval)?);
    let wv = WeightVector::uniform(n);
    let u_odd = frechet_mean(&ys, &wv, DEFAULT_TOL)?;
    let u_even = frechet_mean(&neg, &wv, DEFAULT_TOL)?;
    let mut losses = Vec::with_capacity(horizon);
    let mut comparators = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        if t % 2 == 1 {
            losses.push(odd.clone());
            comparators.push(u_odd.clone());
        } else {
            losses.push(even.clone());
            comparators.push(u_even.clone());
        }
    }
    let start = sample::random_point_in_ball(&mut rng, set.center(), set.radius());
    Scenario {
        kind: ScenarioKind::Alternating,
        manifold: m,
        smoothness: odd.constants().smoothness,
        set,
        horizon,
        losses,
        comparators,
        rule: ComparatorRule::OfflineMinimizerPerRound,
        start,
        seed,
        delta,
        gradient_bound: g,
        audit: AuditReport::default(),
    }
    .finish()
}

/// Busemann losses from the optimal play of the minimax game on diagonal SPD
/// matrices; the decision set is the ball of radius `D/2` around the
/// identity and the comparator is the best fixed point.
pub fn gen_adversarial_game(n: usize, horizon: usize, budget: f64, diameter: f64, seed: u64) -> Result<Scenario> {
    let m = ManifoldSpec::DiagSpd { n };
    let set = GeodesicBall::new(m.origin(), diameter / 2.0)?;
    game_on(m, set, horizon, budget, seed)
}

fn game_on(m: ManifoldSpec, set: GeodesicBall, horizon: usize, budget: f64, seed: u64) -> Result<Scenario> {
    let n = match m {
        ManifoldSpec::DiagSpd { n } => n,
        other => return Err(Error::Incompatible(format!("adversarial_game runs on diagonal SPD matrices, not {other}"))),
    };
    if set.center() != &m.origin() {
        return Err(invalid("adversarial_game needs a decision set centered at the identity"));
    }
    let cfg = GameConfig::constant(n, horizon, budget, set.diameter())?;
    let outcome = play_game(&cfg, &mut OptimalPlayer, &mut OptimalAdversary)?;
    let id = m.origin();
    let mut losses: Vec<Arc<dyn Loss>> = Vec::with_capacity(horizon);
    for r in &outcome.rounds {
        let g = r.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir: Vec<f64> = r.x.iter().map(|v| v / g).collect();
        losses.push(Arc::new(busemann_loss(&m.tangent_from_slice(&id, &dir)?, g)?));
    }
    let sum = outcome.sum();
    let total = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scaled: Vec<f64> = sum.iter().map(|v| v * set.radius() / total).collect();
    let best = set.project(&exp(&id, &m.tangent_from_slice(&id, &scaled)?)?)?;
    Scenario {
        kind: ScenarioKind::AdversarialGame,
        manifold: m,
        start: id,
        set,
        horizon,
        losses,
        comparators: vec![best; horizon],
        rule: ComparatorRule::FixedPoint,
        seed,
        delta: 0.0,
        gradient_bound: budget,
        smoothness: None,
        audit: AuditReport::default(),
    }
    .finish()
}

/// Minimizes `Σ f` over the ball by projected Riemannian gradient descent.
pub fn minimize_over_ball(losses: &[&dyn Loss], set: &GeodesicBall, start: &Point) -> Result<Point> {
    const ITERATIONS: usize = 400;
    let total = |x: &Point| -> Result<f64> { losses.iter().map(|f| f.value(x)).sum() };
    let smooth: Option<f64> = losses.iter().map(|f| f.constants().smoothness).sum();
    let g: f64 = losses.iter().map(|f| f.constants().gradient_bound).sum();
    let mut x = set.project(start)?;
    let mut best = (total(&x)?, x.clone());
    if g == 0.0 {
        return Ok(best.1);
    }
    for k in 0..ITERATIONS {
        let mut grad = crate::manifold::Tangent::zero(&x);
        for f in losses {
            grad.axpy(1.0, &f.grad(&x)?)?;
        }
        if norm(&grad) < 1e-14 {
            break;
        }
        let eta = match smooth {
            Some(l) if l > 0.0 => 1.0 / l,
            _ => set.diameter() / (g * ((k + 1) as f64).sqrt()),
        };
        x = set.project(&exp(&x, &grad.scale(-eta))?)?;
        let v = total(&x)?;
        if v < best.0 {
            best = (v, x.clone());
        }
    }
    Ok(best.1)
}

fn comparators_for(rule: &ComparatorRule, losses: &[Arc<dyn Loss>], set: &GeodesicBall) -> Result<Vec<Point>> {
    let horizon = losses.len();
    match rule {
        ComparatorRule::FixedPoint => Ok(vec![set.center().clone(); horizon]),
        ComparatorRule::OfflineMinimizerPerRound => {
            let mut out: Vec<Point> = Vec::with_capacity(horizon);
            for f in losses {
                let start = out.last().cloned().unwrap_or_else(|| set.center().clone());
                out.push(minimize_over_ball(&[f.as_ref()], set, &start)?);
            }
            Ok(out)
        }
        ComparatorRule::PiecewiseConstant { segments } => {
            if *segments == 0 {
                return Err(invalid("piecewise comparator needs at least one segment"));
            }
            let len = horizon.div_ceil(*segments).max(1);
            let mut out = Vec::with_capacity(horizon);
            for block in losses.chunks(len) {
                let fs: Vec<&dyn Loss> = block.iter().map(|f| f.as_ref()).collect();
                let u = minimize_over_ball(&fs, set, set.center())?;
                out.extend(std::iter::repeat(u).take(block.len()));
            }
            Ok(out)
        }
    }
}

/// A scenario from explicit loss descriptions, used cyclically.
pub fn gen_custom(
    set: GeodesicBall,
    specs: &[LossSpec],
    rule: ComparatorRule,
    start: Option<Point>,
    horizon: usize,
    delta: f64,
    seed: u64,
) -> Result<Scenario> {
    if specs.is_empty() || horizon == 0 {
        return Err(invalid("custom scenario needs at least one loss and T >= 1"));
    }
    let m = set.manifold();
    // squared-distance constants depend on where they are evaluated
    let mut weight = 0.0f64;
    let mut reach = 0.0f64;
    for s in specs {
        if let LossSpec::SquaredDistance { anchors, weights } = s {
            let w: f64 = weights.as_ref().map_or(1.0, |w| w.iter().sum());
            weight = weight.max(w);
            for a in anchors {
                reach = reach.max(dist(set.center(), &m.point_from_slice(a)?)?);
            }
        }
    }
    let mut g_sq = 0.0;
    if weight > 0.0 {
        g_sq = squared_distance_gradient_bound(weight, reach, set.radius(), delta)?;
    }
    let eval = reach + set.radius() + delta * g_sq;
    let built = specs.iter().map(|s| s.build(m, eval).map(Arc::from)).collect::<Result<Vec<Arc<dyn Loss>>>>()?;
    let losses: Vec<Arc<dyn Loss>> = (0..horizon).map(|t| built[t % built.len()].clone()).collect();
    // all-zero losses: any positive constant is a valid bound
    let positive = |v: f64| if v > 0.0 { v } else { 1.0 };
    let gradient_bound = positive(built.iter().map(|f| f.constants().gradient_bound).fold(0.0, f64::max));
    let smoothness = built
        .iter()
        .map(|f| f.constants().smoothness)
        .try_fold(0.0f64, |acc, l| l.map(|l| acc.max(l)))
        .map(positive);
    let comparators = comparators_for(&rule, &losses, &set)?;
    let start = match start {
        Some(p) => p,
        None => sample::random_point_in_ball(&mut sample::seeded(seed), set.center(), set.radius()),
    };
    Scenario {
        kind: ScenarioKind::Custom,
        manifold: m,
        set,
        horizon,
        losses,
        comparators,
        rule,
        start,
        seed,
        delta,
        gradient_bound,
        smoothness,
        audit: AuditReport::default(),
    }
    .finish()
}

/// Builds the scenario a run config describes.
pub fn generate(cfg: &RunConfig) -> Result<Scenario> {
    let m = cfg.manifold;
    let set = cfg.decision_set.as_ref().map(|b| b.build(m)).transpose()?;
    match &cfg.scenario {
        ScenarioConfig::DriftingMean => {
            let dim = poincare_dim(m, "drifting_mean")?;
            match set {
                None => gen_drifting_mean(cfg.horizon, dim, cfg.delta, cfg.seed),
                Some(s) => {
                    if cfg.horizon < 2 || dim < 2 {
                        return Err(invalid("drifting mean needs T >= 2 and dim >= 2"));
                    }
                    drifting_on(m, s, cfg.horizon, cfg.delta, cfg.seed)
                }
            }
        }
        ScenarioConfig::Alternating { anchors, alpha } => {
            let dim = poincare_dim(m, "alternating")?;
            match set {
                None => gen_alternating(cfg.horizon, dim, *anchors, *alpha, cfg.delta, cfg.seed),
                Some(s) => alternating_on(m, s, cfg.horizon, *anchors, *alpha, cfg.delta, cfg.seed),
            }
        }
        ScenarioConfig::AdversarialGame { budget } => {
            let s = match set {
                Some(s) => s,
                None => GeodesicBall::new(m.origin(), 1.0)?,
            };
            let mut sc = game_on(m, s, cfg.horizon, *budget, cfg.seed)?;
            sc.delta = cfg.delta;
            Ok(sc)
        }
        ScenarioConfig::Custom { losses, comparator, start } => {
            let s = match set {
                Some(s) => s,
                None => return Err(invalid("custom scenarios need a decision_set")),
            };
            let start = start.as_ref().map(|p| m.point_from_slice(p)).transpose()?;
            gen_custom(s, losses, comparator.clone(), start, cfg.horizon, cfg.delta, cfg.seed)
        }
    }
}
