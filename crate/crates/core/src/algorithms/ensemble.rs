//! Two-level learners: a meta-algorithm aggregating experts with different
//! step sizes by weighted means on the manifold.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::losses::Loss;
use crate::manifold::{inner, log, norm, Point, Tangent};
use crate::means::{mean, MeanKind, WeightVector, DEFAULT_TOL};
use crate::sets::{EnlargedSet, GeodesicBall};

use super::grid::StepSizeGrid;
use super::hedge::{hedge_update, optimistic_hedge_weights};
use super::{Confinement, Constants, Expert, Learner, LearnerReport, Omd, Rogd};

/// Slack allowed between a computed mean and its feasible set before it is
/// treated as an error rather than rounding.
const MEAN_SLACK: f64 = 1e-6;

fn aggregate(kind: MeanKind, points: &[Point], w: &WeightVector, set: &GeodesicBall) -> Result<Point> {
    let x = mean(kind, points, w, DEFAULT_TOL)?;
    let excess = set.center().dist(&x)? - set.radius();
    if excess > MEAN_SLACK {
        return Err(Error::OutsideDomain(format!("weighted mean left its set by {excess:.3e}")));
    }
    set.project(&x)
}

/// Hedge over R-OGD experts on their true losses, initial weights
/// `(N+1)/(i(i+1)N)`.
#[derive(Clone, Debug)]
pub struct Radar {
    experts: Vec<Rogd>,
    initial: WeightVector,
    weights: WeightVector,
    beta: f64,
    kind: MeanKind,
    set: GeodesicBall,
    constants: Constants,
    x: Point,
    expert_losses: Vec<f64>,
    meta_loss: f64,
    rounds: usize,
}

/// `√(8/(G²D²T))`.
pub fn radar_beta(c: &Constants) -> f64 {
    (8.0 / (c.gradient_bound.powi(2) * c.diameter.powi(2) * c.horizon as f64)).sqrt()
}

impl Radar {
    pub fn new(
        start: &Point,
        grid: &StepSizeGrid,
        beta: f64,
        kind: MeanKind,
        set: GeodesicBall,
        constants: Constants,
    ) -> Result<Radar> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(invalid(format!("meta learning rate must be positive, got {beta}")));
        }
        let experts = grid
            .etas()
            .iter()
            .map(|&eta| Rogd::new(start, eta, set.clone(), constants))
            .collect::<Result<Vec<_>>>()?;
        let initial = WeightVector::harmonic_prior(experts.len());
        let points: Vec<Point> = experts.iter().map(|e| e.point().clone()).collect();
        let x = aggregate(kind, &points, &initial, &set)?;
        Ok(Radar {
            expert_losses: vec![0.0; experts.len()],
            experts,
            weights: initial.clone(),
            initial,
            beta,
            kind,
            set,
            constants,
            x,
            meta_loss: 0.0,
            rounds: 0,
        })
    }

    pub fn experts(&self) -> &[Rogd] {
        &self.experts
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    /// `ln(1/w_{1,i})/β + βG²D²t/8`, the meta-regret allowance against expert `i`.
    pub fn meta_bound(&self, i: usize) -> f64 {
        let c = &self.constants;
        (1.0 / self.initial.as_slice()[i]).ln() / self.beta
            + self.beta * (c.gradient_bound * c.diameter).powi(2) * self.rounds as f64 / 8.0
    }
}

impl Learner for Radar {
    fn name(&self) -> &'static str {
        "radar"
    }

    fn play(&self) -> &Point {
        &self.x
    }

    fn observe(&mut self, f: &dyn Loss) -> Result<()> {
        self.meta_loss += f.value(&self.x)?;
        let mut losses = Vec::with_capacity(self.experts.len());
        for (e, acc) in self.experts.iter().zip(self.expert_losses.iter_mut()) {
            let v = f.value(e.point())?;
            *acc += v;
            losses.push(v);
        }
        self.weights = hedge_update(&self.weights, &losses, self.beta)?;
        for e in &mut self.experts {
            let g = f.grad(e.point())?;
            e.step(&g)?;
        }
        self.rounds += 1;
        let points: Vec<Point> = self.experts.iter().map(|e| e.point().clone()).collect();
        self.x = aggregate(self.kind, &points, &self.weights, &self.set)?;
        Ok(())
    }

    fn bound(&self, path_length: f64) -> f64 {
        (0..self.experts.len())
            .map(|i| self.experts[i].bound(path_length) + self.meta_bound(i))
            .fold(f64::INFINITY, f64::min)
    }

    fn report(&self) -> LearnerReport {
        LearnerReport {
            algorithm: "radar".into(),
            etas: self.experts.iter().map(|e| e.eta()).collect(),
            expert_kinds: vec!["rogd".into(); self.experts.len()],
            beta: Some(self.beta),
            beta_fixed: true,
            zeta: self.constants.zeta(),
            initial_weights: self.initial.as_slice().to_vec(),
            weights: self.weights.as_slice().to_vec(),
            expert_losses: self.expert_losses.clone(),
            meta_loss: self.meta_loss,
            rounds: self.rounds,
            ..Default::default()
        }
    }
}

/// How the optimism vector of the meta-learner is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimismMode {
    /// `m_{t,i} = ⟨∇f_{t−1}(x̄_t), Exp_{x̄_t}^{-1} x_{t,i}⟩`.
    Gradient,
    /// `m_t = 0`: plain Hedge on the surrogate losses.
    Zero,
    /// The gradient optimism scaled by an exponentially weighted `γ_t`.
    Hedged,
}

/// Which accumulated quantity drives a time-varying meta learning rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptiveTarget {
    Variation,
    SmallLoss,
    Best,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaRate {
    Fixed(f64),
    Adaptive(AdaptiveTarget),
}

/// Weight of the gradient optimism after prediction errors `Σd(m^v)` and
/// `Σd(m^s)`: two-expert exponential weights written as a logistic of the gap.
pub fn hedged_gamma(tau: f64, miss_grad: f64, miss_zero: f64) -> f64 {
    1.0 / (1.0 + (tau * (miss_grad - miss_zero)).exp())
}

/// `1/√(12(D⁴L² + D²G²ζ²))`.
pub fn beta_cap(c: &Constants, zeta: f64) -> f64 {
    let (d, g) = (c.diameter, c.gradient_bound);
    let l = c.smoothness.unwrap_or(0.0);
    1.0 / (12.0 * (d.powi(4) * l * l + d * d * g * g * zeta * zeta)).sqrt()
}

/// `min{√((2+ln N)/(3D²V)), cap}`.
pub fn beta_variation(n: usize, c: &Constants, zeta: f64, variation: f64) -> f64 {
    let raw = ((2.0 + (n as f64).ln()) / (3.0 * c.diameter.powi(2) * variation)).sqrt();
    raw.min(beta_cap(c, zeta))
}

/// `√((2+ln N)/(D²F̄))`.
pub fn beta_small_loss(n: usize, c: &Constants, meta_loss: f64) -> f64 {
    ((2.0 + (n as f64).ln()) / (c.diameter.powi(2) * meta_loss.max(1e-12))).sqrt()
}

/// `min{√((2+ln N)/(N(D²·min{3(V+G²), F̄} + 8G²D² ln 2))), cap}`.
pub fn beta_best(n: usize, c: &Constants, zeta: f64, variation: f64, meta_loss: f64) -> f64 {
    let (d, g) = (c.diameter, c.gradient_bound);
    let nf = n as f64;
    let b = (3.0 * (variation + g * g)).min(meta_loss.max(0.0));
    let raw = ((2.0 + nf.ln()) / (nf * (d * d * b + 8.0 * g * g * d * d * 2f64.ln()))).sqrt();
    raw.min(beta_cap(c, zeta))
}

/// Optimistic Hedge over OMD and/or R-OGD experts with linearized surrogate
/// losses `ℓ_{t,i} = ⟨∇f_t(x_t), Exp_{x_t}^{-1} x_{t,i}⟩`.
#[derive(Clone, Debug)]
pub struct OptimisticEnsemble {
    name: &'static str,
    experts: Vec<Expert>,
    mode: OptimismMode,
    rate: MetaRate,
    kind: MeanKind,
    domain: EnlargedSet,
    constants: Constants,
    zeta: f64,
    tau: f64,

    cumulative: Vec<f64>,
    w_prev: WeightVector,
    w: WeightVector,
    x: Point,
    xbar: Point,
    prev_grad: Option<Tangent>,
    m_grad: Vec<f64>,
    m: Vec<f64>,
    gamma: f64,
    beta: f64,
    miss_grad: f64,
    miss_zero: f64,

    variation_acc: f64,
    linear_loss: f64,
    prediction_error: f64,
    movement: f64,
    expert_losses: Vec<f64>,
    meta_loss: f64,
    rounds: usize,
    confinement: Confinement,
}

impl OptimisticEnsemble {
    /// Builds the ensemble from an optimistic grid (first) and an R-OGD grid.
    /// Either grid may be absent. Optimistic experts make the meta-learner
    /// average over the enlarged set.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &'static str,
        start: &Point,
        omd_grid: Option<&StepSizeGrid>,
        rogd_grid: Option<&StepSizeGrid>,
        mode: OptimismMode,
        rate: MetaRate,
        kind: MeanKind,
        set: GeodesicBall,
        constants: Constants,
    ) -> Result<OptimisticEnsemble> {
        constants.validate()?;
        let mut experts = Vec::new();
        if let Some(g) = omd_grid {
            for &eta in g.etas() {
                experts.push(Expert::Omd(Omd::new(start, eta, set.clone(), constants)?));
            }
        }
        if let Some(g) = rogd_grid {
            for &eta in g.etas() {
                experts.push(Expert::Rogd(Rogd::new(start, eta, set.clone(), constants)?));
            }
        }
        if experts.is_empty() {
            return Err(invalid("ensemble needs at least one expert"));
        }
        if let MetaRate::Fixed(b) = rate {
            if !(b > 0.0) || !b.is_finite() {
                return Err(invalid(format!("meta learning rate must be positive, got {b}")));
            }
        }
        let improper = omd_grid.is_some_and(|g| !g.is_empty()) || mode != OptimismMode::Zero;
        let (margin, zeta) = if improper {
            (constants.margin(), constants.zeta_improper())
        } else {
            (0.0, constants.zeta())
        };
        let domain = set.enlarge(margin)?;
        let n = experts.len();
        let uniform = WeightVector::uniform(n);
        let tau = 1.0 / (8.0 * n as f64 * (constants.gradient_bound * constants.diameter).powi(2));
        let x0 = start.clone();
        let mut out = OptimisticEnsemble {
            name,
            experts,
            mode,
            rate,
            kind,
            domain,
            constants,
            zeta,
            tau,
            cumulative: vec![0.0; n],
            w_prev: uniform.clone(),
            w: uniform,
            x: x0.clone(),
            xbar: x0,
            prev_grad: None,
            m_grad: vec![0.0; n],
            m: vec![0.0; n],
            gamma: 0.5,
            beta: 0.0,
            miss_grad: 0.0,
            miss_zero: 0.0,
            variation_acc: 0.0,
            linear_loss: 0.0,
            prediction_error: 0.0,
            movement: 0.0,
            expert_losses: vec![0.0; n],
            meta_loss: 0.0,
            rounds: 0,
            confinement: Confinement::default(),
        };
        out.xbar = out.mean_under(&out.w_prev.clone())?;
        out.refresh()?;
        Ok(out)
    }

    fn points(&self) -> Vec<Point> {
        self.experts.iter().map(|e| e.point().clone()).collect()
    }

    fn mean_under(&self, w: &WeightVector) -> Result<Point> {
        aggregate(self.kind, &self.points(), w, &self.domain.as_ball())
    }

    fn current_beta(&self) -> f64 {
        let n = self.experts.len();
        let c = &self.constants;
        match self.rate {
            MetaRate::Fixed(b) => b,
            MetaRate::Adaptive(AdaptiveTarget::Variation) => {
                beta_variation(n, c, self.zeta, self.variation_acc + c.gradient_bound.powi(2))
            }
            MetaRate::Adaptive(AdaptiveTarget::SmallLoss) => beta_small_loss(n, c, 1.0 + self.meta_loss),
            MetaRate::Adaptive(AdaptiveTarget::Best) => {
                beta_best(n, c, self.zeta, self.variation_acc, 1.0 + self.meta_loss)
            }
        }
    }

    /// Optimism, meta weights and the play for the upcoming round; `xbar` and
    /// `prev_grad` must already describe it.
    fn refresh(&mut self) -> Result<()> {
        let n = self.experts.len();
        self.m_grad = vec![0.0; n];
        if let Some(g) = &self.prev_grad {
            for (i, e) in self.experts.iter().enumerate() {
                self.m_grad[i] = inner(g, &log(&self.xbar, e.point())?)?;
            }
        }
        self.gamma = match self.mode {
            OptimismMode::Gradient => 1.0,
            OptimismMode::Zero => 0.0,
            OptimismMode::Hedged => hedged_gamma(self.tau, self.miss_grad, self.miss_zero),
        };
        self.m = self.m_grad.iter().map(|v| self.gamma * v).collect();
        self.beta = self.current_beta();
        self.w = optimistic_hedge_weights(&self.cumulative, &self.m, self.beta)?;
        self.x = self.mean_under(&self.w.clone())?;
        self.confinement.plays += 1;
        self.confinement.plays_inside += self.domain.contains(&self.x)? as usize;
        Ok(())
    }

    pub fn experts(&self) -> &[Expert] {
        &self.experts
    }

    pub fn weights(&self) -> &WeightVector {
        &self.w
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn optimism(&self) -> &[f64] {
        &self.m
    }

    /// The optimistic-hedge allowance
    /// `(2+ln N)/β + βΣ‖ℓ−m‖²_∞ − Σ‖w_t−w_{t−1}‖²_1/(4β) − Σ⟨w_t, ℓ_t⟩`,
    /// which bounds `Σf_t(x_t) − Σf_t(x_{t,i})` for every expert when β is fixed.
    pub fn meta_bound(&self) -> f64 {
        let n = self.experts.len() as f64;
        let b = self.beta;
        (2.0 + n.ln()) / b + b * self.prediction_error - self.movement / (4.0 * b) - self.linear_loss
    }
}

impl Learner for OptimisticEnsemble {
    fn name(&self) -> &'static str {
        self.name
    }

    fn play(&self) -> &Point {
        &self.x
    }

    fn observe(&mut self, f: &dyn Loss) -> Result<()> {
        let g = f.grad(&self.x)?;
        let mut l = Vec::with_capacity(self.experts.len());
        for e in &self.experts {
            l.push(inner(&g, &log(&self.x, e.point())?)?);
        }

        self.linear_loss += self.w.as_slice().iter().zip(&l).map(|(a, b)| a * b).sum::<f64>();
        self.prediction_error +=
            l.iter().zip(&self.m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max).powi(2);
        if self.rounds > 0 {
            self.movement += self.w.l1_distance(&self.w_prev).powi(2);
        }
        self.miss_grad += l.iter().zip(&self.m_grad).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        self.miss_zero += l.iter().map(|a| a * a).sum::<f64>();
        if let Some(pg) = &self.prev_grad {
            self.variation_acc += norm(&f.grad(&self.xbar)?.sub(pg)?).powi(2);
        }

        self.meta_loss += f.value(&self.x)?;
        for (e, acc) in self.experts.iter().zip(self.expert_losses.iter_mut()) {
            *acc += f.value(e.point())?;
        }
        for (c, x) in self.cumulative.iter_mut().zip(&l) {
            *c += x;
        }
        for e in &mut self.experts {
            e.observe(f)?;
        }
        self.rounds += 1;

        self.w_prev = self.w.clone();
        self.xbar = self.mean_under(&self.w_prev.clone())?;
        self.prev_grad = Some(f.grad(&self.xbar)?);
        self.refresh()
    }

    fn bound(&self, path_length: f64) -> f64 {
        let meta = self.meta_bound();
        self.experts
            .iter()
            .map(|e| e.bound(path_length) + meta)
            .fold(f64::INFINITY, f64::min)
    }

    fn report(&self) -> LearnerReport {
        let mut confinement = self.confinement;
        for e in &self.experts {
            let c = e.confinement();
            confinement.anchors += c.anchors;
            confinement.anchors_inside += c.anchors_inside;
        }
        LearnerReport {
            algorithm: self.name.into(),
            etas: self.experts.iter().map(|e| e.eta()).collect(),
            expert_kinds: self.experts.iter().map(|e| e.kind().to_string()).collect(),
            beta: Some(self.beta),
            beta_fixed: matches!(self.rate, MetaRate::Fixed(_)),
            tau: (self.mode == OptimismMode::Hedged).then_some(self.tau),
            gamma: Some(self.gamma),
            zeta: self.zeta,
            initial_weights: WeightVector::uniform(self.experts.len()).as_slice().to_vec(),
            weights: self.w.as_slice().to_vec(),
            expert_losses: self.expert_losses.clone(),
            meta_loss: self.meta_loss,
            rounds: self.rounds,
            confinement,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::grid::{radar_grid, radarv_grid};
    use crate::algorithms::rogd::Rogd;
    use crate::losses::{squared_distance_loss, ZeroLoss};
    use crate::manifold::ManifoldSpec;
    use approx::assert_abs_diff_eq;

    fn setup() -> (ManifoldSpec, GeodesicBall, Constants) {
        let m = ManifoldSpec::PoincareBall { dim: 2 };
        let set = GeodesicBall::new(m.origin(), 1.0).unwrap();
        let c = Constants {
            diameter: 2.0,
            gradient_bound: 2.0 * 2.0 / (1.0 - 2.0 * 0.1),
            smoothness: Some(6.0),
            kappa: -1.0,
            delta: 0.1,
            horizon: 50,
        };
        (m, set, c)
    }

    fn target(m: ManifoldSpec, t: usize) -> Box<dyn Loss> {
        let a = m.point_from_slice(&[0.3 * (t as f64 * 0.4).cos(), 0.3 * (t as f64 * 0.4).sin()]).unwrap();
        Box::new(squared_distance_loss(vec![a], vec![1.0], 3.0).unwrap())
    }

    #[test]
    fn single_expert_radar_is_rogd() {
        let (m, set, c) = setup();
        let start = m.point_from_slice(&[0.2, -0.4]).unwrap();
        let grid = StepSizeGrid::single(0.05).unwrap();
        let mut radar = Radar::new(&start, &grid, 0.3, MeanKind::Frechet, set.clone(), c).unwrap();
        let mut rogd = Rogd::new(&start, 0.05, set, c).unwrap();
        for t in 0..30 {
            assert_eq!(radar.play(), rogd.play());
            let f = target(m, t);
            radar.observe(f.as_ref()).unwrap();
            rogd.observe(f.as_ref()).unwrap();
            assert_eq!(radar.weights().as_slice(), &[1.0]);
        }
    }

    #[test]
    fn radar_initial_weights() {
        let (m, set, c) = setup();
        let grid = StepSizeGrid::doubling(0.01, 3).unwrap();
        let radar = Radar::new(&m.origin(), &grid, 0.3, MeanKind::Frechet, set, c).unwrap();
        let w = radar.report().initial_weights;
        assert_abs_diff_eq!(w[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 2.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], 1.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn first_play_coincides_with_previous_mean() {
        let (m, set, c) = setup();
        let l = c.smoothness.unwrap();
        let grid = radarv_grid(c.diameter, c.gradient_bound, l, c.zeta_improper(), c.delta, c.horizon).unwrap();
        let start = m.point_from_slice(&[0.1, 0.2]).unwrap();
        let e = OptimisticEnsemble::new(
            "radar_v",
            &start,
            Some(&grid),
            None,
            OptimismMode::Gradient,
            MetaRate::Fixed(0.1),
            MeanKind::Frechet,
            set,
            c,
        )
        .unwrap();
        assert!(e.play().dist(&e.xbar).unwrap() < 1e-12);
    }

    #[test]
    fn coincident_experts_see_zero_surrogate_losses() {
        let (m, set, c) = setup();
        let grid = radar_grid(c.diameter, c.gradient_bound, c.zeta(), c.horizon).unwrap();
        let mut e = OptimisticEnsemble::new(
            "radar_s",
            &m.origin(),
            None,
            Some(&grid),
            OptimismMode::Zero,
            MetaRate::Fixed(0.5),
            MeanKind::Frechet,
            set,
            c,
        )
        .unwrap();
        let before = e.weights().clone();
        e.observe(&ZeroLoss(m)).unwrap();
        assert_eq!(e.weights(), &before);
    }

    #[test]
    fn hedged_gamma_starts_at_one_half() {
        let (m, set, c) = setup();
        let grid = radar_grid(c.diameter, c.gradient_bound, c.zeta(), c.horizon).unwrap();
        let e = OptimisticEnsemble::new(
            "radar_b",
            &m.origin(),
            None,
            Some(&grid),
            OptimismMode::Hedged,
            MetaRate::Fixed(0.5),
            MeanKind::Frechet,
            set,
            c,
        )
        .unwrap();
        assert_eq!(e.gamma(), 0.5);
    }
}
