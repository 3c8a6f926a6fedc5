//! The minimax dynamic-regret game on diagonal SPD matrices.
//!
//! Both players act in tangent coordinates at the identity: diagonal matrices
//! stored as vectors of their diagonals, with the trace inner product. The
//! adversary picks `X_t` with `‖X_t‖ ≤ G_t`, the player picks `Y_t` in the
//! unit ball, the round loss is `−tr(X_t Y_t)` and the best fixed comparator
//! earns `−‖Σ X_t‖`. Regret is reported scaled by `D/2`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::losses::{busemann_loss, Loss, ZeroLoss};
use crate::manifold::{exp, sample, ManifoldSpec, Point};

const BUDGET_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn vnorm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n: usize,
    pub budgets: Vec<f64>,
    pub diameter: f64,
}

impl GameConfig {
    pub fn new(n: usize, budgets: Vec<f64>, diameter: f64) -> Result<GameConfig> {
        if n < 3 {
            return Err(invalid(format!("the game needs dimension n > 2, got {n}")));
        }
        if budgets.is_empty() {
            return Err(invalid("the game needs at least one round"));
        }
        if budgets.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(invalid("gradient budgets must be positive"));
        }
        if !(diameter > 0.0) {
            return Err(invalid(format!("diameter must be positive, got {diameter}")));
        }
        Ok(GameConfig { n, budgets, diameter })
    }

    pub fn constant(n: usize, horizon: usize, g: f64, diameter: f64) -> Result<GameConfig> {
        GameConfig::new(n, vec![g; horizon], diameter)
    }

    pub fn horizon(&self) -> usize {
        self.budgets.len()
    }

    /// `(D/2)·√(Σ G_t²)`.
    pub fn value(&self) -> f64 {
        0.5 * self.diameter * self.budgets.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// What a strategy sees before moving in round `t` (zero-based).
#[derive(Clone, Copy, Debug)]
pub struct GameView<'a> {
    pub t: usize,
    pub n: usize,
    pub budgets: &'a [f64],
    /// `X̃_{t−1} = Σ_{s<t} X_s`.
    pub sum: &'a [f64],
    pub xs: &'a [Vec<f64>],
    pub ys: &'a [Vec<f64>],
}

pub trait Player {
    fn name(&self) -> String;
    fn play(&mut self, view: &GameView) -> Vec<f64>;
}

/// The adversary moves after seeing the player's `y`.
pub trait Adversary {
    fn name(&self) -> String;
    fn play(&mut self, view: &GameView, y: &[f64]) -> Result<Vec<f64>>;
}

/// Unit vector orthogonal to `y` and `sum`, scaled to `g`, built by
/// Gram–Schmidt from the lowest-index basis vector outside their span.
pub fn adversary_move(sum: &[f64], y: &[f64], g: f64) -> Result<Vec<f64>> {
    let n = sum.len();
    if n <= 2 {
        return Err(invalid(format!("the adversary needs n > 2, got {n}")));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n.to_string(), got: y.len().to_string() });
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in [y, sum] {
        let mut r = v.to_vec();
        for b in &basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
        }
        let len = vnorm(&r);
        if len > 1e-12 * (1.0 + vnorm(v)) {
            basis.push(r.into_iter().map(|x| x / len).collect());
        }
    }
    for k in 0..n {
        let mut r = vec![0.0; n];
        r[k] = 1.0;
        for b in &basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
        }
        let len = vnorm(&r);
        if len > 1e-6 {
            return Ok(r.into_iter().map(|x| g * x / len).collect());
        }
    }
    Err(invalid("no direction orthogonal to the player's move and the running sum"))
}

/// `Y_t = X̃_{t−1}/√(‖X̃_{t−1}‖² + Σ_{s≥t} G_s²)`.
pub fn player_move(sum: &[f64], t: usize, budgets: &[f64]) -> Vec<f64> {
    let rest: f64 = budgets[t..].iter().map(|g| g * g).sum();
    let denom = (dot(sum, sum) + rest).sqrt();
    if denom == 0.0 {
        return vec![0.0; sum.len()];
    }
    sum.iter().map(|x| x / denom).collect()
}

#[derive(Clone, Debug, Default)]
pub struct OptimalPlayer;

impl Player for OptimalPlayer {
    fn name(&self) -> String {
        "optimal".into()
    }

    fn play(&mut self, v: &GameView) -> Vec<f64> {
        player_move(v.sum, v.t, v.budgets)
    }
}

#[derive(Clone, Debug, Default)]
pub struct OptimalAdversary;

impl Adversary for OptimalAdversary {
    fn name(&self) -> String {
        "optimal".into()
    }

    fn play(&mut self, v: &GameView, y: &[f64]) -> Result<Vec<f64>> {
        adversary_move(v.sum, y, v.budgets[v.t])
    }
}

/// Always plays the origin.
#[derive(Clone, Debug, Default)]
pub struct ZeroPlayer;

impl Player for ZeroPlayer {
    fn name(&self) -> String {
        "zero".into()
    }

    fn play(&mut self, v: &GameView) -> Vec<f64> {
        vec![0.0; v.n]
    }
}

/// Plays the best fixed point for the rounds so far.
#[derive(Clone, Debug, Default)]
pub struct FollowTheLeader;

impl Player for FollowTheLeader {
    fn name(&self) -> String {
        "follow_the_leader".into()
    }

    fn play(&mut self, v: &GameView) -> Vec<f64> {
        let len = vnorm(v.sum);
        if len == 0.0 {
            return vec![0.0; v.n];
        }
        v.sum.iter().map(|x| x / len).collect()
    }
}

/// Always plays the same unit direction.
#[derive(Clone, Debug)]
pub struct FixedPlayer(pub Vec<f64>);

impl Player for FixedPlayer {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn play(&mut self, _v: &GameView) -> Vec<f64> {
        self.0.clone()
    }
}

/// Uniformly random points of the unit ball.
#[derive(Clone, Debug)]
pub struct RandomPlayer(pub ChaCha8Rng);

impl Player for RandomPlayer {
    fn name(&self) -> String {
        "random".into()
    }

    fn play(&mut self, v: &GameView) -> Vec<f64> {
        let dir: Vec<f64> = (0..v.n).map(|_| self.0.sample::<f64, _>(StandardNormal)).collect();
        let r = self.0.gen::<f64>().powf(1.0 / v.n as f64) / vnorm(&dir).max(1e-300);
        dir.into_iter().map(|x| x * r).collect()
    }
}

/// Projected gradient steps on the linear losses with step `η`.
#[derive(Clone, Debug)]
pub struct GradientPlayer {
    pub eta: f64,
    y: Option<Vec<f64>>,
}

impl GradientPlayer {
    pub fn new(eta: f64) -> GradientPlayer {
        GradientPlayer { eta, y: None }
    }
}

impl Player for GradientPlayer {
    fn name(&self) -> String {
        "gradient".into()
    }

    fn play(&mut self, v: &GameView) -> Vec<f64> {
        let mut y = self.y.take().unwrap_or_else(|| vec![0.0; v.n]);
        if let Some(x) = v.xs.last() {
            y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += self.eta * xi);
            let len = vnorm(&y);
            if len > 1.0 {
                y.iter_mut().for_each(|yi| *yi /= len);
            }
        }
        self.y = Some(y.clone());
        y
    }
}

/// Random directions with magnitudes in `[G_t/2, G_t]`.
#[derive(Clone, Debug)]
pub struct RandomAdversary(pub ChaCha8Rng);

impl Adversary for RandomAdversary {
    fn name(&self) -> String {
        "random".into()
    }

    fn play(&mut self, v: &GameView, _y: &[f64]) -> Result<Vec<f64>> {
        let dir: Vec<f64> = (0..v.n).map(|_| self.0.sample::<f64, _>(StandardNormal)).collect();
        let g = v.budgets[v.t] * (0.5 + 0.5 * self.0.gen::<f64>());
        let len = vnorm(&dir).max(1e-300);
        Ok(dir.into_iter().map(|x| g * x / len).collect())
    }
}

/// Full-budget moves along one fixed direction, with the sign flipped at
/// random with probability `flip`; `flip = 0` is fully colinear.
#[derive(Clone, Debug)]
pub struct ColinearAdversary {
    pub rng: ChaCha8Rng,
    pub direction: Vec<f64>,
    pub flip: f64,
}

impl Adversary for ColinearAdversary {
    fn name(&self) -> String {
        "colinear".into()
    }

    fn play(&mut self, v: &GameView, _y: &[f64]) -> Result<Vec<f64>> {
        let s = if self.rng.gen::<f64>() < self.flip { -1.0 } else { 1.0 };
        let len = vnorm(&self.direction);
        Ok(self.direction.iter().map(|x| s * v.budgets[v.t] * x / len).collect())
    }
}

/// Alternates between a colinear push and an orthogonal random move.
#[derive(Clone, Debug)]
pub struct MixedAdversary {
    pub rng: ChaCha8Rng,
    pub mix: f64,
}

impl Adversary for MixedAdversary {
    fn name(&self) -> String {
        "mixed".into()
    }

    fn play(&mut self, v: &GameView, y: &[f64]) -> Result<Vec<f64>> {
        let g = v.budgets[v.t];
        if self.rng.gen::<f64>() < self.mix {
            let mut e = vec![0.0; v.n];
            e[0] = g;
            Ok(e)
        } else {
            let dir: Vec<f64> = (0..v.n).map(|_| self.rng.sample::<f64, _>(StandardNormal)).collect();
            // remove the component along the player's move
            let yy = dot(y, y);
            let c = if yy > 0.0 { dot(&dir, y) / yy } else { 0.0 };
            let r: Vec<f64> = dir.iter().zip(y).map(|(d, yi)| d - c * yi).collect();
            let len = vnorm(&r).max(1e-300);
            Ok(r.into_iter().map(|x| g * x / len).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRound {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `−tr(X_t Y_t)` in unit-radius coordinates.
    pub payoff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    /// `(D/2)(Σ −tr(X_tY_t) + ‖Σ X_t‖)`.
    pub regret: f64,
    pub value: f64,
    pub rounds: Vec<GameRound>,
}

impl GameOutcome {
    pub fn sum(&self) -> Vec<f64> {
        let n = self.rounds.first().map_or(0, |r| r.x.len());
        let mut s = vec![0.0; n];
        for r in &self.rounds {
            s.iter_mut().zip(&r.x).for_each(|(a, b)| *a += b);
        }
        s
    }
}

pub fn play_game(cfg: &GameConfig, player: &mut dyn Player, adversary: &mut dyn Adversary) -> Result<GameOutcome> {
    let n = cfg.n;
    let mut sum = vec![0.0; n];
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(cfg.horizon());
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(cfg.horizon());
    let mut rounds = Vec::with_capacity(cfg.horizon());
    let mut payoff_total = 0.0;
    for t in 0..cfg.horizon() {
        let view = GameView { t, n, budgets: &cfg.budgets, sum: &sum, xs: &xs, ys: &ys };
        let y = player.play(&view);
        if y.len() != n || vnorm(&y) > 1.0 + BUDGET_TOL {
            return Err(invalid(format!("player {} left the unit ball in round {}", player.name(), t + 1)));
        }
        let x = adversary.play(&view, &y)?;
        if x.len() != n || vnorm(&x) > cfg.budgets[t] * (1.0 + BUDGET_TOL) {
            return Err(invalid(format!("adversary {} exceeded its budget in round {}", adversary.name(), t + 1)));
        }
        let payoff = -dot(&x, &y);
        payoff_total += payoff;
        sum.iter_mut().zip(&x).for_each(|(s, xi)| *s += xi);
        rounds.push(GameRound { x: x.clone(), y: y.clone(), payoff });
        xs.push(x);
        ys.push(y);
    }
    Ok(GameOutcome { regret: 0.5 * cfg.diameter * (payoff_total + vnorm(&sum)), value: cfg.value(), rounds })
}

/// The same regret recomputed on the manifold: each `X_t` becomes a Busemann
/// loss on diagonal SPD matrices and each `Y_t` the point `Exp_I((D/2)Y_t)`.
pub fn lifted_regret(cfg: &GameConfig, outcome: &GameOutcome) -> Result<f64> {
    let m = ManifoldSpec::DiagSpd { n: cfg.n };
    let id = m.origin();
    let r = 0.5 * cfg.diameter;
    let lift = |v: &[f64], scale: f64| -> Result<Point> {
        let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
        exp(&id, &m.tangent_from_slice(&id, &scaled)?)
    };
    let sum = outcome.sum();
    let total = vnorm(&sum);
    let best = if total > 0.0 { lift(&sum, r / total)? } else { id.clone() };
    let mut regret = 0.0;
    for round in &outcome.rounds {
        let g = vnorm(&round.x);
        let f: Box<dyn Loss> = if g > 0.0 {
            let dir: Vec<f64> = round.x.iter().map(|x| x / g).collect();
            Box::new(busemann_loss(&m.tangent_from_slice(&id, &dir)?, g)?)
        } else {
            Box::new(ZeroLoss(m))
        };
        regret += f.value(&lift(&round.y, r)?)? - f.value(&best)?;
    }
    Ok(regret)
}

/// Segments of equal length with a fixed comparator each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub segments: usize,
    pub length: usize,
    /// The horizon rounded up to a multiple of `segments`.
    pub padded_horizon: usize,
    /// `(GD/2)·√(T_padded · segments)`.
    pub value: f64,
    /// Largest path length the piecewise-constant comparators can use.
    pub max_path_length: f64,
}

/// `⌈τ/D⌉` (at least one) segments of the horizon for a path budget `τ`.
pub fn dynamic_comparator_reduction(tau: f64, horizon: usize, diameter: f64, g: f64) -> Result<SegmentPlan> {
    if horizon == 0 || !(diameter > 0.0) || !(g > 0.0) {
        return Err(invalid("horizon, diameter and gradient budget must be positive"));
    }
    if !(tau >= 0.0) || tau > horizon as f64 * diameter * (1.0 + 1e-12) {
        return Err(invalid(format!("path budget must lie in [0, TD], got {tau}")));
    }
    let k = ((tau / diameter).ceil() as usize).max(1).min(horizon);
    let length = horizon.div_ceil(k);
    let padded = length * k;
    Ok(SegmentPlan {
        segments: k,
        length,
        padded_horizon: padded,
        value: 0.5 * g * diameter * ((padded * k) as f64).sqrt(),
        max_path_length: (k - 1) as f64 * diameter,
    })
}

/// Plays optimal against optimal on every segment; returns the total regret
/// against the piecewise-constant comparator.
pub fn play_segments(plan: &SegmentPlan, n: usize, g: f64, diameter: f64) -> Result<f64> {
    let cfg = GameConfig::constant(n, plan.length, g, diameter)?;
    let mut total = 0.0;
    for _ in 0..plan.segments {
        total += play_game(&cfg, &mut OptimalPlayer, &mut OptimalAdversary)?.regret;
    }
    Ok(total)
}

/// The five reference players used to probe the optimal adversary.
pub fn baseline_players(n: usize, horizon: usize, seed: u64) -> Vec<Box<dyn Player>> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    vec![
        Box::new(ZeroPlayer),
        Box::new(FollowTheLeader),
        Box::new(FixedPlayer(e)),
        Box::new(RandomPlayer(sample::seeded(seed))),
        Box::new(GradientPlayer::new(1.0 / (horizon as f64).sqrt())),
    ]
}

/// A randomized adversary; the kind cycles with the seed.
pub fn random_adversary(n: usize, seed: u64) -> Box<dyn Adversary> {
    let mut rng = sample::seeded(seed);
    match seed % 4 {
        0 => Box::new(RandomAdversary(rng)),
        1 => {
            let direction: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            Box::new(ColinearAdversary { rng, direction, flip: 0.0 })
        }
        2 => {
            let direction: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let flip = rng.gen::<f64>();
            Box::new(ColinearAdversary { rng, direction, flip })
        }
        _ => {
            let mix = rng.gen::<f64>();
            Box::new(MixedAdversary { rng, mix })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_adversary_move_is_first_axis() {
        let x = adversary_move(&[0.0; 4], &[0.0; 4], 2.5).unwrap();
        assert_eq!(x, vec![2.5, 0.0, 0.0, 0.0]);
        assert!(adversary_move(&[0.0; 2], &[0.0; 2], 1.0).is_err());
    }

    #[test]
    fn adversary_by_hand() {
        let x = adversary_move(&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], 0.7).unwrap();
        assert_abs_diff_eq!(x[0], 0.0);
        assert_abs_diff_eq!(x[1], 0.0);
        assert_abs_diff_eq!(x[2], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn player_formula() {
        assert_eq!(player_move(&[0.0; 3], 0, &[1.0; 5]), vec![0.0; 3]);
        let t = 9;
        let y = player_move(&[1.0, 0.0, 0.0], 1, &vec![1.0; t]);
        assert_abs_diff_eq!(y[0], 1.0 / (t as f64).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn optimal_pair_reaches_the_value() {
        let cfg = GameConfig::constant(3, 100, 1.0, 2.0).unwrap();
        let out = play_game(&cfg, &mut OptimalPlayer, &mut OptimalAdversary).unwrap();
        assert_abs_diff_eq!(out.regret, 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(lifted_regret(&cfg, &out).unwrap(), out.regret, epsilon = 1e-8);
    }

    #[test]
    fn pythagoras_after_each_move() {
        let cfg = GameConfig::new(4, vec![1.0, 2.0, 0.5, 3.0, 1.5], 2.0).unwrap();
        let out = play_game(&cfg, &mut ZeroPlayer, &mut OptimalAdversary).unwrap();
        let mut sum = vec![0.0; 4];
        let mut sq = 0.0;
        for (r, g) in out.rounds.iter().zip(&cfg.budgets) {
            sum.iter_mut().zip(&r.x).for_each(|(a, b)| *a += b);
            sq += g * g;
            assert_abs_diff_eq!(dot(&sum, &sum), sq, epsilon = 1e-10);
        }
    }

    #[test]
    fn segment_plans() {
        let p = dynamic_comparator_reduction(0.5, 100, 2.0, 1.0).unwrap();
        assert_eq!(p.segments, 1);
        assert_abs_diff_eq!(p.value, GameConfig::constant(3, 100, 1.0, 2.0).unwrap().value());
        let t = 64;
        let full = dynamic_comparator_reduction(t as f64 * 2.0, t, 2.0, 1.0).unwrap();
        assert_eq!(full.segments, t);
        assert_abs_diff_eq!(full.value, t as f64, epsilon = 1e-12);
        let odd = dynamic_comparator_reduction(5.0, 10, 2.0, 1.0).unwrap();
        assert_eq!((odd.segments, odd.length, odd.padded_horizon), (3, 4, 12));
        assert!(odd.max_path_length <= 5.0);
        assert!(dynamic_comparator_reduction(-1.0, 10, 2.0, 1.0).is_err());
        assert!(dynamic_comparator_reduction(21.0, 10, 2.0, 1.0).is_err());
        let played = play_segments(&odd, 3, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(played, odd.value, epsilon = 1e-9);
    }

    #[test]
    fn out_of_budget_moves_are_rejected() {
        struct Greedy;
        impl Adversary for Greedy {
            fn name(&self) -> String {
                "greedy".into()
            }
            fn play(&mut self, v: &GameView, _y: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![2.0 * v.budgets[v.t], 0.0, 0.0])
            }
        }
        let cfg = GameConfig::constant(3, 3, 1.0, 2.0).unwrap();
        assert!(play_game(&cfg, &mut ZeroPlayer, &mut Greedy).is_err());
    }
}
