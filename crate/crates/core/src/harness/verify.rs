//! Acceptance suites: each criterion runs seeded checks and reports a
//! pass/fail line with the worst violation it saw.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algorithms::ensemble::radar_beta;
use crate::algorithms::grid::radar_grid;
use crate::algorithms::hedge::OptimisticHedgeLog;
use crate::algorithms::{Confinement, Learner, Omd, Radar, Rogd};
use crate::error::{invalid, Result};
use crate::game::{
    baseline_players, lifted_regret, play_game, random_adversary, GameConfig, OptimalAdversary, OptimalPlayer,
};
use crate::losses::{busemann_loss, finite_difference_check, linear_loss, squared_distance_loss, Loss, LossSpec};
use crate::manifold::{dist, exp, geodesic, inner, log, norm, sample, transport, zeta, ManifoldSpec, Point};
use crate::means::{frechet_mean, frechet_mean_report, geodesic_mean, WeightVector, DEFAULT_TOL};
use crate::sets::GeodesicBall;

use super::config::{AlgorithmName, ComparatorRule, RunConfig, ScenarioConfig, TuningMode};
use super::run::{execute_on, omd_eta, rogd_eta, simulate, within_bound};
use super::scenario::{gen_adversarial_game, gen_custom, generate, Scenario};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}. {} ({:.2}s, limit {:.0}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Geometry,
    Bounds,
    Game,
    Scenarios,
    All,
}

impl FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Suite> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "bounds" => Ok(Suite::Bounds),
            "game" => Ok(Suite::Game),
            "scenarios" => Ok(Suite::Scenarios),
            "all" => Ok(Suite::All),
            other => Err(invalid(format!("unknown suite {other}; use geometry, bounds, game, scenarios or all"))),
        }
    }
}

impl Suite {
    pub fn criteria(&self) -> Vec<u32> {
        match self {
            Suite::Geometry => vec![1, 2, 3, 4],
            Suite::Bounds => vec![5],
            Suite::Game => vec![6],
            Suite::Scenarios => vec![7, 8, 9],
            Suite::All => (1..=9).collect(),
        }
    }
}

pub const CRITERIA: [(u32, &str, f64); 9] = [
    (1, "geometry: exp/log round trip, transport isometry, constant-speed geodesics", 10.0),
    (2, "comparison laws on geodesic triangles", 10.0),
    (3, "loss gradients, convexity, smoothness and self-bounding", 30.0),
    (4, "Fréchet and geodesic means", 30.0),
    (5, "pathwise regret bounds under oracle tuning", 120.0),
    (6, "minimax game values", 60.0),
    (7, "sublinear regret of RADAR on the drifting mean", 600.0),
    (8, "best-of-both-worlds ordering", 600.0),
    (9, "improper plays stay in the enlarged set", 600.0),
];

pub fn run_suite(suite: Suite) -> Vec<CriterionReport> {
    suite.criteria().into_iter().map(run_criterion).collect()
}

pub fn run_criterion(id: u32) -> CriterionReport {
    let (_, name, limit) = CRITERIA[(id - 1) as usize];
    let start = Instant::now();
    let outcome = match id {
        1 => geometry(),
        2 => comparison_laws(),
        3 => losses(),
        4 => means(),
        5 => bounds(),
        6 => game(),
        7 => sublinearity(),
        8 => ordering(),
        9 => confinement(),
        _ => Err(invalid(format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (ok, detail) = match outcome {
        Ok(c) => (c.passed(), c.summary()),
        Err(e) => (false, format!("error: {e}")),
    };
    let mut detail = detail;
    if seconds > limit {
        detail.push_str(&format!("; runtime {seconds:.1}s exceeds {limit:.0}s"));
    }
    CriterionReport { id, name: name.into(), passed: ok && seconds <= limit, detail, seconds, limit_seconds: limit }
}

/// Counts checks and keeps the first failure.
#[derive(Debug, Default)]
struct Tally {
    checks: usize,
    failures: usize,
    first_failure: Option<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    fn summary(&self) -> String {
        let mut s = format!("{} checks, {} failures", self.checks, self.failures);
        for n in &self.notes {
            s.push_str("; ");
            s.push_str(n);
        }
        if let Some(f) = &self.first_failure {
            s.push_str("; first failure: ");
            s.push_str(f);
        }
        s
    }
}

fn test_manifolds() -> Vec<ManifoldSpec> {
    vec![
        ManifoldSpec::Euclidean { dim: 3 },
        ManifoldSpec::PoincareBall { dim: 3 },
        ManifoldSpec::SpdAffine { n: 3 },
        ManifoldSpec::SpdAffine { n: 5 },
        ManifoldSpec::DiagSpd { n: 4 },
    ]
}

fn point_in(rng: &mut ChaCha8Rng, m: ManifoldSpec, radius: f64) -> Point {
    sample::random_point_in_ball(rng, &m.origin(), radius)
}

const CASES: usize = 1000;

fn geometry() -> Result<Tally> {
    let mut t = Tally::default();
    let mut worst = [0.0f64; 3];
    for (k, m) in test_manifolds().into_iter().enumerate() {
        let mut rng = sample::seeded(100 + k as u64);
        let round_trip_tol = if matches!(m, ManifoldSpec::SpdAffine { .. }) { 1e-6 } else { 1e-8 };
        for _ in 0..CASES {
            let x = point_in(&mut rng, m, 2.0);
            let len = 2.0 * rng.gen::<f64>();
            let v = sample::random_tangent(&mut rng, &x, len);
            let y = exp(&x, &v)?;
            let back = log(&x, &y)?;
            let e1 = norm(&back.sub(&v)?);
            let e2 = dist(&exp(&x, &back)?, &y)?;
            let e = e1.max(e2);
            worst[0] = worst[0].max(e);
            t.check(e <= round_trip_tol, || format!("{m}: round trip error {e:.3e}"));

            let z = point_in(&mut rng, m, 2.0);
            let (la, lb) = (1.0 + rng.gen::<f64>(), 1.0 + rng.gen::<f64>());
            let a = sample::random_tangent(&mut rng, &x, la);
            let b = sample::random_tangent(&mut rng, &x, lb);
            let (ta, tb) = (transport(&x, &z, &a)?, transport(&x, &z, &b)?);
            let e = (inner(&ta, &tb)? - inner(&a, &b)?).abs().max((norm(&ta) - norm(&a)).abs());
            worst[1] = worst[1].max(e);
            t.check(e <= 1e-8, || format!("{m}: transport error {e:.3e}"));

            let s = rng.gen::<f64>();
            let d = dist(&x, &z)?;
            let g = geodesic(&x, &z, s)?;
            let e = (dist(&x, &g)? - s * d).abs().max((dist(&g, &z)? - (1.0 - s) * d).abs());
            worst[2] = worst[2].max(e);
            t.check(e <= 1e-8, || format!("{m}: geodesic speed error {e:.3e}"));
        }
    }
    t.note(format!(
        "worst round trip {:.1e}, transport {:.1e}, geodesic {:.1e}",
        worst[0], worst[1], worst[2]
    ));
    Ok(t)
}

fn comparison_laws() -> Result<Tally> {
    let mut t = Tally::default();
    let mut tightest = f64::INFINITY;
    for (k, m) in test_manifolds().into_iter().enumerate() {
        let mut rng = sample::seeded(200 + k as u64);
        let radius = 1.5;
        let z = zeta(m.curvature_lower_bound(), 2.0 * radius)?;
        for _ in 0..CASES {
            let p = point_in(&mut rng, m, radius);
            let q = point_in(&mut rng, m, radius);
            let r = point_in(&mut rng, m, radius);
            let (u, v) = (log(&p, &q)?, log(&p, &r)?);
            let (b, c, a) = (norm(&u), norm(&v), dist(&q, &r)?);
            let bc_cos = inner(&u, &v)?;
            let upper = z * b * b + c * c - 2.0 * bc_cos;
            let lower = b * b + c * c - 2.0 * bc_cos;
            tightest = tightest.min(upper - a * a);
            t.check(a * a <= upper + 1e-8, || format!("{m}: a² = {:.6e} above ζ-law {:.6e}", a * a, upper));
            t.check(a * a >= lower - 1e-8, || format!("{m}: a² = {:.6e} below flat law {:.6e}", a * a, lower));
        }
    }
    t.note(format!("smallest upper-law margin {tightest:.2e}"));
    Ok(t)
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.gen::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / s).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / s).collect()
}

fn test_losses(rng: &mut ChaCha8Rng) -> Result<Vec<(String, Box<dyn Loss>, f64)>> {
    // (label, loss, radius of the evaluation ball around the origin)
    let mut out: Vec<(String, Box<dyn Loss>, f64)> = Vec::new();
    for m in test_manifolds() {
        let anchors: Vec<Point> = (0..3).map(|_| point_in(rng, m, 1.0)).collect();
        let w = random_weights(rng, 3);
        out.push((format!("squared distance on {m}"), Box::new(squared_distance_loss(anchors, w, 2.0)?), 1.0));
    }
    let d = ManifoldSpec::DiagSpd { n: 4 };
    let dir = d.tangent_from_slice(&d.origin(), &random_unit(rng, 4))?;
    out.push((format!("busemann on {d}"), Box::new(busemann_loss(&dir, 1.5)?), 1.5));
    out.push(("linear on euclidean(3)".into(), Box::new(linear_loss(&[0.3, -1.2, 0.7], 0.4)), 2.0));
    Ok(out)
}

fn losses() -> Result<Tally> {
    let mut t = Tally::default();
    let mut rng = sample::seeded(300);
    let mut worst_fd = 0.0f64;
    for (label, f, radius) in test_losses(&mut rng)? {
        let m = f.manifold();
        let c = f.constants();
        for _ in 0..CASES {
            let x = point_in(&mut rng, m, radius);
            let y = point_in(&mut rng, m, radius);
            let v = sample::random_tangent(&mut rng, &x, 1.0);
            let g = f.grad(&x)?;
            let fd = finite_difference_check(f.as_ref(), &x, &v)? / inner(&g, &v)?.abs().max(1.0);
            worst_fd = worst_fd.max(fd);
            t.check(fd <= 1e-5, || format!("{label}: finite-difference error {fd:.3e}"));

            let (fx, fy) = (f.value(&x)?, f.value(&y)?);
            let lin = fx + inner(&g, &log(&x, &y)?)?;
            let scale = 1e-9 * fx.abs().max(fy.abs()).max(1.0);
            t.check(fy >= lin - scale, || format!("{label}: convexity gap {:.3e}", fy - lin));
            if let Some(l) = c.smoothness {
                let d = dist(&x, &y)?;
                let up = lin + 0.5 * l * d * d;
                t.check(fy <= up + scale, || format!("{label}: smoothness excess {:.3e}", fy - up));
                if c.nonnegative {
                    let gn = norm(&g).powi(2);
                    t.check(gn <= 2.0 * l * fx + scale, || format!("{label}: ‖∇f‖² = {gn:.6e} > 2Lf = {:.6e}", 2.0 * l * fx));
                }
            }
            t.check(norm(&g) <= c.gradient_bound * (1.0 + 1e-12), || format!("{label}: gradient above declared G"));
        }
    }
    t.note(format!("worst relative finite-difference error {worst_fd:.1e}"));
    Ok(t)
}

fn means() -> Result<Tally> {
    let mut t = Tally::default();
    let mut rng = sample::seeded(400);
    let mut worst_residual = 0.0f64;
    for m in test_manifolds() {
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let pts: Vec<Point> = (0..n).map(|_| point_in(&mut rng, m, 1.0)).collect();
            let w = WeightVector::new(random_weights(&mut rng, n))?;
            let rep = frechet_mean_report(&pts, &w, DEFAULT_TOL)?;
            worst_residual = worst_residual.max(rep.residual);
            t.check(rep.residual <= 1e-9, || format!("{m}: stationarity residual {:.3e}", rep.residual));

            let gm = geodesic_mean(&pts, &w)?;
            let anchor = point_in(&mut rng, m, 1.0);
            let f = squared_distance_loss(vec![anchor], vec![1.0], 4.0)?;
            let avg: f64 = pts.iter().zip(w.as_slice()).map(|(p, wi)| f.value(p).map(|v| wi * v)).sum::<Result<f64>>()?;
            for (kind, x) in [("Fréchet", &rep.point), ("geodesic", &gm)] {
                let fx = f.value(x)?;
                t.check(fx <= avg + 1e-9 * avg.max(1.0), || format!("{m}: Jensen fails for the {kind} mean"));
            }

            let two = &pts[..2];
            let w2 = WeightVector::new(random_weights(&mut rng, 2))?;
            let e = dist(&frechet_mean(two, &w2, DEFAULT_TOL)?, &geodesic_mean(two, &w2)?)?;
            t.check(e <= 1e-8, || format!("{m}: two-point means differ by {e:.3e}"));
        }
        if let ManifoldSpec::DiagSpd { n } = m {
            // Jensen for a Busemann loss as well
            for _ in 0..100 {
                let dir = m.tangent_from_slice(&m.origin(), &random_unit(&mut rng, n))?;
                let f = busemann_loss(&dir, 1.0)?;
                let pts: Vec<Point> = (0..4).map(|_| point_in(&mut rng, m, 1.0)).collect();
                let w = WeightVector::new(random_weights(&mut rng, 4))?;
                let avg: f64 = pts.iter().zip(w.as_slice()).map(|(p, wi)| f.value(p).map(|v| wi * v)).sum::<Result<f64>>()?;
                for x in [frechet_mean(&pts, &w, DEFAULT_TOL)?, geodesic_mean(&pts, &w)?] {
                    t.check(f.value(&x)? <= avg + 1e-9, || "busemann Jensen fails".into());
                }
            }
        }
    }
    // sensitivity of the Fréchet mean to its points and weights
    let mut worst_margin = f64::INFINITY;
    let ms = test_manifolds();
    for k in 0..500 {
        let m = ms[k % ms.len()];
        let radius = 1.0;
        let n = rng.gen_range(2..=5);
        let xs: Vec<Point> = (0..n).map(|_| point_in(&mut rng, m, radius)).collect();
        let ys: Vec<Point> = (0..n).map(|_| point_in(&mut rng, m, radius)).collect();
        let a = WeightVector::new(random_weights(&mut rng, n))?;
        let b = WeightVector::new(random_weights(&mut rng, n))?;
        let lhs = dist(&frechet_mean(&xs, &a, DEFAULT_TOL)?, &frechet_mean(&ys, &b, DEFAULT_TOL)?)?;
        let mut rhs = 2.0 * radius * a.l1_distance(&b) + 10.0 * DEFAULT_TOL;
        for ((x, y), ai) in xs.iter().zip(&ys).zip(a.as_slice()) {
            rhs += ai * dist(x, y)?;
        }
        worst_margin = worst_margin.min(rhs - lhs);
        t.check(lhs <= rhs, || format!("{m}: mean moved {lhs:.6e} > {rhs:.6e}"));
    }
    t.note(format!("worst residual {worst_residual:.1e}, smallest sensitivity margin {worst_margin:.2e}"));
    Ok(t)
}

fn scenario_config(kind: ScenarioConfig, alg: AlgorithmName, horizon: usize, seed: u64) -> RunConfig {
    let mut c = RunConfig::new(ManifoldSpec::PoincareBall { dim: 2 }, alg, kind, horizon);
    c.seed = seed;
    c.tuning_mode = TuningMode::Oracle;
    c
}

/// Scenarios used by the bound suite.
fn bound_scenarios() -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    for seed in 0..3 {
        out.push(generate(&scenario_config(ScenarioConfig::DriftingMean, AlgorithmName::Rogd, 300, seed))?);
        out.push(generate(&scenario_config(
            ScenarioConfig::Alternating { anchors: 4, alpha: 0.5 },
            AlgorithmName::Rogd,
            300,
            seed,
        ))?);
    }
    let e = ManifoldSpec::Euclidean { dim: 2 };
    let set = GeodesicBall::new(e.origin(), 1.0)?;
    let mut rng = sample::seeded(500);
    let specs: Vec<LossSpec> = (0..40)
        .map(|_| LossSpec::SquaredDistance {
            anchors: vec![vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]],
            weights: Some(vec![1.0]),
        })
        .collect();
    out.push(gen_custom(set, &specs, ComparatorRule::OfflineMinimizerPerRound, None, 200, 0.25, 7)?);
    Ok(out)
}

fn bounds() -> Result<Tally> {
    let mut t = Tally::default();
    let (mut rogd_runs, mut radar_runs, mut omd_runs) = (0, 0, 0);
    let mut scenarios = bound_scenarios()?;
    let game = gen_adversarial_game(4, 300, 1.0, 2.0, 0)?;

    // R-OGD at the tuned step and at multiples of it
    for s in scenarios.iter().chain(std::iter::once(&game)) {
        let c = s.constants();
        let p = s.path_length()?;
        for mult in [0.25, 1.0, 4.0] {
            let mut l = Rogd::new(&s.start, mult * rogd_eta(&c, p), s.set.clone(), c)?;
            let recs = simulate(s, &mut l)?;
            rogd_runs += 1;
            for r in &recs {
                t.check(r.bound_ok, || format!("R-OGD on {:?}: regret {:.6} > bound {:.6} at t={}", s.kind, r.cum_regret, r.bound_value, r.t));
            }
        }
    }

    // every expert of RADAR, every round
    for s in scenarios.iter().chain(std::iter::once(&game)) {
        let c = s.constants();
        let grid = radar_grid(c.diameter, c.gradient_bound, c.zeta(), c.horizon)?;
        let mut r = Radar::new(&s.start, &grid, radar_beta(&c), Default::default(), s.set.clone(), c)?;
        radar_runs += 1;
        for f in &s.losses {
            r.observe(f.as_ref())?;
            let rep = r.report();
            for (i, el) in rep.expert_losses.iter().enumerate() {
                let gap = rep.meta_loss - el;
                let b = r.meta_bound(i);
                t.check(within_bound(gap, b), || format!("RADAR expert {i}: meta regret {gap:.6} > {b:.6}"));
            }
        }
    }

    // OMD with its stored variation sum
    scenarios.truncate(6);
    for s in &scenarios {
        let c = s.constants();
        let base = omd_eta(&c, s.path_length()?, s.variation_proxy()?)?;
        for mult in [0.1, 1.0] {
            let mut o = Omd::new(&s.start, mult * base, s.set.clone(), c)?;
            let recs = simulate(s, &mut o)?;
            omd_runs += 1;
            for r in &recs {
                t.check(r.bound_ok, || format!("OMD on {:?}: regret {:.6} > bound {:.6} at t={}", s.kind, r.cum_regret, r.bound_value, r.t));
            }
        }
    }

    // optimistic hedge on random sequences
    let mut rng = sample::seeded(501);
    for k in 0..200 {
        let n = rng.gen_range(1..=8);
        let horizon = rng.gen_range(1..=500);
        let beta = 10f64.powf(rng.gen_range(-2.0..0.5));
        let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
        let mut log = OptimisticHedgeLog::new(n, beta)?;
        let mut prev = vec![0.0; n];
        for _ in 0..horizon {
            let l: Vec<f64> = (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
            let m: Vec<f64> = match k % 3 {
                0 => vec![0.0; n],
                1 => prev.clone(),
                _ => l.iter().map(|x| x + 0.1 * scale * rng.gen_range(-1.0..1.0)).collect(),
            };
            log.round(&m, &l)?;
            prev = l;
            let (reg, b) = (log.regret(), log.bound());
            t.check(within_bound(reg, b), || format!("optimistic hedge sequence {k}: regret {reg:.6} > bound {b:.6}"));
        }
    }
    t.note(format!("{rogd_runs} R-OGD, {radar_runs} RADAR, {omd_runs} OMD runs, 200 hedge sequences"));
    Ok(t)
}

fn game() -> Result<Tally> {
    let mut t = Tally::default();
    let mut rng = sample::seeded(600);
    let mut worst = 0.0f64;
    let random_config = |rng: &mut ChaCha8Rng, n: usize, horizon: usize| -> Result<GameConfig> {
        let budgets = (0..horizon).map(|_| rng.gen_range(0.5..2.0)).collect();
        GameConfig::new(n, budgets, rng.gen_range(0.5..3.0))
    };
    for k in 0..20 {
        let n = [3, 5][k % 2];
        let horizon = [10, 100, 1000][k % 3];
        let cfg = random_config(&mut rng, n, horizon)?;
        let out = play_game(&cfg, &mut OptimalPlayer, &mut OptimalAdversary)?;
        let e = (out.regret - cfg.value()).abs();
        worst = worst.max(e);
        t.check(e <= 1e-9, || format!("config {k}: regret {:.12} vs value {:.12}", out.regret, cfg.value()));
        let lifted = lifted_regret(&cfg, &out)?;
        t.check((lifted - out.regret).abs() <= 1e-8, || format!("config {k}: lifted regret {lifted:.12}"));
    }
    for k in 0..10 {
        let cfg = random_config(&mut rng, [3, 5][k % 2], 100)?;
        for mut p in baseline_players(cfg.n, cfg.horizon(), k as u64) {
            let out = play_game(&cfg, p.as_mut(), &mut OptimalAdversary)?;
            t.check(out.regret >= cfg.value() - 1e-9, || format!("{} player held regret to {:.9} < {:.9}", p.name(), out.regret, cfg.value()));
        }
    }
    for seed in 0..100u64 {
        let cfg = random_config(&mut rng, [3, 5][seed as usize % 2], 100)?;
        let mut adv = random_adversary(cfg.n, seed);
        let out = play_game(&cfg, &mut OptimalPlayer, adv.as_mut())?;
        t.check(out.regret <= cfg.value() + 1e-9, || format!("{} adversary forced {:.9} > {:.9}", adv.name(), out.regret, cfg.value()));
    }
    t.note(format!("worst optimal-pair deviation {worst:.1e}"));
    Ok(t)
}

const SEEDS: u64 = 5;

fn sublinearity() -> Result<Tally> {
    let mut t = Tally::default();
    let mut means = Vec::new();
    for horizon in [500, 1000, 2000] {
        let mut total = 0.0;
        for seed in 0..SEEDS {
            let s = generate(&scenario_config(ScenarioConfig::DriftingMean, AlgorithmName::Radar, horizon, seed))?;
            let c = s.constants();
            let grid = radar_grid(c.diameter, c.gradient_bound, c.zeta(), c.horizon)?;
            let mut r = Radar::new(&s.start, &grid, radar_beta(&c), Default::default(), s.set.clone(), c)?;
            let recs = simulate(&s, &mut r)?;
            let regret = recs.last().expect("nonempty").cum_regret;
            total += regret;
            let rep = r.report();
            let comp = recs.last().expect("nonempty").small_loss;
            let best = (0..rep.expert_losses.len())
                .min_by(|&a, &b| rep.expert_losses[a].total_cmp(&rep.expert_losses[b]))
                .expect("experts");
            let allowance = rep.expert_losses[best] - comp + r.meta_bound(best);
            t.check(within_bound(regret, allowance), || {
                format!("T={horizon} seed {seed}: regret {regret:.6} > best expert + meta bound {allowance:.6}")
            });
        }
        means.push(total / SEEDS as f64);
    }
    for (i, w) in means.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        t.check(ratio <= 1.5, || format!("regret ratio {ratio:.3} at doubling {}", i + 1));
    }
    t.note(format!(
        "mean regret {:.3} / {:.3} / {:.3}, ratios {:.3} / {:.3}",
        means[0],
        means[1],
        means[2],
        means[1] / means[0],
        means[2] / means[1]
    ));
    Ok(t)
}

/// Mean final regrets of the three ensembles and their confinement counts.
#[derive(Clone, Debug)]
struct OrderingRuns {
    /// `[scenario][algorithm]` with algorithms ordered v, s, b.
    regret: [[f64; 3]; 2],
    confinement: Confinement,
    improper_runs: usize,
}

fn ordering_runs() -> &'static std::result::Result<OrderingRuns, String> {
    static RUNS: OnceLock<std::result::Result<OrderingRuns, String>> = OnceLock::new();
    RUNS.get_or_init(|| compute_ordering_runs().map_err(|e| e.to_string()))
}

const ORDERING_ALGORITHMS: [AlgorithmName; 3] = [AlgorithmName::RadarV, AlgorithmName::RadarS, AlgorithmName::RadarB];

fn compute_ordering_runs() -> Result<OrderingRuns> {
    let horizon = 2000;
    let kinds = [ScenarioConfig::DriftingMean, ScenarioConfig::Alternating { anchors: 4, alpha: 0.5 }];
    let mut regret = [[0.0; 3]; 2];
    let mut confinement = Confinement::default();
    let mut improper_runs = 0;
    for (i, kind) in kinds.iter().enumerate() {
        for seed in 0..SEEDS {
            let base = scenario_config(kind.clone(), AlgorithmName::RadarV, horizon, seed);
            let s = generate(&base)?;
            for (j, alg) in ORDERING_ALGORITHMS.iter().enumerate() {
                let cfg = RunConfig { algorithm: *alg, ..base.clone() };
                let o = execute_on(&cfg, &s)?;
                regret[i][j] += o.summary.final_regret / SEEDS as f64;
                if alg.improper() {
                    confinement.merge(&o.summary.learner.confinement);
                    improper_runs += 1;
                }
            }
        }
    }
    Ok(OrderingRuns { regret, confinement, improper_runs })
}

fn ordering() -> Result<Tally> {
    let runs = ordering_runs().as_ref().map_err(|e| invalid(e.clone()))?;
    let mut t = Tally::default();
    let [drift, alt] = runs.regret;
    t.check(drift[0] < drift[1], || format!("drifting mean: RADAR_v {:.3} does not beat RADAR_s {:.3}", drift[0], drift[1]));
    t.check(alt[1] < alt[0], || format!("alternating: RADAR_s {:.3} does not beat RADAR_v {:.3}", alt[1], alt[0]));
    for (name, r) in [("drifting mean", drift), ("alternating", alt)] {
        let best = r[0].min(r[1]);
        t.check(r[2] <= 1.3 * best, || format!("{name}: RADAR_b {:.3} is {:.3}x the better of the two", r[2], r[2] / best));
    }
    t.note(format!(
        "mean regret v/s/b: drifting {:.3}/{:.3}/{:.3}, alternating {:.3}/{:.3}/{:.3}",
        drift[0], drift[1], drift[2], alt[0], alt[1], alt[2]
    ));
    Ok(t)
}

fn confinement() -> Result<Tally> {
    let runs = ordering_runs().as_ref().map_err(|e| invalid(e.clone()))?;
    let mut total = runs.confinement;
    let mut count = runs.improper_runs;
    for delta in [0.05, 0.4] {
        for kind in [ScenarioConfig::DriftingMean, ScenarioConfig::Alternating { anchors: 3, alpha: 0.7 }] {
            for alg in [AlgorithmName::RadarV, AlgorithmName::RadarB] {
                for mode in [TuningMode::Oracle, TuningMode::Adaptive] {
                    let mut cfg = scenario_config(kind.clone(), alg, 300, 11);
                    cfg.delta = delta;
                    cfg.tuning_mode = mode;
                    let s = generate(&cfg)?;
                    total.merge(&execute_on(&cfg, &s)?.summary.learner.confinement);
                    count += 1;
                }
            }
        }
    }
    let mut t = Tally::default();
    t.check(total.plays > 0 && total.plays == total.plays_inside, || {
        format!("{} of {} plays left the enlarged set", total.plays - total.plays_inside, total.plays)
    });
    t.check(total.anchors > 0 && total.anchors == total.anchors_inside, || {
        format!("{} of {} anchors left the decision set", total.anchors - total.anchors_inside, total.anchors)
    });
    t.note(format!(
        "{count} runs: {}/{} plays in the enlarged set, {}/{} anchors in the decision set",
        total.plays_inside, total.plays, total.anchors_inside, total.anchors
    ));
    Ok(t)
}
