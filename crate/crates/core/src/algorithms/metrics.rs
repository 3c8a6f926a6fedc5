//! Regret and problem-difficulty measures: dynamic regret, path length `P_T`,
//! small-loss quantity `F_T` and a probe-based gradient-variation proxy for `V_T`.

use crate::error::{invalid, Result};
use crate::losses::Loss;
use crate::manifold::{dist, norm, sample, Point};
use crate::sets::GeodesicBall;

pub const PROBE_COUNT: usize = 64;
pub const PROBE_SEED: u64 = 0;

/// `Σ_{t≥2} d(u_t, u_{t−1})`.
pub fn path_length(comparators: &[Point]) -> Result<f64> {
    let mut p = 0.0;
    for w in comparators.windows(2) {
        p += dist(&w[1], &w[0])?;
    }
    Ok(p)
}

/// `Σ f_t(x_t) − Σ f_t(u_t)`.
pub fn dynamic_regret(losses: &[&dyn Loss], plays: &[Point], comparators: &[Point]) -> Result<f64> {
    if losses.len() != plays.len() || losses.len() != comparators.len() {
        return Err(invalid("losses, plays and comparators must have equal length"));
    }
    let mut r = 0.0;
    for ((f, x), u) in losses.iter().zip(plays).zip(comparators) {
        r += f.value(x)? - f.value(u)?;
    }
    Ok(r)
}

/// The center of `set` followed by `count − 1` seeded points inside it.
pub fn probe_grid(set: &GeodesicBall, count: usize) -> Vec<Point> {
    let mut rng = sample::seeded(PROBE_SEED);
    let mut out = vec![set.center().clone()];
    while out.len() < count {
        out.push(sample::random_point_in_ball(&mut rng, set.center(), set.radius()));
    }
    out
}

/// `max_p ‖∇f_t(p) − ∇f_{t−1}(p)‖²` over the probe points; a lower bound on
/// the per-round term of `V_T` when every probe lies in the decision set.
pub fn variation_step(prev: &dyn Loss, cur: &dyn Loss, probes: &[Point]) -> Result<f64> {
    let mut best = 0.0f64;
    for p in probes {
        let d = cur.grad(p)?.sub(&prev.grad(p)?)?;
        best = best.max(norm(&d).powi(2));
    }
    Ok(best)
}

/// Running totals for one trajectory.
#[derive(Clone, Debug, Default)]
pub struct RegretTracker {
    prev_comparator: Option<Point>,
    pub rounds: usize,
    pub path_length: f64,
    /// `F_t = Σ f_s(u_s)`.
    pub comparator_loss: f64,
    pub learner_loss: f64,
    pub regret: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundMetrics {
    pub loss: f64,
    pub comp_loss: f64,
    pub cum_regret: f64,
    pub path_length: f64,
    pub small_loss: f64,
}

impl RegretTracker {
    pub fn new() -> RegretTracker {
        RegretTracker::default()
    }

    pub fn record(&mut self, f: &dyn Loss, play: &Point, comparator: &Point) -> Result<RoundMetrics> {
        let loss = f.value(play)?;
        let comp_loss = f.value(comparator)?;
        if let Some(prev) = &self.prev_comparator {
            self.path_length += dist(comparator, prev)?;
        }
        self.prev_comparator = Some(comparator.clone());
        self.rounds += 1;
        self.learner_loss += loss;
        self.comparator_loss += comp_loss;
        self.regret += loss - comp_loss;
        Ok(RoundMetrics {
            loss,
            comp_loss,
            cum_regret: self.regret,
            path_length: self.path_length,
            small_loss: self.comparator_loss,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{squared_distance_loss, ZeroLoss};
    use crate::manifold::ManifoldSpec;

    #[test]
    fn constant_comparator_has_no_path() {
        let m = ManifoldSpec::PoincareBall { dim: 2 };
        let u = vec![m.origin(); 10];
        assert_eq!(path_length(&u).unwrap(), 0.0);
        let mut tr = RegretTracker::new();
        let f = ZeroLoss(m);
        let x = m.point_from_slice(&[0.3, 0.0]).unwrap();
        for _ in 0..5 {
            let r = tr.record(&f, &x, &m.origin()).unwrap();
            assert_eq!(r.cum_regret, 0.0);
            assert_eq!(r.small_loss, 0.0);
        }
        assert_eq!(tr.path_length, 0.0);
    }

    #[test]
    fn identical_losses_have_no_variation() {
        let m = ManifoldSpec::Euclidean { dim: 2 };
        let f = squared_distance_loss(vec![m.origin()], vec![1.0], 2.0).unwrap();
        let set = GeodesicBall::new(m.origin(), 1.0).unwrap();
        let probes = probe_grid(&set, PROBE_COUNT);
        assert_eq!(probes.len(), PROBE_COUNT);
        assert!(probes.iter().all(|p| set.contains(p).unwrap()));
        assert_eq!(variation_step(&f, &f, &probes).unwrap(), 0.0);
        let g = squared_distance_loss(vec![m.point_from_slice(&[0.5, 0.0]).unwrap()], vec![1.0], 2.0).unwrap();
        // gradients differ by the constant 2·(0.5, 0)
        assert!((variation_step(&f, &g, &probes).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regret_matches_direct_sum() {
        let m = ManifoldSpec::Euclidean { dim: 1 };
        let f = squared_distance_loss(vec![m.point_from_slice(&[1.0]).unwrap()], vec![1.0], 3.0).unwrap();
        let plays = vec![m.origin(), m.point_from_slice(&[0.5]).unwrap()];
        let comps = vec![m.point_from_slice(&[1.0]).unwrap(); 2];
        let r = dynamic_regret(&[&f, &f], &plays, &comps).unwrap();
        assert!((r - 1.25).abs() < 1e-15);
    }
}
