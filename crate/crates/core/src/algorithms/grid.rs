//! Doubling step-size grids for the expert layer.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Ascending positive step sizes `η_i = 2^{i−1} η_1`, possibly clamped from above.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizeGrid {
    etas: Vec<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn count_from_log2(arg: f64, t: usize) -> usize {
    // ⌈½ log₂ arg⌉ + 1, never below one; a one-round horizon gets one expert
    if t <= 1 {
        return 1;
    }
    let raw = (0.5 * arg.log2()).ceil() + 1.0;
    if raw.is_finite() && raw >= 1.0 {
        raw as usize
    } else {
        1
    }
}

impl StepSizeGrid {
    pub fn doubling(base: f64, count: usize) -> Result<StepSizeGrid> {
        positive("grid base", base)?;
        if count == 0 {
            return Err(invalid("grid needs at least one step size"));
        }
        let etas = (0..count).map(|i| base * 2f64.powi(i as i32)).collect();
        Ok(StepSizeGrid { etas })
    }

    /// A single step size.
    pub fn single(eta: f64) -> Result<StepSizeGrid> {
        StepSizeGrid::doubling(eta, 1)
    }

    /// Caps every entry at `cap` and drops the duplicates this creates.
    pub fn clamped(mut self, cap: f64) -> Result<StepSizeGrid> {
        positive("step-size cap", cap)?;
        for e in &mut self.etas {
            *e = e.min(cap);
        }
        self.etas.dedup();
        Ok(self)
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }

    pub fn base(&self) -> f64 {
        self.etas[0]
    }

    pub fn top(&self) -> f64 {
        *self.etas.last().expect("grid is nonempty")
    }
}

/// Grid for R-OGD experts under a Hedge meta-learner:
/// base `√(D²/(G²ζT))`, count `⌈½log₂(1+2T)⌉+1`.
pub fn radar_grid(d: f64, g: f64, zeta: f64, t: usize) -> Result<StepSizeGrid> {
    positive("D", d)?;
    positive("G", g)?;
    positive("zeta", zeta)?;
    let tf = horizon(t)?;
    let base = (d * d / (g * g * zeta * tf)).sqrt();
    StepSizeGrid::doubling(base, count_from_log2(1.0 + 2.0 * tf, t))
}

/// Largest admissible optimistic step with optimism bound `M = G`:
/// `δ/(1 + √(1 + 2ζδ²L²))`.
pub fn omd_step_cap(delta: f64, l: f64, zeta: f64) -> f64 {
    delta / (1.0 + (1.0 + 2.0 * zeta * delta * delta * l * l).sqrt())
}

/// Grid for optimistic experts: base `√(D²/(8ζG²T))`, count
/// `⌈½log₂(8ζδ²G²T/(1+√(1+2ζδ²L²))²)⌉+1`, each entry capped at [`omd_step_cap`].
pub fn radarv_grid(d: f64, g: f64, l: f64, zeta: f64, delta: f64, t: usize) -> Result<StepSizeGrid> {
    positive("D", d)?;
    positive("G", g)?;
    positive("L", l)?;
    positive("zeta", zeta)?;
    positive("delta", delta)?;
    let tf = horizon(t)?;
    let base = (d * d / (8.0 * zeta * g * g * tf)).sqrt();
    let denom = 1.0 + (1.0 + 2.0 * zeta * delta * delta * l * l).sqrt();
    let count = count_from_log2(8.0 * zeta * delta * delta * g * g * tf / (denom * denom), t);
    StepSizeGrid::doubling(base, count)?.clamped(omd_step_cap(delta, l, zeta))
}

/// Grid for small-loss R-OGD experts: base `√(D/(2ζLGT))`, count
/// `⌈½log₂(GT/(2LDζ))⌉+1`, each entry capped at `1/(2ζL)`.
pub fn radars_grid(d: f64, g: f64, l: f64, zeta: f64, t: usize) -> Result<StepSizeGrid> {
    positive("D", d)?;
    positive("G", g)?;
    positive("L", l)?;
    positive("zeta", zeta)?;
    let tf = horizon(t)?;
    let base = (d / (2.0 * zeta * l * g * tf)).sqrt();
    let count = count_from_log2(g * tf / (2.0 * l * d * zeta), t);
    StepSizeGrid::doubling(base, count)?.clamped(1.0 / (2.0 * zeta * l))
}

/// The union grid: optimistic step sizes first, then small-loss ones.
pub fn radarb_grid(
    d: f64,
    g: f64,
    l: f64,
    zeta: f64,
    delta: f64,
    t: usize,
) -> Result<(StepSizeGrid, StepSizeGrid)> {
    Ok((radarv_grid(d, g, l, zeta, delta, t)?, radars_grid(d, g, l, zeta, t)?))
}

fn horizon(t: usize) -> Result<f64> {
    if t == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    Ok(t as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn radar_grid_small_horizon() {
        let g = radar_grid(1.0, 1.0, 1.0, 4).unwrap();
        assert_eq!(g.etas(), &[0.5, 1.0, 2.0]);
        assert_eq!(radar_grid(1.0, 1.0, 1.0, 1).unwrap().len(), 1);
        assert_eq!(radar_grid(1.0, 1.0, 1.0, 2).unwrap().len(), 3);
    }

    #[test]
    fn radar_grid_count_grows_slowly() {
        let mut prev = radar_grid(1.0, 1.0, 1.0, 1).unwrap().len();
        for t in 2..5000 {
            let n = radar_grid(1.0, 1.0, 1.0, t).unwrap().len();
            let n2 = radar_grid(1.0, 1.0, 1.0, 2 * t).unwrap().len();
            assert!(n2 <= n + 1);
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn small_loss_grid_tops_out_near_inverse_smoothness() {
        for (d, g, l, zeta, t) in [(2.0, 3.0, 1.0, 1.3, 1000), (1.0, 10.0, 0.5, 1.0, 20000)] {
            let grid = radars_grid(d, g, l, zeta, t).unwrap();
            let cap = 1.0 / (2.0 * zeta * l);
            assert!(grid.top() <= cap);
            assert!(grid.top() >= cap / 2.0);
        }
    }

    #[test]
    fn optimistic_grid_respects_cap() {
        let grid = radarv_grid(2.2, 5.0, 4.0, 2.0, 0.1, 2000).unwrap();
        let cap = omd_step_cap(0.1, 4.0, 2.0);
        assert!(grid.etas().iter().all(|e| *e <= cap));
        assert!(grid.etas().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tiny_arguments_still_give_one_expert() {
        let g = radars_grid(100.0, 0.01, 10.0, 1.0, 1).unwrap();
        assert_eq!(g.len(), 1);
        assert!(radar_grid(0.0, 1.0, 1.0, 4).is_err());
        assert!(radar_grid(1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn doubling_is_exact() {
        let g = StepSizeGrid::doubling(0.3, 5).unwrap();
        for w in g.etas().windows(2) {
            assert_eq!(w[1], 2.0 * w[0]);
        }
        assert_abs_diff_eq!(g.top(), 4.8);
    }
}
