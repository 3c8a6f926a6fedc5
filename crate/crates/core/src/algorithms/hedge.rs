//! Exponential-weights aggregation.

use crate::error::{invalid, Error, Result};
use crate::means::WeightVector;

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("learning rate must be finite and nonnegative, got {beta}")))
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: format!("{expected} entries"), got: got.to_string() })
    }
}

/// Normalized `exp(s_i)` with max subtraction; `-inf` scores get weight zero.
pub fn softmax(scores: &[f64]) -> Result<WeightVector> {
    if scores.iter().any(|s| s.is_nan() || *s == f64::INFINITY) {
        return Err(invalid("scores must not be NaN or +inf"));
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(invalid("all-zero normalizer in exponential weights"));
    }
    let e: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = e.iter().sum();
    WeightVector::normalized(e.into_iter().map(|x| x / z).collect())
}

/// `w_i ← w_i e^{−β ℓ_i} / Σ_j w_j e^{−β ℓ_j}`.
pub fn hedge_update(w: &WeightVector, losses: &[f64], beta: f64) -> Result<WeightVector> {
    check_beta(beta)?;
    check_len(w.len(), losses.len())?;
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(invalid("losses must be finite"));
    }
    if beta == 0.0 {
        return Ok(w.clone());
    }
    let scores: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(losses)
        .map(|(wi, l)| if *wi > 0.0 { wi.ln() - beta * l } else { f64::NEG_INFINITY })
        .collect();
    softmax(&scores)
}

/// `w_i ∝ exp(−β(Σ_s ℓ_{s,i} + m_i))`.
pub fn optimistic_hedge_weights(cumulative: &[f64], optimism: &[f64], beta: f64) -> Result<WeightVector> {
    check_beta(beta)?;
    check_len(cumulative.len(), optimism.len())?;
    if cumulative.is_empty() {
        return Err(invalid("no experts"));
    }
    let scores: Vec<f64> = cumulative.iter().zip(optimism).map(|(c, m)| -beta * (c + m)).collect();
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(invalid("losses and optimism must be finite"));
    }
    softmax(&scores)
}

/// Running record of an optimistic-hedge sequence and the quantities in its
/// regret inequality.
#[derive(Clone, Debug)]
pub struct OptimisticHedgeLog {
    beta: f64,
    cumulative: Vec<f64>,
    prev: Option<WeightVector>,
    linear_loss: f64,
    /// Σ_t ‖ℓ_t − m_t‖²_∞
    pub prediction_error: f64,
    /// Σ_{t≥2} ‖w_t − w_{t−1}‖²_1
    pub movement: f64,
}

impl OptimisticHedgeLog {
    pub fn new(n: usize, beta: f64) -> Result<OptimisticHedgeLog> {
        check_beta(beta)?;
        if beta == 0.0 || n == 0 {
            return Err(invalid("need a positive learning rate and at least one expert"));
        }
        Ok(OptimisticHedgeLog {
            beta,
            cumulative: vec![0.0; n],
            prev: None,
            linear_loss: 0.0,
            prediction_error: 0.0,
            movement: 0.0,
        })
    }

    /// Plays one round with optimism `m` against losses `l`; returns the weights used.
    pub fn round(&mut self, m: &[f64], l: &[f64]) -> Result<WeightVector> {
        let w = optimistic_hedge_weights(&self.cumulative, m, self.beta)?;
        check_len(w.len(), l.len())?;
        self.linear_loss += w.as_slice().iter().zip(l).map(|(a, b)| a * b).sum::<f64>();
        self.prediction_error += l.iter().zip(m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max).powi(2);
        if let Some(p) = &self.prev {
            self.movement += w.l1_distance(p).powi(2);
        }
        for (c, x) in self.cumulative.iter_mut().zip(l) {
            *c += x;
        }
        self.prev = Some(w.clone());
        Ok(w)
    }

    /// `max_i (Σ⟨w_t, ℓ_t⟩ − Σ ℓ_{t,i})`.
    pub fn regret(&self) -> f64 {
        let best = self.cumulative.iter().cloned().fold(f64::INFINITY, f64::min);
        self.linear_loss - best
    }

    /// `(2+ln N)/β + βΣ‖ℓ−m‖²_∞ − Σ‖w_t−w_{t−1}‖²_1/(4β)`.
    pub fn bound(&self) -> f64 {
        let n = self.cumulative.len() as f64;
        (2.0 + n.ln()) / self.beta + self.beta * self.prediction_error - self.movement / (4.0 * self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hedge_examples() {
        let w = WeightVector::uniform(2);
        let out = hedge_update(&w, &[0.0, 1.0], 1.0).unwrap();
        assert_abs_diff_eq!(out.as_slice()[0], 0.731059, epsilon = 1e-6);
        assert_abs_diff_eq!(out.as_slice()[1], 0.268941, epsilon = 1e-6);
        let w = WeightVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let same = hedge_update(&w, &[4.0, 4.0, 4.0], 2.0).unwrap();
        for (a, b) in same.as_slice().iter().zip(w.as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert_eq!(hedge_update(&w, &[1.0, 9.0, 3.0], 0.0).unwrap().as_slice(), w.as_slice());
    }

    #[test]
    fn hedge_preserves_loss_order() {
        let w = WeightVector::uniform(4);
        let out = hedge_update(&w, &[3.0, 1.0, 2.0, 0.5], 0.7).unwrap();
        let s = out.as_slice();
        assert!(s[3] > s[1] && s[1] > s[2] && s[2] > s[0]);
    }

    #[test]
    fn hedge_survives_huge_losses() {
        let w = WeightVector::uniform(2);
        let out = hedge_update(&w, &[1e6, 1e6 + 1.0], 1.0).unwrap();
        assert_abs_diff_eq!(out.as_slice()[0], 0.731059, epsilon = 1e-6);
        assert!(hedge_update(&w, &[f64::NAN, 0.0], 1.0).is_err());
        assert!(hedge_update(&w, &[0.0], 1.0).is_err());
        assert!(hedge_update(&w, &[0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn optimistic_examples() {
        let u = optimistic_hedge_weights(&[0.0; 3], &[0.0; 3], 1.0).unwrap();
        assert_eq!(u.as_slice(), WeightVector::uniform(3).as_slice());
        let w = optimistic_hedge_weights(&[0.0, 0.0], &[0.0, 1.0], 1.0).unwrap();
        assert_abs_diff_eq!(w.as_slice()[0], 0.731059, epsilon = 1e-6);
        let a = optimistic_hedge_weights(&[1.0, 2.0, 0.5], &[0.3, -0.1, 0.0], 0.8).unwrap();
        let b = optimistic_hedge_weights(&[11.0, 12.0, 10.5], &[0.3, -0.1, 0.0], 0.8).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn log_regret_below_bound_on_a_fixed_sequence() {
        let mut log = OptimisticHedgeLog::new(3, 0.5).unwrap();
        for t in 0..50 {
            let l = [(t as f64).sin(), (t as f64 * 0.3).cos(), 0.1];
            log.round(&[0.0; 3], &l).unwrap();
        }
        assert!(log.regret() <= log.bound());
    }
}
