//! JSON run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::losses::LossSpec;
use crate::manifold::ManifoldSpec;
use crate::means::MeanKind;
use crate::sets::BallConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    #[serde(alias = "r-ogd", alias = "r_ogd")]
    Rogd,
    Omd,
    Radar,
    #[serde(alias = "radarv")]
    RadarV,
    #[serde(alias = "radars")]
    RadarS,
    #[serde(alias = "radarb")]
    RadarB,
}

impl AlgorithmName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmName::Rogd => "rogd",
            AlgorithmName::Omd => "omd",
            AlgorithmName::Radar => "radar",
            AlgorithmName::RadarV => "radar_v",
            AlgorithmName::RadarS => "radar_s",
            AlgorithmName::RadarB => "radar_b",
        }
    }

    /// Whether the algorithm needs a declared smoothness constant.
    pub fn needs_smoothness(&self) -> bool {
        matches!(self, AlgorithmName::Omd | AlgorithmName::RadarV | AlgorithmName::RadarS | AlgorithmName::RadarB)
    }

    /// Whether the algorithm plays in the enlarged set.
    pub fn improper(&self) -> bool {
        matches!(self, AlgorithmName::Omd | AlgorithmName::RadarV | AlgorithmName::RadarB)
    }
}

/// `oracle` fixes every learning rate from quantities of the whole run
/// (`P_T`, `V_T`, `F̄_T`); `adaptive` uses only what has been observed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningMode {
    Oracle,
    #[default]
    Adaptive,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ComparatorRule {
    /// The minimizer of each round's loss over the decision set.
    OfflineMinimizerPerRound,
    /// One point for the whole run; the set center when absent.
    #[default]
    FixedPoint,
    /// The minimizer of the summed loss on each of `segments` equal blocks.
    PiecewiseConstant { segments: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioConfig {
    DriftingMean,
    Alternating {
        #[serde(default = "default_anchor_count")]
        anchors: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    AdversarialGame {
        #[serde(default = "default_budget")]
        budget: f64,
    },
    Custom {
        /// Used cyclically, round `t` gets `losses[(t−1) mod len]`.
        losses: Vec<LossSpec>,
        #[serde(default)]
        comparator: ComparatorRule,
        #[serde(default)]
        start: Option<Vec<f64>>,
    },
}

fn default_anchor_count() -> usize {
    4
}

fn default_alpha() -> f64 {
    0.5
}

fn default_budget() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    0.25
}

fn default_reps() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub manifold: ManifoldSpec,
    /// Overrides the scenario's own decision set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision_set: Option<BallConfig>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub algorithm: AlgorithmName,
    #[serde(default)]
    pub tuning_mode: TuningMode,
    pub scenario: ScenarioConfig,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    /// Step size for the single-learner algorithms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<MeanKind>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
}

impl RunConfig {
    pub fn new(manifold: ManifoldSpec, algorithm: AlgorithmName, scenario: ScenarioConfig, horizon: usize) -> RunConfig {
        RunConfig {
            manifold,
            decision_set: None,
            delta: default_delta(),
            algorithm,
            tuning_mode: TuningMode::default(),
            scenario,
            horizon,
            seed: 0,
            eta: None,
            mean: None,
            repetitions: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(invalid("T must be at least 1"));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(invalid(format!("delta must be finite and nonnegative, got {}", self.delta)));
        }
        if self.algorithm.improper() && self.delta == 0.0 {
            return Err(invalid(format!("{} needs delta > 0", self.algorithm.as_str())));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions must be at least 1"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(invalid(format!("eta must be positive, got {eta}")));
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> RunConfig {
        RunConfig { seed, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_config() {
        let text = r#"{
            "manifold": {"kind": "poincare_ball", "dim": 2},
            "algorithm": "radar",
            "scenario": {"kind": "drifting_mean"},
            "T": 100,
            "seed": 3
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.algorithm, AlgorithmName::Radar);
        assert_eq!(cfg.tuning_mode, TuningMode::Adaptive);
        assert_eq!(cfg.horizon, 100);
        assert_eq!(cfg.delta, 0.25);
        let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parses_custom_losses() {
        let text = r#"{
            "manifold": {"kind": "euclidean", "dim": 2},
            "decision_set": {"center": [0, 0], "radius": 1},
            "delta": 0.1,
            "algorithm": "radar_b",
            "tuning_mode": "oracle",
            "scenario": {"kind": "custom",
                         "losses": [{"name": "zero"}],
                         "comparator": {"rule": "piecewise_constant", "segments": 3}},
            "T": 10
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert!(matches!(
            cfg.scenario,
            ScenarioConfig::Custom { comparator: ComparatorRule::PiecewiseConstant { segments: 3 }, .. }
        ));
    }

    #[test]
    fn rejects_bad_values() {
        let base = r#"{"manifold": {"kind": "euclidean", "dim": 2}, "algorithm": "radar_v",
                       "scenario": {"kind": "drifting_mean"}, "T": 10, "delta": 0}"#;
        assert!(RunConfig::from_json(base).is_err());
        let zero_t = base.replace("\"T\": 10", "\"T\": 0").replace("\"delta\": 0", "\"delta\": 0.1");
        assert!(RunConfig::from_json(&zero_t).is_err());
        assert!(RunConfig::from_json("{}").is_err());
    }
}
