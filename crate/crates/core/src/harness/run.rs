//! Running a learner on a scenario and writing its trace.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::ensemble::{beta_best, beta_small_loss, beta_variation, radar_beta};
use crate::algorithms::grid::{omd_step_cap, radar_grid, radarb_grid, radars_grid, radarv_grid};
use crate::algorithms::{
    AdaptiveTarget, Constants, Learner, LearnerReport, MetaRate, Omd, OptimismMode, OptimisticEnsemble, Radar,
    Rogd,
};
use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;
use crate::means::MeanKind;
use crate::sets::GeodesicBall;

use super::config::{AlgorithmName, RunConfig, TuningMode};
use super::scenario::{generate, AuditReport, Scenario, ScenarioKind};

pub const SCHEMA_VERSION: u32 = 1;

/// Relative slack when comparing regret with its bound.
pub const BOUND_TOL: f64 = 1e-9;

pub fn within_bound(regret: f64, bound: f64) -> bool {
    regret <= bound + BOUND_TOL * bound.abs().max(1.0)
}

/// One CSV row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub loss: f64,
    pub comp_loss: f64,
    pub cum_regret: f64,
    #[serde(rename = "P_t")]
    pub path_length: f64,
    #[serde(rename = "V_t_proxy")]
    pub variation_proxy: f64,
    #[serde(rename = "F_t")]
    pub small_loss: f64,
    pub bound_value: f64,
    pub bound_ok: bool,
}

/// Whole-run quantities fixed in advance under oracle tuning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleInputs {
    pub path_length: f64,
    pub variation: f64,
    /// `F̄_T` from a first adaptive pass, when the algorithm needs it.
    pub meta_loss: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConstants {
    pub diameter: f64,
    pub gradient_bound: f64,
    pub smoothness: Option<f64>,
    pub kappa: f64,
    pub zeta: f64,
    pub zeta_improper: f64,
    pub delta: f64,
    pub margin: f64,
}

impl EffectiveConstants {
    pub fn from_constants(c: &Constants) -> EffectiveConstants {
        EffectiveConstants {
            diameter: c.diameter,
            gradient_bound: c.gradient_bound,
            smoothness: c.smoothness,
            kappa: c.kappa,
            zeta: c.zeta(),
            zeta_improper: c.zeta_improper(),
            delta: c.delta,
            margin: c.margin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: u32,
    pub algorithm: AlgorithmName,
    pub tuning_mode: TuningMode,
    pub scenario: ScenarioKind,
    pub manifold: ManifoldSpec,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub final_regret: f64,
    #[serde(rename = "P_T")]
    pub path_length: f64,
    #[serde(rename = "V_T_proxy")]
    pub variation_proxy: f64,
    #[serde(rename = "F_T")]
    pub small_loss: f64,
    pub learner_loss: f64,
    pub bound_final: f64,
    pub bound_ok_all_rounds: bool,
    /// False when the meta learning rate changed during the run, in which
    /// case the bound column is indicative only.
    pub bound_guaranteed: bool,
    pub constants: EffectiveConstants,
    pub learner: LearnerReport,
    pub audit: AuditReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleInputs>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub records: Vec<RoundRecord>,
    pub summary: RunSummary,
}

/// Plays `learner` through every round of the scenario.
pub fn simulate(scenario: &Scenario, learner: &mut dyn Learner) -> Result<Vec<RoundRecord>> {
    let variation = scenario.variation_terms()?;
    let mut records = Vec::with_capacity(scenario.horizon);
    let (mut regret, mut path, mut v, mut f_t) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..scenario.horizon {
        let f = scenario.losses[t].as_ref();
        let u = &scenario.comparators[t];
        let loss = f.value(learner.play())?;
        let comp_loss = f.value(u)?;
        if t > 0 {
            path += scenario.comparators[t - 1].dist(u)?;
        }
        regret += loss - comp_loss;
        v += variation[t];
        f_t += comp_loss;
        learner.observe(f)?;
        let bound = learner.bound(path);
        records.push(RoundRecord {
            t: t + 1,
            loss,
            comp_loss,
            cum_regret: regret,
            path_length: path,
            variation_proxy: v,
            small_loss: f_t,
            bound_value: bound,
            bound_ok: within_bound(regret, bound),
        });
    }
    Ok(records)
}

/// Settings that pick a learner for a scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerSpec {
    pub algorithm: AlgorithmName,
    pub tuning: TuningMode,
    pub eta: Option<f64>,
    pub mean: MeanKind,
}

impl LearnerSpec {
    pub fn new(algorithm: AlgorithmName, tuning: TuningMode) -> LearnerSpec {
        LearnerSpec { algorithm, tuning, eta: None, mean: MeanKind::default() }
    }

    pub fn from_config(cfg: &RunConfig) -> LearnerSpec {
        LearnerSpec { algorithm: cfg.algorithm, tuning: cfg.tuning_mode, eta: cfg.eta, mean: cfg.mean.unwrap_or_default() }
    }
}

/// `√((D² + 2DP)/(ζG²T))`, the minimizer of the R-OGD bound.
pub fn rogd_eta(c: &Constants, path_length: f64) -> f64 {
    let d = c.diameter;
    ((d * d + 2.0 * d * path_length) / (c.zeta() * c.gradient_bound.powi(2) * c.horizon as f64)).sqrt()
}

/// `min{cap, √((D² + 2DP)/(2ζ'(V + G²)))}`.
pub fn omd_eta(c: &Constants, path_length: f64, variation: f64) -> Result<f64> {
    let l = c.require_smoothness()?;
    let z = c.zeta_improper();
    let d = c.diameter;
    let raw = ((d * d + 2.0 * d * path_length) / (2.0 * z * (variation + c.gradient_bound.powi(2)))).sqrt();
    Ok(raw.min(omd_step_cap(c.delta, l, z)))
}

fn set_of(s: &Scenario) -> GeodesicBall {
    s.set.clone()
}

fn ensemble(spec: &LearnerSpec, s: &Scenario, rate: Option<MetaRate>) -> Result<OptimisticEnsemble> {
    let c = s.constants();
    let l = c.require_smoothness()?;
    let (d, g, t) = (c.diameter, c.gradient_bound, c.horizon);
    match spec.algorithm {
        AlgorithmName::RadarV => {
            let grid = radarv_grid(d, g, l, c.zeta_improper(), c.delta, t)?;
            let rate = rate.unwrap_or(MetaRate::Adaptive(AdaptiveTarget::Variation));
            OptimisticEnsemble::new("radar_v", &s.start, Some(&grid), None, OptimismMode::Gradient, rate, spec.mean, set_of(s), c)
        }
        AlgorithmName::RadarS => {
            let grid = radars_grid(d, g, l, c.zeta(), t)?;
            let rate = rate.unwrap_or(MetaRate::Adaptive(AdaptiveTarget::SmallLoss));
            OptimisticEnsemble::new("radar_s", &s.start, None, Some(&grid), OptimismMode::Zero, rate, spec.mean, set_of(s), c)
        }
        AlgorithmName::RadarB => {
            let (hv, hs) = radarb_grid(d, g, l, c.zeta_improper(), c.delta, t)?;
            let rate = rate.unwrap_or(MetaRate::Adaptive(AdaptiveTarget::Best));
            OptimisticEnsemble::new("radar_b", &s.start, Some(&hv), Some(&hs), OptimismMode::Hedged, rate, spec.mean, set_of(s), c)
        }
        other => Err(Error::InvalidArgument(format!("{} is not an optimistic ensemble", other.as_str()))),
    }
}

/// Builds the learner; oracle tuning of the small-loss ensembles runs an
/// adaptive pass first to measure `F̄_T`.
pub fn build_learner(spec: &LearnerSpec, s: &Scenario) -> Result<(Box<dyn Learner>, Option<OracleInputs>)> {
    let c = s.constants();
    c.validate()?;
    if spec.algorithm.needs_smoothness() {
        c.require_smoothness()?;
    }
    let oracle = match spec.tuning {
        TuningMode::Oracle => Some(OracleInputs {
            path_length: s.path_length()?,
            variation: s.variation_proxy()?,
            meta_loss: None,
        }),
        TuningMode::Adaptive => None,
    };
    let p = oracle.map_or(0.0, |o| o.path_length);
    match spec.algorithm {
        AlgorithmName::Rogd => {
            let eta = spec.eta.unwrap_or_else(|| rogd_eta(&c, p));
            Ok((Box::new(Rogd::new(&s.start, eta, set_of(s), c)?), oracle))
        }
        AlgorithmName::Omd => {
            let eta = match spec.eta {
                Some(e) => e,
                None => match oracle {
                    Some(o) => omd_eta(&c, o.path_length, o.variation)?,
                    None => {
                        let l = c.require_smoothness()?;
                        let z = c.zeta_improper();
                        (c.diameter.powi(2) / (8.0 * z * c.gradient_bound.powi(2) * c.horizon as f64))
                            .sqrt()
                            .min(omd_step_cap(c.delta, l, z))
                    }
                },
            };
            Ok((Box::new(Omd::new(&s.start, eta, set_of(s), c)?), oracle))
        }
        AlgorithmName::Radar => {
            let grid = radar_grid(c.diameter, c.gradient_bound, c.zeta(), c.horizon)?;
            Ok((Box::new(Radar::new(&s.start, &grid, radar_beta(&c), spec.mean, set_of(s), c)?), oracle))
        }
        AlgorithmName::RadarV | AlgorithmName::RadarS | AlgorithmName::RadarB => {
            let Some(mut o) = oracle else {
                return Ok((Box::new(ensemble(spec, s, None)?), None));
            };
            let probe = ensemble(spec, s, None)?;
            let n = probe.experts().len();
            let z = c.zeta_improper();
            let v = o.variation + c.gradient_bound.powi(2);
            let beta = match spec.algorithm {
                AlgorithmName::RadarV => beta_variation(n, &c, z, v),
                _ => {
                    let mut first = probe;
                    simulate(s, &mut first)?;
                    let f_bar = first.report().meta_loss;
                    o.meta_loss = Some(f_bar);
                    if spec.algorithm == AlgorithmName::RadarS {
                        beta_small_loss(n, &c, f_bar)
                    } else {
                        beta_best(n, &c, z, o.variation, f_bar)
                    }
                }
            };
            Ok((Box::new(ensemble(spec, s, Some(MetaRate::Fixed(beta)))?), Some(o)))
        }
    }
}

/// Generates the scenario, runs the configured learner and collects the trace.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let s = generate(cfg)?;
    execute_on(cfg, &s)
}

pub fn execute_on(cfg: &RunConfig, s: &Scenario) -> Result<RunOutput> {
    let spec = LearnerSpec::from_config(cfg);
    let (mut learner, oracle) = build_learner(&spec, s)?;
    let records = simulate(s, learner.as_mut())?;
    let last = records.last().copied().expect("horizon is positive");
    let report = learner.report();
    let guaranteed = match spec.algorithm {
        AlgorithmName::Rogd | AlgorithmName::Omd | AlgorithmName::Radar => true,
        _ => report.beta_fixed,
    };
    let summary = RunSummary {
        schema: SCHEMA_VERSION,
        algorithm: cfg.algorithm,
        tuning_mode: cfg.tuning_mode,
        scenario: s.kind,
        manifold: s.manifold,
        horizon: s.horizon,
        seed: cfg.seed,
        final_regret: last.cum_regret,
        path_length: last.path_length,
        variation_proxy: last.variation_proxy,
        small_loss: last.small_loss,
        learner_loss: records.iter().map(|r| r.loss).sum(),
        bound_final: last.bound_value,
        bound_ok_all_rounds: records.iter().all(|r| r.bound_ok),
        bound_guaranteed: guaranteed,
        constants: EffectiveConstants::from_constants(&s.constants()),
        learner: report,
        audit: s.audit,
        oracle,
    };
    Ok(RunOutput { records, summary })
}

pub fn write_trace(path: &Path, records: &[RoundRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn trace_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("trace_seed{seed}.csv"))
}

pub fn summary_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("summary_seed{seed}.json"))
}

/// Runs `reps` repetitions with seeds `seed, seed+1, …` in parallel and
/// writes one CSV trace and one JSON summary per repetition into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<Vec<RunSummary>> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let seeds: Vec<u64> = (0..cfg.repetitions as u64).map(|k| cfg.seed.wrapping_add(k)).collect();
    let results: Vec<Result<RunSummary>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                scope.spawn(move || -> Result<RunSummary> {
                    let c = cfg.with_seed(seed);
                    let o = execute(&c)?;
                    write_trace(&trace_path(out, seed), &o.records)?;
                    write_summary(&summary_path(out, seed), &o.summary)?;
                    Ok(o.summary)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ScenarioConfig;

    fn drifting(alg: AlgorithmName, t: usize) -> RunConfig {
        let mut c = RunConfig::new(ManifoldSpec::PoincareBall { dim: 2 }, alg, ScenarioConfig::DriftingMean, t);
        c.delta = 0.1;
        c.seed = 4;
        c
    }

    #[test]
    fn rogd_bound_holds_every_round() {
        let mut c = drifting(AlgorithmName::Rogd, 200);
        c.tuning_mode = TuningMode::Oracle;
        let o = execute(&c).unwrap();
        assert!(o.records.iter().all(|r| r.bound_ok));
        assert!(o.summary.bound_guaranteed);
        assert_eq!(o.summary.schema, 1);
    }

    #[test]
    fn regret_column_is_consistent() {
        for alg in [AlgorithmName::Radar, AlgorithmName::RadarB] {
            let o = execute(&drifting(alg, 100)).unwrap();
            let mut acc = 0.0;
            for r in &o.records {
                acc += r.loss - r.comp_loss;
                assert!((acc - r.cum_regret).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn busemann_losses_reject_smooth_algorithms() {
        let mut c = RunConfig::new(
            ManifoldSpec::DiagSpd { n: 3 },
            AlgorithmName::RadarV,
            ScenarioConfig::AdversarialGame { budget: 1.0 },
            20,
        );
        c.delta = 0.1;
        assert!(matches!(execute(&c), Err(Error::Incompatible(_))));
        c.algorithm = AlgorithmName::Radar;
        assert!(execute(&c).is_ok());
    }
}
