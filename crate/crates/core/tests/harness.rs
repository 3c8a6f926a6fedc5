use std::fs;

use manifold_oco::harness::run::{execute, trace_path, summary_path};
use manifold_oco::harness::scenario::{gen_adversarial_game, gen_alternating, gen_drifting_mean};
use manifold_oco::harness::{run, AlgorithmName, RunConfig, ScenarioConfig, TuningMode};
use manifold_oco::{Error, ManifoldSpec};

const ALGORITHMS: [AlgorithmName; 6] = [
    AlgorithmName::Rogd,
    AlgorithmName::Omd,
    AlgorithmName::Radar,
    AlgorithmName::RadarV,
    AlgorithmName::RadarS,
    AlgorithmName::RadarB,
];

fn drifting(alg: AlgorithmName, t: usize, seed: u64) -> RunConfig {
    let mut c = RunConfig::new(ManifoldSpec::PoincareBall { dim: 2 }, alg, ScenarioConfig::DriftingMean, t);
    c.seed = seed;
    c
}

#[test]
fn identical_seeds_write_identical_files() {
    let mut cfg = drifting(AlgorithmName::RadarB, 60, 4);
    cfg.repetitions = 2;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&cfg, a.path()).unwrap();
    run(&cfg, b.path()).unwrap();
    for seed in [4, 5] {
        assert_eq!(fs::read(trace_path(a.path(), seed)).unwrap(), fs::read(trace_path(b.path(), seed)).unwrap());
        assert_eq!(fs::read(summary_path(a.path(), seed)).unwrap(), fs::read(summary_path(b.path(), seed)).unwrap());
    }
    let other = tempfile::tempdir().unwrap();
    run(&cfg.with_seed(40), other.path()).unwrap();
    assert_ne!(fs::read(trace_path(a.path(), 4)).unwrap(), fs::read(trace_path(other.path(), 40)).unwrap());
}

#[test]
fn trace_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    run(&drifting(AlgorithmName::Radar, 10, 0), dir.path()).unwrap();
    let text = fs::read_to_string(trace_path(dir.path(), 0)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,loss,comp_loss,cum_regret,P_t,V_t_proxy,F_t,bound_value,bound_ok");
    assert_eq!(lines.count(), 10);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(summary_path(dir.path(), 0)).unwrap()).unwrap();
    for key in ["algorithm", "T", "seed", "final_regret", "P_T", "V_T_proxy", "F_T", "bound_ok_all_rounds"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
}

#[test]
fn zero_losses_give_zero_regret() {
    let text = r#"{
        "manifold": {"kind": "poincare_ball", "dim": 3},
        "decision_set": {"center": [0, 0, 0], "radius": 1},
        "algorithm": "radar",
        "scenario": {"kind": "custom", "losses": [{"name": "zero"}]},
        "T": 25
    }"#;
    let out = execute(&RunConfig::from_json(text).unwrap()).unwrap();
    assert!(out.records.iter().all(|r| r.cum_regret == 0.0 && r.small_loss == 0.0));
    assert_eq!(out.summary.final_regret, 0.0);
    assert_eq!(out.summary.variation_proxy, 0.0);
}

#[test]
fn regret_column_accumulates_loss_differences() {
    for alg in ALGORITHMS {
        let out = execute(&drifting(alg, 80, 2)).unwrap();
        let mut acc = 0.0;
        let mut f = 0.0;
        for r in &out.records {
            acc += r.loss - r.comp_loss;
            f += r.comp_loss;
            assert!((r.cum_regret - acc).abs() < 1e-9 * (1.0 + acc.abs()));
            assert!((r.small_loss - f).abs() < 1e-9 * (1.0 + f));
        }
        assert!(out.records.windows(2).all(|w| w[1].variation_proxy >= w[0].variation_proxy));
    }
}

#[test]
fn oracle_runs_stay_within_their_bounds() {
    for alg in ALGORITHMS {
        let mut cfg = drifting(alg, 150, 1);
        cfg.tuning_mode = TuningMode::Oracle;
        let out = execute(&cfg).unwrap();
        assert!(out.summary.bound_guaranteed, "{alg:?}");
        assert!(out.summary.bound_ok_all_rounds, "{alg:?}: {} > {}", out.summary.final_regret, out.summary.bound_final);
        assert!(out.summary.learner.confinement.all_inside(), "{alg:?}");
    }
}

#[test]
fn generated_scenarios_pass_their_audits() {
    let s = gen_drifting_mean(100, 3, 0.25, 7).unwrap();
    assert!(s.audit.passed && s.audit.max_gradient_ratio <= 1.0 + 1e-9);
    let s = gen_alternating(100, 2, 4, 0.5, 0.25, 7).unwrap();
    assert!(s.audit.passed);
    assert!(s.comparators.iter().all(|u| s.set.contains(u).unwrap()));
    let s = gen_adversarial_game(3, 64, 1.0, 2.0, 7).unwrap();
    assert!(s.audit.passed);
    assert!(s.smoothness.is_none());
}

#[test]
fn alternating_losses_are_small_but_keep_varying() {
    let (a, b) = (gen_alternating(100, 2, 4, 0.5, 0.25, 3).unwrap(), gen_alternating(1600, 2, 4, 0.5, 0.25, 3).unwrap());
    let per_round = |s: &manifold_oco::harness::Scenario| {
        let t = s.horizon as f64;
        (s.small_loss().unwrap() / t, s.variation_proxy().unwrap() / t)
    };
    let ((fa, va), (fb, vb)) = (per_round(&a), per_round(&b));
    assert!(fb < fa / 4.0, "{fa} vs {fb}");
    assert!(va > 1.0 && vb > 1.0, "{va} vs {vb}");
}

#[test]
fn busemann_losses_reject_smoothness_based_learners() {
    let text = r#"{
        "manifold": {"kind": "diag_spd", "n": 3},
        "algorithm": "radar_v",
        "scenario": {"kind": "adversarial_game"},
        "T": 20
    }"#;
    let cfg = RunConfig::from_json(text).unwrap();
    assert!(matches!(execute(&cfg), Err(Error::Incompatible(_))));
    let ok = RunConfig { algorithm: AlgorithmName::Radar, ..cfg };
    assert!(execute(&ok).is_ok());
}

#[test]
fn single_round_runs_work() {
    for alg in ALGORITHMS {
        let text = format!(
            r#"{{"manifold": {{"kind": "euclidean", "dim": 2}},
                "decision_set": {{"center": [0, 0], "radius": 1}},
                "algorithm": "{}",
                "scenario": {{"kind": "custom", "losses": [{{"name": "squared_distance", "anchors": [[0.5, 0]]}}]}},
                "T": 1}}"#,
            alg.as_str()
        );
        let out = execute(&RunConfig::from_json(&text).unwrap()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.summary.learner.etas.len() <= 1 || alg == AlgorithmName::RadarB, "{alg:?}");
    }
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let err = run(&drifting(AlgorithmName::Rogd, 5, 0), &blocker.join("sub")).unwrap_err();
    assert!(matches!(err, Error::Io(_)), "{err:?}");
}

#[test]
fn wrong_manifold_for_scenario_is_rejected() {
    let cfg = RunConfig::new(ManifoldSpec::Euclidean { dim: 2 }, AlgorithmName::Radar, ScenarioConfig::DriftingMean, 10);
    assert!(execute(&cfg).is_err());
}
