use approx::assert_abs_diff_eq;

use manifold_oco::game::{
    adversary_move, baseline_players, dynamic_comparator_reduction, lifted_regret, play_game, play_segments,
    player_move, random_adversary, GameConfig, OptimalAdversary, OptimalPlayer,
};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn adversary_first_move_and_gram_schmidt_example() {
    let x = adversary_move(&[0.0; 3], &[0.0; 3], 2.0).unwrap();
    assert_eq!(x, vec![2.0, 0.0, 0.0]);
    let x = adversary_move(&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], 1.5).unwrap();
    assert_abs_diff_eq!(x[0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(x[2].abs(), 1.5, epsilon = 1e-15);
    assert!(adversary_move(&[0.0; 2], &[0.0; 2], 1.0).is_err());
}

#[test]
fn player_move_examples() {
    let budgets = vec![1.0; 9];
    assert_eq!(player_move(&[0.0; 3], 0, &budgets), vec![0.0; 3]);
    let y = player_move(&[1.0, 0.0, 0.0], 1, &budgets);
    assert_abs_diff_eq!(y[0], 1.0 / 9f64.sqrt(), epsilon = 1e-15);
    assert_eq!(&y[1..], &[0.0, 0.0]);
}

#[test]
fn optimal_play_attains_the_value_exactly() {
    for (n, t, g, d) in [(3, 1, 1.0, 2.0), (3, 50, 0.7, 1.0), (5, 200, 2.0, 3.0), (8, 17, 1.0, 0.5)] {
        let cfg = GameConfig::constant(n, t, g, d).unwrap();
        let out = play_game(&cfg, &mut OptimalPlayer, &mut OptimalAdversary).unwrap();
        assert_abs_diff_eq!(out.regret, 0.5 * d * g * (t as f64).sqrt(), epsilon = 1e-9 * out.value);
        assert_abs_diff_eq!(out.regret, out.value, epsilon = 1e-9 * out.value);

        // running sum grows by Pythagoras and the player stays strictly inside
        let mut acc = 0.0;
        let mut s = vec![0.0; n];
        for r in &out.rounds {
            acc += g * g;
            s.iter_mut().zip(&r.x).for_each(|(a, b)| *a += b);
            assert_abs_diff_eq!(norm(&s), acc.sqrt(), epsilon = 1e-9);
            assert!(norm(&r.y) < 1.0);
        }
    }
}

#[test]
fn varying_budgets_give_root_sum_of_squares() {
    let budgets: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64).collect();
    let want = 0.5 * 2.0 * budgets.iter().map(|g| g * g).sum::<f64>().sqrt();
    let cfg = GameConfig::new(4, budgets, 2.0).unwrap();
    let out = play_game(&cfg, &mut OptimalPlayer, &mut OptimalAdversary).unwrap();
    assert_abs_diff_eq!(out.regret, want, epsilon = 1e-9 * want);
}

#[test]
fn lifting_to_diagonal_matrices_preserves_regret() {
    let cfg = GameConfig::constant(3, 40, 1.0, 2.0).unwrap();
    let out = play_game(&cfg, &mut OptimalPlayer, &mut OptimalAdversary).unwrap();
    assert_abs_diff_eq!(lifted_regret(&cfg, &out).unwrap(), out.regret, epsilon = 1e-8);
    let mut adv = random_adversary(3, 2);
    let out = play_game(&cfg, &mut OptimalPlayer, adv.as_mut()).unwrap();
    assert_abs_diff_eq!(lifted_regret(&cfg, &out).unwrap(), out.regret, epsilon = 1e-8);
}

#[test]
fn neither_side_can_improve_on_the_value() {
    let cfg = GameConfig::constant(4, 120, 1.0, 2.0).unwrap();
    let value = cfg.value();
    for mut p in baseline_players(4, 120, 3) {
        let out = play_game(&cfg, p.as_mut(), &mut OptimalAdversary).unwrap();
        assert!(out.regret >= value - 1e-9, "{}: {}", p.name(), out.regret);
    }
    for seed in 0..8 {
        let mut a = random_adversary(4, seed);
        let out = play_game(&cfg, &mut OptimalPlayer, a.as_mut()).unwrap();
        assert!(out.regret <= value + 1e-9, "{}: {}", a.name(), out.regret);
    }
}

#[test]
fn small_dimensions_are_rejected() {
    assert!(GameConfig::constant(2, 10, 1.0, 1.0).is_err());
    assert!(GameConfig::constant(3, 0, 1.0, 1.0).is_err());
    assert!(GameConfig::new(3, vec![1.0, -1.0], 1.0).is_err());
}

#[test]
fn segment_reduction() {
    let plan = dynamic_comparator_reduction(0.0, 100, 2.0, 1.0).unwrap();
    assert_eq!((plan.segments, plan.length, plan.padded_horizon), (1, 100, 100));
    assert_abs_diff_eq!(plan.value, 10.0, epsilon = 1e-12);

    let plan = dynamic_comparator_reduction(7.0, 100, 2.0, 1.0).unwrap();
    assert_eq!((plan.segments, plan.length, plan.padded_horizon), (4, 25, 100));
    assert!(plan.max_path_length <= 7.0);
    assert_abs_diff_eq!(play_segments(&plan, 3, 1.0, 2.0).unwrap(), plan.value, epsilon = 1e-9);
    assert_abs_diff_eq!(plan.value, 0.5 * 2.0 * (100.0f64 * 4.0).sqrt(), epsilon = 1e-12);

    let plan = dynamic_comparator_reduction(9.0, 10, 1.0, 1.0).unwrap();
    assert_eq!((plan.segments, plan.length), (9, 2));
    assert_eq!(plan.padded_horizon, 18);
    assert!(dynamic_comparator_reduction(30.0, 10, 1.0, 1.0).is_err());
}
