use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use manifold_oco::game::{
    play_game, Adversary, FixedPlayer, FollowTheLeader, GameConfig, GradientPlayer, OptimalAdversary, OptimalPlayer,
    Player, RandomAdversary, RandomPlayer, ZeroPlayer,
};
use manifold_oco::harness::{run, run_suite, RunConfig, Suite};
use manifold_oco::manifold::sample;

#[derive(Parser)]
#[command(name = "moco", version, about = "Adaptive online optimization on Hadamard manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write CSV traces and JSON summaries.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config repetition count.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Run an acceptance suite; exits nonzero if any criterion fails.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Play the minimax game and print the outcome as JSON.
    Game {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long = "T", default_value_t = 100)]
        horizon: usize,
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
        #[arg(long, default_value_t = 2.0)]
        diameter: f64,
        #[arg(long, value_enum, default_value_t = PlayerArg::Optimal)]
        player: PlayerArg,
        #[arg(long, value_enum, default_value_t = AdversaryArg::Optimal)]
        adversary: AdversaryArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include every round in the output.
        #[arg(long)]
        rounds: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Geometry,
    Bounds,
    Game,
    Scenarios,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlayerArg {
    Optimal,
    Zero,
    Ftl,
    Fixed,
    Random,
    Gradient,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    Optimal,
    Random,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, seed, reps } => {
            let mut cfg = RunConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.repetitions = r;
            }
            let summaries = run(&cfg, &out).with_context(|| format!("running into {}", out.display()))?;
            for s in &summaries {
                println!(
                    "seed {}: regret {:.6}, bound {:.6}, bound held every round: {}",
                    s.seed, s.final_regret, s.bound_final, s.bound_ok_all_rounds
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::Geometry => Suite::Geometry,
                SuiteArg::Bounds => Suite::Bounds,
                SuiteArg::Game => Suite::Game,
                SuiteArg::Scenarios => Suite::Scenarios,
                SuiteArg::All => Suite::All,
            };
            let reports = run_suite(suite);
            for r in &reports {
                println!("{r}");
            }
            Ok(if reports.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Game { n, horizon, budget, diameter, player, adversary, seed, rounds } => {
            let cfg = GameConfig::constant(n, horizon, budget, diameter)?;
            let mut p: Box<dyn Player> = match player {
                PlayerArg::Optimal => Box::new(OptimalPlayer),
                PlayerArg::Zero => Box::new(ZeroPlayer),
                PlayerArg::Ftl => Box::new(FollowTheLeader),
                PlayerArg::Fixed => {
                    let mut e = vec![0.0; n];
                    e[0] = 1.0;
                    Box::new(FixedPlayer(e))
                }
                PlayerArg::Random => Box::new(RandomPlayer(sample::seeded(seed))),
                PlayerArg::Gradient => Box::new(GradientPlayer::new(1.0 / (horizon as f64).sqrt())),
            };
            let mut a: Box<dyn Adversary> = match adversary {
                AdversaryArg::Optimal => Box::new(OptimalAdversary),
                AdversaryArg::Random => Box::new(RandomAdversary(sample::seeded(seed.wrapping_add(1)))),
            };
            if horizon == 0 {
                bail!("T must be at least 1");
            }
            let mut out = play_game(&cfg, p.as_mut(), a.as_mut())?;
            if !rounds {
                out.rounds.clear();
            }
            let json = serde_json::json!({
                "n": n,
                "T": horizon,
                "player": p.name(),
                "adversary": a.name(),
                "regret": out.regret,
                "value": out.value,
                "rounds": out.rounds,
            });
            println!("{}", serde_json::to_string_pretty(&json)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
