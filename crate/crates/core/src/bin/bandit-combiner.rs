use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bandit_combiner::harness::{
    calibrate_putative_bound, parse_env_spec, parse_learner_spec, run_experiment, selftest,
    write_preset, BuildContext, ExperimentConfig,
};
use bandit_combiner::Error;

#[derive(Parser)]
#[command(
    name = "bandit-combiner",
    version,
    about = "Combine stochastic bandit learners and replicate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV traces, a summary and metadata.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the replication count.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the coefficient C of a putative bound C t^alpha for one learner.
    ///
    /// Specs are inline tables, e.g. `--base ucb:noise_scale=0.1`
    /// `--env karmed:arms=10,gap=0.3`.
    Calibrate {
        #[arg(long)]
        base: String,
        #[arg(long)]
        env: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        horizon: u64,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Write the built-in experiment configs into a directory.
    Presets {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the closed-form versus brute-force checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn execute(cmd: Command) -> Result<bool, Error> {
    match cmd {
        Command::Run {
            config,
            out,
            reps,
            seed,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
            let mut cfg = ExperimentConfig::from_toml(&text)?;
            if let Some(r) = reps {
                cfg.replications = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let results = run_experiment(&cfg, &out)?;
            for s in &results.series {
                let mean = results.final_mean(&s.name).unwrap_or(f64::NAN);
                println!("{:>12}  mean regret at T = {mean:.3}", s.name);
            }
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Calibrate {
            base,
            env,
            alpha,
            horizon,
            reps,
            seed,
            delta,
        } => {
            let env = parse_env_spec(&env)?;
            let learner = parse_learner_spec(&base)?;
            let ctx = BuildContext::new(&env, horizon, delta)?;
            let fit = calibrate_putative_bound(
                "base",
                || learner.build(&ctx),
                |rng| env.build(rng),
                horizon,
                alpha,
                reps,
                seed,
            )?;
            println!(
                "C = {:.6} (alpha = {alpha}, T = {horizon}, reps = {reps})",
                fit.coefficient
            );
            for (r, c) in fit.per_rep.iter().enumerate() {
                println!("  rep {r}: {c:.6}");
            }
            Ok(true)
        }
        Command::Presets { name, out } => {
            for path in write_preset(&name, &out)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Selftest { seed } => {
            let checks = selftest(seed)?;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<12} {}", c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
