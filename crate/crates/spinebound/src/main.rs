use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spinebound::config::RunConfig;
use spinebound::dynamics::SpineMode;
use spinebound::harness::{self, HarnessError};

#[derive(Parser)]
#[command(name = "spinebound", version, about = "Spined-quadruped bounding laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ConfigArgs {
    /// Run configuration file (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Dotted-path config override, e.g. --override ppo.n_envs=8 (repeatable)
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Shorthand for --override seed=N
    #[arg(long)]
    seed: Option<u64>,

    /// Shorthand for --override mode=active|rigid
    #[arg(long, value_parser = ["active", "rigid"])]
    mode: Option<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig, HarnessError> {
        let mut overrides = Vec::new();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(mode) = &self.mode {
            overrides.push(format!("mode={mode}"));
        }
        overrides.extend(self.overrides.iter().cloned());
        Ok(RunConfig::load(self.config.as_deref(), &overrides)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy; writes checkpoints, a learning curve, and a manifest
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output run directory
        #[arg(long, default_value = "runs/train")]
        out: PathBuf,
        /// Continue from this run's latest checkpoint if present
        #[arg(long)]
        resume: bool,
    },
    /// Evaluate a checkpoint over deterministic-policy trials
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        /// Checkpoint file to evaluate
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "runs/eval")]
        out: PathBuf,
        /// Number of evaluation trials to average
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
    /// Sweep target speeds across active/rigid spine modes
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated target speeds in m/s, e.g. 0.5,1.0,1.5
        #[arg(long, value_delimiter = ',', required = true)]
        speeds: Vec<f64>,
        /// Comma-separated modes (default both)
        #[arg(long, value_delimiter = ',', value_parser = ["active", "rigid"])]
        modes: Vec<String>,
        #[arg(long, default_value = "runs/compare")]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// Train any missing cell before evaluating it
        #[arg(long)]
        train_missing: bool,
    },
    /// Print the metadata and array shapes of a checkpoint file
    InspectCheckpoint {
        /// Checkpoint file
        checkpoint: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train { config, out, resume } => {
            let cfg = config.load()?;
            let summary = harness::cmd_train(&cfg, &out, resume)?;
            println!(
                "trained {} iterations / {} steps -> {}",
                summary.iterations,
                summary.total_steps,
                summary.out_dir.display()
            );
            if let Some(s) = summary.final_stats {
                println!(
                    "final: mean_episode_reward={:.4} mean_forward_speed={:.4}",
                    s.mean_episode_reward, s.mean_forward_speed
                );
            }
            Ok(())
        }
        Command::Eval {
            config,
            checkpoint,
            out,
            trials,
        } => {
            let cfg = config.load()?;
            let summary = harness::cmd_eval(&checkpoint, &cfg, &out, trials)?;
            println!("{}", summary.report.to_text());
            println!("report -> {}", summary.report_path.display());
            Ok(())
        }
        Command::Compare {
            config,
            speeds,
            modes,
            out,
            trials,
            train_missing,
        } => {
            let cfg = config.load()?;
            let modes: Vec<SpineMode> = if modes.is_empty() {
                vec![SpineMode::Active, SpineMode::Rigid]
            } else {
                modes
                    .iter()
                    .map(|m| match m.as_str() {
                        "rigid" => SpineMode::Rigid,
                        _ => SpineMode::Active,
                    })
                    .collect()
            };
            let summary =
                harness::cmd_compare(&cfg, &speeds, &modes, &out, trials, train_missing)?;
            println!(
                "{} rows ({} ok) -> {}",
                summary.rows.len(),
                summary.rows.iter().filter(|r| r.status == "ok").count(),
                summary.table_path.display()
            );
            Ok(())
        }
        Command::InspectCheckpoint { checkpoint } => {
            print!("{}", harness::cmd_inspect(&checkpoint)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
