//! Short end-to-end run of the full pipeline: train a bounding policy for a
//! small step budget, then evaluate it deterministically and print the
//! averaged gait report. Expect modest speeds at this budget; see the README
//! for the full desk-scale recipe.
//!
//!   cargo run --release --example train_bound

use spinebound::config::RunConfig;
use spinebound::harness::{cmd_eval, cmd_train};

fn main() {
    let out = std::env::temp_dir().join("spinebound_train_bound");
    let _ = std::fs::remove_dir_all(&out);

    let cfg = RunConfig::load(
        None,
        &[
            "seed=0".to_string(),
            "ppo.n_envs=8".to_string(),
            "ppo.max_total_steps=150000".to_string(),
            "ppo.checkpoint_every=0".to_string(),
        ],
    )
    .expect("config");

    println!("training 150k steps into {} ...", out.display());
    let summary = cmd_train(&cfg, &out, false).expect("train");
    println!(
        "{} iterations, final mean speed {:.3} m/s",
        summary.iterations,
        summary.final_stats.map(|s| s.mean_forward_speed).unwrap_or(0.0)
    );

    let ckpt = out.join("checkpoints/ckpt_latest.bin");
    let eval = cmd_eval(&ckpt, &cfg, &out.join("eval"), 3).expect("eval");
    println!("\n{}", eval.report.to_text());
    println!("trial logs: {:?}", eval.trial_logs);
}
