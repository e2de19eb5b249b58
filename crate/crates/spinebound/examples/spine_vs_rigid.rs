//! Miniature spine-vs-rigid comparison: train both modes briefly at one
//! target speed and print the metric table. The real study uses the
//! `spinebound compare` subcommand with larger budgets.
//!
//!   cargo run --release --example spine_vs_rigid

use spinebound::config::RunConfig;
use spinebound::dynamics::SpineMode;
use spinebound::harness::cmd_compare;

fn main() {
    let out = std::env::temp_dir().join("spinebound_spine_vs_rigid");
    let _ = std::fs::remove_dir_all(&out);

    let cfg = RunConfig::load(
        None,
        &[
            "seed=0".to_string(),
            "ppo.n_envs=8".to_string(),
            "ppo.max_total_steps=150000".to_string(),
            "ppo.checkpoint_every=0".to_string(),
            "reward.v_des=1.0".to_string(),
        ],
    )
    .expect("config");

    let summary = cmd_compare(
        &cfg,
        &[1.0],
        &[SpineMode::Active, SpineMode::Rigid],
        &out,
        3,
        true,
    )
    .expect("compare");

    println!("\nv_des  mode    speed   CoT     stride");
    for row in &summary.rows {
        println!(
            "{:<5}  {:<6}  {:>5.2}  {:>6.3}  {:>6.3}",
            row.v_des, row.mode, row.mean_forward_speed, row.cot, row.mean_stride_length
        );
    }
    println!("\ntable -> {}", summary.table_path.display());
}
