//! Open-loop bounding attempt: drive both leg pairs with antiphase
//! sinusoidal endpoint cycles plus a coupled spine oscillation, log the
//! trajectory, and run the gait metrics over the result. No learning here;
//! this exercises the env -> log -> metrics pipeline end to end.
//!
//!   cargo run --release --example bound_rollout [out.csv]

use spinebound::dynamics::{ContactParams, RobotModel, SpineMode};
use spinebound::env::{BoundingEnv, EpisodeConfig, RewardConfig};
use spinebound::kinematics::ActionBox;
use spinebound::metrics::{gait_report, Foot, TrajectoryLog};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "/tmp/bound_rollout.csv".to_string());
    let path = std::path::PathBuf::from(path);

    let mut env = BoundingEnv::new(
        RobotModel::default(),
        ContactParams::default(),
        ActionBox::default(),
        RewardConfig::default(),
        EpisodeConfig::default(),
        SpineMode::Active,
    );
    env.start_log(&path, "scripted").unwrap();
    env.reset(3);

    let hz = 1.6; // bounding frequency
    let dt = env.episode_config().control_dt();
    let mut steps = 0;
    loop {
        let phase = std::f64::consts::TAU * hz * steps as f64 * dt;
        // Rear pair leads the front by half a cycle; radial retraction is
        // synchronized with the forward swing.
        let action = [
            0.5 * phase.cos(),         // front r
            0.55 * phase.sin(),        // front alpha
            0.5 * (phase + std::f64::consts::PI).cos(),
            0.55 * (phase + std::f64::consts::PI).sin(),
            0.7 * (phase + 0.5).sin(), // spine
        ];
        let r = env.step(&action).unwrap();
        steps += 1;
        if r.done {
            println!("episode ended after {steps} steps: {:?}", r.termination);
            break;
        }
        if steps >= 400 {
            break;
        }
    }
    env.finish_log().unwrap();

    let log = TrajectoryLog::read_csv(&path).unwrap();
    let report = gait_report(&log).unwrap();
    println!("\n{}", report.to_text());
    for foot in [Foot::Front, Foot::Rear] {
        match spinebound::metrics::stride_length(&log, foot) {
            Ok(s) => println!("{foot:?} strides: {:?}", s.strides.iter().map(|x| (x * 1e3).round() / 1e3).collect::<Vec<_>>()),
            Err(e) => println!("{foot:?} strides: {e}"),
        }
    }
    println!("\ntrajectory log -> {}", path.display());
}
