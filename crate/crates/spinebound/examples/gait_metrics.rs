//! Analyze a trajectory log: cost of transport, Froude numbers, stride
//! lengths, stance intervals, torque peaks.
//!
//!   cargo run --release --example gait_metrics -- <trajectory.csv>

use spinebound::metrics::{gait_diagram, gait_report, torque_power_profile, TrajectoryLog};

fn main() {
    let path = match std::env::args().nth(1) {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            eprintln!("usage: gait_metrics <trajectory.csv>");
            std::process::exit(2);
        }
    };
    let log = TrajectoryLog::read_csv(&path).unwrap_or_else(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        std::process::exit(2);
    });
    println!(
        "{} rows at {} Hz, config {}",
        log.len(),
        (1.0 / log.dt()).round(),
        log.meta.config_hash
    );

    let report = gait_report(&log).expect("gait report");
    println!("\n{}", report.to_text());

    let [front, rear] = gait_diagram(&log);
    println!("stance intervals: front {} rear {}", front.len(), rear.len());
    for (name, intervals) in [("front", &front), ("rear", &rear)] {
        for (s, e) in intervals.iter().take(6) {
            println!("  {name}: {s:.3} .. {e:.3} s ({:.0} ms)", (e - s) * 1e3);
        }
    }

    let profile = torque_power_profile(&log);
    println!("\n{} complete gait cycles", profile.cycles.len());
    if let Some(peaks) = profile.cycle_peak_torque.first() {
        println!("first-cycle peak |torque| per joint: {peaks:.2?}");
    }
}
