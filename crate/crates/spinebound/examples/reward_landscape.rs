//! The per-step reward surface: a unit-peak Gaussian velocity kernel minus
//! the energy penalty.
//!
//!   cargo run --release --example reward_landscape

use spinebound::env::{energy_step, reward, RewardConfig};

fn main() {
    let cfg = RewardConfig::default();
    println!(
        "v_des = {} m/s, sigma = {} m/s, w_vel = {}, w_e = {}\n",
        cfg.v_des,
        cfg.sigma_value(),
        cfg.w_vel,
        cfg.w_e
    );

    println!("velocity sweep (delta_E = 0):");
    for i in 0..=10 {
        let v = -0.5 + 2.5 * i as f64 / 10.0;
        let r = reward(v, 0.0, &cfg);
        let bar = "#".repeat((r * 40.0).max(0.0) as usize);
        println!("  v = {v:+.2}  r = {r:.4}  {bar}");
    }

    println!("\nenergy penalty at v = v_des:");
    for delta_e in [0.0, 1.0, 2.5, 5.0, 10.0] {
        println!("  delta_E = {delta_e:>4} J  r = {:.3}", reward(cfg.v_des, delta_e, &cfg));
    }

    // One control step of all ten motors at 2 N m and 0.5 rad/s.
    let tau = [2.0; 10];
    let omega = [0.5; 10];
    let de = energy_step(&tau, &omega, 0.025);
    println!("\nexample step energy: sum |tau * omega| * dt = {de} J -> penalty {}", cfg.w_e * de);
}
