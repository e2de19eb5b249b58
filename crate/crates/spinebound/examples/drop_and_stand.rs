//! Dynamics sanity demo: ballistic free fall matching the integrator's
//! closed form, then a PD-held standing pose on penalty ground contact.
//!
//!   cargo run --release --example drop_and_stand

use spinebound::dynamics::{ContactParams, RobotDynamics, RobotModel, SpineMode, BASE_Y};

fn main() {
    let sim = RobotDynamics::new(RobotModel::default());
    let contact = ContactParams::default();
    let dt = 1.0 / 240.0;

    // Phase 1: airborne, zero torque. Velocity follows v_n = -g n dt exactly.
    let mut state = sim.reset(SpineMode::Active, 0);
    state.q[BASE_Y] = 2.0;
    let steps = 120;
    for _ in 0..steps {
        state = sim.step(&state, &[0.0; 6], &contact, dt).unwrap();
    }
    let expected = -sim.model.gravity * steps as f64 * dt;
    println!(
        "ballistic: after {steps} steps v_z = {:+.6} m/s (discrete closed form {:+.6}, err {:.2e})",
        state.qd[BASE_Y],
        expected,
        (state.qd[BASE_Y] - expected).abs()
    );

    // Phase 2: standing under PD hold.
    let mut state = sim.reset(SpineMode::Active, 7);
    let cmd = sim.standing_command();
    let mut min_z = f64::INFINITY;
    let mut max_z = f64::NEG_INFINITY;
    for i in 0..(5.5 / dt) as usize {
        let tau = sim.pd_torque(&cmd, &state);
        state = sim.step(&state, &tau, &contact, dt).unwrap();
        if i as f64 * dt > 0.5 {
            min_z = min_z.min(state.base_height());
            max_z = max_z.max(state.base_height());
        }
    }
    println!(
        "standing: base height {:.4} m, variation {:+.2} mm over 5 s (feet {} / {})",
        state.base_height(),
        (max_z - min_z) * 1e3,
        if state.feet[0].in_contact { "down" } else { "up" },
        if state.feet[1].in_contact { "down" } else { "up" },
    );
    println!(
        "holding torques (per motor, N m): {:?}",
        state.last_motor_torques.map(|t| (t * 1e3).round() / 1e3)
    );
}
