//! Energy bookkeeping of the passive dynamics: a tumbling, unactuated robot
//! far above ground conserves mechanical energy under the semi-implicit
//! integrator.
//!
//!   cargo run --release --example passive_energy

use spinebound::dynamics::{
    ContactParams, RobotDynamics, RobotModel, SpineMode, BASE_Y, HIP_F, KNEE_R, PITCH, SPINE_F,
    SPINE_R,
};

fn main() {
    let sim = RobotDynamics::new(RobotModel::default());
    let contact = ContactParams::default();
    let dt = 1.0 / 240.0;

    let mut state = sim.reset(SpineMode::Active, 1);
    state.q[BASE_Y] = 100.0;
    state.qd[PITCH] = 1.2;
    state.qd[HIP_F] = 2.0;
    state.qd[KNEE_R] = -1.5;
    state.qd[SPINE_F] = 0.7;
    state.qd[SPINE_R] = -0.7;

    let e0 = sim.mechanical_energy(&state);
    println!("E(0) = {e0:.6} J");
    for second in 1..=3 {
        for _ in 0..240 {
            state = sim.step(&state, &[0.0; 6], &contact, dt).unwrap();
        }
        let e = sim.mechanical_energy(&state);
        println!(
            "E({second} s) = {e:.6} J   drift {:+.4e} ({:+.4}% per s)",
            e - e0,
            (e - e0) / e0.abs() * 100.0 / second as f64
        );
    }
    println!(
        "\nspine coupling residual |front + rear| = {:.2e} rad",
        (state.q[SPINE_F] + state.q[SPINE_R]).abs()
    );
}
