//! Five-bar leg kinematics: solve the inverse kinematics over the whole
//! admissible action box and verify every solution against the independent
//! closed-chain forward kinematics.
//!
//!   cargo run --release --example leg_ik_roundtrip

use spinebound::kinematics::{
    five_bar_fk, five_bar_ik, ActionBox, JointLimits, LegGeometry, PolarEndpoint,
};

fn main() {
    let geom = LegGeometry::default();
    let limits = JointLimits::default();
    let bounds = ActionBox::default();
    println!(
        "leg: upper={} m lower={} m pivot separation={} m (reach {} m)",
        geom.upper_link,
        geom.lower_link,
        geom.hip_separation,
        geom.reach()
    );
    println!(
        "box: r in [{}, {}] m, alpha in [{}, {}] rad\n",
        bounds.r_min, bounds.r_max, bounds.alpha_min, bounds.alpha_max
    );

    let n = 60;
    let mut worst = 0.0f64;
    let mut hip_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut knee_range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=n {
        for j in 0..=n {
            let r = bounds.r_min + (bounds.r_max - bounds.r_min) * i as f64 / n as f64;
            let alpha = bounds.alpha_min + (bounds.alpha_max - bounds.alpha_min) * j as f64 / n as f64;
            let endpoint = PolarEndpoint { r, alpha };
            let sol = five_bar_ik(endpoint, &geom, Some(&limits)).unwrap();
            let foot = five_bar_fk(sol.crank_front, sol.crank_rear, &geom).unwrap();
            let err = (foot - endpoint.to_cartesian()).norm();
            worst = worst.max(err);
            hip_range.0 = hip_range.0.min(sol.crank_front);
            hip_range.1 = hip_range.1.max(sol.crank_front);
            knee_range.0 = knee_range.0.min(sol.knee_front);
            knee_range.1 = knee_range.1.max(sol.knee_front);
        }
    }
    println!("round trip over {} samples: worst |FK(IK(p)) - p| = {worst:.3e} m", (n + 1) * (n + 1));
    println!(
        "front crank range [{:.1}, {:.1}] deg (nominal {:.1}, limit +/-{:.0})",
        hip_range.0.to_degrees(),
        hip_range.1.to_degrees(),
        limits.hip_zero.to_degrees(),
        limits.hip_range.to_degrees()
    );
    println!(
        "front knee range  [{:.1}, {:.1}] deg (nominal {:.1}, limit +/-{:.0})",
        knee_range.0.to_degrees(),
        knee_range.1.to_degrees(),
        limits.knee_zero.to_degrees(),
        limits.knee_range.to_degrees()
    );

    let sol = five_bar_ik(PolarEndpoint { r: 0.22, alpha: 0.0 }, &geom, None).unwrap();
    println!(
        "\nstraight-down pose at r=0.22: cranks ({:+.4}, {:+.4}) rad, knees ({:+.4}, {:+.4}) rad",
        sol.crank_front, sol.crank_rear, sol.knee_front, sol.knee_rear
    );
}
