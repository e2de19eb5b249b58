//! Sagittal-plane bounding laboratory for a spined quadruped robot.
//!
//! The crate simulates a planar quadruped with an actuated two-joint spine
//! (coupled so the rear spine angle always mirrors the front), wraps it in a
//! reinforcement-learning environment with a velocity-tracking/energy-penalty
//! reward, trains bounding gaits with a from-scratch PPO implementation, and
//! analyses the resulting gaits (cost of transport, Froude number, stride
//! length, torque/power profiles, gait diagrams).
//!
//! Modules map onto the pipeline stages:
//!
//! * [`kinematics`] — five-bar leg inverse kinematics and action clamping
//! * [`dynamics`] — planar articulated rigid-body simulation with ground contact
//! * [`env`] — the 34-D observation / 5-D action MDP wrapper
//! * [`learner`] — PPO with GAE, parallel rollouts, and checkpointing
//! * [`metrics`] — gait analysis from trajectory logs
//! * [`config`] / [`harness`] — run configuration, CLI commands, manifests
//!
//! See the `examples/` directory for one runnable example per capability and
//! the README for the CLI (`spinebound train|eval|compare|inspect-checkpoint`).

pub mod config;
pub mod dynamics;
pub mod env;
pub mod harness;
pub mod kinematics;
pub mod learner;
pub mod metrics;
pub mod toy;
