//! Planar (sagittal-plane) dynamics of the spined quadruped.
//!
//! The robot is a tree of seven rigid bodies: front torso (carrying the
//! floating base), spine link, rear torso, and one thigh+shank pair per
//! effective leg. Left/right leg pairs move in unison during bounding, so
//! each simulated leg stands in for a pair with doubled mass, inertia,
//! actuation, and contact stiffness. The two spine joints are reduced to a
//! single degree of freedom by the hard coupling `spine_rear = -spine_front`.

pub mod contact;
pub mod planar;

use nalgebra::{DMatrix, DVector, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{five_bar_ik, JointCommand, JointLimits, LegGeometry, PolarEndpoint};
pub use contact::{foot_contact, ContactParams, ContactState};
use planar::{BodyInertia, Force, Joint, JointKind, PlanarTree};

/// Joint coordinate indices in the 9-vector layout.
pub const BASE_X: usize = 0;
pub const BASE_Y: usize = 1;
pub const PITCH: usize = 2;
pub const SPINE_F: usize = 3;
pub const SPINE_R: usize = 4;
pub const HIP_F: usize = 5;
pub const KNEE_F: usize = 6;
pub const HIP_R: usize = 7;
pub const KNEE_R: usize = 8;

/// Actuated joints in motor-torque order.
pub const ACTUATED: [usize; 6] = [SPINE_F, SPINE_R, HIP_F, KNEE_F, HIP_R, KNEE_R];

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("numerical divergence at t = {t:.4} s: {what}")]
    NumericalDivergence { t: f64, what: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpineMode {
    /// Spine joints driven by the policy through the coupling.
    Active,
    /// Both spine joints locked at zero for the whole episode.
    Rigid,
}

/// Mass/inertia/length of one rigid segment. Inertia is about the segment's
/// center of mass.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct BodySpec {
    pub mass: f64,
    pub inertia: f64,
    pub length: f64,
}

/// Immutable robot morphology, control gains, and safety bounds.
///
/// Leg segments describe one *effective* leg (a left/right pair), i.e. twice
/// the single-leg mass. Gains and the torque limit are per physical motor;
/// the simulation applies twice the motor torque at each effective leg joint
/// and reports per-motor values in observations and logs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RobotModel {
    pub gravity: f64,
    pub front_body: BodySpec,
    pub rear_body: BodySpec,
    pub spine_link: BodySpec,
    pub thigh: BodySpec,
    pub shank: BodySpec,
    pub leg: LegGeometry,
    pub limits: JointLimits,
    /// Leg-frame origin (five-bar pivot midpoint) in the front torso frame.
    pub front_hip: [f64; 2],
    /// Same, relative to the rear torso center.
    pub rear_hip: [f64; 2],
    pub kp_leg: f64,
    pub kd_leg: f64,
    pub kp_spine: f64,
    pub kd_spine: f64,
    /// Torque saturation per motor (N m).
    pub torque_limit: f64,
    /// Reflected rotor+gearbox inertia per motor (kg m^2), added on the
    /// actuated joint axes.
    pub armature: f64,
    /// Leg extension of the nominal standing pose (m).
    pub standing_r: f64,
    /// Any |velocity| beyond this aborts the episode as divergence.
    pub qdot_limit: f64,
}

impl Default for RobotModel {
    fn default() -> Self {
        let leg = LegGeometry::default();
        let rod = |mass: f64, len: f64| BodySpec {
            mass,
            inertia: mass * len * len / 12.0,
            length: len,
        };
        Self {
            gravity: 9.81,
            front_body: BodySpec {
                mass: 1.9,
                inertia: 6.7e-3,
                length: 0.18,
            },
            rear_body: BodySpec {
                mass: 1.55,
                inertia: 5.5e-3,
                length: 0.18,
            },
            spine_link: rod(0.30, 0.102),
            thigh: rod(0.35, leg.upper_link),
            shank: rod(0.275, leg.lower_link),
            leg,
            limits: JointLimits::default(),
            front_hip: [0.05, 0.0],
            rear_hip: [-0.05, 0.0],
            kp_leg: 60.0,
            kd_leg: 0.3,
            kp_spine: 80.0,
            kd_spine: 0.5,
            torque_limit: 4.0,
            armature: 0.005,
            standing_r: 0.19,
            qdot_limit: 1.0e3,
        }
    }
}

impl RobotModel {
    pub fn total_mass(&self) -> f64 {
        self.front_body.mass
            + self.rear_body.mass
            + self.spine_link.mass
            + 2.0 * (self.thigh.mass + self.shank.mass)
    }

    pub fn leg_mass_fraction(&self) -> f64 {
        2.0 * (self.thigh.mass + self.shank.mass) / self.total_mass()
    }

    pub fn validate(&self) -> Result<(), String> {
        self.leg.validate()?;
        for (name, spec) in [
            ("front_body", &self.front_body),
            ("rear_body", &self.rear_body),
            ("spine_link", &self.spine_link),
            ("thigh", &self.thigh),
            ("shank", &self.shank),
        ] {
            if spec.mass <= 0.0 || spec.inertia <= 0.0 || spec.length <= 0.0 {
                return Err(format!("{name}: mass, inertia, length must be positive"));
            }
        }
        if (self.thigh.length - self.leg.upper_link).abs() > 1e-9
            || (self.shank.length - self.leg.lower_link).abs() > 1e-9
        {
            return Err("thigh/shank lengths must match the leg geometry links".into());
        }
        if self.kp_leg < 0.0 || self.kd_leg < 0.0 || self.kp_spine < 0.0 || self.kd_spine < 0.0 {
            return Err("PD gains must be nonnegative".into());
        }
        if self.torque_limit <= 0.0 || self.gravity <= 0.0 || self.qdot_limit <= 0.0 {
            return Err("torque_limit, gravity, qdot_limit must be positive".into());
        }
        if self.armature < 0.0 {
            return Err("armature must be nonnegative".into());
        }
        if self.standing_r <= 0.0 || self.standing_r >= self.leg.reach() {
            return Err("standing_r must lie strictly inside the leg reach".into());
        }
        Ok(())
    }
}

/// Full simulation state: generalized coordinates and velocities (joint
/// layout, spine coupling maintained exactly), time, the last applied
/// per-motor torques, per-foot contact bookkeeping, and the accumulated
/// absolute actuator work.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DynState {
    pub q: [f64; 9],
    pub qd: [f64; 9],
    pub t: f64,
    pub last_motor_torques: [f64; 6],
    pub feet: [ContactState; 2],
    pub mode: SpineMode,
    /// Integral of the per-motor |torque * speed| over all ten motors (J).
    pub abs_work: f64,
}

impl DynState {
    pub fn base_height(&self) -> f64 {
        self.q[BASE_Y]
    }

    pub fn pitch(&self) -> f64 {
        self.q[PITCH]
    }

    pub fn forward_velocity(&self) -> f64 {
        self.qd[BASE_X]
    }
}

/// Simulator for one robot model: owns the kinematic tree and exposes
/// stateless step/reset operations over [`DynState`] values.
pub struct RobotDynamics {
    pub model: RobotModel,
    tree: PlanarTree,
}

impl RobotDynamics {
    pub fn new(model: RobotModel) -> Self {
        let tree = build_tree(&model);
        Self { model, tree }
    }

    pub fn tree(&self) -> &PlanarTree {
        &self.tree
    }

    /// Serial-equivalent joint command of the nominal standing pose.
    pub fn standing_command(&self) -> JointCommand {
        let sol = five_bar_ik(
            PolarEndpoint {
                r: self.model.standing_r,
                alpha: 0.0,
            },
            &self.model.leg,
            None,
        )
        .expect("standing pose must be reachable");
        JointCommand {
            hip_front: sol.crank_front,
            knee_front: sol.knee_front,
            hip_rear: sol.crank_front,
            knee_rear: sol.knee_front,
            spine_front: 0.0,
            spine_rear: 0.0,
        }
    }

    /// Standing start with small seeded perturbations. The same seed always
    /// produces a bit-identical state; rigid mode locks both spine joints.
    pub fn reset(&self, mode: SpineMode, seed: u64) -> DynState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cmd = self.standing_command();
        let mut q = [0.0; 9];
        q[BASE_Y] = self.model.standing_r;
        q[PITCH] = rng.gen_range(-0.01..=0.01);
        let beta = match mode {
            SpineMode::Active => rng.gen_range(-0.02..=0.02),
            SpineMode::Rigid => 0.0,
        };
        q[SPINE_F] = beta;
        q[SPINE_R] = -beta;
        q[HIP_F] = cmd.hip_front + rng.gen_range(-0.02..=0.02);
        q[KNEE_F] = cmd.knee_front + rng.gen_range(-0.02..=0.02);
        q[HIP_R] = cmd.hip_rear + rng.gen_range(-0.02..=0.02);
        q[KNEE_R] = cmd.knee_rear + rng.gen_range(-0.02..=0.02);
        DynState {
            q,
            qd: [0.0; 9],
            t: 0.0,
            last_motor_torques: [0.0; 6],
            feet: [ContactState::default(); 2],
            mode,
            abs_work: 0.0,
        }
    }

    /// Per-motor PD torques tracking `cmd`:
    /// `tau = clip(kp*(q_des - q) - kd*qd, +/-torque_limit)`.
    pub fn pd_torque(&self, cmd: &JointCommand, state: &DynState) -> [f64; 6] {
        let m = &self.model;
        let targets = [
            cmd.spine_front,
            cmd.spine_rear,
            cmd.hip_front,
            cmd.knee_front,
            cmd.hip_rear,
            cmd.knee_rear,
        ];
        let mut tau = [0.0; 6];
        for (slot, (&joint, &target)) in ACTUATED.iter().zip(&targets).enumerate() {
            let (kp, kd) = if joint == SPINE_F || joint == SPINE_R {
                (m.kp_spine, m.kd_spine)
            } else {
                (m.kp_leg, m.kd_leg)
            };
            let raw = kp * (target - state.q[joint]) - kd * state.qd[joint];
            tau[slot] = raw.clamp(-m.torque_limit, m.torque_limit);
        }
        tau
    }

    /// World position and velocity of (front, rear) feet.
    pub fn foot_states(&self, state: &DynState) -> [(Vector2<f64>, Vector2<f64>); 2] {
        let frames = self.tree.frames(&state.q, &state.qd);
        let tip = Vector2::new(0.0, -self.model.shank.length);
        [KNEE_F, KNEE_R].map(|shank| {
            let pos = frames[shank].point_world(tip);
            let vel = frames[shank].point_velocity(pos);
            (pos, vel)
        })
    }

    /// Kinetic plus gravitational potential energy, including the reflected
    /// motor inertia on the actuated axes.
    pub fn mechanical_energy(&self, state: &DynState) -> f64 {
        let armature_ke: f64 = ACTUATED
            .iter()
            .map(|&j| {
                let motors = if j == SPINE_F || j == SPINE_R { 1.0 } else { 2.0 };
                0.5 * motors * self.model.armature * state.qd[j] * state.qd[j]
            })
            .sum();
        self.tree.kinetic_energy(&state.q, &state.qd)
            + self.tree.potential_energy(&state.q, self.model.gravity)
            + armature_ke
    }

    /// One semi-implicit Euler step under the given per-motor torques.
    pub fn step(
        &self,
        state: &DynState,
        motor_torques: &[f64; 6],
        contact: &ContactParams,
        dt: f64,
    ) -> Result<DynState, DynamicsError> {
        assert!(dt > 0.0, "dt must be positive");
        let n_gen = gen_dof(state.mode);

        // Effective joint torques: leg pairs carry two motors each.
        let mut tau_joint = [0.0; 9];
        tau_joint[SPINE_F] = motor_torques[0];
        tau_joint[SPINE_R] = motor_torques[1];
        tau_joint[HIP_F] = 2.0 * motor_torques[2];
        tau_joint[KNEE_F] = 2.0 * motor_torques[3];
        tau_joint[HIP_R] = 2.0 * motor_torques[4];
        tau_joint[KNEE_R] = 2.0 * motor_torques[5];

        // Ground contact on both feet.
        let frames = self.tree.frames(&state.q, &state.qd);
        let tip = Vector2::new(0.0, -self.model.shank.length);
        let mut ext = vec![Force::ZERO; 9];
        let mut feet = [ContactState::default(); 2];
        for (foot_idx, shank) in [KNEE_F, KNEE_R].into_iter().enumerate() {
            let frame = &frames[shank];
            let pos = frame.point_world(tip);
            let vel = frame.point_velocity(pos);
            let (f_world, cs) = foot_contact(pos, vel, state.feet[foot_idx], contact);
            feet[foot_idx] = cs;
            if cs.in_contact {
                let r = pos - frame.pos;
                let (s, c) = (-frame.angle).sin_cos();
                let lin_body = Vector2::new(
                    c * f_world.x - s * f_world.y,
                    s * f_world.x + c * f_world.y,
                );
                ext[shank] = Force {
                    ang: r.x * f_world.y - r.y * f_world.x,
                    lin: lin_body,
                };
            }
        }

        // Reduced equations of motion: M qdd = tau - bias.
        let bias = self
            .tree
            .inverse_dynamics(&state.q, &state.qd, &[0.0; 9], self.model.gravity, Some(&ext));
        let mut mass = DMatrix::zeros(n_gen, n_gen);
        let mut unit = [0.0; 9];
        for col in 0..n_gen {
            expand_into(state.mode, col, &mut unit);
            let tau = self
                .tree
                .inverse_dynamics(&state.q, &[0.0; 9], &unit, 0.0, None);
            clear_expanded(state.mode, col, &mut unit);
            let reduced = reduce(state.mode, &tau);
            for row in 0..n_gen {
                mass[(row, col)] = reduced[row];
            }
        }
        // Reflected motor inertia: every actuated generalized axis carries
        // two motors (a leg pair, or the mirrored spine couple).
        for k in 3..n_gen {
            mass[(k, k)] += 2.0 * self.model.armature;
        }
        let rhs = DVector::from_vec(
            reduce(state.mode, &tau_joint)
                .iter()
                .zip(reduce(state.mode, &bias))
                .map(|(t, b)| t - b)
                .collect(),
        );
        let qdd_gen = mass
            .cholesky()
            .ok_or_else(|| DynamicsError::NumericalDivergence {
                t: state.t,
                what: "mass matrix not positive definite".into(),
            })?
            .solve(&rhs);

        // Semi-implicit Euler on the generalized coordinates.
        let mut qd_gen = gen_velocities(state.mode, &state.qd);
        let mut q_gen = gen_positions(state.mode, &state.q);
        for k in 0..n_gen {
            qd_gen[k] += dt * qdd_gen[k];
            q_gen[k] += dt * qd_gen[k];
        }
        let (q, qd) = joint_coords(state.mode, &q_gen, &qd_gen);

        // Absolute actuator work over the ten physical motors.
        let mut abs_power = 0.0;
        for (slot, &joint) in ACTUATED.iter().enumerate() {
            let per_motor = (motor_torques[slot] * qd[joint]).abs();
            let motors = if joint == SPINE_F || joint == SPINE_R {
                1.0
            } else {
                2.0
            };
            abs_power += motors * per_motor;
        }

        let next = DynState {
            q,
            qd,
            t: state.t + dt,
            last_motor_torques: *motor_torques,
            feet,
            mode: state.mode,
            abs_work: state.abs_work + abs_power * dt,
        };

        for v in next.q.iter().chain(next.qd.iter()) {
            if !v.is_finite() {
                return Err(DynamicsError::NumericalDivergence {
                    t: next.t,
                    what: "non-finite state entry".into(),
                });
            }
        }
        if next.qd.iter().any(|v| v.abs() > self.model.qdot_limit) {
            return Err(DynamicsError::NumericalDivergence {
                t: next.t,
                what: format!("velocity beyond {:.0}", self.model.qdot_limit),
            });
        }
        Ok(next)
    }
}

fn gen_dof(mode: SpineMode) -> usize {
    match mode {
        SpineMode::Active => 8,
        SpineMode::Rigid => 7,
    }
}

/// Generalized layout: [x, y, pitch, (beta,) hip_f, knee_f, hip_r, knee_r].
fn gen_positions(mode: SpineMode, q: &[f64; 9]) -> Vec<f64> {
    match mode {
        SpineMode::Active => vec![
            q[BASE_X], q[BASE_Y], q[PITCH], q[SPINE_F], q[HIP_F], q[KNEE_F], q[HIP_R], q[KNEE_R],
        ],
        SpineMode::Rigid => vec![
            q[BASE_X], q[BASE_Y], q[PITCH], q[HIP_F], q[KNEE_F], q[HIP_R], q[KNEE_R],
        ],
    }
}

fn gen_velocities(mode: SpineMode, qd: &[f64; 9]) -> Vec<f64> {
    gen_positions(mode, qd)
}

fn joint_coords(mode: SpineMode, q_gen: &[f64], qd_gen: &[f64]) -> ([f64; 9], [f64; 9]) {
    let place = |g: &[f64]| -> [f64; 9] {
        let mut out = [0.0; 9];
        match mode {
            SpineMode::Active => {
                out[BASE_X] = g[0];
                out[BASE_Y] = g[1];
                out[PITCH] = g[2];
                out[SPINE_F] = g[3];
                out[SPINE_R] = -g[3];
                out[HIP_F] = g[4];
                out[KNEE_F] = g[5];
                out[HIP_R] = g[6];
                out[KNEE_R] = g[7];
            }
            SpineMode::Rigid => {
                out[BASE_X] = g[0];
                out[BASE_Y] = g[1];
                out[PITCH] = g[2];
                out[HIP_F] = g[3];
                out[KNEE_F] = g[4];
                out[HIP_R] = g[5];
                out[KNEE_R] = g[6];
            }
        }
        out
    };
    (place(q_gen), place(qd_gen))
}

/// Projection dual to the coordinate map: generalized force = T^T joint force
/// (the beta column collects spine_front minus spine_rear).
fn reduce(mode: SpineMode, joint: &[f64]) -> Vec<f64> {
    match mode {
        SpineMode::Active => vec![
            joint[BASE_X],
            joint[BASE_Y],
            joint[PITCH],
            joint[SPINE_F] - joint[SPINE_R],
            joint[HIP_F],
            joint[KNEE_F],
            joint[HIP_R],
            joint[KNEE_R],
        ],
        SpineMode::Rigid => vec![
            joint[BASE_X],
            joint[BASE_Y],
            joint[PITCH],
            joint[HIP_F],
            joint[KNEE_F],
            joint[HIP_R],
            joint[KNEE_R],
        ],
    }
}

fn expand_into(mode: SpineMode, gen_index: usize, out: &mut [f64; 9]) {
    let map = gen_to_joint(mode, gen_index);
    out[map.0] = 1.0;
    if let Some(mirror) = map.1 {
        out[mirror] = -1.0;
    }
}

fn clear_expanded(mode: SpineMode, gen_index: usize, out: &mut [f64; 9]) {
    let map = gen_to_joint(mode, gen_index);
    out[map.0] = 0.0;
    if let Some(mirror) = map.1 {
        out[mirror] = 0.0;
    }
}

fn gen_to_joint(mode: SpineMode, gen_index: usize) -> (usize, Option<usize>) {
    match mode {
        SpineMode::Active => match gen_index {
            0 => (BASE_X, None),
            1 => (BASE_Y, None),
            2 => (PITCH, None),
            3 => (SPINE_F, Some(SPINE_R)),
            4 => (HIP_F, None),
            5 => (KNEE_F, None),
            6 => (HIP_R, None),
            7 => (KNEE_R, None),
            _ => unreachable!(),
        },
        SpineMode::Rigid => match gen_index {
            0 => (BASE_X, None),
            1 => (BASE_Y, None),
            2 => (PITCH, None),
            3 => (HIP_F, None),
            4 => (KNEE_F, None),
            5 => (HIP_R, None),
            6 => (KNEE_R, None),
            _ => unreachable!(),
        },
    }
}

fn build_tree(model: &RobotModel) -> PlanarTree {
    let half_sep = 0.5 * model.leg.hip_separation;
    let front_hip = Vector2::new(model.front_hip[0] + half_sep, model.front_hip[1]);
    let rear_hip = Vector2::new(
        -0.5 * model.rear_body.length + model.rear_hip[0] + half_sep,
        model.rear_hip[1],
    );
    let rod_body = |spec: &BodySpec, along_x: bool| BodyInertia {
        mass: spec.mass,
        com: if along_x {
            Vector2::new(-spec.length / 2.0, 0.0)
        } else {
            Vector2::new(0.0, -spec.length / 2.0)
        },
        inertia_com: spec.inertia,
    };
    PlanarTree {
        joints: vec![
            Joint {
                parent: None,
                kind: JointKind::PrismaticX,
                origin: Vector2::zeros(),
                body: BodyInertia::ZERO,
            },
            Joint {
                parent: Some(0),
                kind: JointKind::PrismaticY,
                origin: Vector2::zeros(),
                body: BodyInertia::ZERO,
            },
            // Front torso: frame at the torso center (the base reference).
            Joint {
                parent: Some(1),
                kind: JointKind::Revolute,
                origin: Vector2::zeros(),
                body: BodyInertia {
                    mass: model.front_body.mass,
                    com: Vector2::zeros(),
                    inertia_com: model.front_body.inertia,
                },
            },
            // Spine link hangs off the rear end of the front torso.
            Joint {
                parent: Some(2),
                kind: JointKind::Revolute,
                origin: Vector2::new(-0.5 * model.front_body.length, 0.0),
                body: rod_body(&model.spine_link, true),
            },
            // Rear torso: frame at the rear spine joint, center behind it.
            Joint {
                parent: Some(3),
                kind: JointKind::Revolute,
                origin: Vector2::new(-model.spine_link.length, 0.0),
                body: rod_body(&model.rear_body, true),
            },
            Joint {
                parent: Some(2),
                kind: JointKind::Revolute,
                origin: front_hip,
                body: rod_body(&model.thigh, false),
            },
            Joint {
                parent: Some(5),
                kind: JointKind::Revolute,
                origin: Vector2::new(0.0, -model.thigh.length),
                body: rod_body(&model.shank, false),
            },
            Joint {
                parent: Some(4),
                kind: JointKind::Revolute,
                origin: rear_hip,
                body: rod_body(&model.thigh, false),
            },
            Joint {
                parent: Some(7),
                kind: JointKind::Revolute,
                origin: Vector2::new(0.0, -model.thigh.length),
                body: rod_body(&model.shank, false),
            },
        ],
    }
}
