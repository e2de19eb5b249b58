//! The bounding MDP: 34-D observation, 5-D action, velocity-tracking reward
//! with an energy penalty, and episode management over the planar dynamics.
//!
//! Observation layout (fixed, 34 entries):
//!
//! | idx    | contents                                                    |
//! |--------|-------------------------------------------------------------|
//! | 0..10  | joint angles: hip/knee for FL, FR, RL, RR, then spine F, R  |
//! | 10..20 | joint velocities, same order                                |
//! | 20..30 | last applied per-motor torques, same order                  |
//! | 30..34 | base orientation quaternion (w, x, y, z), pitch axis only   |
//!
//! The planar model simulates one effective leg per pair, so each effective
//! leg's values are duplicated into its left/right slots; the layout stays
//! bit-compatible with a full 3D backend.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    ContactParams, DynState, DynamicsError, RobotDynamics, RobotModel, SpineMode, BASE_X, BASE_Y,
    HIP_F, HIP_R, KNEE_F, KNEE_R, PITCH, SPINE_F, SPINE_R,
};
use crate::kinematics::{
    clamp_action, five_bar_ik, spine_couple, ActionBox, JointCommand, KinematicsError,
};

pub const OBS_DIM: usize = 34;
pub const ACTION_DIM: usize = 5;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called after the episode finished")]
    EpisodeOver,
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("log write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// 34-entry observation vector; see the module docs for the layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn quaternion(&self) -> [f64; 4] {
        [self.0[30], self.0[31], self.0[32], self.0[33]]
    }
}

/// Reward weights and the velocity kernel width of the per-step reward
/// `r = w_vel * exp(-(v - v_des)^2 / (2 sigma^2)) - w_e * delta_E`.
///
/// The Gaussian kernel is normalized to unit peak: the density's
/// `1/(sigma sqrt(2 pi))` prefactor is cancelled exactly, so the reward at
/// `v = v_des` with zero energy is exactly `w_vel`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RewardConfig {
    pub v_des: f64,
    /// Velocity kernel width; `None` selects `max(0.1, 0.4 * v_des)`.
    pub sigma: Option<f64>,
    pub w_vel: f64,
    pub w_e: f64,
    pub gamma: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            v_des: 1.0,
            sigma: None,
            w_vel: 1.0,
            w_e: 0.02,
            gamma: 0.99,
        }
    }
}

impl RewardConfig {
    pub fn sigma_value(&self) -> f64 {
        self.sigma.unwrap_or_else(|| (0.4 * self.v_des).max(0.1))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.sigma_value() <= 0.0 {
            return Err("reward sigma must be positive".into());
        }
        if self.w_vel < 0.0 || self.w_e < 0.0 {
            return Err("reward weights must be nonnegative".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err("gamma must lie in (0, 1)".into());
        }
        Ok(())
    }
}

/// Actuator energy spent over one interval: `sum_i |tau_i * omega_i| * dt`
/// over the ten motor slots.
pub fn energy_step(torques: &[f64; 10], velocities: &[f64; 10], dt: f64) -> f64 {
    assert!(dt > 0.0, "dt must be positive");
    torques
        .iter()
        .zip(velocities)
        .map(|(t, w)| (t * w).abs())
        .sum::<f64>()
        * dt
}

/// Scalar reward for one control step.
pub fn reward(forward_velocity: f64, delta_e: f64, cfg: &RewardConfig) -> f64 {
    let sigma = cfg.sigma_value();
    let dv = forward_velocity - cfg.v_des;
    cfg.w_vel * (-dv * dv / (2.0 * sigma * sigma)).exp() - cfg.w_e * delta_e
}

/// Episode shape: control rate, horizon, and fall thresholds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct EpisodeConfig {
    pub physics_dt: f64,
    /// Physics substeps per control step (control period = dt * substeps).
    pub substeps: u32,
    pub max_seconds: f64,
    pub pitch_limit: f64,
    pub min_height: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            physics_dt: 1.0 / 240.0,
            substeps: 6,
            max_seconds: 10.0,
            pitch_limit: 0.9,
            min_height: 0.09,
        }
    }
}

impl EpisodeConfig {
    pub fn control_dt(&self) -> f64 {
        self.physics_dt * self.substeps as f64
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.physics_dt <= 0.0 || self.substeps == 0 {
            return Err("physics_dt must be positive and substeps >= 1".into());
        }
        if self.max_seconds <= 0.0 || self.pitch_limit <= 0.0 || self.min_height <= 0.0 {
            return Err("episode thresholds must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Fell,
    TimeLimit,
    Diverged,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Fell => write!(f, "fell"),
            Termination::TimeLimit => write!(f, "time-limit"),
            Termination::Diverged => write!(f, "diverged"),
        }
    }
}

/// Episode termination: fallen (pitch or height), horizon, or divergence
/// (the latter is detected inside [`BoundingEnv::step`]).
pub fn terminate(state: &DynState, t_episode: f64, cfg: &EpisodeConfig) -> Option<Termination> {
    if state.pitch().abs() > cfg.pitch_limit || state.base_height() < cfg.min_height {
        return Some(Termination::Fell);
    }
    if t_episode >= cfg.max_seconds - 1e-9 {
        return Some(Termination::TimeLimit);
    }
    None
}

/// Result of one control step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub forward_velocity: f64,
    pub delta_e: f64,
    pub termination: Option<Termination>,
}

/// The bounding environment: owns one simulation state and an optional
/// trajectory log. Single-threaded; run many instances for parallel rollouts.
pub struct BoundingEnv {
    sim: RobotDynamics,
    contact: ContactParams,
    bounds: ActionBox,
    reward_cfg: RewardConfig,
    episode: EpisodeConfig,
    mode: SpineMode,
    state: DynState,
    done: bool,
    writer: Option<TrajectoryWriter>,
}

impl BoundingEnv {
    pub fn new(
        model: RobotModel,
        contact: ContactParams,
        bounds: ActionBox,
        reward_cfg: RewardConfig,
        episode: EpisodeConfig,
        mode: SpineMode,
    ) -> Self {
        let sim = RobotDynamics::new(model);
        let state = sim.reset(mode, 0);
        Self {
            sim,
            contact,
            bounds,
            reward_cfg,
            episode,
            mode,
            state,
            done: false,
            writer: None,
        }
    }

    pub fn mode(&self) -> SpineMode {
        self.mode
    }

    pub fn state(&self) -> &DynState {
        &self.state
    }

    pub fn sim(&self) -> &RobotDynamics {
        &self.sim
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward_cfg
    }

    pub fn episode_config(&self) -> &EpisodeConfig {
        &self.episode
    }

    /// Start logging control steps to `path` (CSV with a metadata header).
    pub fn start_log(&mut self, path: &Path, config_hash: &str) -> Result<(), EnvError> {
        self.writer = Some(TrajectoryWriter::create(
            path,
            config_hash,
            &self.sim.model,
            self.episode.control_dt(),
        )?);
        Ok(())
    }

    pub fn finish_log(&mut self) -> Result<(), EnvError> {
        if let Some(w) = self.writer.take() {
            w.finish()?;
        }
        Ok(())
    }

    pub fn reset(&mut self, seed: u64) -> Observation {
        self.state = self.sim.reset(self.mode, seed);
        self.done = false;
        self.observe()
    }

    /// Assemble the 34-D observation from the current state.
    pub fn observe(&self) -> Observation {
        observe(&self.state)
    }

    /// One control step: clamp the raw action, couple the spine, run the
    /// five-bar IK per leg pair, and hold the joint targets with PD control
    /// for `substeps` physics steps.
    pub fn step(&mut self, action: &[f64; ACTION_DIM]) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let clamped = clamp_action(action, &self.bounds);
        let (spine_f, spine_r) = match self.mode {
            SpineMode::Active => spine_couple(clamped.spine_front)?,
            SpineMode::Rigid => (0.0, 0.0),
        };
        let front = five_bar_ik(clamped.front, &self.sim.model.leg, None)?;
        let rear = five_bar_ik(clamped.rear, &self.sim.model.leg, None)?;
        let cmd = JointCommand {
            hip_front: front.crank_front,
            knee_front: front.knee_front,
            hip_rear: rear.crank_front,
            knee_rear: rear.knee_front,
            spine_front: spine_f,
            spine_rear: spine_r,
        };

        let x_before = self.state.q[BASE_X];
        let work_before = self.state.abs_work;
        let mut diverged = false;
        for _ in 0..self.episode.substeps {
            let tau = self.sim.pd_torque(&cmd, &self.state);
            match self
                .sim
                .step(&self.state, &tau, &self.contact, self.episode.physics_dt)
            {
                Ok(next) => self.state = next,
                Err(DynamicsError::NumericalDivergence { .. }) => {
                    diverged = true;
                    break;
                }
            }
        }

        let control_dt = self.episode.control_dt();
        let forward_velocity = (self.state.q[BASE_X] - x_before) / control_dt;
        let delta_e = self.state.abs_work - work_before;
        let reward_value = reward(forward_velocity, delta_e, &self.reward_cfg);

        let termination = if diverged {
            Some(Termination::Diverged)
        } else {
            terminate(&self.state, self.state.t, &self.episode)
        };
        self.done = termination.is_some();

        let result = StepResult {
            observation: self.observe(),
            reward: reward_value,
            done: self.done,
            forward_velocity,
            delta_e,
            termination,
        };
        if let Some(w) = self.writer.as_mut() {
            w.write_step(&self.state, &result)?;
        }
        Ok(result)
    }

    /// Serializable episode snapshot for exact training resume.
    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::json!({ "state": self.state, "done": self.done })
    }

    pub fn restore(&mut self, snap: &serde_json::Value) -> Result<(), String> {
        let state: DynState = serde_json::from_value(snap["state"].clone())
            .map_err(|e| format!("bad env snapshot: {e}"))?;
        let done = snap["done"].as_bool().ok_or("bad env snapshot: done")?;
        self.state = state;
        self.done = done;
        Ok(())
    }
}

/// Observation assembly; effective legs are duplicated into their pair slots.
pub fn observe(state: &DynState) -> Observation {
    let mut o = [0.0; OBS_DIM];
    let angles = [
        state.q[HIP_F],
        state.q[KNEE_F],
        state.q[HIP_F],
        state.q[KNEE_F],
        state.q[HIP_R],
        state.q[KNEE_R],
        state.q[HIP_R],
        state.q[KNEE_R],
        state.q[SPINE_F],
        state.q[SPINE_R],
    ];
    let vels = [
        state.qd[HIP_F],
        state.qd[KNEE_F],
        state.qd[HIP_F],
        state.qd[KNEE_F],
        state.qd[HIP_R],
        state.qd[KNEE_R],
        state.qd[HIP_R],
        state.qd[KNEE_R],
        state.qd[SPINE_F],
        state.qd[SPINE_R],
    ];
    let t = &state.last_motor_torques;
    let torques = [t[2], t[3], t[2], t[3], t[4], t[5], t[4], t[5], t[0], t[1]];
    o[..10].copy_from_slice(&angles);
    o[10..20].copy_from_slice(&vels);
    o[20..30].copy_from_slice(&torques);
    let half = 0.5 * state.pitch();
    o[30] = half.cos();
    o[31] = 0.0;
    o[32] = half.sin();
    o[33] = 0.0;
    Observation(o)
}

/// Per-motor torque and velocity slots in observation order, for energy and
/// log accounting.
pub fn motor_slots(state: &DynState) -> ([f64; 10], [f64; 10]) {
    let obs = observe(state);
    let mut tau = [0.0; 10];
    let mut omega = [0.0; 10];
    tau.copy_from_slice(&obs.0[20..30]);
    omega.copy_from_slice(&obs.0[10..20]);
    (tau, omega)
}

pub const LOG_FORMAT_VERSION: u32 = 1;

/// Trajectory CSV writer: one row per control step, with a `#`-prefixed
/// metadata line carrying the config hash and the geometry needed to
/// reconstruct foot positions offline.
pub struct TrajectoryWriter {
    out: std::io::BufWriter<std::fs::File>,
}

impl TrajectoryWriter {
    pub fn create(
        path: &Path,
        config_hash: &str,
        model: &RobotModel,
        control_dt: f64,
    ) -> std::io::Result<Self> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(
            out,
            "# spinebound-log v{LOG_FORMAT_VERSION} config={config_hash} control_dt={control_dt} \
             mass={} gravity={} upper={} lower={} hip_sep={} front_body_len={} spine_len={} \
             rear_body_len={} front_hip_x={} front_hip_y={} rear_hip_x={} rear_hip_y={}",
            model.total_mass(),
            model.gravity,
            model.leg.upper_link,
            model.leg.lower_link,
            model.leg.hip_separation,
            model.front_body.length,
            model.spine_link.length,
            model.rear_body.length,
            model.front_hip[0],
            model.front_hip[1],
            model.rear_hip[0],
            model.rear_hip[1],
        )?;
        let mut header = String::from("t,base_x,base_z,pitch,v_x");
        for i in 0..10 {
            header.push_str(&format!(",q{i},qd{i},tau{i}"));
        }
        header.push_str(",contact_front,contact_rear,reward,delta_e,done");
        writeln!(out, "{header}")?;
        Ok(Self { out })
    }

    pub fn write_step(&mut self, state: &DynState, result: &StepResult) -> std::io::Result<()> {
        let (tau, omega) = motor_slots(state);
        let obs = observe(state);
        let mut row = format!(
            "{},{},{},{},{}",
            state.t,
            state.q[BASE_X],
            state.q[BASE_Y],
            state.q[PITCH],
            result.forward_velocity
        );
        for i in 0..10 {
            row.push_str(&format!(",{},{},{}", obs.0[i], omega[i], tau[i]));
        }
        row.push_str(&format!(
            ",{},{},{},{},{}",
            u8::from(state.feet[0].in_contact),
            u8::from(state.feet[1].in_contact),
            result.reward,
            result.delta_e,
            u8::from(result.done)
        ));
        writeln!(self.out, "{row}")
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

impl crate::learner::Environment for BoundingEnv {
    fn obs_dim(&self) -> usize {
        OBS_DIM
    }

    fn action_dim(&self) -> usize {
        ACTION_DIM
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        BoundingEnv::reset(self, seed).0.to_vec()
    }

    fn step(&mut self, action: &[f64]) -> crate::learner::EnvStep {
        let mut a = [0.0; ACTION_DIM];
        a.copy_from_slice(action);
        let result = BoundingEnv::step(self, &a).expect("stepping a finished episode");
        crate::learner::EnvStep {
            obs: result.observation.0.to_vec(),
            reward: result.reward,
            done: result.done,
            forward_velocity: result.forward_velocity,
        }
    }

    fn snapshot(&self) -> serde_json::Value {
        BoundingEnv::snapshot(self)
    }

    fn restore(&mut self, snap: &serde_json::Value) -> Result<(), String> {
        BoundingEnv::restore(self, snap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn env(mode: SpineMode) -> BoundingEnv {
        BoundingEnv::new(
            RobotModel::default(),
            ContactParams::default(),
            ActionBox::default(),
            RewardConfig::default(),
            EpisodeConfig::default(),
            mode,
        )
    }

    fn zero_state() -> DynState {
        DynState {
            q: [0.0; 9],
            qd: [0.0; 9],
            t: 0.0,
            last_motor_torques: [0.0; 6],
            feet: Default::default(),
            mode: SpineMode::Active,
            abs_work: 0.0,
        }
    }

    #[test]
    fn observation_is_34d_unit_quaternion() {
        let mut e = env(SpineMode::Active);
        let obs = e.reset(4);
        assert_eq!(obs.0.len(), 34);
        let q = obs.quaternion();
        let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-9);
        assert_eq!(q[1], 0.0);
        assert_eq!(q[3], 0.0);
    }

    #[test]
    fn observation_zero_pose_identity_quaternion() {
        let obs = observe(&zero_state());
        assert!(obs.0[..30].iter().all(|&v| v == 0.0));
        assert_eq!(obs.quaternion(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn observation_quarter_pitch_quaternion() {
        let mut state = zero_state();
        state.q[PITCH] = FRAC_PI_2;
        let q = observe(&state).quaternion();
        let half = 0.5f64.sqrt();
        assert_abs_diff_eq!(q[0], half, epsilon = 1e-12);
        assert_abs_diff_eq!(q[2], half, epsilon = 1e-12);
    }

    #[test]
    fn energy_step_examples() {
        let tau = [2.0; 10];
        let omega = [0.5; 10];
        assert_abs_diff_eq!(energy_step(&tau, &omega, 0.01), 0.1, epsilon = 1e-15);

        assert_eq!(energy_step(&[5.0; 10], &[0.0; 10], 0.1), 0.0);

        let mut tau = [0.0; 10];
        let mut omega = [0.0; 10];
        tau[0] = 1.0;
        tau[1] = -1.0;
        omega[0] = 1.0;
        omega[1] = 1.0;
        omega[2] = 5.0;
        assert_abs_diff_eq!(energy_step(&tau, &omega, 1.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn reward_examples() {
        let cfg = RewardConfig::default();
        assert_abs_diff_eq!(reward(cfg.v_des, 0.0, &cfg), 1.0, epsilon = 1e-12);

        let sigma = cfg.sigma_value();
        let r = reward(cfg.v_des + 3.0 * sigma, 0.0, &cfg);
        assert_abs_diff_eq!(r, (-4.5f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.011109, epsilon = 1e-6);

        assert_abs_diff_eq!(reward(cfg.v_des, 5.0, &cfg), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn reward_argmax_at_v_des() {
        let cfg = RewardConfig {
            v_des: 1.3,
            ..RewardConfig::default()
        };
        let mut best = f64::NEG_INFINITY;
        let mut best_v = f64::NAN;
        for i in 0..=10_000 {
            let v = -2.0 + 6.0 * i as f64 / 10_000.0;
            let r = reward(v, 0.0, &cfg);
            assert!(r > 0.0 && r <= cfg.w_vel);
            if r > best {
                best = r;
                best_v = v;
            }
        }
        assert_abs_diff_eq!(best_v, 1.3, epsilon = 1e-9);
    }

    #[test]
    fn reward_strictly_decreasing_away_from_target() {
        let cfg = RewardConfig::default();
        let mut prev = reward(cfg.v_des, 0.0, &cfg);
        for i in 1..=200 {
            let v = cfg.v_des + i as f64 * 0.05;
            let r = reward(v, 0.0, &cfg);
            assert!(r < prev && r > 0.0);
            let mirrored = reward(cfg.v_des - i as f64 * 0.05, 0.0, &cfg);
            assert_abs_diff_eq!(mirrored, r, epsilon = 1e-12);
            prev = r;
        }
    }

    proptest::proptest! {
        #[test]
        fn energy_step_properties(
            tau in proptest::array::uniform10(-5.0f64..5.0),
            omega in proptest::array::uniform10(-30.0f64..30.0),
            dt in 1e-4f64..0.1,
            flip in 0usize..10,
        ) {
            let e = energy_step(&tau, &omega, dt);
            proptest::prop_assert!(e >= 0.0);
            // Linear in dt.
            proptest::prop_assert!((energy_step(&tau, &omega, 2.0 * dt) - 2.0 * e).abs() < 1e-9);
            // Invariant to flipping the sign of any (tau, omega) pair.
            let mut t2 = tau;
            let mut w2 = omega;
            t2[flip] = -t2[flip];
            w2[flip] = -w2[flip];
            proptest::prop_assert!((energy_step(&t2, &w2, dt) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_schedule_default() {
        let lo = RewardConfig {
            v_des: 0.1,
            ..RewardConfig::default()
        };
        assert_abs_diff_eq!(lo.sigma_value(), 0.1, epsilon = 1e-15);
        let hi = RewardConfig {
            v_des: 2.0,
            ..RewardConfig::default()
        };
        assert_abs_diff_eq!(hi.sigma_value(), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn episode_determinism_and_lifecycle() {
        let action = [0.1, -0.2, 0.05, 0.3, -0.1];
        let run = || {
            let mut e = env(SpineMode::Active);
            e.reset(17);
            let mut rows = Vec::new();
            for _ in 0..40 {
                let r = e.step(&action).unwrap();
                rows.push((r.observation.0, r.reward, r.done));
                if r.done {
                    break;
                }
            }
            rows
        };
        assert_eq!(run(), run());

        // Stepping past done is a contract violation.
        let mut e = env(SpineMode::Active);
        e.reset(17);
        loop {
            match e.step(&[0.0; 5]) {
                Ok(r) if r.done => break,
                Ok(_) => continue,
                Err(err) => panic!("unexpected error before done: {err}"),
            }
        }
        assert!(matches!(e.step(&[0.0; 5]), Err(EnvError::EpisodeOver)));
    }

    #[test]
    fn zero_action_from_standing_stays_up() {
        let mut e = env(SpineMode::Active);
        e.reset(5);
        let mut last = None;
        for _ in 0..80 {
            let r = e.step(&[0.0; 5]).unwrap();
            assert!(!r.done, "fell while holding the box midpoint pose");
            last = Some(r);
        }
        let r = last.unwrap();
        assert!(r.forward_velocity.abs() < 0.2);
        let expected = reward(r.forward_velocity, r.delta_e, e.reward_config());
        assert_abs_diff_eq!(r.reward, expected, epsilon = 1e-12);
    }

    #[test]
    fn rigid_mode_spine_slots_zero() {
        let mut e = env(SpineMode::Rigid);
        e.reset(3);
        for _ in 0..30 {
            let r = e.step(&[0.2, 0.1, -0.3, 0.2, 0.9]).unwrap();
            assert_eq!(r.observation.0[8], 0.0);
            assert_eq!(r.observation.0[9], 0.0);
            assert_eq!(r.observation.0[18], 0.0);
            assert_eq!(r.observation.0[28], 0.0);
            if r.done {
                break;
            }
        }
    }

    #[test]
    fn termination_thresholds() {
        let cfg = EpisodeConfig::default();
        let mut state = zero_state();
        state.q[BASE_Y] = 0.19;
        assert_eq!(terminate(&state, 0.1, &cfg), None);
        state.q[PITCH] = 1.2;
        assert_eq!(terminate(&state, 0.1, &cfg), Some(Termination::Fell));
        state.q[PITCH] = 0.0;
        assert_eq!(terminate(&state, 10.0, &cfg), Some(Termination::TimeLimit));
        state.q[BASE_Y] = 0.05;
        assert_eq!(terminate(&state, 0.2, &cfg), Some(Termination::Fell));
    }

    #[test]
    fn trajectory_log_round_trips_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let mut e = env(SpineMode::Active);
        e.start_log(&path, "deadbeef").unwrap();
        e.reset(9);
        for _ in 0..10 {
            e.step(&[0.0; 5]).unwrap();
        }
        e.finish_log().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let meta = lines.next().unwrap();
        assert!(meta.starts_with("# spinebound-log v1 config=deadbeef"));
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 40);
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), 10);
        for row in rows {
            assert_eq!(row.split(',').count(), 40);
        }
    }
}
