//! A 1-D velocity-tracking point mass with the same unit-peak Gaussian
//! reward shape as the robot environment. Its optimal return has a closed
//! form, which makes it the learning-sanity oracle for the PPO trainer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::learner::{EnvStep, Environment};

/// Dynamics: `v' = v + a * dv_max` with `a` clamped to [-1, 1]; reward
/// `exp(-(v' - v_des)^2 / (2 sigma^2))` per step; fixed-length episodes.
#[derive(Debug, Clone)]
pub struct ToyVelocityEnv {
    pub v_des: f64,
    pub sigma: f64,
    pub dv_max: f64,
    pub horizon: u64,
    pub v0_spread: f64,
    v: f64,
    t: u64,
}

impl Default for ToyVelocityEnv {
    fn default() -> Self {
        Self {
            v_des: 1.0,
            sigma: 0.25,
            dv_max: 0.25,
            horizon: 100,
            v0_spread: 0.1,
            v: 0.0,
            t: 0,
        }
    }
}

impl ToyVelocityEnv {
    /// Tracking task at `v_des` with kernel width `sigma`; other knobs keep
    /// their defaults.
    pub fn new(v_des: f64, sigma: f64) -> Self {
        Self {
            v_des,
            sigma,
            ..Self::default()
        }
    }

    pub fn velocity(&self) -> f64 {
        self.v
    }

    fn step_reward(&self, v: f64) -> f64 {
        let dv = v - self.v_des;
        (-dv * dv / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// Exact optimal episode return from `v0`: each step's reward depends
    /// only on that step's velocity and reachable sets are nested intervals,
    /// so steering toward `v_des` at the rate limit and holding is optimal.
    pub fn analytic_optimal_return(&self, v0: f64) -> f64 {
        let mut total = 0.0;
        let gap0 = (self.v_des - v0).abs();
        for t in 1..=self.horizon {
            let gap = (gap0 - t as f64 * self.dv_max).max(0.0);
            total += (-gap * gap / (2.0 * self.sigma * self.sigma)).exp();
        }
        total
    }
}

impl Environment for ToyVelocityEnv {
    fn obs_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.v = rng.gen_range(-self.v0_spread..=self.v0_spread);
        self.t = 0;
        vec![self.v]
    }

    fn step(&mut self, action: &[f64]) -> EnvStep {
        let a = action[0].clamp(-1.0, 1.0);
        self.v += a * self.dv_max;
        self.t += 1;
        EnvStep {
            obs: vec![self.v],
            reward: self.step_reward(self.v),
            done: self.t >= self.horizon,
            forward_velocity: self.v,
        }
    }

    fn snapshot(&self) -> serde_json::Value {
        serde_json::json!({ "v": self.v, "t": self.t })
    }

    fn restore(&mut self, snap: &serde_json::Value) -> Result<(), String> {
        self.v = snap["v"].as_f64().ok_or("toy snapshot: v")?;
        self.t = snap["t"].as_u64().ok_or("toy snapshot: t")?;
        Ok(())
    }
}
