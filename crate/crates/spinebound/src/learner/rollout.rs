//! Parallel experience collection from a pool of environments.
//!
//! Each worker owns one environment and one ChaCha stream; parameters are an
//! immutable snapshot for the whole collection phase. Segments are merged in
//! environment-index order, so the assembled batch is identical no matter
//! how many OS threads actually ran (`SPINEBOUND_WORKERS` caps them).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gae::TrajectoryBatch;
use super::normalizer::RunningNorm;
use super::policy::{sample_action, PolicyParams};

/// Environment interface the trainer needs. Implementations auto-reset via
/// `reset(seed)` driven by the worker's deterministic seed sequence.
pub trait Environment: Send {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> EnvStep;
    /// Serializable mid-episode state, for exact training resume.
    fn snapshot(&self) -> serde_json::Value;
    fn restore(&mut self, snap: &serde_json::Value) -> Result<(), String>;
}

#[derive(Debug, Clone)]
pub struct EnvStep {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub forward_velocity: f64,
}

/// Serializable portion of a worker, embedded in checkpoints.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WorkerState {
    pub rng_seed: [u8; 32],
    pub rng_stream: u64,
    pub rng_word_pos: u128,
    pub reset_counter: u64,
    pub episode_return: f64,
    pub episode_len: u64,
    pub pending_obs: Vec<f64>,
    pub env: serde_json::Value,
}

/// One environment plus its action-sampling RNG and episode bookkeeping.
pub struct Worker {
    pub index: usize,
    pub env: Box<dyn Environment>,
    pub rng: ChaCha8Rng,
    pub pending_obs: Vec<f64>,
    pub episode_return: f64,
    pub episode_len: u64,
    pub reset_counter: u64,
    base_seed: u64,
}

/// Deterministic per-reset seed stream (splitmix64 over a mixed key).
pub fn reset_seed(base: u64, env_index: u64, counter: u64) -> u64 {
    let mut z = base
        .wrapping_add(env_index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(counter.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Worker {
    pub fn new(index: usize, mut env: Box<dyn Environment>, base_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(index as u64 + 1);
        let pending_obs = env.reset(reset_seed(base_seed, index as u64, 0));
        Self {
            index,
            env,
            rng,
            pending_obs,
            episode_return: 0.0,
            episode_len: 0,
            reset_counter: 1,
            base_seed,
        }
    }

    fn reset_env(&mut self) {
        let seed = reset_seed(self.base_seed, self.index as u64, self.reset_counter);
        self.reset_counter += 1;
        self.pending_obs = self.env.reset(seed);
        self.episode_return = 0.0;
        self.episode_len = 0;
    }

    pub fn state(&self) -> WorkerState {
        WorkerState {
            rng_seed: self.rng.get_seed(),
            rng_stream: self.rng.get_stream(),
            rng_word_pos: self.rng.get_word_pos(),
            reset_counter: self.reset_counter,
            episode_return: self.episode_return,
            episode_len: self.episode_len,
            pending_obs: self.pending_obs.clone(),
            env: self.env.snapshot(),
        }
    }

    pub fn restore(&mut self, state: &WorkerState) -> Result<(), String> {
        let mut rng = ChaCha8Rng::from_seed(state.rng_seed);
        rng.set_stream(state.rng_stream);
        rng.set_word_pos(state.rng_word_pos);
        self.rng = rng;
        self.reset_counter = state.reset_counter;
        self.episode_return = state.episode_return;
        self.episode_len = state.episode_len;
        self.pending_obs = state.pending_obs.clone();
        self.env.restore(&state.env)
    }
}

struct Segment {
    raw_obs: Vec<Vec<f64>>,
    obs: Vec<Vec<f64>>,
    actions: Vec<Vec<f64>>,
    log_probs: Vec<f64>,
    rewards: Vec<f64>,
    values: Vec<f64>,
    dones: Vec<bool>,
    forward_velocities: Vec<f64>,
    bootstrap: f64,
    completed_returns: Vec<f64>,
}

fn run_segment(
    worker: &mut Worker,
    params: &PolicyParams,
    normalizer: &RunningNorm,
    horizon: usize,
) -> Segment {
    let mut seg = Segment {
        raw_obs: Vec::with_capacity(horizon),
        obs: Vec::with_capacity(horizon),
        actions: Vec::with_capacity(horizon),
        log_probs: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        values: Vec::with_capacity(horizon),
        dones: Vec::with_capacity(horizon),
        forward_velocities: Vec::with_capacity(horizon),
        bootstrap: 0.0,
        completed_returns: Vec::new(),
    };
    for _ in 0..horizon {
        let raw = worker.pending_obs.clone();
        let norm = normalizer.normalize(&raw);
        let (mean, std) = params.policy_forward(&norm);
        let (action, lp) = sample_action(&mean, &std, &mut worker.rng);
        let value = params.value(&norm);
        let step = worker.env.step(&action);

        worker.episode_return += step.reward;
        worker.episode_len += 1;
        seg.raw_obs.push(raw);
        seg.obs.push(norm);
        seg.actions.push(action);
        seg.log_probs.push(lp);
        seg.rewards.push(step.reward);
        seg.values.push(value);
        seg.dones.push(step.done);
        seg.forward_velocities.push(step.forward_velocity);

        if step.done {
            seg.completed_returns.push(worker.episode_return);
            worker.reset_env();
        } else {
            worker.pending_obs = step.obs;
        }
    }
    seg.bootstrap = params.value(&normalizer.normalize(&worker.pending_obs));
    seg
}

/// Advance every worker `horizon` steps under the stochastic policy and
/// assemble the batch (segments ordered by worker index). Also returns the
/// returns of episodes completed during collection, in worker order.
pub fn collect_rollouts(
    workers: &mut [Worker],
    params: &PolicyParams,
    normalizer: &RunningNorm,
    horizon: usize,
    max_threads: usize,
) -> (TrajectoryBatch, Vec<f64>) {
    let n = workers.len();
    let threads = max_threads.max(1).min(n.max(1));
    let mut segments: Vec<Option<Segment>> = Vec::with_capacity(n);
    if threads <= 1 || n <= 1 {
        for w in workers.iter_mut() {
            segments.push(Some(run_segment(w, params, normalizer, horizon)));
        }
    } else {
        segments.resize_with(n, || None);
        let chunk = n.div_ceil(threads);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (c, group) in workers.chunks_mut(chunk).enumerate() {
                handles.push((
                    c,
                    scope.spawn(move || {
                        group
                            .iter_mut()
                            .map(|w| run_segment(w, params, normalizer, horizon))
                            .collect::<Vec<_>>()
                    }),
                ));
            }
            for (c, handle) in handles {
                for (k, seg) in handle.join().expect("rollout worker panicked").into_iter().enumerate() {
                    segments[c * chunk + k] = Some(seg);
                }
            }
        });
    }

    let mut batch = TrajectoryBatch::default();
    let mut episode_returns = Vec::new();
    for seg in segments.into_iter().map(|s| s.expect("segment collected")) {
        let start = batch.len();
        batch.raw_obs.extend(seg.raw_obs);
        batch.obs.extend(seg.obs);
        batch.actions.extend(seg.actions);
        batch.log_probs.extend(seg.log_probs);
        batch.rewards.extend(seg.rewards);
        batch.values.extend(seg.values);
        batch.dones.extend(seg.dones);
        batch.forward_velocities.extend(seg.forward_velocities);
        batch.segments.push(start..batch.len());
        batch.bootstrap_values.push(seg.bootstrap);
        episode_returns.extend(seg.completed_returns);
    }
    (batch, episode_returns)
}
