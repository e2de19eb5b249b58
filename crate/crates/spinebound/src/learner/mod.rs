//! Proximal-policy-optimization trainer: parallel rollout collection, GAE,
//! full-batch Adam updates, running observation normalization, and versioned
//! checkpoints with exact resume.

pub mod checkpoint;
pub mod gae;
pub mod net;
pub mod normalizer;
pub mod policy;
pub mod ppo;
pub mod rollout;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{Checkpoint, CheckpointError, ResumeState};
pub use gae::{compute_gae, TrajectoryBatch};
pub use normalizer::RunningNorm;
pub use policy::{log_prob, sample_action, PolicyParams};
pub use ppo::{clipped_surrogate, loss_gradient, ppo_update, UpdateStats};
pub use rollout::{collect_rollouts, reset_seed, EnvStep, Environment, Worker, WorkerState};

/// Environment variable capping the number of rollout threads.
pub const WORKERS_ENV_VAR: &str = "SPINEBOUND_WORKERS";

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("non-finite loss or gradient at iteration {iteration}")]
    NumericalDivergence { iteration: u64 },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("resume state mismatch: {0}")]
    Resume(String),
}

/// PPO hyperparameters. `seed` is injected from the run configuration and is
/// not part of the config file schema.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PpoConfig {
    pub n_envs: usize,
    /// Control steps collected per environment per iteration.
    pub horizon: usize,
    pub clip_epsilon: f64,
    pub gae_lambda: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    /// Full-batch gradient passes per collected batch.
    pub epochs: u32,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_total_steps: u64,
    pub log_std_init: f64,
    /// Random-policy steps used to initialize the observation normalizer.
    pub normalizer_warmup: u64,
    /// Checkpoint cadence in iterations (0 = only final).
    pub checkpoint_every: u32,
    pub hidden: Vec<usize>,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            n_envs: 30,
            horizon: 256,
            clip_epsilon: 0.2,
            gae_lambda: 0.95,
            gamma: 0.99,
            learning_rate: 3e-4,
            epochs: 4,
            entropy_coef: 0.0,
            value_coef: 0.5,
            max_total_steps: 10_000_000,
            log_std_init: (0.5f64).ln(),
            normalizer_warmup: 1000,
            checkpoint_every: 20,
            hidden: vec![128, 64],
            seed: 0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_envs == 0 || self.horizon == 0 {
            return Err("ppo.n_envs and ppo.horizon must be >= 1".into());
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return Err("ppo.clip_epsilon must lie in (0, 1)".into());
        }
        for (name, v) in [("ppo.gamma", self.gamma), ("ppo.gae_lambda", self.gae_lambda)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("{name} must lie in (0, 1]"));
            }
        }
        if self.learning_rate <= 0.0 {
            return Err("ppo.learning_rate must be positive".into());
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err("ppo.hidden must be nonempty positive sizes".into());
        }
        Ok(())
    }
}

/// One learning-curve row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub iteration: u64,
    pub total_steps: u64,
    pub mean_episode_reward: f64,
    pub mean_forward_speed: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
}

/// Checkpoint destination for [`train`].
pub struct CheckpointSink<'a> {
    pub dir: &'a Path,
    pub config_hash: &'a str,
}

pub struct TrainOutput {
    pub params: PolicyParams,
    pub normalizer: RunningNorm,
    /// Rows produced by *this* invocation (a resumed run returns only the
    /// continuation rows).
    pub curve: Vec<IterationStats>,
    pub total_steps: u64,
    pub iterations: u64,
    pub checkpoints: Vec<PathBuf>,
}

/// Number of rollout threads: `SPINEBOUND_WORKERS` if set, else one thread
/// per environment. Results are identical for any thread count.
fn max_threads(n_envs: usize) -> usize {
    std::env::var(WORKERS_ENV_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(n_envs)
}

/// Train until `max_total_steps`, collecting from `n_envs` environments
/// built by `env_factory(index)`. Pass a checkpoint from a previous run to
/// continue it exactly where it stopped.
pub fn train(
    cfg: &PpoConfig,
    env_factory: &mut dyn FnMut(usize) -> Box<dyn Environment>,
    sink: Option<CheckpointSink<'_>>,
    resume: Option<&Checkpoint>,
) -> Result<TrainOutput, LearnerError> {
    let mut workers: Vec<Worker> = (0..cfg.n_envs)
        .map(|i| Worker::new(i, env_factory(i), cfg.seed))
        .collect();
    let obs_dim = workers[0].env.obs_dim();
    let act_dim = workers[0].env.action_dim();
    let threads = max_threads(cfg.n_envs);

    let (mut params, mut normalizer, mut iteration, mut total_steps, mut last_mean_reward);
    if let Some(ckpt) = resume {
        params = ckpt.to_params()?;
        normalizer = ckpt.normalizer.clone();
        let state = ckpt
            .resume
            .as_ref()
            .ok_or_else(|| LearnerError::Resume("checkpoint carries no resume state".into()))?;
        if state.workers.len() != workers.len() {
            return Err(LearnerError::Resume(format!(
                "checkpoint has {} workers, config asks for {}",
                state.workers.len(),
                workers.len()
            )));
        }
        for (w, s) in workers.iter_mut().zip(&state.workers) {
            w.restore(s).map_err(LearnerError::Resume)?;
        }
        iteration = state.iteration;
        total_steps = state.total_steps;
        last_mean_reward = state.last_mean_episode_reward;
    } else {
        params = PolicyParams::new(obs_dim, act_dim, &cfg.hidden, cfg.log_std_init, cfg.seed);
        normalizer = RunningNorm::new(obs_dim);
        iteration = 0;
        total_steps = 0;
        last_mean_reward = 0.0;
        warm_up_normalizer(cfg, &mut workers, &mut normalizer);
    }

    let mut curve = Vec::new();
    let mut checkpoints = Vec::new();

    while total_steps < cfg.max_total_steps {
        let (mut batch, episode_returns) =
            collect_rollouts(&mut workers, &params, &normalizer, cfg.horizon, threads);
        total_steps += batch.len() as u64;
        for raw in &batch.raw_obs {
            normalizer.update(raw);
        }
        compute_gae(&mut batch, cfg.gamma, cfg.gae_lambda);

        let stats = ppo_update(&batch, &mut params, cfg, iteration)?;
        iteration += 1;

        if !episode_returns.is_empty() {
            last_mean_reward =
                episode_returns.iter().sum::<f64>() / episode_returns.len() as f64;
        }
        let mean_speed =
            batch.forward_velocities.iter().sum::<f64>() / batch.len().max(1) as f64;
        curve.push(IterationStats {
            iteration,
            total_steps,
            mean_episode_reward: last_mean_reward,
            mean_forward_speed: mean_speed,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            clip_fraction: stats.clip_fraction,
        });

        let finished = total_steps >= cfg.max_total_steps;
        let at_cadence = cfg.checkpoint_every > 0 && iteration % cfg.checkpoint_every as u64 == 0;
        if let Some(sink) = sink.as_ref() {
            if finished || at_cadence {
                let path = save_checkpoint(
                    sink,
                    &params,
                    &normalizer,
                    &workers,
                    iteration,
                    total_steps,
                    last_mean_reward,
                )?;
                checkpoints.push(path);
            }
        }
    }

    // A zero-step budget still reports the initial parameters (and writes a
    // usable checkpoint when a sink is given).
    if cfg.max_total_steps == 0 {
        if let Some(sink) = sink.as_ref() {
            let path = save_checkpoint(
                sink,
                &params,
                &normalizer,
                &workers,
                iteration,
                total_steps,
                last_mean_reward,
            )?;
            checkpoints.push(path);
        }
    }

    Ok(TrainOutput {
        params,
        normalizer,
        curve,
        total_steps,
        iterations: iteration,
        checkpoints,
    })
}

/// Seed the observation normalizer from uniform-random actions before any
/// learning, then reset the workers for training.
fn warm_up_normalizer(cfg: &PpoConfig, workers: &mut [Worker], normalizer: &mut RunningNorm) {
    if cfg.normalizer_warmup == 0 {
        return;
    }
    use rand::Rng;
    let per_env = cfg.normalizer_warmup.div_ceil(workers.len() as u64);
    for worker in workers.iter_mut() {
        let mut obs = worker.pending_obs.clone();
        let act_dim = worker.env.action_dim();
        for _ in 0..per_env {
            normalizer.update(&obs);
            let action: Vec<f64> = (0..act_dim)
                .map(|_| worker.rng.gen_range(-1.0..1.0))
                .collect();
            let step = worker.env.step(&action);
            if step.done {
                obs = worker.env.reset(reset_seed(cfg.seed, worker.index as u64, u64::MAX));
            } else {
                obs = step.obs;
            }
        }
        // Discard the warmup episode: fresh reset from the worker's own
        // deterministic seed sequence.
        let seed = reset_seed(cfg.seed, worker.index as u64, worker.reset_counter);
        worker.reset_counter += 1;
        worker.pending_obs = worker.env.reset(seed);
        worker.episode_return = 0.0;
        worker.episode_len = 0;
    }
}

fn save_checkpoint(
    sink: &CheckpointSink<'_>,
    params: &PolicyParams,
    normalizer: &RunningNorm,
    workers: &[Worker],
    iteration: u64,
    total_steps: u64,
    last_mean_reward: f64,
) -> Result<PathBuf, LearnerError> {
    let resume = ResumeState {
        iteration,
        total_steps,
        last_mean_episode_reward: last_mean_reward,
        workers: workers.iter().map(|w| w.state()).collect(),
    };
    let ckpt = Checkpoint::from_params(params, normalizer, sink.config_hash, Some(resume));
    std::fs::create_dir_all(sink.dir)?;
    let path = sink.dir.join(format!("ckpt_{iteration:06}.bin"));
    ckpt.save(&path)?;
    let latest = sink.dir.join("ckpt_latest.bin");
    std::fs::copy(&path, &latest)?;
    Ok(path)
}

/// Deterministic-policy action: the actor mean (tanh head keeps it inside
/// the unit box).
pub fn deterministic_action(
    params: &PolicyParams,
    normalizer: &RunningNorm,
    raw_obs: &[f64],
) -> Vec<f64> {
    params.actor.forward(&normalizer.normalize(raw_obs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::ToyVelocityEnv;

    fn toy_factory(idx: usize) -> Box<dyn Environment> {
        let _ = idx;
        Box::new(ToyVelocityEnv::default())
    }

    fn quick_cfg(steps: u64, seed: u64) -> PpoConfig {
        PpoConfig {
            n_envs: 4,
            horizon: 32,
            max_total_steps: steps,
            normalizer_warmup: 64,
            checkpoint_every: 2,
            hidden: vec![16, 8],
            seed,
            ..PpoConfig::default()
        }
    }

    #[test]
    fn zero_budget_returns_initial_params_and_empty_curve() {
        let cfg = quick_cfg(0, 7);
        let out = train(&cfg, &mut toy_factory, None, None).unwrap();
        assert!(out.curve.is_empty());
        assert_eq!(out.total_steps, 0);
        let fresh = PolicyParams::new(1, 1, &cfg.hidden, cfg.log_std_init, cfg.seed);
        assert_eq!(out.params, fresh);
    }

    #[test]
    fn identical_seeds_produce_identical_curves() {
        let cfg = quick_cfg(512, 11);
        let a = train(&cfg, &mut toy_factory, None, None).unwrap();
        let b = train(&cfg, &mut toy_factory, None, None).unwrap();
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.params, b.params);

        let other = quick_cfg(512, 12);
        let c = train(&other, &mut toy_factory, None, None).unwrap();
        assert!(a.curve != c.curve);
    }

    #[test]
    fn resume_equals_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        // 4 envs x 32 horizon = 128 steps/iter; checkpoint every 2 iters.
        let full = train(&quick_cfg(1024, 3), &mut toy_factory, None, None).unwrap();

        let part_cfg = quick_cfg(512, 3);
        let sink = CheckpointSink {
            dir: dir.path(),
            config_hash: "t",
        };
        let part = train(&part_cfg, &mut toy_factory, Some(sink), None).unwrap();
        assert_eq!(part.curve.len(), 4);

        let ckpt = Checkpoint::load(&dir.path().join("ckpt_latest.bin")).unwrap();
        let cont = train(&quick_cfg(1024, 3), &mut toy_factory, None, Some(&ckpt)).unwrap();

        let mut joined = part.curve.clone();
        joined.extend(cont.curve.clone());
        assert_eq!(joined, full.curve);
        assert_eq!(cont.params, full.params);
    }

    #[test]
    fn training_improves_toy_return() {
        let cfg = PpoConfig {
            n_envs: 4,
            horizon: 64,
            max_total_steps: 20_000,
            normalizer_warmup: 128,
            checkpoint_every: 0,
            hidden: vec![16, 8],
            seed: 5,
            ..PpoConfig::default()
        };
        let out = train(&cfg, &mut toy_factory, None, None).unwrap();
        let first = out.curve.first().unwrap().mean_episode_reward;
        let last = out.curve.last().unwrap().mean_episode_reward;
        assert!(
            last > first + 5.0,
            "no learning progress: first {first:.2}, last {last:.2}"
        );
    }
}
