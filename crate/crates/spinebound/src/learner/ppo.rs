//! Clipped-surrogate PPO update with full-batch Adam steps.

use super::gae::TrajectoryBatch;
use super::policy::{log_prob, PolicyParams, LOG_STD_MAX, LOG_STD_MIN};
use super::{LearnerError, PpoConfig};

/// Diagnostics of one update (last epoch's pass).
#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Per-sample clipped surrogate `min(rho*A, clip(rho, 1-eps, 1+eps)*A)`.
pub fn clipped_surrogate(rho: f64, advantage: f64, epsilon: f64) -> f64 {
    let clipped = rho.clamp(1.0 - epsilon, 1.0 + epsilon);
    (rho * advantage).min(clipped * advantage)
}

/// Full loss gradient (flat parameter order) plus diagnostics for the batch
/// under the current parameters.
///
/// The minimized loss is
/// `-mean(min(rho A, clip(rho) A)) + value_coef * mean((V - R)^2)
///  - entropy_coef * H(sigma)`.
pub fn loss_gradient(
    batch: &TrajectoryBatch,
    params: &PolicyParams,
    cfg: &PpoConfig,
) -> (Vec<f64>, UpdateStats) {
    let n = batch.len();
    assert!(n > 0, "empty batch");
    let inv_n = 1.0 / n as f64;
    let std = params.std();
    let act_dim = params.act_dim();

    let mut actor_grads = params.actor.zero_grads();
    let mut critic_grads = params.critic.zero_grads();
    let mut log_std_grads = vec![0.0; act_dim];

    let mut stats = UpdateStats::default();
    let mut clip_hits = 0usize;

    for i in 0..n {
        let obs = &batch.obs[i];
        let action = &batch.actions[i];
        let advantage = batch.advantages[i];

        let cache = params.policy_forward_cached(obs);
        let mean = cache.output();
        let new_lp = log_prob(mean, &std, action);
        let rho = (new_lp - batch.log_probs[i]).exp();
        let surrogate = clipped_surrogate(rho, advantage, cfg.clip_epsilon);
        stats.policy_loss -= surrogate * inv_n;
        stats.approx_kl += (batch.log_probs[i] - new_lp) * inv_n;
        if (rho - 1.0).abs() > cfg.clip_epsilon {
            clip_hits += 1;
        }

        // Gradient flows through the unclipped branch only when it attains
        // the min; the clipped branch is constant in the parameters wherever
        // it differs from the unclipped one.
        let clipped = rho.clamp(1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
        let d_lp = if rho * advantage <= clipped * advantage {
            -(rho * advantage) * inv_n
        } else {
            0.0
        };
        if d_lp != 0.0 {
            let d_mean: Vec<f64> = (0..act_dim)
                .map(|j| d_lp * (action[j] - mean[j]) / (std[j] * std[j]))
                .collect();
            params.actor.backward(&cache, &d_mean, &mut actor_grads);
            for j in 0..act_dim {
                let z = (action[j] - mean[j]) / std[j];
                log_std_grads[j] += d_lp * (z * z - 1.0);
            }
        }

        let vcache = params.critic.forward_cached(obs);
        let v = vcache.output()[0];
        let err = v - batch.returns[i];
        stats.value_loss += err * err * inv_n;
        params
            .critic
            .backward(&vcache, &[2.0 * cfg.value_coef * err * inv_n], &mut critic_grads);
    }

    stats.entropy = params.entropy();
    stats.clip_fraction = clip_hits as f64 * inv_n;

    // Entropy bonus: H depends on log_std only, once per batch; the clamp
    // zeroes the gradient at the bounds.
    for j in 0..act_dim {
        let ls = params.log_std[j] as f64;
        if ls > LOG_STD_MIN && ls < LOG_STD_MAX {
            log_std_grads[j] -= cfg.entropy_coef;
        } else if ls <= LOG_STD_MIN {
            log_std_grads[j] = log_std_grads[j].min(0.0);
        } else {
            log_std_grads[j] = log_std_grads[j].max(0.0);
        }
    }

    let mut flat = Vec::with_capacity(params.flat_len());
    for (layer_w, layer_b) in actor_grads.w.iter().zip(&actor_grads.b) {
        flat.extend_from_slice(layer_w);
        flat.extend_from_slice(layer_b);
    }
    for (layer_w, layer_b) in critic_grads.w.iter().zip(&critic_grads.b) {
        flat.extend_from_slice(layer_w);
        flat.extend_from_slice(layer_b);
    }
    flat.extend_from_slice(&log_std_grads);
    (flat, stats)
}

/// `epochs` full-batch Adam steps on the PPO objective.
pub fn ppo_update(
    batch: &TrajectoryBatch,
    params: &mut PolicyParams,
    cfg: &PpoConfig,
    iteration: u64,
) -> Result<UpdateStats, LearnerError> {
    let mut stats = UpdateStats::default();
    for _ in 0..cfg.epochs.max(1) {
        let (grads, s) = loss_gradient(batch, params, cfg);
        stats = s;
        if !(stats.policy_loss.is_finite() && stats.value_loss.is_finite())
            || grads.iter().any(|g| !g.is_finite())
        {
            return Err(LearnerError::NumericalDivergence { iteration });
        }
        let deltas = params.adam.step(&grads, cfg.learning_rate);
        params.apply_deltas(&deltas);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_batch(params: &PolicyParams, n: usize, seed: u64) -> TrajectoryBatch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs_dim = params.obs_dim();
        let std = params.std();
        let mut batch = TrajectoryBatch::default();
        for i in 0..n {
            let obs: Vec<f64> = (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (mean, _) = params.policy_forward(&obs);
            let (action, lp) = super::super::policy::sample_action(&mean, &std, &mut rng);
            batch.obs.push(obs.clone());
            batch.raw_obs.push(obs);
            batch.actions.push(action);
            batch.log_probs.push(lp);
            batch.rewards.push(rng.gen_range(-1.0..1.0));
            batch.values.push(0.0);
            batch.dones.push(i + 1 == n);
            batch.forward_velocities.push(0.0);
            batch.advantages.push(rng.gen_range(-1.0..1.0));
            batch.returns.push(rng.gen_range(-1.0..1.0));
        }
        batch.segments = vec![0..n];
        batch.bootstrap_values = vec![0.0];
        batch
    }

    fn scalar_loss(batch: &TrajectoryBatch, params: &PolicyParams, cfg: &PpoConfig) -> f64 {
        let n = batch.len() as f64;
        let std = params.std();
        let mut policy = 0.0;
        let mut value = 0.0;
        for i in 0..batch.len() {
            let (mean, _) = params.policy_forward(&batch.obs[i]);
            let lp = log_prob(&mean, &std, &batch.actions[i]);
            let rho = (lp - batch.log_probs[i]).exp();
            policy -= clipped_surrogate(rho, batch.advantages[i], cfg.clip_epsilon) / n;
            let err = params.value(&batch.obs[i]) - batch.returns[i];
            value += err * err / n;
        }
        policy + cfg.value_coef * value - cfg.entropy_coef * params.entropy()
    }

    #[test]
    fn clip_definition_examples() {
        assert_abs_diff_eq!(clipped_surrogate(1.5, 1.0, 0.2), 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(clipped_surrogate(0.5, -1.0, 0.2), -0.8, epsilon = 1e-15);
        // Inside the band the surrogate is exactly rho * A.
        assert_abs_diff_eq!(clipped_surrogate(1.1, 2.0, 0.2), 2.2, epsilon = 1e-15);
    }

    #[test]
    fn surrogate_never_exceeds_unclipped_inside_band() {
        for i in 0..200 {
            let rho = 0.8 + 0.4 * i as f64 / 200.0;
            for a in [-1.5, -0.1, 0.7, 2.0] {
                let s = clipped_surrogate(rho, a, 0.2);
                if (rho - 1.0).abs() <= 0.2 {
                    assert_abs_diff_eq!(s, rho * a, epsilon = 1e-12);
                }
                assert!(s <= rho * a + 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // Central finite differences over every parameter of a small
        // actor-critic against the analytic backward pass.
        let mut params = PolicyParams::new(4, 2, &[6, 5], (0.5f64).ln(), 3);
        // Keep log_std strictly inside the clamp so the loss is smooth.
        params.log_std = vec![(0.4f64).ln() as f32, (0.7f64).ln() as f32];
        let cfg = PpoConfig {
            clip_epsilon: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.01,
            ..PpoConfig::default()
        };
        let batch = toy_batch(&params, 4, 8);

        let (grads, _) = loss_gradient(&batch, &params, &cfg);
        assert_eq!(grads.len(), params.flat_len());

        let flat = params.flatten();
        let mut probe = params.clone();
        let mut worst: f64 = 0.0;
        let mut idx = 0;
        for k in 0..flat.len() {
            let mut plus = flat.clone();
            plus[k] = (flat[k] as f64 + 1e-4) as f32;
            probe.set_from_flat(&plus);
            let plus_loss = scalar_loss(&batch, &probe, &cfg);
            let mut minus = flat.clone();
            minus[k] = (flat[k] as f64 - 1e-4) as f32;
            probe.set_from_flat(&minus);
            let minus_loss = scalar_loss(&batch, &probe, &cfg);
            // Use the f32 perturbation actually applied.
            let h2 = plus[k] as f64 - minus[k] as f64;
            let fd = (plus_loss - minus_loss) / h2;
            let denom = fd.abs().max(grads[k].abs()).max(1e-4);
            let rel = (fd - grads[k]).abs() / denom;
            if rel > worst {
                worst = rel;
                idx = k;
            }
        }
        assert!(
            worst < 1e-4,
            "worst relative gradient error {worst:.2e} at flat index {idx}"
        );
    }

    #[test]
    fn huge_epsilon_single_epoch_is_vanilla_policy_gradient() {
        // With clipping disabled and ratios at 1 (first epoch), the update
        // direction must match the plain policy-gradient estimator.
        let params = PolicyParams::new(3, 2, &[8, 6], (0.5f64).ln(), 5);
        let batch = toy_batch(&params, 16, 21);
        let cfg = PpoConfig {
            clip_epsilon: 1e9,
            value_coef: 0.0,
            entropy_coef: 0.0,
            ..PpoConfig::default()
        };
        let (grads, _) = loss_gradient(&batch, &params, &cfg);

        // Vanilla REINFORCE gradient of -mean(log pi * A).
        let std = params.std();
        let inv_n = 1.0 / batch.len() as f64;
        let mut actor_grads = params.actor.zero_grads();
        let mut ls_grads = vec![0.0; 2];
        for i in 0..batch.len() {
            let cache = params.policy_forward_cached(&batch.obs[i]);
            let mean = cache.output().to_vec();
            let d_lp = -batch.advantages[i] * inv_n;
            let d_mean: Vec<f64> = (0..2)
                .map(|j| d_lp * (batch.actions[i][j] - mean[j]) / (std[j] * std[j]))
                .collect();
            params.actor.backward(&cache, &d_mean, &mut actor_grads);
            for j in 0..2 {
                let z = (batch.actions[i][j] - mean[j]) / std[j];
                ls_grads[j] += d_lp * (z * z - 1.0);
            }
        }
        let mut vanilla = Vec::new();
        for (w, b) in actor_grads.w.iter().zip(&actor_grads.b) {
            vanilla.extend_from_slice(w);
            vanilla.extend_from_slice(b);
        }
        let actor_len = vanilla.len();
        let ppo_actor = &grads[..actor_len];

        let dot: f64 = ppo_actor.iter().zip(&vanilla).map(|(a, b)| a * b).sum();
        let na: f64 = ppo_actor.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nb: f64 = vanilla.iter().map(|b| b * b).sum::<f64>().sqrt();
        let cosine = dot / (na * nb);
        assert!(cosine > 0.999, "cosine similarity {cosine}");

        // log_std block agrees too.
        let ls_start = params.flat_len() - 2;
        for j in 0..2 {
            assert_abs_diff_eq!(grads[ls_start + j], ls_grads[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn update_moves_parameters_and_reports_stats() {
        let mut params = PolicyParams::new(3, 2, &[8], (0.5f64).ln(), 2);
        let before = params.clone();
        let batch = toy_batch(&params, 32, 4);
        let cfg = PpoConfig::default();
        let stats = ppo_update(&batch, &mut params, &cfg, 0).unwrap();
        assert!(params != before);
        assert!(stats.value_loss >= 0.0);
        assert!((0.0..=1.0).contains(&stats.clip_fraction));
        assert!(stats.entropy.is_finite());
        assert_eq!(params.adam.t, cfg.epochs as u64);
    }
}
