//! Rollout storage and generalized advantage estimation.

use std::ops::Range;

/// One iteration's worth of experience from all environments, segments
/// concatenated in environment order.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryBatch {
    /// Normalized observations as fed to the networks.
    pub obs: Vec<Vec<f64>>,
    /// Raw observations, for updating the normalizer after collection.
    pub raw_obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub forward_velocities: Vec<f64>,
    /// Per-environment slice of the flat arrays.
    pub segments: Vec<Range<usize>>,
    /// Value estimate of the observation after each segment's last step,
    /// used to bootstrap truncated (non-done) segment tails.
    pub bootstrap_values: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl TrajectoryBatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// GAE(gamma, lambda) over each segment, bootstrapping truncated tails and
/// cutting at episode boundaries, followed by batch-wide advantage
/// normalization. Returns are `advantage + value` (pre-normalization).
pub fn compute_gae(batch: &mut TrajectoryBatch, gamma: f64, lambda: f64) {
    let n = batch.len();
    batch.advantages = vec![0.0; n];
    batch.returns = vec![0.0; n];
    for (seg_idx, seg) in batch.segments.iter().enumerate() {
        let mut gae = 0.0;
        for t in seg.clone().rev() {
            let next_value = if batch.dones[t] {
                0.0
            } else if t + 1 < seg.end {
                batch.values[t + 1]
            } else {
                batch.bootstrap_values[seg_idx]
            };
            let delta = batch.rewards[t] + gamma * next_value - batch.values[t];
            let carry = if batch.dones[t] { 0.0 } else { gae };
            gae = delta + gamma * lambda * carry;
            batch.advantages[t] = gae;
            batch.returns[t] = gae + batch.values[t];
        }
    }

    if n > 0 {
        let mean = batch.advantages.iter().sum::<f64>() / n as f64;
        let var = batch
            .advantages
            .iter()
            .map(|a| (a - mean) * (a - mean))
            .sum::<f64>()
            / n as f64;
        let std = var.sqrt().max(1e-8);
        for a in &mut batch.advantages {
            *a = (*a - mean) / std;
        }
    }
}
