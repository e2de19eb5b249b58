//! Actor-critic parameters and the diagonal Gaussian action distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::net::{Activation, AdamState, ForwardCache, Mlp};

/// Bounds keeping `exp(log_std)` inside [1e-3, 1.0].
pub const LOG_STD_MIN: f64 = -6.907_755_278_982_137; // ln(1e-3)
pub const LOG_STD_MAX: f64 = 0.0;

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Actor (obs -> action mean, tanh output), critic (obs -> value), the
/// state-independent action log-stds, and the optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub actor: Mlp,
    pub critic: Mlp,
    pub log_std: Vec<f32>,
    pub adam: AdamState,
}

impl PolicyParams {
    pub fn new(
        obs_dim: usize,
        act_dim: usize,
        hidden: &[usize],
        log_std_init: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![obs_dim];
        dims.extend_from_slice(hidden);
        let mut acts = vec![Activation::Relu; hidden.len()];

        let mut actor_dims = dims.clone();
        actor_dims.push(act_dim);
        acts.push(Activation::Tanh);
        let actor = Mlp::init(&actor_dims, &acts, &mut rng);

        let mut critic_dims = dims;
        critic_dims.push(1);
        *acts.last_mut().unwrap() = Activation::Linear;
        let critic = Mlp::init(&critic_dims, &acts, &mut rng);

        let log_std = vec![log_std_init as f32; act_dim];
        let n = actor.param_count() + critic.param_count() + act_dim;
        Self {
            actor,
            critic,
            log_std,
            adam: AdamState::new(n),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.output_dim()
    }

    pub fn flat_len(&self) -> usize {
        self.actor.param_count() + self.critic.param_count() + self.log_std.len()
    }

    /// Clamped per-dimension standard deviations.
    pub fn std(&self) -> Vec<f64> {
        self.log_std
            .iter()
            .map(|ls| (*ls as f64).clamp(LOG_STD_MIN, LOG_STD_MAX).exp())
            .collect()
    }

    /// Action mean (in (-1,1)^d via the tanh head) and std for a normalized
    /// observation.
    pub fn policy_forward(&self, norm_obs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.actor.forward(norm_obs), self.std())
    }

    pub fn policy_forward_cached(&self, norm_obs: &[f64]) -> ForwardCache {
        self.actor.forward_cached(norm_obs)
    }

    pub fn value(&self, norm_obs: &[f64]) -> f64 {
        self.critic.forward(norm_obs)[0]
    }

    /// Gaussian entropy `sum_j (log sigma_j + (1/2) ln(2 pi e))`.
    pub fn entropy(&self) -> f64 {
        self.std()
            .iter()
            .map(|s| s.ln() + 0.5 * (LN_2PI + 1.0))
            .sum()
    }

    /// Canonical parameter flattening: actor layers (w, b), critic layers
    /// (w, b), log_std. Matches the gradient flattening and the checkpoint
    /// array order.
    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut f32)) {
        for layer in self.actor.layers.iter_mut().chain(self.critic.layers.iter_mut()) {
            layer.w.iter_mut().for_each(&mut f);
            layer.b.iter_mut().for_each(&mut f);
        }
        self.log_std.iter_mut().for_each(&mut f);
    }

    /// Subtract Adam deltas (given in flat order) from the parameters.
    pub fn apply_deltas(&mut self, deltas: &[f64]) {
        assert_eq!(deltas.len(), self.flat_len());
        let mut it = deltas.iter();
        self.for_each_param_mut(|p| {
            *p = (*p as f64 - *it.next().unwrap()) as f32;
        });
    }

    pub fn flatten(&self) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.flat_len());
        let mut clone = self.clone();
        clone.for_each_param_mut(|p| out.push(*p));
        out
    }

    pub fn set_from_flat(&mut self, flat: &[f32]) {
        assert_eq!(flat.len(), self.flat_len());
        let mut it = flat.iter();
        self.for_each_param_mut(|p| *p = *it.next().unwrap());
    }
}

/// Sample from the diagonal Gaussian (noise is *not* squashed or clamped;
/// downstream action clamping is the environment's job) and return the
/// sample's log density.
pub fn sample_action(
    mean: &[f64],
    std: &[f64],
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let action: Vec<f64> = mean
        .iter()
        .zip(std)
        .map(|(m, s)| m + s * standard_normal(rng))
        .collect();
    let lp = log_prob(mean, std, &action);
    (action, lp)
}

/// Log density of `action` under the diagonal Gaussian.
pub fn log_prob(mean: &[f64], std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(std)
        .zip(action)
        .map(|((m, s), a)| {
            let z = (a - m) / s;
            -0.5 * z * z - s.ln() - 0.5 * LN_2PI
        })
        .sum()
}

/// Box-Muller standard normal draw (two uniforms per call, deterministic).
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn log_prob_standard_normal_at_mode() {
        let lp = log_prob(&[0.0], &[1.0], &[0.0]);
        assert_abs_diff_eq!(lp, -0.918_938_533_204_672_7, epsilon = 1e-12);
    }

    #[test]
    fn log_prob_at_mean_is_normalization_terms() {
        let mean = [0.3, -0.7, 0.0];
        let std = [0.5, 0.2, 1.0];
        let lp = log_prob(&mean, &std, &mean);
        let expected: f64 = std.iter().map(|s: &f64| -s.ln() - 0.5 * LN_2PI).sum();
        assert_abs_diff_eq!(lp, expected, epsilon = 1e-12);
    }

    #[test]
    fn small_std_samples_concentrate_on_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean = [0.4, -0.2];
        let std = [1e-3, 1e-3];
        let n = 4000;
        let mut sums = [0.0; 2];
        for _ in 0..n {
            let (a, _) = sample_action(&mean, &std, &mut rng);
            sums[0] += a[0];
            sums[1] += a[1];
        }
        // Empirical mean within three standard errors.
        let tol = 3.0 * 1e-3 / (n as f64).sqrt();
        assert!((sums[0] / n as f64 - mean[0]).abs() < tol);
        assert!((sums[1] / n as f64 - mean[1]).abs() < tol);
    }

    #[test]
    fn entropy_matches_closed_form() {
        let mut p = PolicyParams::new(4, 3, &[8, 6], (0.5f64).ln(), 9);
        p.log_std = vec![0.5f64.ln() as f32; 3];
        let sigma: f64 = p.std()[0];
        let expected = 3.0 * (sigma.ln() + 0.5 * (LN_2PI + 1.0));
        assert_abs_diff_eq!(p.entropy(), expected, epsilon = 1e-6);
    }

    #[test]
    fn std_is_clamped() {
        let mut p = PolicyParams::new(4, 2, &[8], 0.0, 1);
        p.log_std = vec![5.0, -20.0];
        let s = p.std();
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 1e-3, epsilon = 1e-12);
    }

    #[test]
    fn layer_shapes_match_spec_sizes() {
        let p = PolicyParams::new(34, 5, &[128, 64], 0.0, 0);
        let a = &p.actor.layers;
        assert_eq!((a[0].rows, a[0].cols), (128, 34));
        assert_eq!((a[1].rows, a[1].cols), (64, 128));
        assert_eq!((a[2].rows, a[2].cols), (5, 64));
        let c = &p.critic.layers;
        assert_eq!((c[2].rows, c[2].cols), (1, 64));
        assert_eq!(p.actor.activations, vec![Activation::Relu, Activation::Relu, Activation::Tanh]);
        assert_eq!(
            p.critic.activations,
            vec![Activation::Relu, Activation::Relu, Activation::Linear]
        );
        // Mean lands strictly inside (-1, 1) through the tanh head.
        let (mean, _) = p.policy_forward(&vec![0.5; 34]);
        assert!(mean.iter().all(|m| m.abs() < 1.0));
    }
}
