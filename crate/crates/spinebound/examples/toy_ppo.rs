//! PPO learning sanity on the 1-D velocity-tracking toy task, checked
//! against its closed-form optimal return.
//!
//!   cargo run --release --example toy_ppo

use spinebound::learner::{deterministic_action, train, Environment, PpoConfig};
use spinebound::toy::ToyVelocityEnv;

fn main() {
    let cfg = PpoConfig {
        n_envs: 8,
        horizon: 64,
        max_total_steps: 100_000,
        normalizer_warmup: 512,
        checkpoint_every: 0,
        hidden: vec![32, 16],
        seed: 0,
        ..PpoConfig::default()
    };
    let mut factory = |_| Box::new(ToyVelocityEnv::default()) as Box<dyn Environment>;
    let out = train(&cfg, &mut factory, None, None).expect("training");

    println!("iter  steps    mean_return  mean_v");
    for row in out.curve.iter().step_by(out.curve.len() / 10 + 1) {
        println!(
            "{:>4}  {:>7}  {:>10.2}  {:>6.3}",
            row.iteration, row.total_steps, row.mean_episode_reward, row.mean_forward_speed
        );
    }

    // Deterministic-policy evaluation vs the analytic optimum.
    let mut env = ToyVelocityEnv::default();
    let mut achieved = 0.0;
    let mut optimal = 0.0;
    let episodes = 20;
    for ep in 0..episodes {
        let mut obs = env.reset(10_000 + ep);
        optimal += env.analytic_optimal_return(obs[0]);
        loop {
            let a = deterministic_action(&out.params, &out.normalizer, &obs);
            let step = env.step(&a);
            achieved += step.reward;
            if step.done {
                break;
            }
            obs = step.obs;
        }
    }
    println!(
        "\ndeterministic eval: {:.2} / optimal {:.2} = {:.1}%",
        achieved / episodes as f64,
        optimal / episodes as f64,
        100.0 * achieved / optimal
    );
}
