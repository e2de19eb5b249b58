//! Fully connected networks with manual forward/backward passes.
//!
//! Parameters and Adam moments are stored as `f32` (matching the checkpoint
//! format bit-for-bit, which is what makes resumed runs identical to
//! uninterrupted ones), while all arithmetic runs in `f64` so analytic
//! gradients agree with central finite differences to high precision.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activated output.
    fn derivative(self, activated: f64) -> f64 {
        match self {
            Activation::Relu => {
                if activated > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - activated * activated,
            Activation::Linear => 1.0,
        }
    }
}

/// One dense layer; weights row-major `[rows x cols]` mapping `cols -> rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f32>,
    pub b: Vec<f32>,
}

/// Multi-layer perceptron with one activation per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    pub activations: Vec<Activation>,
}

/// Layer outputs cached by a forward pass, input first.
pub struct ForwardCache {
    pub outputs: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("cache holds at least the input")
    }
}

/// Per-layer gradient accumulators (f64).
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl Mlp {
    /// He-uniform initialization, deterministic for a given RNG state.
    pub fn init(dims: &[usize], activations: &[Activation], rng: &mut ChaCha8Rng) -> Self {
        assert_eq!(dims.len() - 1, activations.len());
        let layers = dims
            .windows(2)
            .map(|d| {
                let (cols, rows) = (d[0], d[1]);
                let bound = (6.0 / cols as f64).sqrt();
                let w = (0..rows * cols)
                    .map(|_| rng.gen_range(-bound..=bound) as f32)
                    .collect();
                Linear {
                    rows,
                    cols,
                    w,
                    b: vec![0.0; rows],
                }
            })
            .collect();
        Self {
            layers,
            activations: activations.to_vec(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().rows
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cache = self.forward_cached(x);
        cache.outputs.pop().expect("non-empty cache")
    }

    pub fn forward_cached(&self, x: &[f64]) -> ForwardCache {
        assert_eq!(x.len(), self.input_dim());
        let mut outputs = Vec::with_capacity(self.layers.len() + 1);
        outputs.push(x.to_vec());
        for (layer, act) in self.layers.iter().zip(&self.activations) {
            let input = outputs.last().unwrap();
            let mut out = Vec::with_capacity(layer.rows);
            for r in 0..layer.rows {
                let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                let mut z = layer.b[r] as f64;
                for (wi, xi) in row.iter().zip(input) {
                    z += *wi as f64 * xi;
                }
                out.push(act.apply(z));
            }
            outputs.push(out);
        }
        ForwardCache { outputs }
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads {
            w: self.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    /// Accumulate gradients for one sample. `d_output` is the loss gradient
    /// with respect to the *activated* network output.
    pub fn backward(&self, cache: &ForwardCache, d_output: &[f64], grads: &mut MlpGrads) {
        let n = self.layers.len();
        let mut delta = d_output.to_vec();
        for i in (0..n).rev() {
            let layer = &self.layers[i];
            let activated = &cache.outputs[i + 1];
            for (d, a) in delta.iter_mut().zip(activated) {
                *d *= self.activations[i].derivative(*a);
            }
            let input = &cache.outputs[i];
            for r in 0..layer.rows {
                grads.b[i][r] += delta[r];
                let row = &mut grads.w[i][r * layer.cols..(r + 1) * layer.cols];
                for (g, xi) in row.iter_mut().zip(input) {
                    *g += delta[r] * xi;
                }
            }
            if i > 0 {
                let mut prev = vec![0.0; layer.cols];
                for r in 0..layer.rows {
                    let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                    for (p, wi) in prev.iter_mut().zip(row) {
                        *p += *wi as f64 * delta[r];
                    }
                }
                delta = prev;
            }
        }
    }
}

/// Adam over a flat f32 parameter vector; moments are f32, arithmetic f64.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f32>,
    pub v: Vec<f32>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One full-batch step: returns the parameter deltas to subtract.
    pub fn step(&mut self, grads: &[f64], lr: f64) -> Vec<f64> {
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        grads
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let m = self.beta1 * self.m[i] as f64 + (1.0 - self.beta1) * g;
                let v = self.beta2 * self.v[i] as f64 + (1.0 - self.beta2) * g * g;
                self.m[i] = m as f32;
                self.v[i] = v as f32;
                lr * (m / bc1) / ((v / bc2).sqrt() + self.eps)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn tiny_net(seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mlp::init(
            &[3, 5, 4, 2],
            &[Activation::Relu, Activation::Relu, Activation::Tanh],
            &mut rng,
        )
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut net = tiny_net(0);
        for layer in &mut net.layers {
            layer.w.iter_mut().for_each(|w| *w = 0.0);
        }
        let out = net.forward(&[0.3, -1.0, 2.0]);
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn forward_is_deterministic() {
        let net = tiny_net(5);
        let x = [0.1, -0.4, 0.9];
        assert_eq!(net.forward(&x), net.forward(&x));
    }

    #[test]
    fn dead_input_column_is_ignored() {
        // Zeroing the weights feeding from one input makes the output
        // invariant to that input.
        let mut net = tiny_net(7);
        let dead = 1;
        let cols = net.layers[0].cols;
        for r in 0..net.layers[0].rows {
            net.layers[0].w[r * cols + dead] = 0.0;
        }
        let a = net.forward(&[0.2, -5.0, 0.7]);
        let b = net.forward(&[0.2, 99.0, 0.7]);
        assert_eq!(a, b);
    }

    #[test]
    fn backward_matches_central_differences() {
        let net = tiny_net(11);
        let x = [0.37, -0.81, 0.55];
        // Scalar loss: weighted sum of outputs, so dL/dout is the weights.
        let weights = [0.7, -1.3];
        let loss = |n: &Mlp| -> f64 {
            n.forward(&x)
                .iter()
                .zip(&weights)
                .map(|(o, w)| o * w)
                .sum()
        };

        let cache = net.forward_cached(&x);
        let mut grads = net.zero_grads();
        net.backward(&cache, &weights.map(f64::from), &mut grads);

        let h = 1e-4;
        let mut checked = 0;
        for li in 0..net.layers.len() {
            for wi in 0..net.layers[li].w.len() {
                let mut plus = net.clone();
                let mut minus = net.clone();
                plus.layers[li].w[wi] += h as f32;
                minus.layers[li].w[wi] -= h as f32;
                // Use the exact f32 perturbation actually applied.
                let hp = plus.layers[li].w[wi] as f64 - net.layers[li].w[wi] as f64;
                let hm = net.layers[li].w[wi] as f64 - minus.layers[li].w[wi] as f64;
                let fd = (loss(&plus) - loss(&minus)) / (hp + hm);
                let an = grads.w[li][wi];
                let denom = an.abs().max(fd.abs()).max(1e-6);
                assert!(
                    (fd - an).abs() / denom < 1e-4,
                    "layer {li} w[{wi}]: fd={fd:.8} analytic={an:.8}"
                );
                checked += 1;
            }
            for bi in 0..net.layers[li].b.len() {
                let mut plus = net.clone();
                let mut minus = net.clone();
                plus.layers[li].b[bi] += h as f32;
                minus.layers[li].b[bi] -= h as f32;
                let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
                let an = grads.b[li][bi];
                let denom = an.abs().max(fd.abs()).max(1e-6);
                assert!((fd - an).abs() / denom < 1e-4, "layer {li} b[{bi}]");
                checked += 1;
            }
        }
        assert!(checked > 40);
    }

    #[test]
    fn adam_first_step_is_lr_sized() {
        // With fresh moments the first Adam update is ~lr in magnitude.
        let mut adam = AdamState::new(3);
        let deltas = adam.step(&[0.5, -2.0, 1e-3], 1e-3);
        for (d, g) in deltas.iter().zip([0.5f64, -2.0, 1e-3]) {
            assert!((d.abs() - 1e-3).abs() < 1e-5, "delta {d} for grad {g}");
            assert_eq!(d.signum(), g.signum());
        }
        assert_eq!(adam.t, 1);
    }
}
