//! Running observation normalization (Welford's online moments).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunningNorm {
    pub count: f64,
    pub mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningNorm {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn update(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.mean.len());
        self.count += 1.0;
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta / self.count;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    /// Population variance per dimension.
    pub fn variance(&self) -> Vec<f64> {
        if self.count < 1.0 {
            return vec![1.0; self.mean.len()];
        }
        self.m2.iter().map(|m| m / self.count).collect()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        if self.count < 2.0 {
            return x.to_vec();
        }
        x.iter()
            .enumerate()
            .map(|(i, &v)| (v - self.mean[i]) / (self.m2[i] / self.count).sqrt().max(1e-8))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn welford_matches_two_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let data: Vec<[f64; 3]> = (0..500)
            .map(|_| [rng.gen_range(-4.0..4.0), rng.gen_range(0.0..100.0), -3.5])
            .collect();

        let mut norm = RunningNorm::new(3);
        for row in &data {
            norm.update(row);
        }

        for d in 0..3 {
            let mean: f64 = data.iter().map(|r| r[d]).sum::<f64>() / data.len() as f64;
            let var: f64 =
                data.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / data.len() as f64;
            assert!((norm.mean[d] - mean).abs() < 1e-9, "mean dim {d}");
            assert!((norm.variance()[d] - var).abs() < 1e-9, "variance dim {d}");
        }
    }

    #[test]
    fn normalized_output_is_standardized() {
        let mut norm = RunningNorm::new(1);
        for i in 0..100 {
            norm.update(&[i as f64]);
        }
        let z = norm.normalize(&[norm.mean[0]]);
        assert_eq!(z[0], 0.0);
        // A constant dimension normalizes without dividing by zero.
        let mut flat = RunningNorm::new(1);
        for _ in 0..10 {
            flat.update(&[7.0]);
        }
        assert!(flat.normalize(&[7.0])[0].is_finite());
    }
}
