use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Diagonal Gaussian over actions with state-independent log-std.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianActionDistribution {
    pub mean: Vec<f64>,
    pub logstd: Vec<f64>,
}

impl GaussianActionDistribution {
    pub fn new(mean: Vec<f64>, logstd: Vec<f64>) -> Result<Self> {
        check_len("log-std", mean.len(), logstd.len())?;
        Ok(Self { mean, logstd })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn logprob(&self, action: &[f64]) -> Result<f64> {
        check_len("action", self.mean.len(), action.len())?;
        Ok(self.logprob_unchecked(action))
    }

    pub(crate) fn logprob_unchecked(&self, action: &[f64]) -> f64 {
        let mut lp = 0.0;
        for ((&a, &mu), &ls) in action.iter().zip(&self.mean).zip(&self.logstd) {
            let z = (a - mu) * (-ls).exp();
            lp -= ls + HALF_LN_2PI + 0.5 * z * z;
        }
        lp
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.logstd)
            .map(|(&mu, &ls)| {
                let z: f64 = rng.sample(StandardNormal);
                mu + ls.exp() * z
            })
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        self.logstd.iter().map(|ls| ls + HALF_LN_2PI + 0.5).sum()
    }
}

pub fn gaussian_logprob(dist: &GaussianActionDistribution, action: &[f64]) -> Result<f64> {
    dist.logprob(action)
}

pub fn sample_action<R: Rng + ?Sized>(dist: &GaussianActionDistribution, rng: &mut R) -> Vec<f64> {
    dist.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist(mean: &[f64], logstd: &[f64]) -> GaussianActionDistribution {
        GaussianActionDistribution::new(mean.to_vec(), logstd.to_vec()).unwrap()
    }

    #[test]
    fn logprob_known_values() {
        let d = dist(&[0.0], &[0.0]);
        assert!((d.logprob(&[0.0]).unwrap() + 0.918_938_5).abs() < 1e-7);
        assert!((d.logprob(&[1.0]).unwrap() + 1.418_938_5).abs() < 1e-7);
        let d2 = dist(&[0.0, 0.0], &[2f64.ln(), 0.0]);
        assert!((d2.logprob(&[0.0, 0.0]).unwrap() + 2.531_024_2).abs() < 1e-7);
    }

    #[test]
    fn logprob_length_mismatch() {
        assert!(dist(&[0.0], &[0.0]).logprob(&[0.0, 1.0]).is_err());
        assert!(GaussianActionDistribution::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        let (mu, ls) = (0.3, -0.4f64);
        let d = dist(&[mu], &[ls]);
        let sigma = ls.exp();
        let (lo, hi) = (mu - 8.0 * sigma, mu + 8.0 * sigma);
        let n = 10_000;
        let h = (hi - lo) / n as f64;
        // trapezoid rule
        let mut total = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            total += w * d.logprob(&[lo + i as f64 * h]).unwrap().exp();
        }
        assert!((total * h - 1.0).abs() < 1e-4);
    }

    #[test]
    fn vanishing_noise_returns_mean() {
        let d = dist(&[0.4, -1.5], &[-20.0, -20.0]);
        let a = d.sample(&mut ChaCha8Rng::seed_from_u64(0));
        assert!((a[0] - 0.4).abs() < 1e-8 && (a[1] + 1.5).abs() < 1e-8);
    }

    #[test]
    fn sampling_is_seeded() {
        let d = dist(&[0.0, 1.0], &[0.0, -1.0]);
        let rng = ChaCha8Rng::seed_from_u64(99);
        assert_eq!(d.sample(&mut rng.clone()), d.sample(&mut rng.clone()));
    }

    #[test]
    fn sample_moments() {
        let d = dist(&[0.0], &[0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let xs: Vec<f64> = (0..10_000).map(|_| d.sample(&mut rng)[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.05);
        assert!((var.sqrt() - 1.0).abs() < 0.05);
    }
}
