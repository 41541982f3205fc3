//! Means with autocorrelation-aware error bars.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Number of effectively independent samples.
    pub n_eff: f64,
    /// Integrated autocorrelation time in units of the sample spacing.
    pub tau_int: f64,
    pub samples: usize,
}

impl MCEstimate {
    /// A deterministic value with no error.
    pub fn exact(value: f64) -> Self {
        MCEstimate { mean: value, stderr: 0.0, n_eff: f64::INFINITY, tau_int: 0.5, samples: 0 }
    }

    /// Estimate from a correlated series.
    ///
    /// The error comes from block means with blocks of about 4τ samples;
    /// with fewer than 20 blocks it falls back to `sqrt(2τ var / n)`.
    pub fn from_series(x: &[f64]) -> Self {
        let n = x.len();
        if n == 0 {
            return MCEstimate { mean: f64::NAN, stderr: f64::NAN, n_eff: 0.0, tau_int: f64::NAN, samples: 0 };
        }
        let mean = x.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return MCEstimate { mean, stderr: f64::INFINITY, n_eff: 1.0, tau_int: 0.5, samples: 1 };
        }
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if var == 0.0 {
            return MCEstimate { mean, stderr: 0.0, n_eff: n as f64, tau_int: 0.5, samples: n };
        }
        let tau = integrated_autocorrelation(x);
        let block = ((4.0 * tau).ceil() as usize).max(1);
        let blocks = n / block;
        let stderr = if blocks >= 20 {
            let means: Vec<f64> =
                x.chunks_exact(block).map(|c| c.iter().sum::<f64>() / block as f64).collect();
            let bm = means.iter().sum::<f64>() / blocks as f64;
            let bv = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (blocks - 1) as f64;
            (bv / blocks as f64).sqrt()
        } else {
            (2.0 * tau * var / n as f64).sqrt()
        };
        let n_eff = (var / (stderr * stderr)).min(n as f64);
        MCEstimate { mean, stderr, n_eff, tau_int: tau, samples: n }
    }

    /// Pools estimates of the same quantity from independent chains.
    pub fn combine(parts: &[MCEstimate]) -> Self {
        let total: usize = parts.iter().map(|p| p.samples).sum();
        if parts.len() == 1 || total == 0 {
            return parts.first().copied().unwrap_or(MCEstimate::exact(f64::NAN));
        }
        let w = |p: &MCEstimate| p.samples as f64 / total as f64;
        let mean = parts.iter().map(|p| w(p) * p.mean).sum();
        let stderr = parts.iter().map(|p| (w(p) * p.stderr).powi(2)).sum::<f64>().sqrt();
        let n_eff = parts.iter().map(|p| p.n_eff).sum();
        let tau_int = parts.iter().map(|p| w(p) * p.tau_int).sum();
        MCEstimate { mean, stderr, n_eff, tau_int, samples: total }
    }

    /// |mean − target| in units of the standard error (0 when both vanish).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

/// τ = 1/2 + Σ_{t=1}^{W} ρ(t) with the self-consistent window W ≥ 6τ.
pub fn integrated_autocorrelation(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return 0.5;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c0 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for t in 1..n / 2 {
        let ct = x[..n - t].iter().zip(&x[t..]).map(|(a, b)| (a - mean) * (b - mean)).sum::<f64>() / n as f64;
        tau += ct / c0;
        if t as f64 >= 6.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn independent_samples_have_unit_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..20000).map(|_| rng.random::<f64>()).collect();
        let e = MCEstimate::from_series(&x);
        assert!((e.tau_int - 0.5).abs() < 0.1);
        let exact_se = (1.0f64 / 12.0 / 20000.0).sqrt();
        assert!((e.stderr / exact_se - 1.0).abs() < 0.25);
        assert!(e.z_score(0.5) < 4.0);
    }

    #[test]
    fn ar1_series_gets_the_right_tau() {
        // x_t = ρ x_{t−1} + noise has τ = (1 + ρ) / (2 (1 − ρ)).
        let rho = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut v = 0.0;
        let x: Vec<f64> = (0..200000)
            .map(|_| {
                v = rho * v + rng.random::<f64>() - 0.5;
                v
            })
            .collect();
        let tau = integrated_autocorrelation(&x);
        assert!((tau - 4.5).abs() < 0.6, "tau {tau}");
    }

    #[test]
    fn combining_halves() {
        let x: Vec<f64> = (0..1000).map(|i| (i % 7) as f64).collect();
        let a = MCEstimate::from_series(&x[..500]);
        let b = MCEstimate::from_series(&x[500..]);
        let c = MCEstimate::combine(&[a, b]);
        let whole = x.iter().sum::<f64>() / 1000.0;
        assert!((c.mean - whole).abs() < 1e-12);
        assert_eq!(c.samples, 1000);
    }
}
