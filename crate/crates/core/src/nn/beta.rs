//! Mixing-ratio sampling from Beta(α, α).

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

/// Draws λ ~ Beta(α, α), strictly inside (0, 1).
pub fn sample_lambda(alpha: f64, rng: &mut impl Rng) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    let beta = Beta::new(alpha, alpha).map_err(|e| Error::InvalidParameter(format!("alpha {alpha}: {e}")))?;
    loop {
        let lambda = beta.sample(rng);
        // tiny α can round a draw onto an endpoint
        if lambda > 0.0 && lambda < 1.0 {
            return Ok(lambda);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const DRAWS: usize = 100_000;

    fn moments(alpha: f64, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..DRAWS).map(|_| sample_lambda(alpha, &mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / DRAWS as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (DRAWS - 1) as f64;
        (mean, var)
    }

    #[test]
    fn alpha_one_is_uniform() {
        let (mean, var) = moments(1.0, 7);
        assert!((mean - 0.5).abs() < 0.005, "{mean}");
        assert!((var - 1.0 / 12.0).abs() < 0.003, "{var}");
    }

    #[test]
    fn symmetric_mean_for_any_alpha() {
        for (alpha, seed) in [(0.2, 1), (0.5, 2), (2.0, 3), (8.0, 4)] {
            let (mean, var) = moments(alpha, seed);
            let se = (var / DRAWS as f64).sqrt();
            assert!((mean - 0.5).abs() < 3.0 * se, "alpha={alpha}: mean {mean}, se {se}");
        }
    }

    #[test]
    fn alpha_two_variance() {
        // Var Beta(α, α) = α² / ((2α)² (2α + 1)) = 1/20 at α = 2
        let (_, var) = moments(2.0, 9);
        assert!((var - 0.05).abs() < 0.005, "{var}");
    }

    #[test]
    fn draws_stay_open_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10_000 {
            let l = sample_lambda(0.05, &mut rng).unwrap();
            assert!(l > 0.0 && l < 1.0);
        }
    }

    #[test]
    fn invalid_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for a in [0.0, -1.0, f64::NAN] {
            assert!(matches!(sample_lambda(a, &mut rng), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn reseeding_reproduces_sequence() {
        let seq = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| sample_lambda(2.0, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(seq(42), seq(42));
        assert_ne!(seq(42), seq(43));
    }
}
