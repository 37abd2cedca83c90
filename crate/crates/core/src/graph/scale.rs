use crate::error::{Error, Result};

pub const BISECTION_ITERS: usize = 64;
pub const BISECTION_TOL: f64 = 1e-5;
pub const SIGMA_MAX: f64 = 1e3;
/// Lower clamp as a fraction of the mean neighbour distance.
pub const SIGMA_MIN_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalScale {
    pub rho: f64,
    pub sigma: f64,
}

/// `exp(-max(0, d - rho) / sigma)`.
pub fn directional_probability(d: f64, rho: f64, sigma: f64) -> f64 {
    (-(d - rho).max(0.0) / sigma).exp()
}

pub fn membership_sum(distances: &[f64], rho: f64, sigma: f64) -> f64 {
    distances.iter().map(|&d| directional_probability(d, rho, sigma)).sum()
}

/// Clamp interval for sigma given a point's neighbour distances.
pub fn sigma_bounds(distances: &[f64]) -> (f64, f64) {
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    // all-duplicate neighbourhoods have mean 0; fall back to an absolute floor
    let lo = if mean > 0.0 { SIGMA_MIN_FRACTION * mean } else { SIGMA_MIN_FRACTION };
    (lo.min(SIGMA_MAX), SIGMA_MAX)
}

/// `rho` is the nearest distance; `sigma` is found by bisection so that the
/// memberships of the `k` neighbours sum to `log2(k)`, clamped to
/// [`sigma_bounds`]. The sum increases with sigma, so a target below the sum at
/// the lower clamp returns the lower clamp.
pub fn fit_local_scale(distances: &[f64], k: usize) -> Result<LocalScale> {
    if distances.len() != k || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "expected {k} neighbour distances, got {}",
            distances.len()
        )));
    }
    let rho = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let target = (k as f64).log2();
    let (mut lo, mut hi) = sigma_bounds(distances);
    if membership_sum(distances, rho, lo) >= target {
        return Ok(LocalScale { rho, sigma: lo });
    }
    if membership_sum(distances, rho, hi) <= target {
        return Ok(LocalScale { rho, sigma: hi });
    }
    let mut sigma = 0.5 * (lo + hi);
    for _ in 0..BISECTION_ITERS {
        sigma = 0.5 * (lo + hi);
        let s = membership_sum(distances, rho, sigma);
        if (s - target).abs() < BISECTION_TOL {
            break;
        }
        if s > target {
            hi = sigma;
        } else {
            lo = sigma;
        }
    }
    Ok(LocalScale { rho, sigma })
}
