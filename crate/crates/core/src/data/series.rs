use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Sliding windows over a chronological series: sample `t` has features
/// `prices[t..t + window]` and target `prices[t + window]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSeries {
    /// `[samples, window]`
    pub x: Tensor,
    /// `[samples, 1]`
    pub y: Tensor,
    /// Position of each target in the source series.
    pub target_index: Vec<usize>,
}

impl WindowedSeries {
    pub fn len(&self) -> usize {
        self.target_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target_index.is_empty()
    }
}

pub fn window_series(prices: &[f64], window: usize) -> Result<WindowedSeries> {
    window_with_offset(prices, window, 0)
}

fn window_with_offset(prices: &[f64], window: usize, offset: usize) -> Result<WindowedSeries> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be >= 1".into()));
    }
    if prices.len() <= window {
        return Err(Error::Empty(format!(
            "series of length {} is too short for window {window}",
            prices.len()
        )));
    }
    let n = prices.len() - window;
    let mut x = Vec::with_capacity(n * window);
    for t in 0..n {
        x.extend_from_slice(&prices[t..t + window]);
    }
    Ok(WindowedSeries {
        x: Tensor::matrix(n, window, x)?,
        y: Tensor::column(prices[window..].to_vec())?,
        target_index: (window + offset..prices.len() + offset).collect(),
    })
}

/// Chronological split: the first `1 - test_fraction` of the prices form the
/// training segment, the rest the test segment, and each segment is windowed on
/// its own so that no window straddles the boundary.
pub fn chronological_split(
    prices: &[f64],
    window: usize,
    test_fraction: f64,
) -> Result<(WindowedSeries, WindowedSeries)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("test_fraction must be in (0, 1), got {test_fraction}")));
    }
    let boundary = prices.len() - (prices.len() as f64 * test_fraction).round() as usize;
    let train = window_with_offset(&prices[..boundary], window, 0)?;
    let test = window_with_offset(&prices[boundary..], window, boundary)?;
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Trend,
    Shock,
    HighVol,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesKind::Trend => "trend",
            SeriesKind::Shock => "shock",
            SeriesKind::HighVol => "high_vol",
        })
    }
}

impl FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trend" => Ok(SeriesKind::Trend),
            "shock" => Ok(SeriesKind::Shock),
            "high_vol" => Ok(SeriesKind::HighVol),
            other => Err(Error::InvalidParameter(format!(
                "unknown series kind `{other}` (expected trend, shock or high_vol)"
            ))),
        }
    }
}

pub const DRIFT: f64 = 0.0004;
pub const BASE_VOL: f64 = 0.01;
pub const HIGH_VOL: f64 = 0.08;
pub const SHOCK_FACTOR: f64 = 0.65;
/// Per-step probability of switching volatility regime in `high_vol`.
pub const REGIME_SWITCH: f64 = 0.02;
const START_PRICE: f64 = 100.0;

/// Geometric random walk `p_t = p_{t-1} exp(drift + vol ε_t)` starting at 100.
/// `shock` multiplies the level by 0.65 at `floor(0.7 n)`; `high_vol` switches
/// between volatilities 0.01 and 0.08 as a two-state Markov chain.
pub fn synthetic_series(kind: SeriesKind, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n <= 100 {
        return Err(Error::InvalidParameter(format!("synthetic series needs n > 100, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shock_at = (0.7 * n as f64).floor() as usize;
    let mut high = false;
    let mut prices = Vec::with_capacity(n);
    let mut p = START_PRICE;
    prices.push(p);
    for t in 1..n {
        let vol = match kind {
            SeriesKind::HighVol => {
                if rng.random::<f64>() < REGIME_SWITCH {
                    high = !high;
                }
                if high { HIGH_VOL } else { BASE_VOL }
            }
            _ => BASE_VOL,
        };
        let eps: f64 = rng.sample(StandardNormal);
        p *= (DRIFT + vol * eps).exp();
        if kind == SeriesKind::Shock && t == shock_at {
            p *= SHOCK_FACTOR;
        }
        prices.push(p);
    }
    Ok(prices)
}
