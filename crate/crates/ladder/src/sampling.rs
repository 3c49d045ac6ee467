//! Measurement-time grids: uniform, stratified-random, or caller-supplied.
//!
//! Uniform grids place `N` samples at `t_n = n T / N`. Stratified grids
//! jitter each sample inside its stratum, `t_n = (n + u_n) T / N` with
//! `u_n` uniform in `[0, 1)`, which breaks the exact aliasing of uniform
//! sampling while keeping near-even coverage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing set of non-negative measurement times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Validates and wraps explicit times: finite, non-negative, strictly
    /// increasing, at least two of them.
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "{} samples, need at least 2",
                times.len()
            )));
        }
        for (n, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "time[{n}] = {t}, must be finite and >= 0"
                )));
            }
            if n > 0 && t <= times[n - 1] {
                return Err(Error::InvalidGrid(format!(
                    "times must be strictly increasing (time[{}] = {} then time[{n}] = {t})",
                    n - 1,
                    times[n - 1]
                )));
            }
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor requires at least two samples
    }

    /// Observation span `t_max - t_min`.
    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Effective periodic window `T = span * N / (N - 1)`, i.e. the span
    /// extended by one mean gap. A uniform grid `t_n = n T0 / N` recovers
    /// `T0` exactly, so frequency bins land at `2 pi k / T0`.
    pub fn window(&self) -> f64 {
        let n = self.times.len() as f64;
        self.span() * n / (n - 1.0)
    }
}

/// Uniform grid `t_n = n T / N` for `n = 0 .. N-1`.
pub fn uniform_grid(horizon: f64, count: usize) -> Result<TimeGrid> {
    check_plan(horizon, count)?;
    let step = horizon / count as f64;
    TimeGrid::new((0..count).map(|n| n as f64 * step).collect())
}

/// Stratified grid `t_n = (n + u_n) T / N` with seeded jitter `u_n` in `[0, 1)`.
///
/// The same seed always reproduces the same grid.
pub fn stratified_grid(horizon: f64, count: usize, seed: u64) -> Result<TimeGrid> {
    check_plan(horizon, count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = horizon / count as f64;
    TimeGrid::new(
        (0..count)
            .map(|n| (n as f64 + rng.random::<f64>()) * step)
            .collect(),
    )
}

fn check_plan(horizon: f64, count: usize) -> Result<()> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidGrid(format!(
            "horizon = {horizon}, must be finite and > 0"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidGrid(format!("{count} samples, need at least 2")));
    }
    Ok(())
}

/// A recipe for building a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SamplingPlan {
    Uniform { horizon: f64, count: usize },
    Stratified { horizon: f64, count: usize, seed: u64 },
    Explicit { times: Vec<f64> },
}

impl SamplingPlan {
    pub fn build(&self) -> Result<TimeGrid> {
        match self {
            Self::Uniform { horizon, count } => uniform_grid(*horizon, *count),
            Self::Stratified { horizon, count, seed } => stratified_grid(*horizon, *count, *seed),
            Self::Explicit { times } => TimeGrid::new(times.clone()),
        }
    }
}
