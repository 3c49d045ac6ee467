//! Projective-measurement simulation with adaptive shot allocation.
//!
//! Each measurement time yields a Bernoulli estimate `d_n` of the survival
//! probability `p_11(t_n)`. Shots are spent in batches until the running
//! estimate satisfies `d_n sqrt(N_e) >= snr_target` (checked at batch
//! boundaries) or the shot cap is reached, so weak signals get more shots
//! and strong ones stop early.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{p11_components, ModelParams};
use crate::sampling::TimeGrid;

/// How many shots to spend on a single measurement point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShotPolicy {
    /// Spend batches until `d sqrt(N_e) >= snr_target`, capped at `max_shots`.
    Adaptive {
        snr_target: f64,
        max_shots: u32,
        batch: u32,
    },
    /// Always spend exactly `shots`.
    Fixed { shots: u32 },
}

impl Default for ShotPolicy {
    fn default() -> Self {
        Self::Adaptive {
            snr_target: 10.0,
            max_shots: 10_000,
            batch: 100,
        }
    }
}

impl ShotPolicy {
    /// Checks the policy's parameters before a simulation or campaign.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Adaptive { snr_target, max_shots, batch } => {
                if !snr_target.is_finite() || snr_target <= 0.0 {
                    return Err(Error::ParameterDomain(format!(
                        "snr_target = {snr_target}, must be finite and > 0"
                    )));
                }
                if batch == 0 || max_shots < batch {
                    return Err(Error::ParameterDomain(format!(
                        "need 1 <= batch <= max_shots, got batch = {batch}, max_shots = {max_shots}"
                    )));
                }
            }
            Self::Fixed { shots } => {
                if shots == 0 {
                    return Err(Error::ParameterDomain("shots must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// One simulated measurement: the success fraction and the shots it took.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub value: f64,
    pub shots: u32,
}

/// Simulates the survival measurement at a single time.
///
/// Draws Bernoulli samples with success probability `p_11(t)` from `rng`.
/// Under [`ShotPolicy::Adaptive`] the stopping rule is checked only at batch
/// boundaries, so the shot count is always a multiple of `batch` (the final
/// batch is truncated at `max_shots` when the cap is not a multiple).
pub fn simulate_point(
    params: &ModelParams,
    t: f64,
    rng: &mut impl Rng,
    policy: &ShotPolicy,
) -> Result<MeasurementRecord> {
    policy.validate()?;
    let p = p11_components(params).evaluate(params.omega(), t);
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&p), "p11 out of range: {p}");
    let p = p.clamp(0.0, 1.0);
    match *policy {
        ShotPolicy::Fixed { shots } => {
            let successes = draw(rng, p, shots);
            Ok(MeasurementRecord {
                value: successes as f64 / shots as f64,
                shots,
            })
        }
        ShotPolicy::Adaptive { snr_target, max_shots, batch } => {
            let mut successes = 0u32;
            let mut spent = 0u32;
            while spent < max_shots {
                let take = batch.min(max_shots - spent);
                successes += draw(rng, p, take);
                spent += take;
                let d = successes as f64 / spent as f64;
                if d * (spent as f64).sqrt() >= snr_target {
                    break;
                }
            }
            Ok(MeasurementRecord {
                value: successes as f64 / spent as f64,
                shots: spent,
            })
        }
    }
}

fn draw(rng: &mut impl Rng, p: f64, shots: u32) -> u32 {
    (0..shots).filter(|_| rng.random::<f64>() < p).count() as u32
}

/// A measured (or exact) signal on a time grid.
///
/// Values are success fractions in `[0, 1]`; `shots` is present for
/// simulated data and absent for exact traces.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVector {
    grid: TimeGrid,
    values: Vec<f64>,
    shots: Option<Vec<u32>>,
}

impl DataVector {
    pub fn new(grid: TimeGrid, values: Vec<f64>, shots: Option<Vec<u32>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidData(format!(
                "{} values for {} times",
                values.len(),
                grid.len()
            )));
        }
        for (n, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidData(format!(
                    "value[{n}] = {v}, must lie in [0, 1]"
                )));
            }
        }
        if let Some(s) = &shots {
            if s.len() != grid.len() {
                return Err(Error::InvalidData(format!(
                    "{} shot counts for {} times",
                    s.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self { grid, values, shots })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shots(&self) -> Option<&[u32]> {
        self.shots.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Noise-free survival signal `p_11` evaluated on the grid.
pub fn exact_trace(params: &ModelParams, grid: &TimeGrid) -> DataVector {
    let comps = p11_components(params);
    let values = grid
        .times()
        .iter()
        .map(|&t| comps.evaluate(params.omega(), t).clamp(0.0, 1.0))
        .collect();
    DataVector::new(grid.clone(), values, None).expect("exact trace is always valid")
}

/// Simulates the whole trace with one independent random stream per point.
///
/// Point `n` uses `ChaCha8` with the given seed and stream `n`, so results
/// do not depend on evaluation order and any subset of points can be
/// regenerated in isolation.
pub fn simulate_trace(
    params: &ModelParams,
    grid: &TimeGrid,
    seed: u64,
    policy: &ShotPolicy,
) -> Result<DataVector> {
    let mut values = Vec::with_capacity(grid.len());
    let mut shots = Vec::with_capacity(grid.len());
    for (n, &t) in grid.times().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        let rec = simulate_point(params, t, &mut rng, policy)?;
        values.push(rec.value);
        shots.push(rec.shots);
    }
    DataVector::new(grid.clone(), values, Some(shots))
}
