//! Campaign harness: random test systems crossed with sampling plans,
//! estimated in bulk, with seed- and refined-error statistics.
//!
//! Every run draws its RNG streams from (master seed, run index), so a
//! campaign is bit-reproducible no matter how it is scheduled; records carry
//! wall-clock time for convenience but the CSV serialization excludes it.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate, refined_error, seed_error, Estimate, EstimatorConfig};
use crate::io::{csv_escape, fmt_f64};
use crate::model::ModelParams;
use crate::sampling::{stratified_grid, uniform_grid, TimeGrid};
use crate::simulator::{exact_trace, simulate_trace, DataVector, ShotPolicy};
use crate::spectral::median;

/// How a campaign lays out measurement times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Uniform,
    Stratified,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Uniform => write!(f, "uniform"),
            Self::Stratified => write!(f, "stratified"),
        }
    }
}

/// One sampling plan: a layout and a sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Plan {
    pub mode: Mode,
    pub n_t: usize,
}

fn default_n_systems() -> usize {
    10
}
fn default_omega_range() -> [f64; 2] {
    [0.0, std::f64::consts::TAU]
}
fn default_alpha_range() -> [f64; 2] {
    [0.0, std::f64::consts::FRAC_PI_2]
}
fn default_horizon() -> f64 {
    100.0
}
fn default_nt_list() -> Vec<usize> {
    vec![32, 64, 128, 256, 512, 1024]
}
fn default_modes() -> Vec<Mode> {
    vec![Mode::Uniform, Mode::Stratified]
}
fn default_noise() -> bool {
    true
}

/// Campaign definition; deserializes from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    #[serde(default = "default_n_systems")]
    pub n_systems: usize,
    /// Uniform draw range for the Rabi frequency, within [0, 2 pi].
    #[serde(default = "default_omega_range")]
    pub omega_range: [f64; 2],
    /// Uniform draw range for the mixing angle, within [0, pi / 2].
    #[serde(default = "default_alpha_range")]
    pub alpha_range: [f64; 2],
    /// Observation horizon shared by every plan.
    #[serde(rename = "T", default = "default_horizon")]
    pub t_horizon: f64,
    #[serde(default = "default_nt_list")]
    pub nt_list: Vec<usize>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    /// Explicit plan list; when present it replaces `modes` x `nt_list`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plans: Option<Vec<Plan>>,
    /// Simulate shot noise (true) or hand the estimator exact traces.
    #[serde(default = "default_noise")]
    pub noise: bool,
    #[serde(default)]
    pub shots: ShotPolicy,
    pub master_seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            n_systems: default_n_systems(),
            omega_range: default_omega_range(),
            alpha_range: default_alpha_range(),
            t_horizon: default_horizon(),
            nt_list: default_nt_list(),
            modes: default_modes(),
            plans: None,
            noise: default_noise(),
            shots: ShotPolicy::default(),
            master_seed: 0,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_systems == 0 {
            return Err(Error::ParameterDomain("n_systems must be at least 1".into()));
        }
        let tau = std::f64::consts::TAU;
        let half_pi = std::f64::consts::FRAC_PI_2;
        for (name, [lo, hi], max) in [
            ("omega_range", self.omega_range, tau),
            ("alpha_range", self.alpha_range, half_pi),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < 0.0 || hi > max + 1e-12 {
                return Err(Error::ParameterDomain(format!(
                    "{name} = [{lo}, {hi}] must satisfy 0 <= lo <= hi <= {max}"
                )));
            }
        }
        if !self.t_horizon.is_finite() || self.t_horizon <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "T = {}, must be > 0",
                self.t_horizon
            )));
        }
        let plans = self.plans();
        if plans.is_empty() {
            return Err(Error::ParameterDomain(
                "no sampling plans: modes and nt_list (or plans) must be non-empty".into(),
            ));
        }
        for plan in &plans {
            if plan.n_t < 4 {
                return Err(Error::ParameterDomain(format!(
                    "plan {} {} has fewer than 4 samples",
                    plan.mode, plan.n_t
                )));
            }
        }
        self.shots.validate()
    }

    /// The effective plan list: the explicit `plans` override when present,
    /// otherwise every mode crossed with every sample count.
    pub fn plans(&self) -> Vec<Plan> {
        match &self.plans {
            Some(plans) => plans.clone(),
            None => self
                .modes
                .iter()
                .flat_map(|&mode| self.nt_list.iter().map(move |&n_t| Plan { mode, n_t }))
                .collect(),
        }
    }
}

/// Draws `n_systems` parameter pairs uniformly from the configured ranges.
pub fn generate_systems(cfg: &BenchmarkConfig, rng: &mut impl Rng) -> Result<Vec<ModelParams>> {
    cfg.validate()?;
    let [olo, ohi] = cfg.omega_range;
    let [alo, ahi] = cfg.alpha_range;
    (0..cfg.n_systems)
        .map(|_| {
            let omega = olo + (ohi - olo) * rng.random::<f64>();
            let alpha = alo + (ahi - alo) * rng.random::<f64>();
            ModelParams::new(omega, alpha)
        })
        .collect()
}

/// Outcome of one (system, plan) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub omega_true: f64,
    pub alpha_true: f64,
    pub x_true: f64,
    pub mode: Mode,
    pub n_t: usize,
    pub t_horizon: f64,
    pub grid_seed: u64,
    pub sim_seed: u64,
    /// Parameters near the edge of the identifiable domain (mixing weight
    /// within 0.02 of 0 or 1, or fewer than two cycles in the window).
    pub degenerate: bool,
    pub estimate: Option<Estimate>,
    pub error: Option<String>,
    /// Relative seed error against the closer line, when a seed exists.
    pub seed_error: Option<f64>,
    /// Relative error of the final frequency against the fundamental.
    pub refined_error: Option<f64>,
    /// Seed within 1% of a true line.
    pub success: bool,
    /// Wall-clock cost; informational only, never serialized to CSV.
    #[serde(skip)]
    pub wall_ms: f64,
}

/// How to schedule a campaign's runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

fn run_one(
    cfg: &BenchmarkConfig,
    systems: &[ModelParams],
    plans: &[Plan],
    run: usize,
) -> RunRecord {
    let started = Instant::now();
    let params = &systems[run / plans.len()];
    let plan = plans[run % plans.len()];
    let mut seeder = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    seeder.set_stream(run as u64 + 1);
    let grid_seed: u64 = seeder.random();
    let sim_seed: u64 = seeder.random();

    let omega = params.omega();
    let x = params.x();
    let degenerate =
        x < 0.02 || x > 0.98 || omega < 4.0 * std::f64::consts::PI / cfg.t_horizon;

    let mut record = RunRecord {
        run,
        omega_true: omega,
        alpha_true: params.alpha(),
        x_true: x,
        mode: plan.mode,
        n_t: plan.n_t,
        t_horizon: cfg.t_horizon,
        grid_seed,
        sim_seed,
        degenerate,
        estimate: None,
        error: None,
        seed_error: None,
        refined_error: None,
        success: false,
        wall_ms: 0.0,
    };

    let outcome = (|| -> Result<Estimate> {
        let grid: TimeGrid = match plan.mode {
            Mode::Uniform => uniform_grid(cfg.t_horizon, plan.n_t)?,
            Mode::Stratified => stratified_grid(cfg.t_horizon, plan.n_t, grid_seed)?,
        };
        let data: DataVector = if cfg.noise {
            simulate_trace(params, &grid, sim_seed, &cfg.shots)?
        } else {
            exact_trace(params, &grid)
        };
        estimate(&data, &EstimatorConfig::default())
    })();

    match outcome {
        Ok(est) => {
            if omega > 0.0 {
                record.seed_error = est.omega0.map(|w| seed_error(w, omega));
                record.refined_error = Some(refined_error(est.omega3, omega));
            }
            record.success = record.seed_error.is_some_and(|e| e < 0.01);
            record.estimate = Some(est);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record.wall_ms = started.elapsed().as_secs_f64() * 1e3;
    record
}

/// Runs the whole campaign and summarizes it. Records come back sorted by
/// run index and are identical under either execution mode.
pub fn run_benchmark(
    cfg: &BenchmarkConfig,
    execution: Execution,
) -> Result<(Vec<RunRecord>, SummaryStats)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    rng.set_stream(0);
    let systems = generate_systems(cfg, &mut rng)?;
    let plans = cfg.plans();
    let total = systems.len() * plans.len();
    let mut records: Vec<RunRecord> = match execution {
        Execution::Serial => (0..total)
            .map(|run| run_one(cfg, &systems, &plans, run))
            .collect(),
        Execution::Parallel => (0..total)
            .into_par_iter()
            .map(|run| run_one(cfg, &systems, &plans, run))
            .collect(),
    };
    records.sort_by_key(|r| r.run);
    let summary = summarize(&records);
    Ok((records, summary))
}

/// Per-plan slice of the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub mode: Mode,
    pub n_t: usize,
    pub total: usize,
    pub successes: usize,
    pub median_seed_error: Option<f64>,
    pub median_refined_error: Option<f64>,
}

/// Campaign-level counts and medians (medians over successful runs only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub total: usize,
    pub successes: usize,
    pub flagged: usize,
    pub failed: usize,
    pub degenerate: usize,
    pub median_seed_error: Option<f64>,
    pub median_refined_error: Option<f64>,
    pub plans: Vec<PlanStats>,
}

fn median_of(values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(median(&values))
    }
}

fn stats_for<'a>(records: impl Iterator<Item = &'a RunRecord>) -> (usize, usize, Option<f64>, Option<f64>) {
    let mut total = 0;
    let mut seed_errs = Vec::new();
    let mut refined_errs = Vec::new();
    for r in records {
        total += 1;
        if r.success {
            seed_errs.extend(r.seed_error);
            refined_errs.extend(r.refined_error);
        }
    }
    (total, seed_errs.len(), median_of(seed_errs), median_of(refined_errs))
}

/// Aggregates records into counts and success medians.
pub fn summarize(records: &[RunRecord]) -> SummaryStats {
    let (total, successes, median_seed_error, median_refined_error) = stats_for(records.iter());
    let mut plan_keys: Vec<(Mode, usize)> = Vec::new();
    for r in records {
        if !plan_keys.contains(&(r.mode, r.n_t)) {
            plan_keys.push((r.mode, r.n_t));
        }
    }
    let plans = plan_keys
        .into_iter()
        .map(|(mode, n_t)| {
            let (total, successes, med_seed, med_refined) =
                stats_for(records.iter().filter(|r| r.mode == mode && r.n_t == n_t));
            PlanStats {
                mode,
                n_t,
                total,
                successes,
                median_seed_error: med_seed,
                median_refined_error: med_refined,
            }
        })
        .collect();
    SummaryStats {
        total,
        successes,
        flagged: records
            .iter()
            .filter(|r| r.estimate.as_ref().is_some_and(|e| e.flag_ambiguous))
            .count(),
        failed: records.iter().filter(|r| r.error.is_some()).count(),
        degenerate: records.iter().filter(|r| r.degenerate).count(),
        median_seed_error,
        median_refined_error,
        plans,
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Flat CSV rendering of campaign records (wall time excluded so repeated
/// campaigns compare bytewise).
pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "run,omega_true,alpha_true,x_true,mode,n_t,T,grid_seed,sim_seed,degenerate,\
         omega0,omega1,p1,omega2,p2,omega3,a0,a1,a2,x_hat,alpha_hat,residual,\
         flag_ambiguous,method,seed_error,refined_error,success,error\n",
    );
    for r in records {
        let e = r.estimate.as_ref();
        let row = [
            r.run.to_string(),
            fmt_f64(r.omega_true),
            fmt_f64(r.alpha_true),
            fmt_f64(r.x_true),
            r.mode.to_string(),
            r.n_t.to_string(),
            fmt_f64(r.t_horizon),
            r.grid_seed.to_string(),
            r.sim_seed.to_string(),
            r.degenerate.to_string(),
            opt_f64(e.and_then(|e| e.omega0)),
            opt_f64(e.map(|e| e.omega1)),
            opt_f64(e.map(|e| e.p1)),
            opt_f64(e.map(|e| e.omega2)),
            opt_f64(e.map(|e| e.p2)),
            opt_f64(e.map(|e| e.omega3)),
            opt_f64(e.map(|e| e.a0)),
            opt_f64(e.map(|e| e.a1)),
            opt_f64(e.map(|e| e.a2)),
            opt_f64(e.map(|e| e.x_hat)),
            opt_f64(e.map(|e| e.alpha_hat)),
            opt_f64(e.map(|e| e.residual)),
            e.map(|e| e.flag_ambiguous.to_string()).unwrap_or_default(),
            e.map(|e| e.method.to_string()).unwrap_or_default(),
            opt_f64(r.seed_error),
            opt_f64(r.refined_error),
            r.success.to_string(),
            csv_escape(r.error.as_deref().unwrap_or("")),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
