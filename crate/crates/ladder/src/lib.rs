//! Simulation, spectral estimation, and identifiability analysis for driven
//! three-level ladder systems.
//!
//! A resonantly driven three-level ladder reduces, in the rotating frame, to
//! an effective Hamiltonian with two couplings, equivalently a Rabi
//! frequency `Omega` and a mixing angle `alpha`. The survival probability of
//! the first level is a three-term cosine series in `Omega t` whose
//! amplitudes depend only on `x = cos^2(alpha)`, so a record of noisy
//! population measurements determines both parameters.
//!
//! The crate covers the full workflow:
//!
//! * [`model`]: closed-form propagator, populations, signal amplitudes;
//! * [`sampling`] and [`simulator`]: measurement grids and shot-noise
//!   simulation with reproducible per-point RNG streams;
//! * [`spectral`]: rescaled power spectrum on irregular grids and the peak
//!   rules used to seed the frequency search;
//! * [`bayes`]: the marginal log-likelihood of a trial frequency and the
//!   amplitude-to-mixing-weight fit;
//! * [`estimator`]: the end-to-end pipeline with harmonic disambiguation,
//!   ambiguity flagging, and an exhaustive-search safety net;
//! * [`identifiability`]: which Hamiltonians a diagonal measurement record
//!   can distinguish at all;
//! * [`bench`] and [`cli`]: reproducible campaigns and a file-based frontend.
//!
//! ```
//! use ladder::{estimate, exact_trace, uniform_grid, EstimatorConfig, ModelParams};
//!
//! let params = ModelParams::new(2.0, 0.6)?;
//! let data = exact_trace(&params, &uniform_grid(100.0, 256)?);
//! let est = estimate(&data, &EstimatorConfig::default())?;
//! assert!((est.omega3 - 2.0).abs() < 1e-6);
//! assert!(!est.flag_ambiguous);
//! # Ok::<(), ladder::Error>(())
//! ```

pub mod bayes;
pub mod bench;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod identifiability;
pub mod io;
pub mod model;
mod optim;
pub mod sampling;
pub mod simulator;
pub mod spectral;

pub use bayes::{alpha_from_x, amplitudes, fit_x, log_likelihood, XFit};
pub use bench::{
    generate_systems, run_benchmark, summarize, BenchmarkConfig, Execution, Mode, Plan,
    RunRecord, SummaryStats,
};
pub use error::{Error, Result};
pub use estimator::{
    disambiguate_by_amplitudes, error_metrics, estimate, exhaustive_search, likelihood_profile,
    refine, refined_error, seed_error, Estimate, EstimatorConfig, LikelihoodProfile, Method,
    RefinedCandidates,
};
pub use identifiability::{gauge_transform, indistinguishable, trace_deviation, SystemSpec};
pub use model::{ModelParams, SignalComponents};
pub use sampling::{stratified_grid, uniform_grid, SamplingPlan, TimeGrid};
pub use simulator::{
    exact_trace, simulate_point, simulate_trace, DataVector, MeasurementRecord, ShotPolicy,
};
pub use spectral::{
    find_peak, power_spectrum, spectrum_of, NoPeak, PeakCriteria, PowerSpectrum, SpectralPeak,
};
