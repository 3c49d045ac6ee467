//! Rescaled power spectra of sampled signals and peak detection.
//!
//! The spectrum is evaluated on the frequency comb `omega_k = 2 pi k / T`
//! for `k = 0 ..= floor(N/2)`, where `T` is the grid's effective window
//! ([`TimeGrid::window`]). For non-uniform grids the transform is the direct
//! sum `X(omega) = sum_n d_n exp(-i omega t_n)` evaluated on the same comb.
//! Heights are compressed as `F = 20 log10(|X|^2 + 1)` after subtracting the
//! signal mean, so `F >= 0` and an empty spectrum sits at zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::TimeGrid;
use crate::simulator::DataVector;

/// Direct (non-uniform) discrete Fourier transform at arbitrary frequencies.
///
/// # Panics
/// Panics if `times` and `values` differ in length.
pub fn nudft(times: &[f64], values: &[f64], omegas: &[f64]) -> Vec<Complex64> {
    assert_eq!(times.len(), values.len(), "times and values must pair up");
    omegas
        .iter()
        .map(|&w| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&t, &d) in times.iter().zip(values) {
                let (s, c) = (w * t).sin_cos();
                acc += Complex64::new(d * c, -d * s);
            }
            acc
        })
        .collect()
}

/// A rescaled power spectrum on the grid comb.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    omegas: Vec<f64>,
    values: Vec<f64>,
    window: f64,
}

impl PowerSpectrum {
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Heights `F(omega_k)`, all non-negative.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The window `T` that defined the comb spacing `2 pi / T`.
    pub fn window(&self) -> f64 {
        self.window
    }

    /// Largest representable frequency, `2 pi floor(N/2) / T` (about `pi N / T`).
    pub fn max_omega(&self) -> f64 {
        *self.omegas.last().expect("spectrum has at least bins 0 and 1")
    }
}

/// Mean-subtracted rescaled power spectrum `F = 20 log10(|DFT[d - <d>]|^2 + 1)`.
pub fn power_spectrum(data: &DataVector) -> Result<PowerSpectrum> {
    spectrum_of(data.grid(), data.values())
}

/// As [`power_spectrum`], for a bare grid/value pair.
pub fn spectrum_of(grid: &TimeGrid, values: &[f64]) -> Result<PowerSpectrum> {
    if values.len() != grid.len() {
        return Err(Error::InvalidData(format!(
            "{} values for {} times",
            values.len(),
            grid.len()
        )));
    }
    let n = grid.len();
    let window = grid.window();
    let kmax = n / 2;
    let omegas: Vec<f64> = (0..=kmax)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / window)
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|&v| v - mean).collect();
    let coeffs = nudft(grid.times(), &centered, &omegas);
    let values = coeffs
        .iter()
        .map(|x| 20.0 * (x.norm_sqr() + 1.0).log10())
        .collect();
    Ok(PowerSpectrum { omegas, values, window })
}

/// Acceptance rules for [`find_peak`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakCriteria {
    /// Required height above the median of the positive-frequency bins.
    pub margin: f64,
    /// Bins at each end of the positive-frequency band where a maximum is
    /// treated as unresolved or folded rather than as a real peak.
    pub guard_bins: usize,
}

impl Default for PeakCriteria {
    fn default() -> Self {
        Self { margin: 10.0, guard_bins: 2 }
    }
}

/// A validated spectral peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub omega: f64,
    pub height: f64,
    /// Comb index of the peak bin.
    pub bin: usize,
}

/// Why no usable peak was reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoPeak {
    /// Fewer positive-frequency bins than the guard bands allow.
    TooFewBins,
    /// The global maximum sits against an edge of the band: the dominant
    /// frequency content is likely outside the representable range.
    EdgeDominated,
    /// The maximum does not clear the median by the required margin.
    BelowMargin,
}

impl std::fmt::Display for NoPeak {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::TooFewBins => write!(f, "spectrum has too few bins for a peak search"),
            Self::EdgeDominated => write!(
                f,
                "spectrum maximum sits at the edge of the representable range; \
                 the dominant frequency is likely outside it"
            ),
            Self::BelowMargin => write!(f, "no bin clears the spectrum median by the margin"),
        }
    }
}

/// Finds the global maximum over positive-frequency bins and judges it.
///
/// The maximum is rejected (rather than replaced by a lesser interior bin)
/// when it falls within `guard_bins` of either end of the band `1..=kmax`:
/// a maximum hugging the zero-frequency end is unresolved from the removed
/// mean, and one hugging the top of the comb is the signature of content at
/// or beyond the representable range folding back. Otherwise it must clear
/// the band median by `margin`.
pub fn find_peak(spectrum: &PowerSpectrum, criteria: &PeakCriteria) -> std::result::Result<SpectralPeak, NoPeak> {
    let values = spectrum.values();
    let kmax = values.len().saturating_sub(1);
    let guard = criteria.guard_bins;
    if kmax < 1 || kmax < 2 * guard {
        return Err(NoPeak::TooFewBins);
    }
    let band = &values[1..];
    let mut best = 1usize;
    for k in 2..=kmax {
        if values[k] > values[best] {
            best = k;
        }
    }
    // Guard bands: reject best < guard (near zero frequency, noting bin 0 is
    // excluded already) or best > kmax - guard (near the top of the comb).
    if best < guard || best > kmax - guard {
        return Err(NoPeak::EdgeDominated);
    }
    let med = median(band);
    if values[best] < med + criteria.margin {
        return Err(NoPeak::BelowMargin);
    }
    Ok(SpectralPeak {
        omega: spectrum.omegas()[best],
        height: values[best],
        bin: best,
    })
}

/// Median with the average-of-middle-two convention for even lengths.
pub(crate) fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in median input"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
