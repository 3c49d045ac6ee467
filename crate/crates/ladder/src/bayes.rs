//! Bayesian single-frequency log-likelihood for the survival signal.
//!
//! The model family is the three-term cosine basis
//! `g0 = 1`, `g1 = cos(omega t)`, `g2 = cos(2 omega t)` evaluated on the
//! measurement times. After projecting the data onto the orthonormalized
//! span of the basis, the marginal posterior of the frequency reduces to
//!
//! ```text
//! P(omega | d) = ((m - N) / 2) log10(1 - m <h^2> / (N <d^2>))
//! ```
//!
//! with `m = 3` basis functions, `<h^2>` the mean squared orthonormal
//! projection and `<d^2>` the raw mean square of the data. The argument of
//! the logarithm is `1 - |P_span d|^2 / |d|^2`, which lies in `[0, 1]`; it
//! saturates at `1e-14`, just above the cancellation noise of the energy
//! sums, so every numerically exact fit maps to one finite ceiling value
//! instead of comparing by rounding garbage.

use nalgebra::{Matrix3, Matrix3xX, Vector3};

use crate::error::{Error, Result};
use crate::model::SignalComponents;
use crate::optim::maximize;
use crate::simulator::DataVector;

/// Number of basis functions; the likelihood always normalizes by this,
/// even when rank loss discards eigendirections.
pub const BASIS_COUNT: usize = 3;

/// Relative eigenvalue cutoff below which a basis direction is discarded.
pub const RANK_EPS: f64 = 1e-10;

/// Smallest resolvable residual fraction: `1 - fit` is a difference of
/// O(1) energy ratios, so anything below ~1e-14 is indistinguishable from
/// an exact fit and saturates to the same likelihood ceiling.
const DEFICIT_FLOOR: f64 = 1e-14;

/// The design matrix with rows `1`, `cos(omega t_n)`, `cos(2 omega t_n)`.
pub fn design_matrix(omega: f64, times: &[f64]) -> Matrix3xX<f64> {
    Matrix3xX::from_fn(times.len(), |r, n| {
        let t = times[n];
        match r {
            0 => 1.0,
            1 => (omega * t).cos(),
            _ => (2.0 * omega * t).cos(),
        }
    })
}

/// Accumulated second moments of the basis against the data.
struct Moments {
    s: Matrix3<f64>,
    gd: Vector3<f64>,
    d2: f64,
    n: usize,
}

fn moments(omega: f64, times: &[f64], values: &[f64]) -> Moments {
    let (mut s01, mut s02, mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut g0, mut g1, mut g2, mut d2) = (0.0, 0.0, 0.0, 0.0);
    for (&t, &d) in times.iter().zip(values) {
        let c1 = (omega * t).cos();
        let c2 = (2.0 * omega * t).cos();
        s01 += c1;
        s02 += c2;
        s11 += c1 * c1;
        s12 += c1 * c2;
        s22 += c2 * c2;
        g0 += d;
        g1 += d * c1;
        g2 += d * c2;
        d2 += d * d;
    }
    let n = times.len();
    Moments {
        s: Matrix3::new(n as f64, s01, s02, s01, s11, s12, s02, s12, s22),
        gd: Vector3::new(g0, g1, g2),
        d2,
        n,
    }
}

/// The data projected onto the orthonormalized basis span.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Retained Gram eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Rows of the whitening map `V = diag(lambda^-1/2) E^T`, one per
    /// retained direction.
    pub v: Vec<[f64; 3]>,
    /// Orthonormal projection coefficients `h = V G d`.
    pub h: Vec<f64>,
}

impl Projection {
    fn from_moments(m: &Moments) -> Result<Self> {
        if m.n <= BASIS_COUNT {
            return Err(Error::InsufficientData(m.n));
        }
        let se = m.s.symmetric_eigen();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
        let lam_max = se.eigenvalues[order[0]];
        let mut eigenvalues = Vec::new();
        let mut v = Vec::new();
        let mut h = Vec::new();
        for &idx in &order {
            let lam = se.eigenvalues[idx];
            if lam < RANK_EPS * lam_max {
                continue; // numerically null direction: excluded from the span
            }
            let e = se.eigenvectors.column(idx);
            let inv_sqrt = 1.0 / lam.sqrt();
            v.push([e[0] * inv_sqrt, e[1] * inv_sqrt, e[2] * inv_sqrt]);
            h.push(inv_sqrt * e.dot(&m.gd));
            eigenvalues.push(lam);
        }
        Ok(Self { eigenvalues, v, h })
    }

    /// Number of retained directions (3 unless the basis degenerates).
    pub fn rank(&self) -> usize {
        self.h.len()
    }

    /// `|P_span d|^2`, the energy captured by the basis.
    pub fn fitted_energy(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum()
    }

    /// Basis amplitudes `a = V^T h`, the minimum-norm least-squares solution
    /// of `G^T a = d` (discarded directions contribute nothing).
    pub fn amplitudes(&self) -> [f64; 3] {
        let mut a = [0.0f64; 3];
        for (row, &hm) in self.v.iter().zip(&self.h) {
            for j in 0..3 {
                a[j] += hm * row[j];
            }
        }
        a
    }
}

/// Projects `values` onto the span of the design matrix `g`.
pub fn orthonormal_projection(g: &Matrix3xX<f64>, values: &[f64]) -> Result<Projection> {
    if g.ncols() != values.len() {
        return Err(Error::InvalidData(format!(
            "{} values for a design matrix with {} columns",
            values.len(),
            g.ncols()
        )));
    }
    let s = g * g.transpose();
    let mut gd = Vector3::zeros();
    for (n, &d) in values.iter().enumerate() {
        for r in 0..3 {
            gd[r] += g[(r, n)] * d;
        }
    }
    let d2 = values.iter().map(|d| d * d).sum();
    Projection::from_moments(&Moments { s, gd, d2, n: values.len() })
}

fn log_likelihood_from(m: &Moments) -> Result<f64> {
    if m.n <= BASIS_COUNT {
        return Err(Error::InsufficientData(m.n));
    }
    if m.d2 == 0.0 {
        return Err(Error::UndefinedLikelihood);
    }
    let proj = Projection::from_moments(m)?;
    let fit_fraction = proj.fitted_energy() / m.d2;
    debug_assert!(
        (-1e-12..=1.0 + 1e-12).contains(&fit_fraction),
        "fitted fraction {fit_fraction} outside [0, 1]"
    );
    let arg = (1.0 - fit_fraction).clamp(DEFICIT_FLOOR, 1.0);
    Ok((BASIS_COUNT as f64 - m.n as f64) / 2.0 * arg.log10())
}

/// Log-likelihood of `omega` given the data; non-negative, larger is better.
pub fn log_likelihood(omega: f64, data: &DataVector) -> Result<f64> {
    log_likelihood_from(&moments(omega, data.times(), data.values()))
}

/// Least-squares basis amplitudes `(a0, a1, a2)` at the given frequency.
pub fn amplitudes(omega: f64, data: &DataVector) -> Result<[f64; 3]> {
    if data.len() <= BASIS_COUNT {
        return Err(Error::InsufficientData(data.len()));
    }
    Ok(Projection::from_moments(&moments(omega, data.times(), data.values()))?.amplitudes())
}

/// Result of matching fitted amplitudes against the one-parameter family
/// `a(x) = (1 - 2x + 1.5 x^2, 2x(1 - x), x^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XFit {
    pub x: f64,
    /// Euclidean distance between `a(x)` and the fitted amplitudes; large
    /// values mean the data are inconsistent with the signal family.
    pub residual: f64,
}

/// Finds the mixing weight whose amplitude pattern best matches `a_hat`.
pub fn fit_x(a_hat: [f64; 3]) -> XFit {
    let dist = |x: f64| {
        let c = SignalComponents::from_x(x).expect("search stays in [0, 1]");
        let d0 = c.a0 - a_hat[0];
        let d1 = c.a1 - a_hat[1];
        let d2 = c.a2 - a_hat[2];
        (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
    };
    let (x, neg) = maximize(|x| -dist(x), 0.0, 1.0, 65, 1e-12);
    XFit { x, residual: -neg }
}

/// The mixing angle `alpha = arccos(sqrt(x))`, in `[0, pi/2]`.
pub fn alpha_from_x(x: f64) -> f64 {
    x.clamp(0.0, 1.0).sqrt().acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::sampling::uniform_grid;
    use crate::simulator::exact_trace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trace(omega: f64, x: f64, horizon: f64, count: usize) -> DataVector {
        let alpha = alpha_from_x(x);
        let params = ModelParams::new(omega, alpha).unwrap();
        exact_trace(&params, &uniform_grid(horizon, count).unwrap())
    }

    #[test]
    fn gram_matrix_is_near_diagonal_on_long_uniform_grids() {
        let grid = uniform_grid(100.0, 1000).unwrap();
        let g = design_matrix(2.0, grid.times());
        let s = &g * g.transpose();
        let expect = [1000.0, 500.0, 500.0];
        for r in 0..3 {
            for c in 0..3 {
                if r == c {
                    assert!((s[(r, c)] - expect[r]).abs() < 25.0, "s[{r}{r}] = {}", s[(r, r)]);
                } else {
                    assert!(s[(r, c)].abs() < 25.0, "s[{r}{c}] = {}", s[(r, c)]);
                }
            }
        }
    }

    #[test]
    fn whitening_produces_an_identity_gram() {
        let grid = uniform_grid(37.0, 200).unwrap();
        let d = trace(1.7, 0.35, 37.0, 200);
        let g = design_matrix(1.7, grid.times());
        let proj = orthonormal_projection(&g, d.values()).unwrap();
        assert_eq!(proj.rank(), 3);
        let s = &g * g.transpose();
        for (i, vi) in proj.v.iter().enumerate() {
            for (j, vj) in proj.v.iter().enumerate() {
                let mut acc = 0.0;
                for r in 0..3 {
                    for c in 0..3 {
                        acc += vi[r] * s[(r, c)] * vj[c];
                    }
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-10, "VSV^T[{i}{j}] = {acc}");
            }
        }
    }

    #[test]
    fn noiseless_amplitudes_recover_the_components() {
        let d = trace(2.0, 0.5, 100.0, 256);
        let a = amplitudes(2.0, &d).unwrap();
        assert!((a[0] - 0.375).abs() < 1e-8);
        assert!((a[1] - 0.5).abs() < 1e-8);
        assert!((a[2] - 0.125).abs() < 1e-8);
    }

    #[test]
    fn amplitudes_solve_least_squares() {
        // Full-rank case: compare against the normal equations.
        let grid = uniform_grid(50.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let values: Vec<f64> = (0..64).map(|_| rng.random::<f64>()).collect();
        let data = DataVector::new(grid.clone(), values.clone(), None).unwrap();
        let a = amplitudes(1.3, &data).unwrap();
        let g = design_matrix(1.3, grid.times());
        let s = &g * g.transpose();
        let mut gd = Vector3::zeros();
        for (n, &d) in values.iter().enumerate() {
            for r in 0..3 {
                gd[r] += g[(r, n)] * d;
            }
        }
        let direct = s.lu().solve(&gd).unwrap();
        for j in 0..3 {
            assert!((a[j] - direct[j]).abs() < 1e-9, "a[{j}]");
        }
    }

    #[test]
    fn zero_frequency_degenerates_gracefully() {
        // At omega = 0 all three bases collapse to the constant: rank 1 and
        // the minimum-norm amplitudes share the mean across the three.
        let grid = uniform_grid(10.0, 32).unwrap();
        let data = DataVector::new(grid, vec![0.6; 32], None).unwrap();
        let g = design_matrix(0.0, data.times());
        let proj = orthonormal_projection(&g, data.values()).unwrap();
        assert_eq!(proj.rank(), 1);
        let a = proj.amplitudes();
        for j in 0..3 {
            assert!((a[j] - 0.2).abs() < 1e-10, "a[{j}] = {}", a[j]);
        }
        assert!(log_likelihood(0.0, &data).unwrap().is_finite());
    }

    #[test]
    fn likelihood_peaks_at_the_true_frequency() {
        let d = trace(2.0, 0.5, 100.0, 256);
        let at_truth = log_likelihood(2.0, &d).unwrap();
        for wrong in [0.4, 1.3, 1.9, 2.1, 2.9, 3.6] {
            let p = log_likelihood(wrong, &d).unwrap();
            assert!(at_truth > p + 100.0, "P({wrong}) = {p} vs P(2) = {at_truth}");
        }
        // The half-frequency hypothesis also fits exactly: its second
        // harmonic basis absorbs the Rabi line.
        let at_half = log_likelihood(1.0, &d).unwrap();
        assert!(at_half < at_truth, "half-frequency should fit worse: a1 line unmatched");
    }

    #[test]
    fn likelihood_is_scale_invariant() {
        let d = trace(1.1, 0.7, 80.0, 128);
        let scaled: Vec<f64> = d.values().iter().map(|v| v * 0.37).collect();
        let ds = DataVector::new(d.grid().clone(), scaled, None).unwrap();
        for omega in [0.6, 1.1, 2.2, 3.0] {
            let a = log_likelihood(omega, &d).unwrap();
            let b = log_likelihood(omega, &ds).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "P({omega}): {a} vs {b}");
        }
    }

    #[test]
    fn likelihood_is_nonnegative_on_random_data() {
        let grid = uniform_grid(60.0, 96).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let values: Vec<f64> = (0..96).map(|_| rng.random::<f64>()).collect();
            let data = DataVector::new(grid.clone(), values, None).unwrap();
            let omega = rng.random::<f64>() * 5.0 + 0.01;
            assert!(log_likelihood(omega, &data).unwrap() >= 0.0);
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let grid = uniform_grid(3.0, 3).unwrap();
        let tiny = DataVector::new(grid, vec![0.5; 3], None).unwrap();
        assert!(matches!(
            log_likelihood(1.0, &tiny),
            Err(Error::InsufficientData(3))
        ));
        let grid = uniform_grid(10.0, 16).unwrap();
        let zero = DataVector::new(grid, vec![0.0; 16], None).unwrap();
        assert!(matches!(log_likelihood(1.0, &zero), Err(Error::UndefinedLikelihood)));
    }

    #[test]
    fn mixing_weight_fit_recovers_exact_patterns() {
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let c = SignalComponents::from_x(x).unwrap();
            let fit = fit_x([c.a0, c.a1, c.a2]);
            assert!((fit.x - x).abs() < 1e-8, "x = {x} fitted as {}", fit.x);
            assert!(fit.residual < 1e-8, "residual {} at x = {x}", fit.residual);
        }
    }

    #[test]
    fn inconsistent_amplitudes_leave_a_residual() {
        // A pure fundamental with no second harmonic cannot come from the
        // family: a1 > 0 forces a2 > 0.
        let fit = fit_x([0.5, 0.5, 0.0]);
        assert!(fit.residual > 0.05, "residual {}", fit.residual);
    }

    #[test]
    fn alpha_x_round_trip() {
        for i in 0..=8 {
            let alpha = i as f64 / 8.0 * std::f64::consts::FRAC_PI_2;
            let p = ModelParams::new(1.0, alpha).unwrap();
            assert!((alpha_from_x(p.x()) - alpha).abs() < 1e-12);
        }
    }
}
