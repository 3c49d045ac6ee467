//! Closed-form dynamics of a resonantly driven three-level ladder system.
//!
//! In the rotating frame the effective Hamiltonian couples neighbouring
//! levels with strengths `omega1` (1-2) and `omega2` (2-3):
//!
//! ```text
//!         [ 0   w1   0 ]
//! H_eff = [ w1   0  w2 ]
//!         [ 0   w2   0 ]
//! ```
//!
//! Its dynamics depend only on the generalized Rabi frequency
//! `Omega = sqrt(w1^2 + w2^2)` and the mixing angle `alpha = atan(w2/w1)`.
//! The propagator `U(t) = exp(-i t H_eff)` has a closed form in
//! `c = cos(alpha)`, `s = sin(alpha)`; populations follow as
//! `p_kl(t) = |<l| U(t) |k>|^2`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rabi frequency and mixing angle of the driven ladder.
///
/// Invariants: `omega >= 0`, `alpha` in `[0, pi/2]`. Both are upheld by the
/// constructors; deserialized values should be passed through [`ModelParams::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    omega: f64,
    alpha: f64,
}

impl ModelParams {
    /// Builds parameters, rejecting `omega < 0` or `alpha` outside `[0, pi/2]`.
    pub fn new(omega: f64, alpha: f64) -> Result<Self> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "omega = {omega}, must be finite and >= 0"
            )));
        }
        if !alpha.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
            return Err(Error::ParameterDomain(format!(
                "alpha = {alpha}, must lie in [0, pi/2]"
            )));
        }
        Ok(Self { omega, alpha })
    }

    /// Converts the coupling pair `(w1, w2)` to `(Omega, alpha)`.
    ///
    /// `Omega = sqrt(w1^2 + w2^2)`, `alpha = atan(w2 / w1)`. Couplings must be
    /// non-negative; both zero is rejected as degenerate.
    pub fn from_couplings(omega1: f64, omega2: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega2.is_finite()) || omega1 < 0.0 || omega2 < 0.0 {
            return Err(Error::ParameterDomain(format!(
                "couplings ({omega1}, {omega2}) must be finite and >= 0"
            )));
        }
        if omega1 == 0.0 && omega2 == 0.0 {
            return Err(Error::DegenerateModel);
        }
        Self::new(omega1.hypot(omega2), omega2.atan2(omega1))
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Population mixing weight `x = cos^2(alpha)`.
    pub fn x(&self) -> f64 {
        let c = self.alpha.cos();
        c * c
    }

    /// The coupling pair `(w1, w2) = (Omega cos(alpha), Omega sin(alpha))`.
    pub fn couplings(&self) -> (f64, f64) {
        (self.omega * self.alpha.cos(), self.omega * self.alpha.sin())
    }
}

/// The effective Hamiltonian as a real symmetric matrix.
pub fn effective_hamiltonian(params: &ModelParams) -> Matrix3<f64> {
    let (w1, w2) = params.couplings();
    Matrix3::new(0.0, w1, 0.0, w1, 0.0, w2, 0.0, w2, 0.0)
}

/// Closed-form propagator `U(t) = exp(-i t H_eff)`.
///
/// With `c = cos(alpha)`, `s = sin(alpha)`, `phi = Omega t`:
///
/// ```text
///     [ c^2 cos(phi) + s^2    -i c sin(phi)    c s (cos(phi) - 1) ]
/// U = [ -i c sin(phi)          cos(phi)        -i s sin(phi)      ]
///     [ c s (cos(phi) - 1)    -i s sin(phi)    s^2 cos(phi) + c^2 ]
/// ```
pub fn propagator(params: &ModelParams, t: f64) -> Matrix3<Complex64> {
    let c = params.alpha.cos();
    let s = params.alpha.sin();
    let phi = params.omega * t;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    Matrix3::new(
        re(c * c * cos_phi + s * s),
        im(-c * sin_phi),
        re(c * s * (cos_phi - 1.0)),
        im(-c * sin_phi),
        re(cos_phi),
        im(-s * sin_phi),
        re(c * s * (cos_phi - 1.0)),
        im(-s * sin_phi),
        re(s * s * cos_phi + c * c),
    )
}

/// Largest entry of `|U^H U - I|`, zero for an exactly unitary matrix.
pub fn unitarity_defect(u: &Matrix3<Complex64>) -> f64 {
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for r in 0..3 {
        for c in 0..3 {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Transition probability `p_kl(t) = |<l| U(t) |k>|^2` with 1-based levels.
pub fn population(params: &ModelParams, k: usize, l: usize, t: f64) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::IndexOutOfRange(k));
    }
    if !(1..=3).contains(&l) {
        return Err(Error::IndexOutOfRange(l));
    }
    let u = propagator(params, t);
    Ok(u[(l - 1, k - 1)].norm_sqr())
}

/// Evaluates [`population`] over a set of times.
pub fn population_trace(params: &ModelParams, k: usize, l: usize, times: &[f64]) -> Result<Vec<f64>> {
    times.iter().map(|&t| population(params, k, l, t)).collect()
}

/// Cosine-series weights of the survival signal
/// `p_11(t) = a0 + a1 cos(Omega t) + a2 cos(2 Omega t)`.
///
/// In `x = cos^2(alpha)`: `a0 = 1 - 2x + (3/2) x^2`, `a1 = 2x(1 - x)`,
/// `a2 = x^2 / 2`. The weights always sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalComponents {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl SignalComponents {
    /// Weights for a given mixing weight `x` in `[0, 1]`.
    pub fn from_x(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::ParameterDomain(format!("x = {x}, must lie in [0, 1]")));
        }
        Ok(Self {
            a0: 1.0 - 2.0 * x + 1.5 * x * x,
            a1: 2.0 * x * (1.0 - x),
            a2: 0.5 * x * x,
        })
    }

    /// As a vector `(a0, a1, a2)`.
    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.a0, self.a1, self.a2)
    }

    /// `a0 + a1 cos(omega t) + a2 cos(2 omega t)`.
    pub fn evaluate(&self, omega: f64, t: f64) -> f64 {
        self.a0 + self.a1 * (omega * t).cos() + self.a2 * (2.0 * omega * t).cos()
    }
}

/// Survival-signal weights for the given parameters.
pub fn p11_components(params: &ModelParams) -> SignalComponents {
    SignalComponents::from_x(params.x()).expect("cos^2 is always in [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    /// Reference propagator through the spectral decomposition of `H_eff`.
    fn eigen_propagator(params: &ModelParams, t: f64) -> Matrix3<Complex64> {
        let h = effective_hamiltonian(params);
        let se = h.symmetric_eigen();
        let mut u = Matrix3::<Complex64>::zeros();
        for m in 0..3 {
            let lambda = se.eigenvalues[m];
            let phase = Complex64::new(0.0, -lambda * t).exp();
            let v = se.eigenvectors.column(m);
            for r in 0..3 {
                for c in 0..3 {
                    u[(r, c)] += phase * v[r] * v[c];
                }
            }
        }
        u
    }

    #[test]
    fn couplings_to_polar_parameters() {
        let p = ModelParams::from_couplings(3.0, 4.0).unwrap();
        assert!((p.omega() - 5.0).abs() < 1e-14);
        assert!((p.alpha() - (4.0f64 / 3.0).atan()).abs() < 1e-14);
        let (w1, w2) = p.couplings();
        assert!((w1 - 3.0).abs() < 1e-13);
        assert!((w2 - 4.0).abs() < 1e-13);
    }

    #[test]
    fn parameter_domain_is_enforced() {
        assert!(ModelParams::new(-1.0, 0.3).is_err());
        assert!(ModelParams::new(1.0, -0.1).is_err());
        assert!(ModelParams::new(1.0, FRAC_PI_2 + 0.1).is_err());
        assert!(matches!(
            ModelParams::from_couplings(0.0, 0.0),
            Err(Error::DegenerateModel)
        ));
        assert!(ModelParams::from_couplings(-1.0, 2.0).is_err());
    }

    #[test]
    fn propagator_quarter_period_survival() {
        // Omega t = pi/2 kills the cos(phi) terms: U11 = sin^2(alpha).
        let p = ModelParams::new(2.0, FRAC_PI_4).unwrap();
        let u = propagator(&p, FRAC_PI_4);
        assert!((u[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!(u[(0, 0)].im.abs() < 1e-14);
        let p11 = population(&p, 1, 1, FRAC_PI_4).unwrap();
        assert!((p11 - 0.25).abs() < 1e-14);
    }

    #[test]
    fn propagator_matches_eigen_route_and_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = ModelParams::new(
                rng.random::<f64>() * 2.0 * PI,
                rng.random::<f64>() * FRAC_PI_2,
            )
            .unwrap();
            let t = rng.random::<f64>() * 100.0;
            let u = propagator(&p, t);
            assert!(unitarity_defect(&u) < 1e-12);
            let v = eigen_propagator(&p, t);
            for r in 0..3 {
                for c in 0..3 {
                    assert!(
                        (u[(r, c)] - v[(r, c)]).norm() < 1e-10,
                        "entry ({r},{c}) mismatch at omega={}, alpha={}, t={}",
                        p.omega(),
                        p.alpha(),
                        t
                    );
                }
            }
        }
    }

    #[test]
    fn zero_frequency_freezes_the_dynamics() {
        let p = ModelParams::new(0.0, 0.7).unwrap();
        let u = propagator(&p, 5.0);
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { 1.0 } else { 0.0 };
                assert!((u[(r, c)] - Complex64::new(target, 0.0)).norm() < 1e-15);
            }
        }
        assert!((population(&p, 1, 1, 3.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn component_weights_at_even_mixing() {
        let c = SignalComponents::from_x(0.5).unwrap();
        assert!((c.a0 - 0.375).abs() < 1e-15);
        assert!((c.a1 - 0.5).abs() < 1e-15);
        assert!((c.a2 - 0.125).abs() < 1e-15);
    }

    #[test]
    fn component_weights_sum_to_one() {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let c = SignalComponents::from_x(x).unwrap();
            assert!((c.a0 + c.a1 + c.a2 - 1.0).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn cosine_expansion_matches_propagator_survival() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let p = ModelParams::new(
                0.1 + rng.random::<f64>() * 6.0,
                rng.random::<f64>() * FRAC_PI_2,
            )
            .unwrap();
            let comps = p11_components(&p);
            let t = rng.random::<f64>() * 100.0;
            let direct = population(&p, 1, 1, t).unwrap();
            let series = comps.evaluate(p.omega(), t);
            assert!((direct - series).abs() < 1e-12);
        }
    }

    #[test]
    fn middle_level_oscillates_at_the_rabi_frequency() {
        // p_22(t) = cos^2(Omega t) independent of alpha.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let p = ModelParams::new(1.5, rng.random::<f64>() * FRAC_PI_2).unwrap();
            let t = rng.random::<f64>() * 20.0;
            let expected = (p.omega() * t).cos().powi(2);
            assert!((population(&p, 2, 2, t).unwrap() - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn populations_from_one_level_sum_to_one() {
        let p = ModelParams::new(2.3, 0.9).unwrap();
        for k in 1..=3 {
            let total: f64 = (1..=3)
                .map(|l| population(&p, k, l, 7.7).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn level_indices_are_validated() {
        let p = ModelParams::new(1.0, 0.5).unwrap();
        assert!(matches!(population(&p, 0, 1, 0.0), Err(Error::IndexOutOfRange(0))));
        assert!(matches!(population(&p, 1, 4, 0.0), Err(Error::IndexOutOfRange(4))));
    }
}
