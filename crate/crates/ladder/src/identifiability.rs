//! Which Hamiltonians a diagonal measurement record can tell apart.
//!
//! A run of the experiment observes `y(t) = tr(M U(t) rho0 U(t)^H)` with a
//! diagonal observable `M`. Two transformations of the Hamiltonian leave
//! every such record unchanged and are therefore invisible to estimation:
//!
//! * adding a multiple of the identity on each common block, the blocks
//!   being the connected components shared by `H` and `rho0`;
//! * conjugating by a diagonal phase matrix `D = diag(1, e^{i phi_2}, ...)`
//!   together with an overall level shift, which in particular flips the
//!   signs of individual couplings.
//!
//! The module builds these transforms and checks indistinguishability
//! numerically, so estimator outputs can be reported in a canonical gauge
//! (nonnegative couplings, zero trace offset) without loss.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for the Hermiticity of inputs.
const HERM_TOL: f64 = 1e-12;
/// Most negative eigenvalue a density matrix may carry.
const PSD_FLOOR: f64 = -1e-10;
/// Allowed deviation of `tr(rho0)` from one.
const TRACE_TOL: f64 = 1e-9;

/// A few-level system: diagonal observable, Hamiltonian, initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    m_diag: Vec<f64>,
    h: DMatrix<Complex64>,
    rho0: DMatrix<Complex64>,
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl SystemSpec {
    /// Validates and stores a system. `h` must be Hermitian; `rho0` must be
    /// a density matrix (Hermitian, unit trace, positive semidefinite).
    pub fn new(m_diag: Vec<f64>, h: DMatrix<Complex64>, rho0: DMatrix<Complex64>) -> Result<Self> {
        let n = h.nrows();
        if n < 2 {
            return Err(Error::InvalidSystem(format!("dimension {n}, need at least 2")));
        }
        if !h.is_square() || !rho0.is_square() || rho0.nrows() != n || m_diag.len() != n {
            return Err(Error::InvalidSystem(format!(
                "shape mismatch: h {}x{}, rho0 {}x{}, m_diag length {}",
                h.nrows(),
                h.ncols(),
                rho0.nrows(),
                rho0.ncols(),
                m_diag.len()
            )));
        }
        if m_diag.iter().any(|v| !v.is_finite())
            || h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
            || rho0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidSystem("non-finite entries".into()));
        }
        let h_defect = hermiticity_defect(&h);
        if h_defect > HERM_TOL * max_abs(&h).max(1.0) {
            return Err(Error::InvalidSystem(format!(
                "hamiltonian is not Hermitian (defect {h_defect:.3e})"
            )));
        }
        let r_defect = hermiticity_defect(&rho0);
        if r_defect > HERM_TOL * max_abs(&rho0).max(1.0) {
            return Err(Error::InvalidSystem(format!(
                "initial state is not Hermitian (defect {r_defect:.3e})"
            )));
        }
        let trace = rho0.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidSystem(format!(
                "initial state has trace {} + {}i, expected 1",
                trace.re, trace.im
            )));
        }
        let min_eig = rho0
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_FLOOR {
            return Err(Error::InvalidSystem(format!(
                "initial state has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { m_diag, h, rho0 })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn m_diag(&self) -> &[f64] {
        &self.m_diag
    }

    pub fn h(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn rho0(&self) -> &DMatrix<Complex64> {
        &self.rho0
    }

    /// `y(t) = tr(M U(t) rho0 U(t)^H)` at each requested time, via one
    /// eigendecomposition of the Hamiltonian.
    pub fn evolution(&self, times: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let se = self.h.clone().symmetric_eigen();
        let e = se.eigenvectors;
        // Initial state rotated into the energy eigenbasis.
        let b = e.adjoint() * &self.rho0 * &e;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let phase = DVector::from_iterator(
                n,
                se.eigenvalues.iter().map(|&l| Complex64::new(0.0, -l * t).exp()),
            );
            let c = DMatrix::from_fn(n, n, |i, j| phase[i] * b[(i, j)] * phase[j].conj());
            let rho_t = &e * c * e.adjoint();
            let mut y = 0.0;
            for k in 0..n {
                debug_assert!(rho_t[(k, k)].im.abs() < 1e-9);
                y += self.m_diag[k] * rho_t[(k, k)].re;
            }
            out.push(y);
        }
        out
    }

    /// Single-time convenience wrapper around [`Self::evolution`].
    pub fn expectation(&self, t: f64) -> f64 {
        self.evolution(&[t])[0]
    }

    /// Connected components of the coupling graph shared by `h` and `rho0`:
    /// levels `i` and `j` join when either matrix has `|entry| > tol` at
    /// `(i, j)`. Blocks come back sorted, 0-based.
    pub fn common_blocks(&self, tol: f64) -> Vec<Vec<usize>> {
        let n = self.dim();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.h[(i, j)].norm() > tol || self.rho0[(i, j)].norm() > tol {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let root = find(&mut parent, i);
            blocks[root].push(i);
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort_by_key(|b| b[0]);
        blocks
    }

    /// Adds `lambdas[s]` times the identity on each block:
    /// `H + sum_s lambda_s I_s`. The blocks must partition the levels and be
    /// closed under the couplings of both `h` and `rho0` at `tol`; then the
    /// shifted system produces the same record as the original.
    pub fn shift_hamiltonian(
        &self,
        blocks: &[Vec<usize>],
        lambdas: &[f64],
        tol: f64,
    ) -> Result<SystemSpec> {
        let n = self.dim();
        if blocks.len() != lambdas.len() {
            return Err(Error::InvalidPartition(format!(
                "{} blocks but {} shifts",
                blocks.len(),
                lambdas.len()
            )));
        }
        if lambdas.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPartition("non-finite shift".into()));
        }
        let mut owner = vec![usize::MAX; n];
        for (s, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {s} is empty")));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "level {i} out of range for dimension {n}"
                    )));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "level {i} appears in more than one block"
                    )));
                }
                owner[i] = s;
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(Error::InvalidPartition("blocks do not cover every level".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if owner[i] != owner[j]
                    && (self.h[(i, j)].norm() > tol || self.rho0[(i, j)].norm() > tol)
                {
                    return Err(Error::InvalidPartition(format!(
                        "levels {i} and {j} are coupled across blocks; \
                         a per-block shift would change the record"
                    )));
                }
            }
        }
        let mut h = self.h.clone();
        for i in 0..n {
            h[(i, i)] += Complex64::new(lambdas[owner[i]], 0.0);
        }
        SystemSpec::new(self.m_diag.clone(), h, self.rho0.clone())
    }

    /// Applies the diagonal gauge `H -> D (H - lambda0 I) D^H`,
    /// `rho0 -> D rho0 D^H` with `D = diag(1, e^{i phases[0]}, ...)`. The
    /// observable is diagonal, so the transformed system is recordwise
    /// identical to the original.
    pub fn gauged(&self, phases: &[f64], lambda0: f64) -> Result<SystemSpec> {
        let h = gauge_transform(&self.h, phases, lambda0)?;
        let d = gauge_factors(self.dim(), phases);
        let rho0 = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            d[i] * self.rho0[(i, j)] * d[j].conj()
        });
        SystemSpec::new(self.m_diag.clone(), h, rho0)
    }
}

fn gauge_factors(n: usize, phases: &[f64]) -> Vec<Complex64> {
    let mut d = Vec::with_capacity(n);
    d.push(Complex64::new(1.0, 0.0));
    for &p in phases {
        d.push(Complex64::new(0.0, p).exp());
    }
    d
}

/// `D (H - lambda0 I) D^H` with `D = diag(1, e^{i phases[0]}, ...)`;
/// `phases` fixes the `dim - 1` free phases.
pub fn gauge_transform(
    h: &DMatrix<Complex64>,
    phases: &[f64],
    lambda0: f64,
) -> Result<DMatrix<Complex64>> {
    let n = h.nrows();
    if phases.len() != n - 1 {
        return Err(Error::InvalidSystem(format!(
            "{} phases for dimension {n}, expected {}",
            phases.len(),
            n - 1
        )));
    }
    if phases.iter().any(|p| !p.is_finite()) || !lambda0.is_finite() {
        return Err(Error::InvalidSystem("non-finite gauge parameter".into()));
    }
    let d = gauge_factors(n, phases);
    let shift = Complex64::new(lambda0, 0.0);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let base = if i == j { h[(i, j)] - shift } else { h[(i, j)] };
        d[i] * base * d[j].conj()
    }))
}

/// Largest pointwise gap between the two systems' records over `times`.
pub fn trace_deviation(a: &SystemSpec, b: &SystemSpec, times: &[f64]) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidSystem(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if times.is_empty() {
        return Err(Error::InvalidGrid("no comparison times".into()));
    }
    let ya = a.evolution(times);
    let yb = b.evolution(times);
    Ok(ya
        .iter()
        .zip(&yb)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max))
}

/// Whether the two systems' records agree within `tol` over `times`.
pub fn indistinguishable(a: &SystemSpec, b: &SystemSpec, times: &[f64], tol: f64) -> Result<bool> {
    Ok(trace_deviation(a, b, times)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::alpha_from_x;
    use crate::model::{effective_hamiltonian, population, ModelParams};

    fn complexify(m: &nalgebra::Matrix3<f64>) -> DMatrix<Complex64> {
        DMatrix::from_fn(3, 3, |i, j| Complex64::new(m[(i, j)], 0.0))
    }

    fn ladder_system(omega: f64, x: f64) -> SystemSpec {
        let params = ModelParams::new(omega, alpha_from_x(x)).unwrap();
        let h = complexify(&effective_hamiltonian(&params));
        let mut rho0 = DMatrix::zeros(3, 3);
        rho0[(0, 0)] = Complex64::new(1.0, 0.0);
        SystemSpec::new(vec![1.0, 0.0, 0.0], h, rho0).unwrap()
    }

    fn test_times() -> Vec<f64> {
        (0..80).map(|k| k as f64 * 0.37).collect()
    }

    #[test]
    fn evolution_matches_the_closed_form_survival_probability() {
        let params = ModelParams::new(2.0, alpha_from_x(0.5)).unwrap();
        let sys = ladder_system(2.0, 0.5);
        for k in 0..50 {
            let t = k as f64 * 0.21;
            let direct = population(&params, 1, 1, t).unwrap();
            assert!(
                (sys.expectation(t) - direct).abs() < 1e-10,
                "t = {t}: {} vs {direct}",
                sys.expectation(t)
            );
        }
    }

    #[test]
    fn global_shift_is_invisible() {
        let sys = ladder_system(2.0, 0.5);
        let shifted = sys
            .shift_hamiltonian(&[vec![0, 1, 2]], &[0.9], 1e-10)
            .unwrap();
        let dev = trace_deviation(&sys, &shifted, &test_times()).unwrap();
        assert!(dev < 1e-10, "deviation {dev}");
    }

    #[test]
    fn per_block_shifts_are_invisible_on_block_systems() {
        // Two uncoupled two-level blocks; the state populates both.
        let mut h = DMatrix::zeros(4, 4);
        h[(0, 1)] = Complex64::new(1.3, 0.0);
        h[(1, 0)] = Complex64::new(1.3, 0.0);
        h[(2, 3)] = Complex64::new(0.0, 0.7);
        h[(3, 2)] = Complex64::new(0.0, -0.7);
        let mut rho0 = DMatrix::zeros(4, 4);
        rho0[(0, 0)] = Complex64::new(0.5, 0.0);
        rho0[(2, 2)] = Complex64::new(0.5, 0.0);
        let sys = SystemSpec::new(vec![1.0, 0.0, 0.0, 0.0], h, rho0).unwrap();

        assert_eq!(sys.common_blocks(1e-10), vec![vec![0, 1], vec![2, 3]]);
        let shifted = sys
            .shift_hamiltonian(&[vec![0, 1], vec![2, 3]], &[0.7, -0.3], 1e-10)
            .unwrap();
        let dev = trace_deviation(&sys, &shifted, &test_times()).unwrap();
        assert!(dev < 1e-10, "deviation {dev}");
        // Unequal shifts across genuinely coupled levels must be refused.
        let coupled = ladder_system(2.0, 0.5);
        assert!(matches!(
            coupled.shift_hamiltonian(&[vec![0], vec![1, 2]], &[0.1, 0.2], 1e-10),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn state_coherences_merge_blocks() {
        // Block-diagonal Hamiltonian, but the state carries a coherence
        // between the blocks, so they are not independent.
        let mut h = DMatrix::zeros(4, 4);
        h[(0, 1)] = Complex64::new(1.0, 0.0);
        h[(1, 0)] = Complex64::new(1.0, 0.0);
        h[(2, 3)] = Complex64::new(1.0, 0.0);
        h[(3, 2)] = Complex64::new(1.0, 0.0);
        let mut rho0 = DMatrix::zeros(4, 4);
        rho0[(0, 0)] = Complex64::new(0.5, 0.0);
        rho0[(2, 2)] = Complex64::new(0.5, 0.0);
        rho0[(0, 2)] = Complex64::new(0.5, 0.0);
        rho0[(2, 0)] = Complex64::new(0.5, 0.0);
        let sys = SystemSpec::new(vec![1.0, 0.0, 0.0, 0.0], h, rho0).unwrap();
        assert_eq!(sys.common_blocks(1e-10), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn chain_coupling_gives_a_single_block() {
        let sys = ladder_system(1.5, 0.3);
        assert_eq!(sys.common_blocks(1e-10), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn malformed_partitions_are_rejected() {
        let sys = ladder_system(2.0, 0.5);
        for blocks in [
            vec![vec![0, 1]],                    // does not cover
            vec![vec![0, 1], vec![1, 2]],        // overlaps
            vec![vec![0, 1, 2], vec![]],         // empty block
        ] {
            let lambdas = vec![0.1; blocks.len()];
            assert!(sys.shift_hamiltonian(&blocks, &lambdas, 1e-10).is_err());
        }
        assert!(matches!(
            sys.shift_hamiltonian(&[vec![0, 1, 2]], &[0.1, 0.2], 1e-10),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            sys.shift_hamiltonian(&[vec![0, 1, 5]], &[0.1], 1e-10),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn diagonal_gauge_with_level_shift_is_invisible() {
        // Generic complex Hermitian Hamiltonian, generic diagonal state and
        // observable; gauge both the Hamiltonian and the state.
        let mut h = DMatrix::zeros(3, 3);
        h[(0, 0)] = Complex64::new(0.4, 0.0);
        h[(1, 1)] = Complex64::new(-0.2, 0.0);
        h[(2, 2)] = Complex64::new(1.1, 0.0);
        h[(0, 1)] = Complex64::new(0.8, 0.3);
        h[(1, 0)] = h[(0, 1)].conj();
        h[(1, 2)] = Complex64::new(-0.5, 0.9);
        h[(2, 1)] = h[(1, 2)].conj();
        h[(0, 2)] = Complex64::new(0.1, -0.6);
        h[(2, 0)] = h[(0, 2)].conj();
        let mut rho0 = DMatrix::zeros(3, 3);
        rho0[(0, 0)] = Complex64::new(0.2, 0.0);
        rho0[(1, 1)] = Complex64::new(0.5, 0.0);
        rho0[(2, 2)] = Complex64::new(0.3, 0.0);
        let sys = SystemSpec::new(vec![0.3, -1.0, 2.0], h, rho0).unwrap();
        let gauged = sys.gauged(&[0.8, -1.3], 0.4).unwrap();
        let dev = trace_deviation(&sys, &gauged, &test_times()).unwrap();
        assert!(dev < 1e-10, "deviation {dev}");
    }

    #[test]
    fn gauging_a_superposition_state_stays_invisible() {
        // Pure superposition initial state: the gauge must rotate the state
        // along with the Hamiltonian to keep the record fixed.
        let params = ModelParams::new(2.0, alpha_from_x(0.5)).unwrap();
        let h = complexify(&effective_hamiltonian(&params));
        let amp = 1.0 / 2.0f64.sqrt();
        let psi = DVector::from_vec(vec![
            Complex64::new(amp, 0.0),
            Complex64::new(0.0, amp),
            Complex64::new(0.0, 0.0),
        ]);
        let rho0 = DMatrix::from_fn(3, 3, |i, j| psi[i] * psi[j].conj());
        let sys = SystemSpec::new(vec![1.0, 0.0, 0.0], h, rho0).unwrap();
        let gauged = sys.gauged(&[2.1, 0.6], -0.7).unwrap();
        let dev = trace_deviation(&sys, &gauged, &test_times()).unwrap();
        assert!(dev < 1e-10, "deviation {dev}");
    }

    #[test]
    fn coupling_signs_are_a_gauge_choice() {
        // diag(1, -1, -1) flips the first coupling only: (omega1, omega2)
        // and (-omega1, omega2) produce identical records, which is why
        // estimates are reported with nonnegative couplings.
        let sys = ladder_system(2.0, 0.36);
        let flipped = sys.gauged(&[std::f64::consts::PI, std::f64::consts::PI], 0.0).unwrap();
        let (c, s) = {
            let h = sys.h();
            (h[(0, 1)].re, h[(1, 2)].re)
        };
        assert!((flipped.h()[(0, 1)].re + c).abs() < 1e-12);
        assert!((flipped.h()[(1, 2)].re - s).abs() < 1e-12);
        let dev = trace_deviation(&sys, &flipped, &test_times()).unwrap();
        assert!(dev < 1e-12, "deviation {dev}");
        assert!(indistinguishable(&sys, &flipped, &test_times(), 1e-10).unwrap());
    }

    #[test]
    fn genuinely_different_frequencies_are_distinguishable() {
        let a = ladder_system(2.0, 0.5);
        let b = ladder_system(2.1, 0.5);
        let dev = trace_deviation(&a, &b, &test_times()).unwrap();
        assert!(dev > 0.01, "deviation {dev}");
        assert!(!indistinguishable(&a, &b, &test_times(), 1e-10).unwrap());
    }

    #[test]
    fn invalid_systems_are_rejected() {
        let mut h = DMatrix::zeros(3, 3);
        h[(0, 1)] = Complex64::new(1.0, 0.0);
        h[(1, 0)] = Complex64::new(0.5, 0.0); // not Hermitian
        let mut rho0 = DMatrix::zeros(3, 3);
        rho0[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            SystemSpec::new(vec![1.0, 0.0, 0.0], h, rho0.clone()),
            Err(Error::InvalidSystem(_))
        ));

        let params = ModelParams::new(2.0, alpha_from_x(0.5)).unwrap();
        let good_h = complexify(&effective_hamiltonian(&params));
        let mut bad_trace = rho0.clone();
        bad_trace[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(SystemSpec::new(vec![1.0, 0.0, 0.0], good_h.clone(), bad_trace).is_err());

        let mut indefinite = DMatrix::zeros(3, 3);
        indefinite[(0, 0)] = Complex64::new(1.5, 0.0);
        indefinite[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(SystemSpec::new(vec![1.0, 0.0, 0.0], good_h.clone(), indefinite).is_err());

        assert!(SystemSpec::new(vec![1.0, 0.0], good_h, rho0).is_err());

        let h2 = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let r2 = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        assert!(SystemSpec::new(vec![1.0], h2, r2).is_err());
    }

    #[test]
    fn gauge_parameter_arity_is_checked() {
        let sys = ladder_system(2.0, 0.5);
        assert!(sys.gauged(&[0.1], 0.0).is_err());
        assert!(gauge_transform(sys.h(), &[0.1, 0.2, 0.3], 0.0).is_err());
    }
}
