//! Brute-force ground truth in a truncated number basis: density matrices for
//! the state catalogue, moments by explicit ladder-matrix traces, quadrature
//! distributions from oscillator wavefunctions, and the Husimi function.
//!
//! Everything here is deliberately independent of the closed forms in
//! [`crate::moments`]; the test suites compare the two routes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::hermite_function_row;
use crate::moments::{index_pairs, MomentTable, Ordering};
use crate::states::StateSpec;

const NORM_GUARD: f64 = 1e-10;

/// A density matrix on the truncated basis `|0> ... |cutoff>`.
#[derive(Debug, Clone)]
pub struct FockState {
    cutoff: usize,
    rho: DMatrix<Complex64>,
    /// Probability the ideal state carries above the cutoff (before the
    /// renormalization applied at construction).
    truncation_deficit: f64,
}

impl FockState {
    /// Realize a catalogue state at the given cutoff.
    ///
    /// Fails with [`Error::CutoffTooSmall`] when the basis captures less than
    /// `1 - 1e-10` of the ideal state's norm; otherwise the truncated state is
    /// renormalized so its trace is exactly one.
    pub fn realize(spec: &StateSpec, cutoff: usize) -> Result<FockState> {
        spec.validate()?;
        if cutoff < 1 {
            return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
        }
        let dim = cutoff + 1;
        match *spec {
            StateSpec::Fock { n } => {
                let n = n as usize;
                if n > cutoff {
                    return Err(Error::CutoffTooSmall {
                        achieved: 0.0,
                        required: 1.0 - NORM_GUARD,
                    });
                }
                let mut rho = DMatrix::zeros(dim, dim);
                rho[(n, n)] = Complex64::new(1.0, 0.0);
                Ok(FockState {
                    cutoff,
                    rho,
                    truncation_deficit: 0.0,
                })
            }
            StateSpec::Coherent { re, im } => {
                let alpha = Complex64::new(re, im);
                Self::from_pure(cutoff, &coherent_coefficients(alpha, cutoff))
            }
            StateSpec::EvenCoherent { re, im } | StateSpec::OddCoherent { re, im } => {
                let alpha = Complex64::new(re, im);
                let keep_parity = match spec {
                    StateSpec::EvenCoherent { .. } => 0,
                    _ => 1,
                };
                let mut coeffs = coherent_coefficients(alpha, cutoff);
                for (n, c) in coeffs.iter_mut().enumerate() {
                    if n % 2 != keep_parity {
                        *c = Complex64::new(0.0, 0.0);
                    }
                }
                // The parity projection removes a known fraction of the norm;
                // account for it so the deficit measures truncation only.
                let ideal = match spec {
                    StateSpec::EvenCoherent { .. } => {
                        0.5 * (1.0 + (-2.0 * alpha.norm_sqr()).exp())
                    }
                    _ => 0.5 * (1.0 - (-2.0 * alpha.norm_sqr()).exp()),
                };
                let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
                let achieved = captured / ideal;
                if achieved < 1.0 - NORM_GUARD {
                    return Err(Error::CutoffTooSmall {
                        achieved,
                        required: 1.0 - NORM_GUARD,
                    });
                }
                let scale = Complex64::new(1.0 / captured.sqrt(), 0.0);
                let coeffs: Vec<_> = coeffs.iter().map(|c| c * scale).collect();
                Ok(FockState {
                    cutoff,
                    rho: pure_density(&coeffs),
                    truncation_deficit: 1.0 - achieved,
                })
            }
            StateSpec::Thermal { t } => {
                // populations ~ e^{-n/T}; the geometric tail above the cutoff
                // is e^{-(N+1)/T}
                let q = (-1.0 / t).exp();
                let deficit = q.powi(dim as i32);
                if 1.0 - deficit < 1.0 - NORM_GUARD {
                    return Err(Error::CutoffTooSmall {
                        achieved: 1.0 - deficit,
                        required: 1.0 - NORM_GUARD,
                    });
                }
                let norm = (1.0 - q) / (1.0 - deficit);
                let mut rho = DMatrix::zeros(dim, dim);
                for n in 0..dim {
                    rho[(n, n)] = Complex64::new(norm * q.powi(n as i32), 0.0);
                }
                Ok(FockState {
                    cutoff,
                    rho,
                    truncation_deficit: deficit,
                })
            }
        }
    }

    fn from_pure(cutoff: usize, coeffs: &[Complex64]) -> Result<FockState> {
        let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if captured < 1.0 - NORM_GUARD {
            return Err(Error::CutoffTooSmall {
                achieved: captured,
                required: 1.0 - NORM_GUARD,
            });
        }
        let scale = Complex64::new(1.0 / captured.sqrt(), 0.0);
        let coeffs: Vec<_> = coeffs.iter().map(|c| c * scale).collect();
        Ok(FockState {
            cutoff,
            rho: pure_density(&coeffs),
            truncation_deficit: 1.0 - captured,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn rho(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn population(&self, n: usize) -> f64 {
        if n <= self.cutoff {
            self.rho[(n, n)].re
        } else {
            0.0
        }
    }

    /// Spectral decomposition `rho = sum lambda_k |v_k><v_k|`, keeping
    /// eigenvalues above `tol`. Used for fast repeated Husimi evaluation.
    pub fn spectral(&self, tol: f64) -> Vec<(f64, DVector<Complex64>)> {
        let eig = nalgebra::SymmetricEigen::new(self.rho.clone());
        let mut parts: Vec<(f64, DVector<Complex64>)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > tol)
            .map(|(k, &l)| (l, eig.eigenvectors.column(k).into_owned()))
            .collect();
        parts.sort_by(|a, b| b.0.total_cmp(&a.0));
        parts
    }

    /// Trace checks used by the invariant tests.
    pub fn trace(&self) -> Complex64 {
        self.rho.diagonal().sum()
    }
}

fn pure_density(coeffs: &[Complex64]) -> DMatrix<Complex64> {
    let v = DVector::from_column_slice(coeffs);
    &v * v.adjoint()
}

/// `<n|alpha>` for n = 0..=cutoff, by the stable recurrence
/// `c_{n+1} = c_n alpha / sqrt(n+1)`.
pub fn coherent_coefficients(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut coeffs = Vec::with_capacity(cutoff + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    coeffs.push(c);
    for n in 0..cutoff {
        c *= alpha / ((n + 1) as f64).sqrt();
        coeffs.push(c);
    }
    coeffs
}

/// The annihilation operator on a space of the given dimension.
pub fn annihilation_matrix(dim: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Ordered moments by explicit matrix traces, `Tr[rho (a^dag)^n a^m]` or
/// `Tr[rho a^k (a^dag)^l]`.
///
/// The ladder products are built on a workspace padded by `r` levels above
/// the cutoff, so they never clip a state supported within the cutoff; the
/// only residual error is the truncation of the state itself, which is
/// guarded against.
pub fn oracle_moments(state: &FockState, ordering: Ordering, r: usize) -> Result<MomentTable> {
    // A truncated tail of weight d can contribute up to ~ d * (N+r)^r to a
    // degree-r moment once the ladder factors act on it.
    let amplified_tail =
        state.truncation_deficit * ((state.cutoff + r + 1) as f64).powi(r as i32);
    if amplified_tail > 1e-10 {
        return Err(Error::CutoffTooSmall {
            achieved: 1.0 - state.truncation_deficit,
            required: 1.0 - NORM_GUARD,
        });
    }
    let dim = state.cutoff + 1 + r;
    let a = annihilation_matrix(dim);
    let adag = a.adjoint();

    // powers a^0..a^r and (a^dag)^0..(a^dag)^r
    let mut a_pow = vec![DMatrix::identity(dim, dim)];
    let mut adag_pow = vec![DMatrix::identity(dim, dim)];
    for p in 1..=r {
        a_pow.push(&a_pow[p - 1] * &a);
        adag_pow.push(&adag_pow[p - 1] * &adag);
    }

    let mut rho_pad: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
    rho_pad
        .view_mut((0, 0), (state.cutoff + 1, state.cutoff + 1))
        .copy_from(&state.rho);

    let mut table = MomentTable::normalized_zero(ordering, r);
    for (i, j) in index_pairs(r) {
        let op = match ordering {
            Ordering::Normal => &adag_pow[i] * &a_pow[j],
            Ordering::Antinormal => &a_pow[i] * &adag_pow[j],
        };
        let value = (&rho_pad * op).diagonal().sum();
        table.set(i, j, value);
    }
    Ok(table)
}

/// The quadrature distribution `w(X, theta)` of the state, evaluated from the
/// oscillator wavefunctions as `sum_nm rho_nm e^{-i(n-m)theta} psi_n psi_m`.
///
/// The phase sign pins the convention `X_theta = q cos(theta) + p sin(theta)`
/// with `rho_nm = <n|rho|m>`; with the opposite sign the first moment of a
/// complex-amplitude coherent state comes out rotated the wrong way.
pub fn oracle_tomogram(state: &FockState, theta: f64, x: f64) -> f64 {
    let psi = hermite_function_row(state.cutoff, x);
    let u: Vec<Complex64> = psi
        .iter()
        .enumerate()
        .map(|(n, &p)| Complex64::from_polar(p, n as f64 * theta))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..=state.cutoff {
        if psi[n] == 0.0 {
            continue;
        }
        for m in 0..=state.cutoff {
            let r = state.rho[(n, m)];
            if r.norm_sqr() == 0.0 {
                continue;
            }
            acc += u[n].conj() * r * u[m];
        }
    }
    acc.re
}

/// The Husimi function `Q(q,p) = <alpha|rho|alpha>/pi` with
/// `alpha = (q + ip)/sqrt(2)`.
pub fn oracle_husimi(state: &FockState, q: f64, p: f64) -> f64 {
    let alpha = Complex64::new(q, p) / std::f64::consts::SQRT_2;
    let c = coherent_coefficients(alpha, state.cutoff);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..=state.cutoff {
        for m in 0..=state.cutoff {
            acc += c[n].conj() * state.rho[(n, m)] * c[m];
        }
    }
    acc.re / std::f64::consts::PI
}

/// Husimi evaluation against a precomputed spectral decomposition,
/// `Q = sum_k lambda_k |<alpha|v_k>|^2 / pi`. Same value as
/// [`oracle_husimi`], O(cutoff * rank) instead of O(cutoff^2).
pub fn husimi_from_spectral(parts: &[(f64, DVector<Complex64>)], q: f64, p: f64) -> f64 {
    let alpha = Complex64::new(q, p) / std::f64::consts::SQRT_2;
    let dim = parts.first().map(|(_, v)| v.len()).unwrap_or(0);
    if dim == 0 {
        return 0.0;
    }
    let c = coherent_coefficients(alpha, dim - 1);
    let mut acc = 0.0;
    for (lambda, v) in parts {
        let amp: Complex64 = c.iter().zip(v.iter()).map(|(ci, vi)| ci.conj() * vi).sum();
        acc += lambda * amp.norm_sqr();
    }
    acc / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::GaussHermite;
    use crate::moments::closed_form_moments;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn realize_fock_basis_state() {
        let s = FockState::realize(&StateSpec::fock(2), 5).unwrap();
        assert_eq!(s.rho()[(2, 2)], c64(1.0, 0.0));
        assert_abs_diff_eq!(s.trace().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            s.rho().map(|v| v.norm()).sum() , 1.0, epsilon = 1e-15
        );
        assert!(FockState::realize(&StateSpec::fock(7), 5).is_err());
    }

    #[test]
    fn realize_vacuum_as_coherent_zero() {
        let s = FockState::realize(&StateSpec::coherent(c64(0.0, 0.0)), 3).unwrap();
        assert_abs_diff_eq!(s.rho()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            s.rho().map(|v| v.norm_sqr()).sum(), 1.0, epsilon = 1e-14
        );
    }

    #[test]
    fn realize_odd_cat_kills_even_levels() {
        let s = FockState::realize(&StateSpec::odd_coherent(c64(0.5, 0.0)), 12).unwrap();
        assert_abs_diff_eq!(s.trace().re, 1.0, epsilon = 1e-12);
        for n in (0..=12).step_by(2) {
            assert_abs_diff_eq!(s.population(n), 0.0, epsilon = 1e-15);
        }
        // against the analytic |c_1|^2 of the odd cat
        let a2 = 0.25f64;
        let expected_p1 = (a2 * (-a2).exp()) / (0.5 * (1.0 - (-2.0 * a2).exp()));
        assert_abs_diff_eq!(s.population(1), expected_p1, epsilon = 1e-12);
    }

    #[test]
    fn realize_guards_tight_cutoffs() {
        // thermal T = 0.5 at cutoff 6 leaves a ~8e-7 tail: rejected
        assert!(matches!(
            FockState::realize(&StateSpec::thermal(0.5), 6),
            Err(Error::CutoffTooSmall { .. })
        ));
        assert!(FockState::realize(&StateSpec::thermal(0.5), 24).is_ok());
        // coherent alpha = 0.5 at cutoff 6 is also too tight
        assert!(FockState::realize(&StateSpec::coherent(c64(0.5, 0.0)), 6).is_err());
    }

    #[test]
    fn oracle_moment_examples() {
        let s = FockState::realize(&StateSpec::fock(2), 8).unwrap();
        let t = oracle_moments(&s, Ordering::Normal, 4).unwrap();
        assert_abs_diff_eq!(t.get(1, 1).re, 2.0, epsilon = 1e-12);
        let s = FockState::realize(&StateSpec::fock(1), 8).unwrap();
        let t = oracle_moments(&s, Ordering::Antinormal, 4).unwrap();
        assert_abs_diff_eq!(t.get(1, 1).re, 2.0, epsilon = 1e-12);
        let s = FockState::realize(&StateSpec::coherent(c64(0.5, 0.0)), 24).unwrap();
        let t = oracle_moments(&s, Ordering::Normal, 4).unwrap();
        assert_abs_diff_eq!(t.get(2, 1).re, 0.125, epsilon = 1e-11);
    }

    #[test]
    fn oracle_moments_guard_thermal_headroom() {
        // T = 1 at cutoff 24 realizes fine but has too little headroom for
        // degree-6 ladder products; cutoff 64 is comfortable.
        let s = FockState::realize(&StateSpec::thermal(1.0), 24).unwrap();
        assert!(matches!(
            oracle_moments(&s, Ordering::Normal, 6),
            Err(Error::CutoffTooSmall { .. })
        ));
        let s = FockState::realize(&StateSpec::thermal(1.0), 64).unwrap();
        let t = oracle_moments(&s, Ordering::Normal, 6).unwrap();
        let closed = closed_form_moments(&StateSpec::thermal(1.0), Ordering::Normal, 6).unwrap();
        assert!(t.max_abs_diff(&closed) < 1e-10);
    }

    #[test]
    fn oracle_matches_closed_forms_entrywise() {
        let cases: Vec<(StateSpec, usize)> = vec![
            (StateSpec::fock(0), 24),
            (StateSpec::fock(3), 24),
            (StateSpec::coherent(c64(0.3, -0.4)), 24),
            (StateSpec::thermal(0.5), 48),
            (StateSpec::even_coherent(c64(0.5, 0.5)), 24),
            (StateSpec::odd_coherent(c64(0.5, 0.0)), 24),
        ];
        for (spec, cutoff) in cases {
            let s = FockState::realize(&spec, cutoff).unwrap();
            for ordering in [Ordering::Normal, Ordering::Antinormal] {
                let oracle = oracle_moments(&s, ordering, 6).unwrap();
                let closed = closed_form_moments(&spec, ordering, 6).unwrap();
                let diff = oracle.max_abs_diff(&closed);
                assert!(
                    diff < 1e-10,
                    "{spec} {} differs from closed form by {diff:.3e}",
                    ordering.name()
                );
            }
        }
    }

    #[test]
    fn tomogram_examples() {
        let vac = FockState::realize(&StateSpec::fock(0), 8).unwrap();
        for theta in [0.0, 1.0, 4.0] {
            assert_abs_diff_eq!(
                oracle_tomogram(&vac, theta, 0.0),
                1.0 / PI.sqrt(),
                epsilon = 1e-12
            );
        }
        let one = FockState::realize(&StateSpec::fock(1), 8).unwrap();
        assert_abs_diff_eq!(oracle_tomogram(&one, 0.0, 0.0), 0.0, epsilon = 1e-14);
        // Fock tomograms are theta-independent
        let x = 0.83;
        let w0 = oracle_tomogram(&one, 0.0, x);
        for theta in [0.4, 2.0, 5.5] {
            assert_abs_diff_eq!(oracle_tomogram(&one, theta, x), w0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(w0, 2.0 * x * x * (-x * x).exp() / PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn tomogram_marginals_normalized() {
        let quad = GaussHermite::new(64);
        let specs = [
            StateSpec::coherent(c64(0.6, 0.3)),
            StateSpec::odd_coherent(c64(0.5, 0.0)),
            StateSpec::thermal(0.8),
        ];
        for spec in specs {
            let s = FockState::realize(&spec, 40).unwrap();
            for k in 0..8 {
                let theta = 2.0 * PI * (k as f64) / 8.0 + 0.13;
                let integral = quad.integrate(|x| oracle_tomogram(&s, theta, x));
                assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn tomogram_coherent_center_moves_with_theta() {
        // mean of X under w(X, theta) must be sqrt(2) Re(alpha e^{-i theta})
        let alpha = c64(0.3, 0.4);
        let s = FockState::realize(&StateSpec::coherent(alpha), 24).unwrap();
        let quad = GaussHermite::new(48);
        for theta in [0.0f64, 0.7, 2.1] {
            let mean = quad.integrate(|x| x * oracle_tomogram(&s, theta, x));
            let expected = 2f64.sqrt() * (alpha * Complex64::from_polar(1.0, -theta)).re;
            assert_abs_diff_eq!(mean, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn husimi_examples() {
        let vac = FockState::realize(&StateSpec::fock(0), 8).unwrap();
        assert_abs_diff_eq!(oracle_husimi(&vac, 0.0, 0.0), 1.0 / PI, epsilon = 1e-13);
        let r2 = 2f64.sqrt();
        assert_abs_diff_eq!(
            oracle_husimi(&vac, r2, r2),
            (-2.0f64).exp() / PI,
            epsilon = 1e-13
        );
        let one = FockState::realize(&StateSpec::fock(1), 8).unwrap();
        assert_abs_diff_eq!(oracle_husimi(&one, 0.0, 0.0), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn husimi_nonnegative_on_grid() {
        let s = FockState::realize(&StateSpec::odd_coherent(c64(0.5, 0.0)), 24).unwrap();
        let mut min = f64::INFINITY;
        for i in 0..41 {
            for j in 0..41 {
                let q = -4.0 + 8.0 * (i as f64) / 40.0;
                let p = -4.0 + 8.0 * (j as f64) / 40.0;
                min = min.min(oracle_husimi(&s, q, p));
            }
        }
        assert!(min >= -1e-12, "husimi dipped to {min:.3e}");
    }

    #[test]
    fn husimi_spectral_path_agrees() {
        let s = FockState::realize(&StateSpec::thermal(0.6), 32).unwrap();
        let parts = s.spectral(1e-14);
        for (q, p) in [(0.0, 0.0), (1.2, -0.3), (-2.0, 1.5)] {
            assert_abs_diff_eq!(
                husimi_from_spectral(&parts, q, p),
                oracle_husimi(&s, q, p),
                epsilon = 1e-12
            );
        }
    }
}
