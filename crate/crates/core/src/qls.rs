//! Quadrature-form linear quantum systems.
//!
//! A system with `n` modes and `m` field channels is described by real
//! matrices `A` (2n×2n), `B` (2n×2m) and `C` (2m×2n) acting on the stacked
//! position/momentum quadratures. Systems built from a quadratic Hamiltonian
//! `½ xᵀ R x` and a linear coupling `W x` are physically realizable, i.e.
//!
//! ```text
//! A J + J Aᵀ + B J Bᵀ = 0,    B = J Cᵀ J
//! ```
//!
//! where `J` is the block-diagonal symplectic form.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default tolerance of [`check_physical_realizability`].
pub const DEFAULT_REALIZABILITY_TOL: f64 = 1e-10;

/// Block-diagonal symplectic matrix `diag(J, …, J)` with `J = [[0, 1], [-1, 0]]`.
pub fn symplectic_j<T: Scalar>(modes: usize) -> DMatrix<T> {
    let mut j = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        j[(2 * k, 2 * k + 1)] = T::one();
        j[(2 * k + 1, 2 * k)] = -T::one();
    }
    j
}

/// Largest absolute entry; zero for empty matrices.
pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Quadratic Hamiltonian matrix `R` and coupling matrix `W` of a linear quantum system.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec<T: Scalar> {
    r: DMatrix<T>,
    w: DMatrix<T>,
}

impl<T: Scalar> HamiltonianSpec<T> {
    /// Symmetry tolerance on `R`.
    pub const SYMMETRY_TOL: f64 = 1e-12;

    pub fn new(r: DMatrix<T>, w: DMatrix<T>) -> Result<Self> {
        if !r.is_square() || !r.nrows().is_multiple_of(2) || r.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "R must be 2n×2n with n >= 1, got {}×{}",
                r.nrows(),
                r.ncols()
            )));
        }
        if w.ncols() != r.nrows() || !w.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "W must be 2m×{}, got {}×{}",
                r.nrows(),
                w.nrows(),
                w.ncols()
            )));
        }
        let residual = max_abs(&(&r - r.transpose()));
        if residual > T::lit(Self::SYMMETRY_TOL) {
            return Err(Error::NonSymmetric {
                residual: residual.to_f64_lossy(),
            });
        }
        Ok(Self { r, w })
    }

    pub fn r(&self) -> &DMatrix<T> {
        &self.r
    }

    pub fn w(&self) -> &DMatrix<T> {
        &self.w
    }

    pub fn n_modes(&self) -> usize {
        self.r.nrows() / 2
    }

    pub fn n_channels(&self) -> usize {
        self.w.nrows() / 2
    }
}

/// Real state-space model `dx = A x dt + B dw`, `dy = C x dt + dw`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSystem<T: Scalar> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    n_modes: usize,
    n_channels: usize,
}

impl<T: Scalar> QuadratureSystem<T> {
    pub fn new(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>) -> Result<Self> {
        if !a.is_square() || !a.nrows().is_multiple_of(2) || a.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "A must be 2n×2n with n >= 1, got {}×{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let dim = a.nrows();
        if b.nrows() != dim || !b.ncols().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "B must be {dim}×2m, got {}×{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if c.ncols() != dim || c.nrows() != b.ncols() {
            return Err(Error::Dimension(format!(
                "C must be {}×{dim}, got {}×{}",
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        let n_channels = b.ncols() / 2;
        Ok(Self {
            a,
            b,
            c,
            n_modes: dim / 2,
            n_channels,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }
}

/// Builds `A = 2JR + ½ J Wᵀ J W`, `B = J Wᵀ J`, `C = W`.
pub fn build_system<T: Scalar>(spec: &HamiltonianSpec<T>) -> QuadratureSystem<T> {
    let jn = symplectic_j::<T>(spec.n_modes());
    let jm = symplectic_j::<T>(spec.n_channels());
    let w = spec.w();
    let wt = w.transpose();
    let two = T::lit(2.0);
    let half = T::lit(0.5);

    let a = (&jn * spec.r()) * two + (&jn * &wt * &jm * w) * half;
    let b = &jn * &wt * &jm;
    let c = w.clone();
    QuadratureSystem::new(a, b, c).expect("dimensions checked by HamiltonianSpec")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealizabilityReport<T> {
    /// `max |A J + J Aᵀ + B J Bᵀ|`
    pub drift_residual: T,
    /// `max |B - J Cᵀ J|`
    pub coupling_residual: T,
    pub tolerance: T,
    pub passed: bool,
}

pub fn check_physical_realizability<T: Scalar>(
    sys: &QuadratureSystem<T>,
    tolerance: T,
) -> RealizabilityReport<T> {
    let jn = symplectic_j::<T>(sys.n_modes());
    let jm = symplectic_j::<T>(sys.n_channels());
    let drift = &sys.a * &jn + &jn * sys.a.transpose() + &sys.b * &jm * sys.b.transpose();
    let coupling = &sys.b - &jn * sys.c.transpose() * &jm;
    let drift_residual = max_abs(&drift);
    let coupling_residual = max_abs(&coupling);
    RealizabilityReport {
        drift_residual,
        coupling_residual,
        tolerance,
        passed: drift_residual <= tolerance && coupling_residual <= tolerance,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<Complex<T>>,
    pub is_hurwitz: bool,
}

/// Eigenvalues of a square matrix; Hurwitz means every real part is strictly negative.
pub fn spectrum<T: Scalar>(a: &DMatrix<T>) -> Spectrum<T> {
    assert!(a.is_square(), "spectrum of a non-square matrix");
    let mut eigenvalues: Vec<Complex<T>> = a.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let is_hurwitz = !eigenvalues.is_empty() && eigenvalues.iter().all(|l| l.re < T::zero());
    Spectrum {
        eigenvalues,
        is_hurwitz,
    }
}

pub fn drift_spectrum<T: Scalar>(sys: &QuadratureSystem<T>) -> Spectrum<T> {
    spectrum(&sys.a)
}

/// Solves `A P + P Aᵀ + Q = 0` for Hurwitz `A` by vectorization.
///
/// Intended for the small (≤ 6 dimensional) systems handled here; the
/// Kronecker system has `n²` unknowns.
pub fn solve_continuous_lyapunov<T: Scalar>(a: &DMatrix<T>, q: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "Lyapunov solve needs square A and Q of equal size, got {:?} and {:?}",
            a.shape(),
            q.shape()
        )));
    }
    if !spectrum(a).is_hurwitz {
        return Err(Error::NotHurwitz);
    }
    let eye = DMatrix::<T>::identity(n, n);
    // column-major vec: vec(A P) = (I ⊗ A) vec P, vec(P Aᵀ) = (A ⊗ I) vec P
    let op = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = -DMatrix::from_column_slice(n * n, 1, q.as_slice());
    let sol = op.lu().solve(&rhs).ok_or(Error::SingularDrift)?;
    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    Ok((&p + p.transpose()) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;

    #[test]
    fn symplectic_form_identities() {
        for modes in 1..4 {
            let j = symplectic_j::<f64>(modes);
            let eye = DMatrix::<f64>::identity(2 * modes, 2 * modes);
            assert_eq!(j.transpose(), -&j);
            assert_eq!(&j * &j, -eye);
        }
    }

    #[test]
    fn observer_family_matches_closed_loop_drift() {
        // R = I, W = √2 I
        let spec = HamiltonianSpec::new(
            DMatrix::<f64>::identity(2, 2),
            DMatrix::<f64>::identity(2, 2) * 2f64.sqrt(),
        )
        .unwrap();
        let sys = build_system(&spec);
        assert_abs_diff_eq!(sys.a, dmatrix![-1.0, 2.0; -2.0, -1.0], epsilon = 1e-14);
        assert_abs_diff_eq!(sys.b, DMatrix::identity(2, 2) * -(2f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(sys.c, DMatrix::identity(2, 2) * 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn uncoupled_static_system_is_zero() {
        let spec = HamiltonianSpec::new(DMatrix::<f64>::zeros(2, 2), DMatrix::zeros(2, 2)).unwrap();
        let sys = build_system(&spec);
        assert_eq!(sys.a, DMatrix::zeros(2, 2));
        assert_eq!(sys.b, DMatrix::zeros(2, 2));
        assert_eq!(sys.c, DMatrix::zeros(2, 2));
    }

    #[test]
    fn off_diagonal_hamiltonian_with_unit_coupling() {
        // 2JR = diag(2, -2), ½ J Wᵀ J W = -½ I
        let spec = HamiltonianSpec::new(dmatrix![0.0, 1.0; 1.0, 0.0], DMatrix::identity(2, 2)).unwrap();
        let sys = build_system(&spec);
        assert_abs_diff_eq!(sys.a, dmatrix![1.5, 0.0; 0.0, -2.5], epsilon = 1e-15);
        assert_abs_diff_eq!(sys.b, -DMatrix::<f64>::identity(2, 2), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            HamiltonianSpec::new(dmatrix![0.0, 1.0; 0.0, 0.0], DMatrix::identity(2, 2)),
            Err(Error::NonSymmetric { .. })
        ));
        assert!(matches!(
            HamiltonianSpec::new(DMatrix::<f64>::identity(2, 2), DMatrix::identity(2, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            HamiltonianSpec::new(DMatrix::<f64>::identity(3, 3), DMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(QuadratureSystem::new(
            DMatrix::<f64>::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 4)
        )
        .is_err());
    }

    #[test]
    fn realizability_pass_and_fail() {
        let spec = HamiltonianSpec::new(
            DMatrix::<f64>::identity(2, 2),
            DMatrix::identity(2, 2) * 2f64.sqrt(),
        )
        .unwrap();
        let report = check_physical_realizability(&build_system(&spec), DEFAULT_REALIZABILITY_TOL);
        assert!(report.passed);
        assert!(report.drift_residual <= 1e-14 && report.coupling_residual <= 1e-14);

        // A J + J Aᵀ = tr(A) J for 2×2 drifts, so A = I leaves 2J behind.
        let bad = QuadratureSystem::new(
            DMatrix::<f64>::identity(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let report = check_physical_realizability(&bad, DEFAULT_REALIZABILITY_TOL);
        assert!(!report.passed);
        assert_eq!(report.drift_residual, 2.0);

        // closed harmonic oscillator
        let closed = QuadratureSystem::new(
            symplectic_j::<f64>(1) * 2.0,
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        assert!(check_physical_realizability(&closed, DEFAULT_REALIZABILITY_TOL).passed);
    }

    #[test]
    fn spectrum_of_damped_rotation() {
        let s = spectrum(&dmatrix![-1.0f64, 2.0; -2.0, -1.0]);
        assert!(s.is_hurwitz);
        assert_abs_diff_eq!(s.eigenvalues[0].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[0].im, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[1].im, 2.0, epsilon = 1e-12);

        let zero = spectrum(&DMatrix::<f64>::zeros(2, 2));
        assert!(!zero.is_hurwitz);
        assert!(zero.eigenvalues.iter().all(|l| l.norm() == 0.0));
    }

    #[test]
    fn spectrum_closed_form_on_grid() {
        for &kappa in &[0.01, 0.5, 2.0, 10.0] {
            for &omega in &[0.0, 0.3, 1.0, 7.0] {
                let a = dmatrix![-kappa / 2.0, 2.0 * omega; -2.0 * omega, -kappa / 2.0];
                let s = spectrum::<f64>(&a);
                for l in &s.eigenvalues {
                    assert_abs_diff_eq!(l.re, -kappa / 2.0, epsilon = 1e-10);
                    assert_abs_diff_eq!(l.im.abs(), 2.0 * omega, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn lyapunov_matches_hand_solution() {
        // A = diag(-1, -2), Q = I → P = diag(1/2, 1/4)
        let p = solve_continuous_lyapunov(&dmatrix![-1.0f64, 0.0; 0.0, -2.0], &DMatrix::identity(2, 2))
            .unwrap();
        assert_abs_diff_eq!(p, dmatrix![0.5, 0.0; 0.0, 0.25], epsilon = 1e-14);
        assert_eq!(
            solve_continuous_lyapunov(&DMatrix::<f64>::zeros(2, 2), &DMatrix::identity(2, 2)),
            Err(Error::NotHurwitz)
        );
    }

    #[test]
    fn works_in_single_precision() {
        let spec = HamiltonianSpec::new(
            DMatrix::<f32>::identity(2, 2),
            DMatrix::identity(2, 2) * 2f32.sqrt(),
        )
        .unwrap();
        let report = check_physical_realizability(&build_system(&spec), 1e-5);
        assert!(report.passed);
    }
}
