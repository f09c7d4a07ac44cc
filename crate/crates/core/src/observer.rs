//! Direct-coupled coherent observer for a single-mode plant with a homodyne-monitored output.
//!
//! The plant `x_p = [q_p; p_p]` has zero Hamiltonian and is coupled to the
//! observer mode through `H_c = x_pᵀ α βᵀ x_o` with `α = C_pᵀ`. The observer
//! has `R_o = ω_o I` and a single field channel with `W_o = √κ I`, so that
//!
//! ```text
//! dx_p = 2Jαβᵀ x_o dt
//! dx_o = A_o x_o dt + 2Jβ z_p dt − √κ dw,   A_o = [[−κ/2, 2ω_o], [−2ω_o, −κ/2]]
//! dy_o = √κ x_o dt + dw
//! ```
//!
//! At steady state `dy_o = e z_p dt + dw_out` and homodyne detection of the
//! quadrature `K` with `K e = 1` yields `dz_o = z_p dt + dn`, `dn` white with
//! intensity `‖K‖²`.

use nalgebra::{DMatrix, Matrix2, Matrix2x4, Matrix4, Matrix4x2, RowVector2, Vector2};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qls::{self, HamiltonianSpec, QuadratureSystem, RealizabilityReport};
use crate::scalar::Scalar;

pub(crate) fn j2<T: Scalar>() -> Matrix2<T> {
    Matrix2::new(T::zero(), T::one(), -T::one(), T::zero())
}

/// Plant output row `C_p` and the mean of the initial plant quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantSpec<T: Scalar> {
    c_p: RowVector2<T>,
    x_p0_mean: Vector2<T>,
}

impl<T: Scalar> PlantSpec<T> {
    pub fn new(c_p: [T; 2], x_p0_mean: [T; 2]) -> Result<Self> {
        let c_p = RowVector2::new(c_p[0], c_p[1]);
        if c_p.iter().all(|x| x.is_zero()) {
            return Err(Error::ZeroOutputRow);
        }
        Ok(Self {
            c_p,
            x_p0_mean: Vector2::new(x_p0_mean[0], x_p0_mean[1]),
        })
    }

    pub fn c_p(&self) -> RowVector2<T> {
        self.c_p
    }

    /// `α = C_pᵀ`
    pub fn alpha(&self) -> Vector2<T> {
        self.c_p.transpose()
    }

    pub fn x_p0_mean(&self) -> Vector2<T> {
        self.x_p0_mean
    }

    /// `z_p = C_p x_p`
    pub fn output(&self, x_p: &Vector2<T>) -> T {
        (self.c_p * x_p)[0]
    }
}

/// Observer coupling vector `β`, detuning `ω_o` and field coupling rate `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverSpec<T: Scalar> {
    beta: Vector2<T>,
    omega_o: T,
    kappa: T,
}

impl<T: Scalar> ObserverSpec<T> {
    pub fn new(beta: [T; 2], omega_o: T, kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) {
            return Err(Error::NonPositiveKappa(kappa.to_f64_lossy()));
        }
        if !(omega_o >= T::zero()) {
            return Err(Error::NegativeDetuning(omega_o.to_f64_lossy()));
        }
        Ok(Self {
            beta: Vector2::new(beta[0], beta[1]),
            omega_o,
            kappa,
        })
    }

    pub fn beta(&self) -> Vector2<T> {
        self.beta
    }

    pub fn omega_o(&self) -> T {
        self.omega_o
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// `A_o = [[−κ/2, 2ω_o], [−2ω_o, −κ/2]]`
    pub fn drift(&self) -> Matrix2<T> {
        let h = self.kappa * T::lit(0.5);
        let w = self.omega_o * T::lit(2.0);
        Matrix2::new(-h, w, -w, -h)
    }

    /// `R_c = α βᵀ`
    pub fn coupling(&self, plant: &PlantSpec<T>) -> Matrix2<T> {
        plant.alpha() * self.beta.transpose()
    }

    /// `R_o = ω_o I`, `W_o = √κ I`.
    pub fn hamiltonian_spec(&self) -> HamiltonianSpec<T> {
        HamiltonianSpec::new(
            DMatrix::identity(2, 2) * self.omega_o,
            DMatrix::identity(2, 2) * self.kappa.sqrt(),
        )
        .expect("observer Hamiltonian is symmetric")
    }

    pub fn quadrature_system(&self) -> QuadratureSystem<T> {
        qls::build_system(&self.hamiltonian_spec())
    }

    /// Relaxation time `2/κ` of the observer error.
    pub fn time_constant(&self) -> T {
        T::lit(2.0) / self.kappa
    }
}

/// Closed-loop plant–observer system over `x_a = [x_p; x_o]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem<T: Scalar> {
    /// `[[0, R_c], [R_cᵀ, R_o]]`
    pub r_a: Matrix4<T>,
    pub a_cl: Matrix4<T>,
    pub b_cl: Matrix4x2<T>,
    pub c_cl: Matrix2x4<T>,
}

impl<T: Scalar> AugmentedSystem<T> {
    pub fn as_quadrature_system(&self) -> QuadratureSystem<T> {
        QuadratureSystem::new(
            DMatrix::from_iterator(4, 4, self.a_cl.iter().copied()),
            DMatrix::from_iterator(4, 2, self.b_cl.iter().copied()),
            DMatrix::from_iterator(2, 4, self.c_cl.iter().copied()),
        )
        .expect("augmented dimensions are fixed")
    }

    /// Same system built from `R_a` and `W = [0, √κ I]` by [`qls::build_system`].
    pub fn hamiltonian_spec(&self, kappa: T) -> HamiltonianSpec<T> {
        let mut w = DMatrix::zeros(2, 4);
        w[(0, 2)] = kappa.sqrt();
        w[(1, 3)] = kappa.sqrt();
        HamiltonianSpec::new(DMatrix::from_iterator(4, 4, self.r_a.iter().copied()), w)
            .expect("R_a is symmetric by construction")
    }
}

pub fn build_augmented<T: Scalar>(plant: &PlantSpec<T>, obs: &ObserverSpec<T>) -> AugmentedSystem<T> {
    let two = T::lit(2.0);
    let j = j2::<T>();
    let alpha = plant.alpha();
    let beta = obs.beta();
    let sqrt_kappa = obs.kappa().sqrt();
    let r_c = obs.coupling(plant);

    let mut r_a = Matrix4::zeros();
    r_a.fixed_view_mut::<2, 2>(0, 2).copy_from(&r_c);
    r_a.fixed_view_mut::<2, 2>(2, 0).copy_from(&r_c.transpose());
    r_a.fixed_view_mut::<2, 2>(2, 2)
        .copy_from(&(Matrix2::identity() * obs.omega_o()));

    let mut a_cl = Matrix4::zeros();
    a_cl.fixed_view_mut::<2, 2>(0, 2)
        .copy_from(&(j * alpha * beta.transpose() * two));
    a_cl.fixed_view_mut::<2, 2>(2, 0)
        .copy_from(&(j * beta * alpha.transpose() * two));
    a_cl.fixed_view_mut::<2, 2>(2, 2).copy_from(&obs.drift());

    let mut b_cl = Matrix4x2::zeros();
    b_cl.fixed_view_mut::<2, 2>(2, 0)
        .copy_from(&(Matrix2::identity() * -sqrt_kappa));

    let mut c_cl = Matrix2x4::zeros();
    c_cl.fixed_view_mut::<2, 2>(0, 2)
        .copy_from(&(Matrix2::identity() * sqrt_kappa));

    AugmentedSystem {
        r_a,
        a_cl,
        b_cl,
        c_cl,
    }
}

/// Largest entry of `αᵀ · 2Jαβ'ᵀ` over `β' ∈ {β, e₁, e₂}`; vanishes because `αᵀJα = 0`.
pub fn zp_invariance_certificate<T: Scalar>(plant: &PlantSpec<T>, obs: &ObserverSpec<T>) -> T {
    let alpha = plant.alpha();
    let j = j2::<T>();
    let two = T::lit(2.0);
    [obs.beta(), Vector2::x(), Vector2::y()]
        .iter()
        .map(|b| {
            let rows = j * alpha * b.transpose() * two;
            (alpha.transpose() * rows).amax()
        })
        .fold(T::zero(), |acc, r| acc.max(r))
}

/// Steady-state mean of `x_o` for a given plant value `z_p`:
/// `(4/(κ² + 16ω_o²)) [[κ, 4ω_o], [−4ω_o, κ]] Jβ z_p`.
pub fn steady_state_mean<T: Scalar>(obs: &ObserverSpec<T>, z_p: T) -> Result<Vector2<T>> {
    let k = obs.kappa();
    let w4 = obs.omega_o() * T::lit(4.0);
    let denom = k * k + w4 * w4;
    if denom.is_zero() {
        return Err(Error::SingularDrift);
    }
    let m = Matrix2::new(k, w4, -w4, k) * (T::lit(4.0) / denom);
    Ok(m * j2::<T>() * obs.beta() * z_p)
}

/// `e = −2√κ A_o⁻¹ J β`, the drift of `dy_o` per unit `z_p` at steady state.
pub fn output_drift_vector<T: Scalar>(obs: &ObserverSpec<T>) -> Result<Vector2<T>> {
    let inv = obs.drift().try_inverse().ok_or(Error::SingularDrift)?;
    Ok(inv * j2::<T>() * obs.beta() * (-T::lit(2.0) * obs.kappa().sqrt()))
}

/// Homodyne quadrature `K` and the resulting measurement noise floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneDesign<T: Scalar> {
    pub e: Vector2<T>,
    pub k: RowVector2<T>,
    /// `‖K‖²`
    pub noise_intensity: T,
    /// `|K e − 1|`
    pub constraint_residual: T,
}

impl<T: Scalar> HomodyneDesign<T> {
    /// `‖K‖`, the standard deviation rate of `dn`.
    pub fn noise_std(&self) -> T {
        self.noise_intensity.sqrt()
    }
}

/// Minimum-norm `K` subject to `K e = 1`, i.e. `K = eᵀ/‖e‖²`.
pub fn optimal_quadrature<T: Scalar>(e: Vector2<T>) -> Result<HomodyneDesign<T>> {
    let norm_sq = e.norm_squared();
    if !(norm_sq > T::zero()) || !norm_sq.is_finite() {
        return Err(Error::Unobservable);
    }
    // adding +0 clears signed zeros so reports print 0 rather than -0
    let e = e.map(|x| x + T::zero());
    let k = e.transpose() / norm_sq;
    let constraint_residual = ((k * e)[0] - T::one()).abs();
    Ok(HomodyneDesign {
        e,
        k,
        noise_intensity: k.norm_squared(),
        constraint_residual,
    })
}

/// `e` and the optimal `K` for an observer.
pub fn homodyne_design<T: Scalar>(obs: &ObserverSpec<T>) -> Result<HomodyneDesign<T>> {
    optimal_quadrature(output_drift_vector(obs)?)
}

fn resolvent<T: Scalar>(obs: &ObserverSpec<T>, omega: T) -> Matrix2<Complex<T>> {
    let a = obs.drift().map(|x| Complex::new(x, T::zero()));
    let jw = Matrix2::identity() * Complex::new(T::zero(), omega);
    (jw - a)
        .try_inverse()
        .expect("jωI − A_o is invertible for κ > 0")
}

/// `G(jω) = I − κ (jωI − A_o)⁻¹`, the map `dw → dw_out` of the observer error system.
pub fn error_transfer_function<T: Scalar>(obs: &ObserverSpec<T>, omega: T) -> Matrix2<Complex<T>> {
    let kappa = Complex::new(obs.kappa(), T::zero());
    Matrix2::identity() - resolvent(obs, omega) * kappa
}

/// `−κ (jωI − A_o)⁻¹` without the direct feedthrough. Not all-pass; kept as a negative control.
pub fn transfer_function_without_feedthrough<T: Scalar>(
    obs: &ObserverSpec<T>,
    omega: T,
) -> Matrix2<Complex<T>> {
    let kappa = Complex::new(obs.kappa(), T::zero());
    -resolvent(obs, omega) * kappa
}

/// `‖G G† − I‖_∞` (maximum absolute row sum).
pub fn all_pass_residual<T: Scalar>(g: &Matrix2<Complex<T>>) -> T {
    let d = g * g.adjoint() - Matrix2::identity();
    d.row_iter()
        .map(|row| row.iter().fold(T::zero(), |acc, z| acc + (z.re * z.re + z.im * z.im).sqrt()))
        .fold(T::zero(), |acc, s| acc.max(s))
}

/// 1000 log-spaced frequencies in `[1e-3, 1e3]`, their negatives, and zero.
pub fn default_frequency_grid<T: Scalar>() -> Vec<T> {
    let n = 1000;
    let positive: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64))
        .collect();
    let mut grid: Vec<f64> = positive.iter().rev().map(|w| -w).collect();
    grid.push(0.0);
    grid.extend(positive);
    grid.into_iter().map(T::lit).collect()
}

pub fn max_all_pass_residual<T: Scalar>(obs: &ObserverSpec<T>, grid: &[T]) -> T {
    grid.iter()
        .map(|&w| all_pass_residual(&error_transfer_function(obs, w)))
        .fold(T::zero(), |acc, r| acc.max(r))
}

/// Stationary covariance of `x_o − x̄_o`: solves `A_o P + P A_oᵀ + κ I = 0`.
pub fn steady_state_covariance<T: Scalar>(obs: &ObserverSpec<T>) -> Result<Matrix2<T>> {
    let a = DMatrix::from_iterator(2, 2, obs.drift().iter().copied());
    let q = DMatrix::identity(2, 2) * obs.kappa();
    let p = qls::solve_continuous_lyapunov(&a, &q)?;
    Ok(Matrix2::from_iterator(p.iter().copied()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizabilitySummary<T> {
    pub observer: RealizabilityReport<T>,
    pub augmented: RealizabilityReport<T>,
}

/// Everything a designer needs to judge one plant–observer configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport<T> {
    /// Steady-state mean of `x_o` per unit `z_p`.
    pub steady_state_gain: [T; 2],
    pub e: [T; 2],
    #[serde(rename = "K")]
    pub k: [T; 2],
    pub noise_intensity: T,
    pub noise_std: T,
    pub constraint_residual: T,
    /// Eigenvalues of `A_o` as `[re, im]`.
    pub eigenvalues: Vec<[T; 2]>,
    pub is_hurwitz: bool,
    pub time_constant: T,
    pub all_pass_residual: T,
    pub steady_state_covariance: [[T; 2]; 2],
    pub zp_invariance_residual: T,
    pub realizability: RealizabilitySummary<T>,
}

pub fn design_report<T: Scalar>(plant: &PlantSpec<T>, obs: &ObserverSpec<T>) -> Result<DesignReport<T>> {
    let design = homodyne_design(obs)?;
    let gain = steady_state_mean(obs, T::one())?;
    let observer_sys = obs.quadrature_system();
    let spectrum = qls::drift_spectrum(&observer_sys);
    let cov = steady_state_covariance(obs)?;
    let tol = T::lit(qls::DEFAULT_REALIZABILITY_TOL);
    let augmented = build_augmented(plant, obs).as_quadrature_system();

    Ok(DesignReport {
        steady_state_gain: [gain[0], gain[1]],
        e: [design.e[0], design.e[1]],
        k: [design.k[0], design.k[1]],
        noise_intensity: design.noise_intensity,
        noise_std: design.noise_std(),
        constraint_residual: design.constraint_residual,
        eigenvalues: spectrum.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
        is_hurwitz: spectrum.is_hurwitz,
        time_constant: obs.time_constant(),
        all_pass_residual: max_all_pass_residual(obs, &default_frequency_grid()),
        steady_state_covariance: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        zp_invariance_residual: zp_invariance_certificate(plant, obs),
        realizability: RealizabilitySummary {
            observer: qls::check_physical_realizability(&observer_sys, tol),
            augmented: qls::check_physical_realizability(&augmented, tol),
        },
    })
}
