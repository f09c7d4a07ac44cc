//! Physical realization of the plant–observer pair as a non-degenerate
//! parametric amplifier (NDPA) whose first two field channels are fed back
//! through a beamsplitter.
//!
//! Mode `a` plays the plant, mode `b` the observer; the third channel of `b`
//! (rate `κ₃`) is the homodyne-monitored output. Closing the beamsplitter loop
//! with angles `(θ, φ)` produces the effective coupling
//! `δ = √(κ₁κ₂) e^{iφ} sin θ / (1 − cos θ)`; the quadrature coupling block
//! `R_c` is rank one exactly when `|δ| = |ε|`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observer::{self, ObserverSpec};
use crate::qls::{self, HamiltonianSpec, RealizabilityReport};
use crate::scalar::Scalar;

/// Upper end of the squeezing ratio `|ε|/√(κ₁κ₂)` for which the linearized NDPA model is trusted.
pub const LINEARIZATION_LIMIT: f64 = 0.6;

type C<T> = Complex<T>;

fn re<T: Scalar>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

fn cabs<T: Scalar>(z: C<T>) -> T {
    z.norm_sqr().sqrt()
}

fn cis<T: Scalar>(phi: T) -> C<T> {
    Complex::new(phi.cos(), phi.sin())
}

/// Physical NDPA and beamsplitter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdpaParams<T: Scalar> {
    pub epsilon: C<T>,
    pub phi: T,
    pub theta: T,
    pub kappa1: T,
    pub kappa2: T,
    pub kappa3: T,
    pub omega_o: T,
}

impl<T: Scalar> NdpaParams<T> {
    pub fn new(epsilon: C<T>, phi: T, theta: T, kappa: [T; 3], omega_o: T) -> Result<Self> {
        for (k, name) in kappa.iter().zip(["kappa1", "kappa2", "kappa3"]) {
            if !(*k > T::zero()) {
                return Err(Error::NonPositive(name));
            }
        }
        if !(omega_o >= T::zero()) {
            return Err(Error::NegativeDetuning(omega_o.to_f64_lossy()));
        }
        if !(T::one() - theta.cos() > T::zero()) {
            return Err(Error::SingularBeamsplitter);
        }
        Ok(Self {
            epsilon,
            phi,
            theta,
            kappa1: kappa[0],
            kappa2: kappa[1],
            kappa3: kappa[2],
            omega_o,
        })
    }

    pub fn gamma1(&self) -> T {
        self.kappa1
    }

    pub fn gamma2(&self) -> T {
        self.kappa2 + self.kappa3
    }

    /// `δ = √(κ₁κ₂) e^{iφ} sin θ / (1 − cos θ)`
    pub fn delta(&self) -> C<T> {
        let scale = (self.kappa1 * self.kappa2).sqrt() * f_theta(self.theta);
        cis(self.phi) * scale
    }

    /// `|ε| / √(κ₁κ₂)`
    pub fn linearization_ratio(&self) -> T {
        cabs(self.epsilon) / (self.kappa1 * self.kappa2).sqrt()
    }

    pub fn warnings(&self) -> Vec<String> {
        let ratio = self.linearization_ratio();
        if ratio >= T::lit(LINEARIZATION_LIMIT) {
            vec![format!(
                "linearization ratio exceeds {LINEARIZATION_LIMIT} (|epsilon|/sqrt(kappa1*kappa2) = {ratio})"
            )]
        } else {
            Vec::new()
        }
    }
}

/// `f(θ) = sin θ / (1 − cos θ) = cot(θ/2)`
pub fn f_theta<T: Scalar>(theta: T) -> T {
    theta.sin() / (T::one() - theta.cos())
}

/// Beamsplitter angle `θ ∈ (0, π)` with `f(θ) = |ε|/√(κ₁κ₂)`, i.e. `θ = 2 atan(√(κ₁κ₂)/|ε|)`.
pub fn solve_theta<T: Scalar>(epsilon: C<T>, kappa1: T, kappa2: T) -> Result<T> {
    if !(kappa1 > T::zero()) {
        return Err(Error::NonPositive("kappa1"));
    }
    if !(kappa2 > T::zero()) {
        return Err(Error::NonPositive("kappa2"));
    }
    let mag = cabs(epsilon);
    if mag.is_zero() {
        return Err(Error::ZeroSqueezing);
    }
    Ok(T::lit(2.0) * (kappa1 * kappa2).sqrt().atan2(mag))
}

/// Tabulates `f(θ)`; every grid point must lie strictly inside `(0, 2π)`.
pub fn f_theta_curve<T: Scalar>(grid: &[T]) -> Result<Vec<(T, T)>> {
    let two_pi = T::lit(2.0 * PI);
    grid.iter()
        .map(|&theta| {
            if !(theta > T::zero() && theta < two_pi) || !(T::one() - theta.cos() > T::zero()) {
                return Err(Error::GridSingularity(theta.to_f64_lossy()));
            }
            Ok((theta, f_theta(theta)))
        })
        .collect()
}

/// 1000 evenly spaced points on `[0.01, 2π − 0.01]`, merged with the landmarks `π/2, π, 3π/2`.
pub fn default_theta_grid<T: Scalar>() -> Vec<T> {
    let (lo, hi, n) = (0.01, 2.0 * PI - 0.01, 1000);
    let mut grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .chain([PI / 2.0, PI, 1.5 * PI])
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    grid.into_iter().map(T::lit).collect()
}

pub fn is_strictly_decreasing<T: Scalar>(rows: &[(T, T)]) -> bool {
    rows.windows(2).all(|w| w[1].1 < w[0].1)
}

/// Doubled-up QSDE over `(a, b, a*, b*)` driven by the monitored channel `dB₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStateSpace<T: Scalar> {
    pub f: Matrix4<C<T>>,
    pub g: Matrix4x2<C<T>>,
    pub h: Matrix2x4<C<T>>,
}

fn doubled_up<T: Scalar>(m1: &Matrix2<C<T>>, m2: &Matrix2<C<T>>) -> Matrix4<C<T>> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(m1);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(m2);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&m2.map(|z| z.conj()));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&m1.map(|z| z.conj()));
    m
}

/// Largest deviation from `[[X₁, X₂], [X₂#, X₁#]]`.
pub fn doubled_up_residual<T: Scalar>(m: &Matrix4<C<T>>) -> T {
    let mut r = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            r = r.max(cabs(m[(i + 2, j + 2)] - m[(i, j)].conj()));
            r = r.max(cabs(m[(i + 2, j)] - m[(i, j + 2)].conj()));
        }
    }
    r
}

fn max_modulus<T: Scalar>(m: &Matrix4<C<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

/// Drift block `F₁` after eliminating the fed-back channels.
pub fn eliminated_drift<T: Scalar>(p: &NdpaParams<T>) -> Matrix2<C<T>> {
    let half = T::lit(0.5);
    let coupling = p.delta() * half;
    Matrix2::new(
        re(T::zero()),
        -coupling.conj(),
        coupling,
        Complex::new(-p.kappa3 * half, -p.omega_o * half),
    )
}

/// Rebuilds `F₁` from the undamped-loop QSDE: `−diag(γ₁/2, γ₂/2 + iω_o/2) − D S⁻¹ D`
/// with `D = diag(√κ₁, √κ₂)` and `S` the beamsplitter relation
/// `[[cos θ − 1, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ − 1]]`.
pub fn rederived_drift<T: Scalar>(p: &NdpaParams<T>) -> Matrix2<C<T>> {
    let half = T::lit(0.5);
    let (s, c) = (p.theta.sin(), p.theta.cos());
    let e = cis(p.phi);
    let relation = Matrix2::new(re(c - T::one()), -e.conj() * s, e * s, re(c - T::one()));
    let inv = relation.try_inverse().expect("cos θ ≠ 1");
    let d = Matrix2::new(re(p.kappa1.sqrt()), re(T::zero()), re(T::zero()), re(p.kappa2.sqrt()));
    let damping = Matrix2::new(
        re(p.gamma1() * half),
        re(T::zero()),
        re(T::zero()),
        Complex::new(p.gamma2() * half, p.omega_o * half),
    );
    -damping - d * inv * d
}

/// `max |F₁(printed) − F₁(rederived)|`
pub fn drift_elimination_residual<T: Scalar>(p: &NdpaParams<T>) -> T {
    (eliminated_drift(p) - rederived_drift(p))
        .iter()
        .fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

pub fn build_ndpa_qsde<T: Scalar>(p: &NdpaParams<T>) -> Result<ComplexStateSpace<T>> {
    if !(T::one() - p.theta.cos() > T::zero()) {
        return Err(Error::SingularBeamsplitter);
    }
    let half_eps = p.epsilon * T::lit(0.5);
    let zero = re(T::zero());
    let f2 = Matrix2::new(zero, half_eps, half_eps, zero);
    let f = doubled_up(&eliminated_drift(p), &f2);
    let sk = re(p.kappa3.sqrt());
    let mut g = Matrix4x2::zeros();
    g[(1, 0)] = -sk;
    g[(3, 1)] = -sk;
    let mut h = Matrix2x4::zeros();
    h[(0, 1)] = sk;
    h[(1, 3)] = sk;
    Ok(ComplexStateSpace { f, g, h })
}

fn signature<T: Scalar>() -> Matrix4<C<T>> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        re(T::one()),
        re(T::one()),
        re(-T::one()),
        re(-T::one()),
    ))
}

/// Hamiltonian matrix `M = (i/2)(J F − F† J)` with `J = diag(I, −I)`.
pub fn extract_hamiltonian<T: Scalar>(f: &Matrix4<C<T>>) -> Result<Matrix4<C<T>>> {
    let residual = doubled_up_residual(f);
    if residual > T::tol(1e-12) * (T::one() + max_modulus(f)) {
        return Err(Error::NotDoubledUp {
            residual: residual.to_f64_lossy(),
        });
    }
    let j = signature::<T>();
    let i_half = Complex::new(T::zero(), T::lit(0.5));
    Ok((j * f - f.adjoint() * j) * i_half)
}

/// `Φ` with `(a, b, a*, b*) = Φ (q_p, p_p, q_o, p_o)`.
pub fn quadrature_transform<T: Scalar>() -> Matrix4<C<T>> {
    let (o, z, i) = (re(T::one()), re(T::zero()), Complex::new(T::zero(), T::one()));
    Matrix4::new(
        o, i, z, z, //
        z, z, o, i, //
        o, -i, z, z, //
        z, z, o, -i,
    )
}

/// Real quadrature Hamiltonian `R = Φ† M Φ`.
pub fn to_quadrature<T: Scalar>(m: &Matrix4<C<T>>) -> Result<Matrix4<T>> {
    let phi = quadrature_transform::<T>();
    let r = phi.adjoint() * m * phi;
    let residual = r.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()));
    if residual > T::tol(1e-10) * (T::one() + max_modulus(m)) {
        return Err(Error::ImaginaryResidue {
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(r.map(|z| z.re))
}

/// `R_c = [[−Im ε − Im δ, Re ε + Re δ], [Re ε − Re δ, Im ε − Im δ]]`
pub fn coupling_block<T: Scalar>(epsilon: C<T>, delta: C<T>) -> Matrix2<T> {
    Matrix2::new(
        -epsilon.im - delta.im,
        epsilon.re + delta.re,
        epsilon.re - delta.re,
        epsilon.im - delta.im,
    )
}

/// Factors a rank-one `R_c = α βᵀ`.
///
/// With a non-zero first row, `α = [1, ⟨r₂, r₁⟩/‖r₁‖²]` and `β = r₁`; this equals
/// `α₂ = (Re ε − Re δ)/(−Im ε − Im δ)` wherever that quotient is defined.
/// Otherwise `α = [0, 1]` and `β = r₂`.
pub fn factor_coupling<T: Scalar>(r_c: &Matrix2<T>) -> Result<(Vector2<T>, Vector2<T>)> {
    let scale = r_c.norm_squared();
    if scale.is_zero() {
        return Err(Error::ZeroCoupling);
    }
    let det = r_c.determinant();
    if det.abs() > T::tol(1e-8) * scale {
        return Err(Error::RankCondition {
            residual: det.abs().to_f64_lossy(),
        });
    }
    let r1 = Vector2::new(r_c[(0, 0)], r_c[(0, 1)]);
    let r2 = Vector2::new(r_c[(1, 0)], r_c[(1, 1)]);
    let n1 = r1.norm_squared();
    if n1 > T::zero() {
        Ok((Vector2::new(T::one(), r2.dot(&r1) / n1), r1))
    } else {
        Ok((Vector2::new(T::zero(), T::one()), r2))
    }
}

/// Inputs of [`synthesize`]. `theta = None` solves the design equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisInput<T: Scalar> {
    pub epsilon: C<T>,
    pub phi: T,
    pub kappa1: T,
    pub kappa2: T,
    pub kappa3: T,
    pub omega_o: T,
    pub theta: Option<T>,
}

/// Complex-number forms valid for `ω_o = 0`:
/// `e = −(4/κ₃)(ε + δ)` and `K = −κ₃ / (4(ε̄ + δ̄))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexForms<T> {
    pub e: [T; 2],
    #[serde(rename = "K")]
    pub k: [T; 2],
    /// Real scalar `r` with `e_canonical = r · e_complex` (equals `−√κ₃`).
    pub reconciliation_factor: T,
    /// `e_canonical × e_complex` (2-D cross product).
    pub parallel_residual: T,
    /// `κ₃ / (4|ε + δ|)`
    pub noise_floor: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult<T: Scalar> {
    pub params: NdpaParams<T>,
    pub delta: C<T>,
    pub qsde: ComplexStateSpace<T>,
    pub m: Matrix4<C<T>>,
    pub r: Matrix4<T>,
    pub r_c: Matrix2<T>,
    pub alpha: Vector2<T>,
    pub beta: Vector2<T>,
    /// `|det R_c|`
    pub rank_residual: T,
    /// `||δ|² − |ε|²|`
    pub modulus_residual: T,
    /// `max |α βᵀ − R_c|`
    pub factor_residual: T,
    /// `max |R − [[0, αβᵀ], [βαᵀ, ω_o I]]|`
    pub structure_residual: T,
    /// `max |R − Rᵀ|`
    pub symmetry_residual: T,
    /// `max |F₁ − F₁(rederived)|`
    pub drift_elimination_residual: T,
    pub e: Vector2<T>,
    pub k: nalgebra::RowVector2<T>,
    pub noise_intensity: T,
    pub complex_forms: Option<ComplexForms<T>>,
    pub realizability: RealizabilityReport<T>,
    pub warnings: Vec<String>,
}

fn max_abs2<T: Scalar>(m: &Matrix2<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Runs the full synthesis chain: design equation, QSDE, Hamiltonian, quadrature
/// form, rank-one factorization and homodyne quadrature (with `κ = κ₃`).
pub fn synthesize<T: Scalar>(input: &SynthesisInput<T>) -> Result<SynthesisResult<T>> {
    let theta = match input.theta {
        Some(t) => t,
        None => solve_theta(input.epsilon, input.kappa1, input.kappa2)?,
    };
    if cabs(input.epsilon).is_zero() {
        return Err(Error::ZeroSqueezing);
    }
    let params = NdpaParams::new(
        input.epsilon,
        input.phi,
        theta,
        [input.kappa1, input.kappa2, input.kappa3],
        input.omega_o,
    )?;
    let delta = params.delta();
    let eps = params.epsilon;

    let modulus_residual = (delta.norm_sqr() - eps.norm_sqr()).abs();
    let scale = T::one().max(eps.norm_sqr()).max(delta.norm_sqr());
    if modulus_residual > T::tol(1e-10) * scale {
        return Err(Error::RankCondition {
            residual: modulus_residual.to_f64_lossy(),
        });
    }

    let qsde = build_ndpa_qsde(&params)?;
    let m = extract_hamiltonian(&qsde.f)?;
    let r = to_quadrature(&m)?;
    let r_c: Matrix2<T> = r.fixed_view::<2, 2>(0, 2).into_owned();
    let (alpha, beta) = factor_coupling(&r_c)?;
    let outer = alpha * beta.transpose();

    let mut expected = Matrix4::zeros();
    expected.fixed_view_mut::<2, 2>(0, 2).copy_from(&outer);
    expected.fixed_view_mut::<2, 2>(2, 0).copy_from(&outer.transpose());
    expected
        .fixed_view_mut::<2, 2>(2, 2)
        .copy_from(&(Matrix2::identity() * params.omega_o));
    let structure_residual = (r - expected).amax();
    let symmetry_residual = (r - r.transpose()).amax();

    let obs = ObserverSpec::new([beta[0], beta[1]], params.omega_o, params.kappa3)?;
    let design = observer::homodyne_design(&obs)?;

    let complex_forms = params.omega_o.is_zero().then(|| {
        let sum = eps + delta;
        let e_c = sum * (-T::lit(4.0) / params.kappa3);
        let k_c = -re(params.kappa3) / (sum.conj() * T::lit(4.0));
        let canon = Complex::new(design.e[0], design.e[1]);
        let dot = canon * e_c.conj();
        ComplexForms {
            e: [e_c.re, e_c.im],
            k: [k_c.re, k_c.im],
            reconciliation_factor: dot.re / e_c.norm_sqr(),
            parallel_residual: dot.im,
            noise_floor: params.kappa3 / (T::lit(4.0) * cabs(sum)),
        }
    });

    let mut w = DMatrix::zeros(2, 4);
    w[(0, 2)] = params.kappa3.sqrt();
    w[(1, 3)] = params.kappa3.sqrt();
    let sym = (r + r.transpose()) * T::lit(0.5);
    let spec = HamiltonianSpec::new(DMatrix::from_iterator(4, 4, sym.iter().copied()), w)?;
    let realizability = qls::check_physical_realizability(
        &qls::build_system(&spec),
        T::tol(qls::DEFAULT_REALIZABILITY_TOL),
    );

    Ok(SynthesisResult {
        params,
        delta,
        rank_residual: r_c.determinant().abs(),
        modulus_residual,
        factor_residual: max_abs2(&(outer - r_c)),
        structure_residual,
        symmetry_residual,
        drift_elimination_residual: drift_elimination_residual(&params),
        qsde,
        m,
        r,
        r_c,
        alpha,
        beta,
        e: design.e,
        k: design.k,
        noise_intensity: design.noise_intensity,
        complex_forms,
        realizability,
        warnings: params.warnings(),
    })
}
