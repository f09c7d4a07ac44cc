//! Monte Carlo simulation of the closed-loop plant–observer dynamics and the homodyne record.
//!
//! The quadrature noises `dw = [dQ; dP]` are independent unit-intensity Wiener
//! increments. Two integrators are available: fixed-step Euler–Maruyama and an
//! exact discretization of the linear SDE (matrix exponential plus Gaussian
//! increments with the exact covariance, obtained by Van Loan's method).
//!
//! Every trajectory owns a ChaCha stream selected by its index, so records do
//! not depend on how trajectories are scheduled across threads.

use nalgebra::{DMatrix, Matrix2, SMatrix, SVector, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observer::{self, j2, HomodyneDesign, ObserverSpec, PlantSpec};
use crate::scalar::Scalar;

/// Keeps the detuning bound of the step guard finite when `ω_o = 0`.
pub const STEP_GUARD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    EulerMaruyama,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T: Scalar> {
    pub dt: T,
    pub t_final: T,
    pub seed: u64,
    pub n_trajectories: usize,
    /// Time discarded before steady-state statistics are taken.
    pub burn_in: T,
    pub integrator: Integrator,
    /// Store every `record_every`-th step (the final step is always stored).
    pub record_every: usize,
    /// Replace every noise increment by zero.
    pub noiseless: bool,
    /// Deterministic initial observer state; `None` draws `x_o(0) ~ N(0, I)`.
    pub x_o0: Option<[T; 2]>,
    /// Covariance of the initial plant state around `PlantSpec::x_p0_mean`.
    pub x_p0_cov: Option<[[T; 2]; 2]>,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(dt: T, t_final: T, seed: u64, n_trajectories: usize) -> Self {
        Self {
            dt,
            t_final,
            seed,
            n_trajectories,
            burn_in: T::zero(),
            integrator: Integrator::default(),
            record_every: 1,
            noiseless: false,
            x_o0: None,
            x_p0_cov: None,
        }
    }

    /// Largest admissible step: `0.1 · min(2/κ, 1/(4ω_o + ε))`.
    pub fn step_limit(obs: &ObserverSpec<T>) -> T {
        let relax = T::lit(2.0) / obs.kappa();
        let rotate = T::one() / (T::lit(4.0) * obs.omega_o() + T::lit(STEP_GUARD_EPS));
        T::lit(0.1) * relax.min(rotate)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round().to_f64_lossy().max(1.0) as usize
    }

    pub fn validate(&self, obs: &ObserverSpec<T>) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !positive(self.dt) {
            return Err(Error::NonPositive("dt"));
        }
        if !positive(self.t_final) {
            return Err(Error::NonPositive("t_final"));
        }
        if self.n_trajectories == 0 {
            return Err(Error::NonPositive("n_trajectories"));
        }
        if self.record_every == 0 {
            return Err(Error::NonPositive("record_every"));
        }
        if !(self.burn_in >= T::zero()) {
            return Err(Error::InvalidConfig("burn_in must be non-negative".into()));
        }
        if self.burn_in >= self.t_final {
            return Err(Error::InvalidConfig("burn_in must be smaller than t_final".into()));
        }
        let limit = Self::step_limit(obs);
        if self.dt > limit {
            return Err(Error::StepGuard {
                dt: self.dt.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// One simulated path, sampled at the recorded steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T: Scalar> {
    pub trajectory: usize,
    pub seed: u64,
    /// `C_p x_p(0)`
    pub z_p: T,
    pub times: Vec<T>,
    pub x_p: Vec<[T; 2]>,
    pub x_o: Vec<[T; 2]>,
    /// Integrated output field `y_o`.
    pub y_o: Vec<[T; 2]>,
    /// Homodyne record `K y_o`.
    pub z_o: Vec<T>,
}

impl<T: Scalar> TrajectoryRecord<T> {
    fn with_capacity(trajectory: usize, seed: u64, z_p: T, n: usize) -> Self {
        Self {
            trajectory,
            seed,
            z_p,
            times: Vec::with_capacity(n),
            x_p: Vec::with_capacity(n),
            x_o: Vec::with_capacity(n),
            y_o: Vec::with_capacity(n),
            z_o: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, t: T, x_p: &Vector2<T>, x_o: &Vector2<T>, y_o: &Vector2<T>, k: &nalgebra::RowVector2<T>) {
        self.times.push(t);
        self.x_p.push([x_p[0], x_p[1]]);
        self.x_o.push([x_o[0], x_o[1]]);
        self.y_o.push([y_o[0], y_o[1]]);
        self.z_o.push((k * y_o)[0]);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// First recorded index with `t >= burn_in`.
    pub fn index_at(&self, burn_in: T) -> Option<usize> {
        let slack = T::lit(1e-9) * (T::one() + burn_in.abs());
        self.times.iter().position(|&t| t >= burn_in - slack)
    }
}

/// Symmetric PSD square root factor `L` with `L Lᵀ = Q`, dropping eigenvalues
/// below `1e-14 · λ_max`.
fn psd_factor<T: Scalar>(q: &DMatrix<T>) -> DMatrix<T> {
    let eig = q.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(T::zero(), |acc, &l| acc.max(l));
    let floor = lmax * T::lit(1e-14);
    let mut l = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = if lam > floor { lam.sqrt() } else { T::zero() };
        l.column_mut(j).scale_mut(s);
    }
    l
}

/// One-step transition of `(x̃_o, Δy_o, Δc)` where `x̃_o = x_o − x̄_o` and
/// `c = βᵀ∫x_o dt`.
struct ExactStep<T: Scalar> {
    /// First two columns of `exp(F dt)`.
    transition: SMatrix<T, 5, 2>,
    /// Factor of the exact increment covariance.
    noise: SMatrix<T, 5, 5>,
}

impl<T: Scalar> ExactStep<T> {
    fn new(obs: &ObserverSpec<T>, dt: T) -> Self {
        let sk = obs.kappa().sqrt();
        let a_o = obs.drift();
        let beta = obs.beta();
        let mut f = DMatrix::<T>::zeros(5, 5);
        for r in 0..2 {
            for c in 0..2 {
                f[(r, c)] = a_o[(r, c)];
            }
            f[(2 + r, r)] = sk;
            f[(4, r)] = beta[r];
        }
        let mut g = DMatrix::<T>::zeros(5, 2);
        for r in 0..2 {
            g[(r, r)] = -sk;
            g[(2 + r, r)] = T::one();
        }
        // Van Loan: exp([[-F, G Gᵀ], [0, Fᵀ]] dt) = [[·, E12], [0, Φᵀ]], Q_d = Φ E12
        let mut block = DMatrix::<T>::zeros(10, 10);
        block.view_mut((0, 0), (5, 5)).copy_from(&(-&f * dt));
        block.view_mut((0, 5), (5, 5)).copy_from(&(&g * g.transpose() * dt));
        block.view_mut((5, 5), (5, 5)).copy_from(&(f.transpose() * dt));
        let e = block.exp();
        let phi = e.view((5, 5), (5, 5)).transpose();
        let q = &phi * e.view((0, 5), (5, 5));
        let q = (&q + q.transpose()) * T::lit(0.5);
        let l = psd_factor(&q);
        Self {
            transition: SMatrix::from_iterator(phi.columns(0, 2).iter().copied()),
            noise: SMatrix::from_iterator(l.iter().copied()),
        }
    }
}

fn normal<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    let x: f64 = StandardNormal.sample(rng);
    T::lit(x)
}

fn finite<T: Scalar>(v: &Vector2<T>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Simulates `cfg.n_trajectories` independent paths of the closed loop.
pub fn simulate<T: Scalar>(
    plant: &PlantSpec<T>,
    obs: &ObserverSpec<T>,
    design: &HomodyneDesign<T>,
    cfg: &SimConfig<T>,
) -> Result<Vec<TrajectoryRecord<T>>> {
    cfg.validate(obs)?;
    let e = observer::output_drift_vector(obs)?;
    let gain = (design.k * e)[0];
    if (gain - T::one()).abs() > T::lit(1e-8) {
        return Err(Error::InvalidConfig(format!(
            "homodyne quadrature does not satisfy K e = 1 for this observer (K e = {gain})"
        )));
    }
    let exact = match cfg.integrator {
        Integrator::Exact => Some(ExactStep::new(obs, cfg.dt)),
        Integrator::EulerMaruyama => None,
    };
    let x_p0_factor = cfg.x_p0_cov.map(|c| {
        let m = DMatrix::from_row_slice(2, 2, &[c[0][0], c[0][1], c[1][0], c[1][1]]);
        Matrix2::from_iterator(psd_factor(&m).iter().copied())
    });

    (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|i| run_trajectory(i, plant, obs, design, cfg, exact.as_ref(), x_p0_factor))
        .collect()
}

fn run_trajectory<T: Scalar>(
    index: usize,
    plant: &PlantSpec<T>,
    obs: &ObserverSpec<T>,
    design: &HomodyneDesign<T>,
    cfg: &SimConfig<T>,
    exact: Option<&ExactStep<T>>,
    x_p0_factor: Option<Matrix2<T>>,
) -> Result<TrajectoryRecord<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let draw = |rng: &mut ChaCha8Rng| -> T {
        if cfg.noiseless {
            T::zero()
        } else {
            normal(rng)
        }
    };

    let mut x_p = plant.x_p0_mean();
    if let Some(l) = x_p0_factor {
        let xi = Vector2::new(draw(&mut rng), draw(&mut rng));
        x_p += l * xi;
    }
    let mut x_o = match cfg.x_o0 {
        Some(v) => Vector2::new(v[0], v[1]),
        None => Vector2::new(draw(&mut rng), draw(&mut rng)),
    };
    let mut y_o = Vector2::zeros();

    let two = T::lit(2.0);
    let alpha = plant.alpha();
    let beta = obs.beta();
    let jalpha2 = j2::<T>() * alpha * two;
    let jbeta2 = j2::<T>() * beta * two;
    let a_o = obs.drift();
    let sk = obs.kappa().sqrt();
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let z_p0 = plant.output(&x_p);
    // x̄_o depends only on the conserved z_p
    let x_bar = observer::steady_state_mean(obs, z_p0)?;

    let n_steps = cfg.n_steps();
    let n_rec = n_steps / cfg.record_every + 2;
    let mut rec = TrajectoryRecord::with_capacity(index, cfg.seed, z_p0, n_rec);
    rec.push(T::zero(), &x_p, &x_o, &y_o, &design.k);

    for step in 1..=n_steps {
        match exact {
            None => {
                let dw = Vector2::new(draw(&mut rng), draw(&mut rng)) * sqrt_dt;
                let z_p = plant.output(&x_p);
                let u = beta.dot(&x_o) * dt;
                let x_o_next = x_o + (a_o * x_o + jbeta2 * z_p) * dt - dw * sk;
                y_o += x_o * (sk * dt) + dw;
                x_p += jalpha2 * u;
                x_o = x_o_next;
            }
            Some(ex) => {
                let mut xi = SVector::<T, 5>::zeros();
                for v in xi.iter_mut() {
                    *v = draw(&mut rng);
                }
                let s = ex.transition * (x_o - x_bar) + ex.noise * xi;
                x_o = Vector2::new(s[0], s[1]) + x_bar;
                y_o += Vector2::new(s[2], s[3]) + x_bar * (sk * dt);
                let u = s[4] + beta.dot(&x_bar) * dt;
                x_p += jalpha2 * u;
            }
        }
        if !(finite(&x_o) && finite(&x_p) && finite(&y_o)) {
            return Err(Error::NonFinite {
                trajectory: index,
                step,
            });
        }
        if step % cfg.record_every == 0 || step == n_steps {
            rec.push(T::lit(step as f64) * dt, &x_p, &x_o, &y_o, &design.k);
        }
    }
    Ok(rec)
}

/// Slope estimates of `z_p` from the homodyne records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorStats<T> {
    pub zp_true: T,
    pub zp_estimates: Vec<T>,
    pub sample_mean: T,
    pub sample_std: T,
    /// `‖K‖ / √(T − t_burn)`
    pub predicted_std: T,
    /// `T − t_burn`
    pub window: T,
}

fn window_bounds<T: Scalar>(rec: &TrajectoryRecord<T>, burn_in: T) -> Result<(usize, usize)> {
    let last = rec
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::EmptyWindow("record has no samples".into()))?;
    let start = rec
        .index_at(burn_in)
        .filter(|&i| i < last)
        .ok_or_else(|| Error::EmptyWindow(format!("no samples after burn-in {burn_in}")))?;
    Ok((start, last))
}

/// Per-path estimator `(z_o(T) − z_o(t_burn)) / (T − t_burn)` and its sampling statistics.
pub fn estimate_zp<T: Scalar>(
    records: &[TrajectoryRecord<T>],
    design: &HomodyneDesign<T>,
    burn_in: T,
) -> Result<EstimatorStats<T>> {
    if records.is_empty() {
        return Err(Error::EmptyWindow("no trajectories".into()));
    }
    let mut estimates = Vec::with_capacity(records.len());
    let mut window = T::zero();
    for rec in records {
        let (start, last) = window_bounds(rec, burn_in)?;
        window = rec.times[last] - rec.times[start];
        estimates.push((rec.z_o[last] - rec.z_o[start]) / window);
    }
    let n = T::lit(records.len() as f64);
    let zp_true = records.iter().fold(T::zero(), |acc, r| acc + r.z_p) / n;
    let (sample_mean, sample_std) = mean_std(&estimates);
    Ok(EstimatorStats {
        zp_true,
        zp_estimates: estimates,
        sample_mean,
        sample_std,
        predicted_std: design.noise_std() / window.sqrt(),
        window,
    })
}

/// Mean and unbiased standard deviation (zero for a single sample).
pub fn mean_std<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = xs.len();
    if n == 0 {
        return (T::zero(), T::zero());
    }
    let mean = xs.iter().fold(T::zero(), |a, &x| a + x) / T::lit(n as f64);
    if n == 1 {
        return (mean, T::zero());
    }
    let ss = xs.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean));
    (mean, (ss / T::lit((n - 1) as f64)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagEntry<T> {
    pub lag: usize,
    pub autocovariance: T,
    pub autocorrelation: T,
}

/// Pooled autocovariance of the recorded increments of `z_o − z_p t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhitenessTable<T> {
    /// Time between consecutive recorded samples.
    pub sample_interval: T,
    pub n_increments: usize,
    /// `autocovariance(0) / (‖K‖² · sample_interval)`
    pub lag0_ratio: T,
    pub lags: Vec<LagEntry<T>>,
}

pub fn output_noise_whiteness<T: Scalar>(
    records: &[TrajectoryRecord<T>],
    design: &HomodyneDesign<T>,
    burn_in: T,
    lag_max: usize,
) -> Result<WhitenessTable<T>> {
    if records.is_empty() {
        return Err(Error::EmptyWindow("no trajectories".into()));
    }
    let mut sums = vec![T::zero(); lag_max + 1];
    let mut counts = vec![0usize; lag_max + 1];
    let mut interval = T::zero();
    let mut n_increments = 0;
    for rec in records {
        let (start, last) = window_bounds(rec, burn_in)?;
        let inc: Vec<T> = (start..last)
            .map(|i| {
                let dt = rec.times[i + 1] - rec.times[i];
                rec.z_o[i + 1] - rec.z_o[i] - rec.z_p * dt
            })
            .collect();
        if inc.len() <= lag_max {
            return Err(Error::EmptyWindow(format!(
                "{} increments after burn-in, need more than lag_max = {lag_max}",
                inc.len()
            )));
        }
        interval = rec.times[start + 1] - rec.times[start];
        n_increments += inc.len();
        for (lag, (sum, count)) in sums.iter_mut().zip(counts.iter_mut()).enumerate() {
            for i in 0..inc.len() - lag {
                *sum += inc[i] * inc[i + lag];
            }
            *count += inc.len() - lag;
        }
    }
    let autocov: Vec<T> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| s / T::lit(c as f64))
        .collect();
    let c0 = autocov[0];
    let lags = autocov
        .iter()
        .enumerate()
        .map(|(lag, &c)| LagEntry {
            lag,
            autocovariance: c,
            autocorrelation: if c0 > T::zero() { c / c0 } else { T::zero() },
        })
        .collect();
    Ok(WhitenessTable {
        sample_interval: interval,
        n_increments,
        lag0_ratio: c0 / (design.noise_intensity * interval),
        lags,
    })
}

/// Pooled sample covariance of `x_o − x̄_o(z_p)` over recorded times `t >= burn_in`.
pub fn steady_state_sample_covariance<T: Scalar>(
    records: &[TrajectoryRecord<T>],
    obs: &ObserverSpec<T>,
    burn_in: T,
) -> Result<Matrix2<T>> {
    let mut acc = Matrix2::zeros();
    let mut n = 0usize;
    for rec in records {
        let x_bar = observer::steady_state_mean(obs, rec.z_p)?;
        let (start, last) = window_bounds(rec, burn_in)?;
        for x in &rec.x_o[start..=last] {
            let d = Vector2::new(x[0], x[1]) - x_bar;
            acc += d * d.transpose();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyWindow("no steady-state samples".into()));
    }
    Ok(acc / T::lit(n as f64))
}

/// Solution of the noise-free observer equation,
/// `x̄ + exp(A_o t) (x_o(0) − x̄)`.
pub fn deterministic_observer_path<T: Scalar>(
    obs: &ObserverSpec<T>,
    z_p: T,
    x_o0: Vector2<T>,
    times: &[T],
) -> Result<Vec<Vector2<T>>> {
    let x_bar = observer::steady_state_mean(obs, z_p)?;
    let a = obs.drift();
    Ok(times
        .iter()
        .map(|&t| x_bar + (a * t).exp() * (x_o0 - x_bar))
        .collect())
}

/// Ensemble mean and standard deviation of `x_o` at every recorded time.
pub fn ensemble_observer_moments<T: Scalar>(records: &[TrajectoryRecord<T>]) -> Vec<([T; 2], [T; 2])> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    (0..first.len())
        .map(|i| {
            let mut out = ([T::zero(); 2], [T::zero(); 2]);
            for c in 0..2 {
                let xs: Vec<T> = records.iter().map(|r| r.x_o[i][c]).collect();
                let (m, s) = mean_std(&xs);
                out.0[c] = m;
                out.1[c] = s;
            }
            out
        })
        .collect()
}
