//! Design, simulation and physical synthesis of direct-coupled coherent
//! quantum observers for a quantum harmonic oscillator.
//!
//! - [`qls`]: quadrature-form linear quantum systems and realizability checks
//! - [`observer`]: plant–observer coupling, optimal homodyne quadrature, all-pass error system
//! - [`sim`]: Monte Carlo simulation of the closed loop and the homodyne record
//! - [`ndpa`]: NDPA/beamsplitter realization of the coupling Hamiltonian
//! - [`export`]: CSV output
//!
//! Every routine is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

// `!(x > 0)` is used deliberately so that NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod ndpa;
pub mod observer;
pub mod qls;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type HamiltonianSpecF64 = qls::HamiltonianSpec<f64>;
pub type QuadratureSystemF64 = qls::QuadratureSystem<f64>;
pub type PlantSpecF64 = observer::PlantSpec<f64>;
pub type ObserverSpecF64 = observer::ObserverSpec<f64>;
pub type AugmentedSystemF64 = observer::AugmentedSystem<f64>;
pub type HomodyneDesignF64 = observer::HomodyneDesign<f64>;
pub type DesignReportF64 = observer::DesignReport<f64>;
pub type SimConfigF64 = sim::SimConfig<f64>;
pub type TrajectoryRecordF64 = sim::TrajectoryRecord<f64>;
pub type EstimatorStatsF64 = sim::EstimatorStats<f64>;
pub type NdpaParamsF64 = ndpa::NdpaParams<f64>;
pub type SynthesisInputF64 = ndpa::SynthesisInput<f64>;
pub type SynthesisResultF64 = ndpa::SynthesisResult<f64>;

pub type HamiltonianSpecF32 = qls::HamiltonianSpec<f32>;
pub type QuadratureSystemF32 = qls::QuadratureSystem<f32>;
pub type PlantSpecF32 = observer::PlantSpec<f32>;
pub type ObserverSpecF32 = observer::ObserverSpec<f32>;
pub type HomodyneDesignF32 = observer::HomodyneDesign<f32>;
pub type SimConfigF32 = sim::SimConfig<f32>;
pub type NdpaParamsF32 = ndpa::NdpaParams<f32>;
