//! Dissipative and stochastic qubit dynamics in action-angle coordinates on
//! the Bloch sphere, with dynamic and geometric phases computed by closed
//! form, adaptive quadrature, and Monte Carlo.
//!
//! The crate is organized around a small set of layers:
//!
//! * [`state`]: the action-angle chart, the Hopf map to Bloch vectors, and
//!   the breathing squared radius that damping and noise induce.
//! * [`dynamics`]: equations of motion for the damped, noisy spin, a pure
//!   qubit path, and deterministic RK4 / stochastic Heun integrators with a
//!   pole guard.
//! * [`phase`]: dynamic and geometric phase functionals, the closed-form
//!   damped cycle, frequency renormalization, interference intensity, and
//!   thermal averages over quenched Gaussian noise (quadrature and Monte
//!   Carlo).
//! * [`numerics`]: adaptive Gauss-Kronrod quadrature, truncated Gaussian
//!   expectations, a reproducible Gaussian sampler, and log-log fitting.
//!
//! Everything is generic over the scalar type through the [`Real`] trait
//! (`f64`, `f32`); the crate root re-exports `f64` aliases for the common
//! types, which is what the command-line tool uses.
//!
//! Determinism: for a fixed scalar type, seed, and build, every result in
//! this crate is bit-reproducible on a given platform, independent of thread
//! count. Transcendental functions come from the platform libm, so the last
//! ulp may differ across platforms.

pub mod dynamics;
pub mod error;
pub mod numerics;
pub mod phase;
pub mod real;
pub mod state;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` action-angle state.
pub type ActionAngleState = state::ActionAngleState<f64>;
/// `f64` Bloch vector.
pub type BlochVector = state::BlochVector<f64>;
/// `f64` system parameters.
pub type SystemParams = state::SystemParams<f64>;
/// `f64` squared-radius sample.
pub type RadiusSample = state::RadiusSample<f64>;
/// `f64` noise specification.
pub type NoiseSpec = dynamics::NoiseSpec<f64>;
/// `f64` integrator configuration.
pub type IntegratorConfig = dynamics::IntegratorConfig<f64>;
/// `f64` trajectory.
pub type Trajectory = dynamics::Trajectory<f64>;
/// `f64` trajectory sample.
pub type TrajectorySample = dynamics::TrajectorySample<f64>;
/// `f64` cycle convention.
pub type CycleConvention = phase::CycleConvention<f64>;
/// `f64` damped cycle profiles.
pub type DissipativeCycle = phase::DissipativeCycle<f64>;
/// `f64` phase result.
pub type PhaseResult = phase::PhaseResult<f64>;
/// `f64` thermal factor.
pub type ThermalFactor = phase::ThermalFactor<f64>;
/// `f64` quadrature options.
pub type QuadratureOptions = numerics::QuadratureOptions<f64>;
/// `f64` log-log fit result.
pub type FitResult = numerics::FitResult<f64>;
