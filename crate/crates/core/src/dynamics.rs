//! Integration of the damped, noisy equations of motion, the closed-form
//! damped qubit path, and Gaussian noise generation.
//!
//! The explicit system evolved here is the canonical pair (I, Phi) with
//!
//! ```text
//! Phi_dot = I / sqrt(1 - I^2) * (cos Phi + sin Phi) + 1
//! I_dot   = sqrt(1 - I^2) * (cos Phi - sin Phi) - 2 gamma Phi_dot + xi
//! ```
//!
//! The angle equation is evaluated first and substituted into the action
//! equation. With gamma = xi = 0 this is exactly the Hamiltonian flow of
//! [`reduced_hamiltonian`](crate::state::reduced_hamiltonian)
//! (I_dot = -dH/dPhi, Phi_dot = dH/dI), which is what makes the conserved
//! energy a meaningful integration diagnostic. Time is measured in units of
//! (2 epsilon)^-1 throughout, so the level splitting never appears in the
//! rates.
//!
//! The angle rate is singular at the poles |I| = 1. Integration refuses to
//! evaluate inside a configurable guard band and instead ends the run early,
//! handing back the partial trajectory together with where and when the
//! guard tripped.

use crate::error::{Error, Result};
use crate::numerics::GaussianSampler;
use crate::real::Real;
use crate::state::{reduced_hamiltonian_raw, squared_radius, ActionAngleState, SystemParams};

/// How the noise term xi(t) is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// xi = 0; the dynamics is deterministic.
    None,
    /// One Gaussian value drawn at t = 0 and held for the whole run. This is
    /// the model behind the thermal averages, where the noise is a single
    /// static random variable per realization.
    Quenched,
    /// xi is redrawn every `step_correlation_time`, held piecewise constant
    /// in between.
    Stepwise,
}

/// Mean of the Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanMode {
    Zero,
    /// Mean beta^-1, the convention of the thermal averages.
    InverseBeta,
}

/// Gaussian noise specification. The variance is beta^-1, with beta the
/// inverse temperature in units of the level splitting 2 epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<R> {
    pub model: NoiseModel,
    pub beta: R,
    pub mean_mode: MeanMode,
    pub seed: u64,
    /// Redraw interval for the stepwise model; ignored otherwise.
    pub step_correlation_time: R,
}

impl<R: Real> NoiseSpec<R> {
    pub fn none() -> Self {
        Self {
            model: NoiseModel::None,
            beta: R::one(),
            mean_mode: MeanMode::Zero,
            seed: 0,
            step_correlation_time: R::zero(),
        }
    }

    pub fn quenched(beta: R, mean_mode: MeanMode, seed: u64) -> Result<Self> {
        if !(beta > R::zero()) {
            return Err(Error::invalid(format!(
                "beta must be positive, got {}",
                beta.as_f64()
            )));
        }
        Ok(Self {
            model: NoiseModel::Quenched,
            beta,
            mean_mode,
            seed,
            step_correlation_time: R::zero(),
        })
    }

    pub fn stepwise(beta: R, mean_mode: MeanMode, seed: u64, step_correlation_time: R) -> Result<Self> {
        if !(beta > R::zero()) {
            return Err(Error::invalid(format!(
                "beta must be positive, got {}",
                beta.as_f64()
            )));
        }
        if !(step_correlation_time > R::zero()) {
            return Err(Error::invalid(format!(
                "step_correlation_time must be positive, got {}",
                step_correlation_time.as_f64()
            )));
        }
        Ok(Self {
            model: NoiseModel::Stepwise,
            beta,
            mean_mode,
            seed,
            step_correlation_time,
        })
    }

    pub fn mean(&self) -> R {
        match self.mean_mode {
            MeanMode::Zero => R::zero(),
            MeanMode::InverseBeta => self.beta.recip(),
        }
    }

    pub fn variance(&self) -> R {
        self.beta.recip()
    }
}

/// One-step method used by [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta, for deterministic right-hand
    /// sides (no noise, or a quenched value that is constant anyway).
    Rk4,
    /// Heun predictor-corrector, the standard minimal scheme when xi jumps
    /// at correlation boundaries.
    HeunStochastic,
}

/// Step size, method, pole guard, and output thinning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<R> {
    pub method: Method,
    pub dt: R,
    /// Evaluation refuses |I| >= 1 - pole_guard_delta.
    pub pole_guard_delta: R,
    /// A sample is retained every `output_stride` steps.
    pub output_stride: usize,
}

impl<R: Real> Default for IntegratorConfig<R> {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            dt: R::lit(1e-3),
            pole_guard_delta: R::lit(1e-9),
            output_stride: 1,
        }
    }
}

impl<R: Real> IntegratorConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > R::zero()) {
            return Err(Error::invalid(format!(
                "dt must be positive, got {}",
                self.dt.as_f64()
            )));
        }
        if !(self.pole_guard_delta > R::zero() && self.pole_guard_delta < R::one()) {
            return Err(Error::invalid(format!(
                "pole_guard_delta must lie in (0, 1), got {}",
                self.pole_guard_delta.as_f64()
            )));
        }
        if self.output_stride == 0 {
            return Err(Error::invalid("output_stride must be at least 1"));
        }
        Ok(())
    }
}

/// One retained trajectory point. The energy column is the effective
/// Hamiltonian H = H0 + 2 gamma Phi Phi_dot - xi Phi, which reduces to the
/// conserved H0 in the undamped noiseless limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample<R> {
    pub t: R,
    pub action: R,
    pub angle: R,
    pub r_squared: R,
    pub energy: R,
}

impl<R: Real> TrajectorySample<R> {
    /// Noise can push the squared radius negative; such samples are retained
    /// but flagged through this accessor.
    pub fn radius_is_physical(&self) -> bool {
        self.r_squared >= R::zero()
    }
}

/// Why an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination<R> {
    Completed,
    /// The pole guard tripped: at time `t` the action reached `action`,
    /// within the guard band of |I| = 1 where the angle rate diverges.
    PoleGuard { t: R, action: R },
}

/// Time series produced by [`integrate`], along with the inputs that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<R> {
    pub samples: Vec<TrajectorySample<R>>,
    pub termination: Termination<R>,
    pub params: SystemParams<R>,
    pub noise: NoiseSpec<R>,
    pub method: Method,
    pub dt: R,
    pub output_stride: usize,
}

impl<R: Real> Trajectory<R> {
    pub fn completed(&self) -> bool {
        matches!(self.termination, Termination::Completed)
    }

    pub fn last(&self) -> Option<&TrajectorySample<R>> {
        self.samples.last()
    }
}

/// Instantaneous rates of the canonical pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomRates<R> {
    pub action_rate: R,
    pub angle_rate: R,
}

fn rates_raw<R: Real>(i: R, phi: R, gamma: R, xi: R) -> EomRates<R> {
    let transverse = (R::one() - i * i).max(R::zero()).sqrt();
    let cos = phi.cos();
    let sin = phi.sin();
    let angle_rate = i / transverse * (cos + sin) + R::one();
    let two = R::lit(2.0);
    let action_rate = transverse * (cos - sin) - two * gamma * angle_rate + xi;
    EomRates {
        action_rate,
        angle_rate,
    }
}

fn pole_check<R: Real>(i: R, guard: R) -> Result<()> {
    if i.abs() >= R::one() - guard {
        return Err(Error::PoleProximity {
            action: i.as_f64(),
            guard: guard.as_f64(),
        });
    }
    Ok(())
}

/// Right-hand side of the equations of motion at one state.
///
/// The angle rate is formed first and substituted into the action rate, so
/// the damping term is -2 gamma Phi_dot with the instantaneous Phi_dot.
/// Errors when |I| >= 1 - pole_guard_delta.
pub fn eom_rhs<R: Real>(
    state: ActionAngleState<R>,
    gamma: R,
    xi: R,
    pole_guard_delta: R,
) -> Result<EomRates<R>> {
    pole_check(state.action(), pole_guard_delta)?;
    Ok(rates_raw(state.action(), state.angle(), gamma, xi))
}

/// Exact damped qubit path I(t) = I0 - (gamma / 2 epsilon) t,
/// Phi(t) = Phi0 + t, valid while the action stays in range.
pub fn dissipative_qubit_trajectory<R: Real>(
    i0: R,
    phi0: R,
    gamma: R,
    epsilon: R,
    t: R,
) -> Result<ActionAngleState<R>> {
    if !(epsilon > R::zero()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {}",
            epsilon.as_f64()
        )));
    }
    if !(gamma >= R::zero()) {
        return Err(Error::invalid(format!(
            "gamma must be non-negative, got {}",
            gamma.as_f64()
        )));
    }
    let k = gamma / (epsilon + epsilon);
    let action = i0 - k * t;
    // new() repeats the |I| <= 1 check and produces the range error.
    ActionAngleState::new(action, phi0 + t)
}

/// One row of the damped qubit path with its breathing radius and effective
/// energy, for trajectory export. With Phi_dot = 1 the radius is
/// R^2 = 1 + (xi - gamma / 2 epsilon) Phi and the energy is
/// H = I + (gamma / 2 epsilon - xi) Phi.
pub fn dissipative_qubit_sample<R: Real>(
    i0: R,
    phi0: R,
    gamma: R,
    epsilon: R,
    xi: R,
    t: R,
) -> Result<TrajectorySample<R>> {
    let state = dissipative_qubit_trajectory(i0, phi0, gamma, epsilon, t)?;
    let k = gamma / (epsilon + epsilon);
    let phi = state.angle();
    let r_squared = R::one() + (xi - k) * phi;
    let energy = state.action() + (k - xi) * phi;
    Ok(TrajectorySample {
        t,
        action: state.action(),
        angle: phi,
        r_squared,
        energy,
    })
}

/// `n` draws of the quenched noise variable. The draw at index i is a pure
/// function of (seed, i). A spec with the `None` model yields zeros.
pub fn sample_quenched_noise<R: Real>(spec: &NoiseSpec<R>, n: usize) -> Result<Vec<R>> {
    if n == 0 {
        return Err(Error::invalid("need at least one draw"));
    }
    if spec.model == NoiseModel::None {
        return Ok(vec![R::zero(); n]);
    }
    let sampler = GaussianSampler::new(spec.seed, spec.mean(), spec.variance())?;
    Ok((0..n as u64).map(|i| sampler.draw_at(i)).collect())
}

enum StepError<R> {
    Pole { t: R, action: R },
}

fn eval_stage<R: Real>(
    i: R,
    phi: R,
    gamma: R,
    xi: R,
    guard: R,
    t_stage: R,
) -> std::result::Result<EomRates<R>, StepError<R>> {
    if i.abs() >= R::one() - guard {
        return Err(StepError::Pole {
            t: t_stage,
            action: i,
        });
    }
    Ok(rates_raw(i, phi, gamma, xi))
}

#[allow(clippy::too_many_arguments)]
fn rk4_step<R: Real>(
    i: R,
    phi: R,
    t: R,
    dt: R,
    gamma: R,
    xi: R,
    guard: R,
) -> std::result::Result<(R, R), StepError<R>> {
    let half = R::lit(0.5);
    let sixth = R::one() / R::lit(6.0);
    let two = R::lit(2.0);
    let t_mid = t + half * dt;

    let k1 = eval_stage(i, phi, gamma, xi, guard, t)?;
    let k2 = eval_stage(
        i + half * dt * k1.action_rate,
        phi + half * dt * k1.angle_rate,
        gamma,
        xi,
        guard,
        t_mid,
    )?;
    let k3 = eval_stage(
        i + half * dt * k2.action_rate,
        phi + half * dt * k2.angle_rate,
        gamma,
        xi,
        guard,
        t_mid,
    )?;
    let k4 = eval_stage(
        i + dt * k3.action_rate,
        phi + dt * k3.angle_rate,
        gamma,
        xi,
        guard,
        t + dt,
    )?;

    let di = sixth * (k1.action_rate + two * k2.action_rate + two * k3.action_rate + k4.action_rate);
    let dphi = sixth * (k1.angle_rate + two * k2.angle_rate + two * k3.angle_rate + k4.angle_rate);
    Ok((i + dt * di, phi + dt * dphi))
}

#[allow(clippy::too_many_arguments)]
fn heun_step<R: Real>(
    i: R,
    phi: R,
    t: R,
    dt: R,
    gamma: R,
    xi: R,
    guard: R,
) -> std::result::Result<(R, R), StepError<R>> {
    let half = R::lit(0.5);
    let k1 = eval_stage(i, phi, gamma, xi, guard, t)?;
    let i_pred = i + dt * k1.action_rate;
    let phi_pred = phi + dt * k1.angle_rate;
    let k2 = eval_stage(i_pred, phi_pred, gamma, xi, guard, t + dt)?;
    Ok((
        i + half * dt * (k1.action_rate + k2.action_rate),
        phi + half * dt * (k1.angle_rate + k2.angle_rate),
    ))
}

/// Integrates the equations of motion from `state0` to `t_end`.
///
/// The method is chosen by the noise model: no noise forces Rk4, stepwise
/// noise forces the Heun scheme, and a quenched value (constant in time, so
/// the system is an ordinary ODE) uses whatever the config asks for.
/// Stepwise noise holds each drawn value for `step_correlation_time`,
/// indexed by floor(t / tau) at the step start so the sequence of values
/// does not depend on dt.
///
/// A tripped pole guard is not an error: the run ends early and the partial
/// trajectory carries the diagnostic in its termination field. Samples with
/// a negative squared radius are retained and flagged.
pub fn integrate<R: Real>(
    state0: ActionAngleState<R>,
    params: &SystemParams<R>,
    noise: &NoiseSpec<R>,
    config: &IntegratorConfig<R>,
    t_end: R,
) -> Result<Trajectory<R>> {
    config.validate()?;
    if !(t_end > R::zero()) {
        return Err(Error::invalid(format!(
            "t_end must be positive, got {}",
            t_end.as_f64()
        )));
    }

    let method = match noise.model {
        NoiseModel::None => Method::Rk4,
        NoiseModel::Stepwise => Method::HeunStochastic,
        NoiseModel::Quenched => config.method,
    };
    let gamma = params.gamma;
    let dt = config.dt;
    let guard = config.pole_guard_delta;

    let sampler = match noise.model {
        NoiseModel::None => None,
        _ => Some(GaussianSampler::new(noise.seed, noise.mean(), noise.variance())?),
    };
    let quenched_value = match (noise.model, &sampler) {
        (NoiseModel::Quenched, Some(s)) => s.draw_at(0),
        _ => R::zero(),
    };
    let xi_at = |t: R| -> R {
        match noise.model {
            NoiseModel::None => R::zero(),
            NoiseModel::Quenched => quenched_value,
            NoiseModel::Stepwise => {
                let index = (t / noise.step_correlation_time).floor().as_f64() as u64;
                sampler.as_ref().expect("sampler exists").draw_at(index)
            }
        }
    };

    let n_steps = ((t_end / dt).round().as_f64() as usize).max(1);
    let mut samples = Vec::with_capacity(n_steps / config.output_stride + 2);
    let mut termination = Termination::Completed;
    let mut i = state0.action();
    let mut phi = state0.angle();

    for step in 0..=n_steps {
        let t = R::from_usize(step).expect("step count fits in scalar") * dt;
        let xi = xi_at(t);

        if i.abs() >= R::one() - guard {
            termination = Termination::PoleGuard { t, action: i };
            break;
        }

        if step % config.output_stride == 0 {
            let rates = rates_raw(i, phi, gamma, xi);
            let r = squared_radius(phi, rates.angle_rate, gamma, xi);
            let two = R::lit(2.0);
            let energy = reduced_hamiltonian_raw(i, phi) + two * gamma * phi * rates.angle_rate - xi * phi;
            samples.push(TrajectorySample {
                t,
                action: i,
                angle: phi,
                r_squared: r.r_squared,
                energy,
            });
        }

        if step == n_steps {
            break;
        }

        let stepped = match method {
            Method::Rk4 => rk4_step(i, phi, t, dt, gamma, xi, guard),
            Method::HeunStochastic => heun_step(i, phi, t, dt, gamma, xi, guard),
        };
        match stepped {
            Ok((i_next, phi_next)) => {
                i = i_next;
                phi = phi_next;
            }
            Err(StepError::Pole { t, action }) => {
                termination = Termination::PoleGuard { t, action };
                break;
            }
        }
    }

    Ok(Trajectory {
        samples,
        termination,
        params: *params,
        noise: *noise,
        method,
        dt,
        output_stride: config.output_stride,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    fn state(i: f64, phi: f64) -> ActionAngleState<f64> {
        ActionAngleState::new(i, phi).unwrap()
    }

    fn params(gamma: f64) -> SystemParams<f64> {
        SystemParams::symmetric(1.0, gamma).unwrap()
    }

    #[test]
    fn rhs_at_origin_of_angle() {
        let r = eom_rhs(state(0.0, 0.0), 0.0, 0.0, 1e-9).unwrap();
        assert_abs_diff_eq!(r.action_rate, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.angle_rate, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_damping_term() {
        let r = eom_rhs(state(0.0, 0.0), 0.1, 0.0, 1e-9).unwrap();
        assert_abs_diff_eq!(r.action_rate, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(r.angle_rate, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_transverse_term_vanishes_on_diagonal() {
        // cos - sin = 0 at Phi = pi/4, leaving only the noise value.
        let r = eom_rhs(state(0.0, FRAC_PI_4), 0.0, 0.3, 1e-9).unwrap();
        assert_abs_diff_eq!(r.action_rate, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(r.angle_rate, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_conserves_reduced_hamiltonian_to_first_order() {
        // dH/dt = dH/dI * I_dot + dH/dPhi * Phi_dot = 0 for gamma = xi = 0.
        let h = 1e-6;
        for &(i, phi) in &[(0.3, 0.7), (-0.5, 2.1), (0.8, -1.3)] {
            let r = eom_rhs(state(i, phi), 0.0, 0.0, 1e-9).unwrap();
            let before = crate::state::reduced_hamiltonian(state(i, phi));
            let after = crate::state::reduced_hamiltonian(state(
                i + h * r.action_rate,
                phi + h * r.angle_rate,
            ));
            assert_abs_diff_eq!(after, before, epsilon = 1e-10);
        }
    }

    #[test]
    fn rhs_refuses_pole_band() {
        let err = eom_rhs(state(1.0 - 1e-10, 0.0), 0.0, 0.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { .. }));
    }

    #[test]
    fn qubit_path_linear_drift() {
        // gamma / 2 epsilon = 1 / 2 pi drains the action from 1 to 0 over
        // one period.
        let s = dissipative_qubit_trajectory(1.0, 0.0, 1.0 / PI, 1.0, TAU).unwrap();
        assert_abs_diff_eq!(s.action(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.angle(), TAU, epsilon = 1e-15);
    }

    #[test]
    fn qubit_path_without_damping() {
        let s = dissipative_qubit_trajectory(0.5, 0.25, 0.0, 1.0, 17.3).unwrap();
        assert_eq!(s.action(), 0.5);
        assert_abs_diff_eq!(s.angle(), 0.25 + 17.3, epsilon = 1e-15);
    }

    #[test]
    fn qubit_path_after_one_period() {
        let theta0: f64 = 1.1;
        let k = 0.04;
        let s = dissipative_qubit_trajectory(theta0.cos(), 0.0, 2.0 * k, 1.0, TAU).unwrap();
        assert_abs_diff_eq!(s.action(), theta0.cos() - TAU * k, epsilon = 1e-14);
    }

    #[test]
    fn qubit_path_range_error() {
        let err = dissipative_qubit_trajectory(0.5, 0.0, 1.0, 1.0, 4.0).unwrap_err();
        assert!(matches!(err, Error::ActionOutOfRange { .. }));
    }

    #[test]
    fn quenched_noise_concentrates_at_large_beta() {
        let spec = NoiseSpec::quenched(1e12, MeanMode::Zero, 5).unwrap();
        let draws = sample_quenched_noise(&spec, 1000).unwrap();
        assert!(draws.iter().all(|x: &f64| x.abs() < 1e-4));
    }

    #[test]
    fn quenched_noise_is_reproducible() {
        let spec = NoiseSpec::quenched(1.0, MeanMode::Zero, 81).unwrap();
        let a = sample_quenched_noise(&spec, 10).unwrap();
        let b = sample_quenched_noise(&spec, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn none_model_yields_zeros() {
        let draws = sample_quenched_noise(&NoiseSpec::<f64>::none(), 5).unwrap();
        assert!(draws.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn conservative_run_conserves_energy_and_radius() {
        let config = IntegratorConfig::default();
        let traj = integrate(state(0.4, 0.3), &params(0.0), &NoiseSpec::none(), &config, TAU).unwrap();
        assert!(traj.completed());
        let h0 = traj.samples[0].energy;
        for s in &traj.samples {
            assert!((s.energy - h0).abs() < 1e-8, "drift at t = {}", s.t);
            assert_eq!(s.r_squared, 1.0);
        }
    }

    #[test]
    fn quenched_runs_are_bit_identical() {
        let noise = NoiseSpec::quenched(2.0, MeanMode::Zero, 99).unwrap();
        let config = IntegratorConfig {
            output_stride: 7,
            ..IntegratorConfig::default()
        };
        let a = integrate(state(0.2, 1.0), &params(0.05), &noise, &config, 2.0).unwrap();
        let b = integrate(state(0.2, 1.0), &params(0.05), &noise, &config, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pole_start_aborts_immediately() {
        let traj = integrate(
            state(1.0 - 5e-10, 0.0),
            &params(0.0),
            &NoiseSpec::none(),
            &IntegratorConfig::default(),
            1.0,
        )
        .unwrap();
        assert!(traj.samples.is_empty());
        match traj.termination {
            Termination::PoleGuard { t, .. } => assert_eq!(t, 0.0),
            Termination::Completed => panic!("expected a pole abort"),
        }
    }

    #[test]
    fn stepwise_noise_changes_between_correlation_windows() {
        let noise = NoiseSpec::stepwise(1.0, MeanMode::Zero, 3, 0.25).unwrap();
        let config = IntegratorConfig {
            dt: 1e-2,
            ..IntegratorConfig::default()
        };
        let traj = integrate(state(0.0, FRAC_PI_4), &params(0.0), &noise, &config, 1.0).unwrap();
        assert_eq!(traj.method, Method::HeunStochastic);
        assert!(traj.completed());
    }

    #[test]
    fn qubit_sample_row_values() {
        let s = dissipative_qubit_sample(0.5, 0.0, 0.1, 1.0, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(s.action, 0.5 - 0.05 * 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.r_squared, 1.0 - 0.05 * 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.energy, s.action + 0.05 * 2.0, epsilon = 1e-15);
    }
}
