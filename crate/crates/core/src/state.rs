//! State types, the Hopf map, and the Hamiltonian functions.
//!
//! A normalized two-level state (a1, a2) is traded for the canonical pair
//! (I, Phi) with I = |a1|^2 - |a2|^2 the population difference and
//! Phi = phi1 - phi2 the relative phase. The Hopf map sends that pair to a
//! Bloch vector; with damping and noise switched on the image lives on a
//! sphere of time-dependent squared radius
//!
//! ```text
//! R^2 = 1 - 2*gamma*Phi*Phi_dot + xi*Phi
//! ```
//!
//! so the sphere breathes and R < 1 plays the role of mixedness. Phi is
//! deliberately stored unwrapped: the squared radius depends on the
//! accumulated angle, and reducing mod 2*pi would corrupt it.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;

/// Canonical action-angle pair on the (possibly breathing) Bloch sphere.
///
/// Construction enforces |I| <= 1. The angle is unwrapped; see the module
/// docs for why.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionAngleState<R> {
    action: R,
    angle: R,
}

impl<R: Real> ActionAngleState<R> {
    /// Builds a state, rejecting actions outside [-1, 1].
    pub fn new(action: R, angle: R) -> Result<Self> {
        if !(action.abs() <= R::one()) {
            return Err(Error::ActionOutOfRange {
                value: action.as_f64(),
            });
        }
        Ok(Self { action, angle })
    }

    /// State at polar angle `theta0` on the unit sphere, so I = cos(theta0).
    pub fn from_polar_angle(theta0: R, angle: R) -> Self {
        Self {
            action: theta0.cos(),
            angle,
        }
    }

    /// Internal constructor for callers that have already checked the range.
    pub(crate) fn new_unchecked(action: R, angle: R) -> Self {
        Self { action, angle }
    }

    pub fn action(&self) -> R {
        self.action
    }

    pub fn angle(&self) -> R {
        self.angle
    }
}

/// Cartesian image of a state under the Hopf map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector<R> {
    pub x: R,
    pub y: R,
    pub z: R,
}

impl<R: Real> BlochVector<R> {
    pub fn norm(&self) -> R {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Physical parameters: half level splitting, friction, and the three
/// coefficients of the classical mapping Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<R> {
    pub epsilon: R,
    pub gamma: R,
    pub eta: [R; 3],
}

impl<R: Real> SystemParams<R> {
    pub fn new(epsilon: R, gamma: R, eta: [R; 3]) -> Result<Self> {
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
        Ok(Self { epsilon, gamma, eta })
    }

    /// All mapping coefficients set to one, the convention used throughout
    /// the shipped tools.
    pub fn symmetric(epsilon: R, gamma: R) -> Result<Self> {
        Self::new(epsilon, gamma, [R::one(); 3])
    }

    /// gamma / (2 epsilon), the drift rate of the action along the damped
    /// qubit path.
    pub fn damping_ratio(&self) -> R {
        self.gamma / (self.epsilon + self.epsilon)
    }

    /// gamma * pi / (2 epsilon), the dimensionless coupling that must stay
    /// at or below 1 for the damped cycle to close on a real sphere.
    pub fn coupling(&self) -> R {
        self.damping_ratio() * R::PI()
    }
}

/// Squared radius of the breathing sphere at one instant.
///
/// Noise can push the value negative; that is recorded rather than rejected,
/// and the caller decides policy. `radius` is the checked accessor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSample<R> {
    pub r_squared: R,
}

impl<R: Real> RadiusSample<R> {
    pub fn new(r_squared: R) -> Self {
        Self { r_squared }
    }

    pub fn is_physical(&self) -> bool {
        self.r_squared >= R::zero()
    }

    pub fn radius(&self) -> Result<R> {
        if !self.is_physical() {
            return Err(Error::NegativeSquaredRadius {
                r_squared: self.r_squared.as_f64(),
            });
        }
        Ok(self.r_squared.sqrt())
    }
}

/// Hopf map scaled by the breathing radius:
/// R * (sqrt(1 - I^2) cos Phi, sqrt(1 - I^2) sin Phi, I).
///
/// The returned vector has norm R to within roundoff.
pub fn hopf_map<R: Real>(state: ActionAngleState<R>, r: RadiusSample<R>) -> Result<BlochVector<R>> {
    let radius = r.radius()?;
    let i = state.action();
    let phi = state.angle();
    let transverse = (R::one() - i * i).max(R::zero()).sqrt();
    Ok(BlochVector {
        x: radius * transverse * phi.cos(),
        y: radius * transverse * phi.sin(),
        z: radius * i,
    })
}

/// Extracts (I, Phi) from normalized amplitudes.
///
/// I = |a1|^2 - |a2|^2 and Phi = arg(a1) - arg(a2) reduced to (-pi, pi].
/// A basis state (one amplitude exactly zero) gets Phi = 0: the relative
/// phase is pure gauge there and zero is the reproducible choice. The norm
/// check allows 1e-10 of slack, widened to 64 ulps for narrower scalars.
pub fn amplitudes_to_action_angle<R: Real>(
    a1: Complex<R>,
    a2: Complex<R>,
) -> Result<ActionAngleState<R>> {
    let n1 = a1.norm_sqr();
    let n2 = a2.norm_sqr();
    let norm = n1 + n2;
    let tol = R::lit(1e-10).max(R::epsilon() * R::lit(64.0));
    if (norm - R::one()).abs() > tol {
        return Err(Error::NotNormalized {
            norm: norm.as_f64(),
        });
    }
    let action = (n1 - n2).max(-R::one()).min(R::one());
    let zero = Complex::new(R::zero(), R::zero());
    let angle = if a1 == zero || a2 == zero {
        R::zero()
    } else {
        let mut phi = a1.arg() - a2.arg();
        if phi > R::PI() {
            phi = phi - R::TAU();
        } else if phi <= -R::PI() {
            phi = phi + R::TAU();
        }
        phi
    };
    Ok(ActionAngleState::new_unchecked(action, angle))
}

/// Classical mapping Hamiltonian
/// H0 = -2 sqrt(1 - I^2) (eta1 cos Phi + eta2 sin Phi) + 2 eta3 I.
pub fn mmst_hamiltonian<R: Real>(state: ActionAngleState<R>, params: &SystemParams<R>) -> R {
    let i = state.action();
    let phi = state.angle();
    let [eta1, eta2, eta3] = params.eta;
    let transverse = (R::one() - i * i).max(R::zero()).sqrt();
    let two = R::lit(2.0);
    -two * transverse * (eta1 * phi.cos() + eta2 * phi.sin()) + two * eta3 * i
}

/// The symmetric-coefficient Hamiltonian without the overall factor two:
/// H0 = -sqrt(1 - I^2) (cos Phi + sin Phi) + I.
///
/// This is the quantity conserved by the undamped, noiseless equations of
/// motion, and the convention the dynamics layer reports as energy. It
/// equals [`mmst_hamiltonian`] with all coefficients set to one half.
pub fn reduced_hamiltonian<R: Real>(state: ActionAngleState<R>) -> R {
    reduced_hamiltonian_raw(state.action(), state.angle())
}

pub(crate) fn reduced_hamiltonian_raw<R: Real>(i: R, phi: R) -> R {
    let transverse = (R::one() - i * i).max(R::zero()).sqrt();
    -transverse * (phi.cos() + phi.sin()) + i
}

/// Squared breathing radius R^2 = 1 - 2 gamma Phi Phi_dot + xi Phi.
///
/// The damping term is the analytic expansion of gamma * d(Phi^2)/dt; it is
/// never formed by numerical differentiation. Negative results are returned
/// as-is, flagged through [`RadiusSample::is_physical`].
pub fn squared_radius<R: Real>(phi: R, phi_dot: R, gamma: R, xi: R) -> RadiusSample<R> {
    let two = R::lit(2.0);
    RadiusSample::new(R::one() - two * gamma * phi * phi_dot + xi * phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn state(i: f64, phi: f64) -> ActionAngleState<f64> {
        ActionAngleState::new(i, phi).unwrap()
    }

    #[test]
    fn hopf_map_north_pole_ignores_angle() {
        let v = hopf_map(state(1.0, 0.7), RadiusSample::new(1.0)).unwrap();
        assert_abs_diff_eq!(v.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.z, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hopf_map_equator() {
        let v = hopf_map(state(0.0, 0.0), RadiusSample::new(1.0)).unwrap();
        assert_abs_diff_eq!(v.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hopf_map_mid_latitude() {
        let v = hopf_map(state(0.5, FRAC_PI_2), RadiusSample::new(1.0)).unwrap();
        assert_abs_diff_eq!(v.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, 0.8660254, epsilon = 1e-7);
        assert_abs_diff_eq!(v.z, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn hopf_map_rejects_negative_radius() {
        let err = hopf_map(state(0.0, 0.0), RadiusSample::new(-0.25)).unwrap_err();
        assert!(matches!(err, Error::NegativeSquaredRadius { .. }));
    }

    #[test]
    fn state_construction_rejects_out_of_range_action() {
        assert!(ActionAngleState::new(1.0 + 1e-12, 0.0).is_err());
        assert!(ActionAngleState::new(f64::NAN, 0.0).is_err());
        assert!(ActionAngleState::new(-1.0, 3.0).is_ok());
    }

    #[test]
    fn amplitudes_equal_superposition() {
        let a = Complex::new(1.0 / SQRT_2, 0.0);
        let s = amplitudes_to_action_angle(a, a).unwrap();
        assert_abs_diff_eq!(s.action(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.angle(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn amplitudes_pure_relative_phase() {
        let a1 = Complex::from_polar(1.0 / SQRT_2, FRAC_PI_4);
        let a2 = Complex::new(1.0 / SQRT_2, 0.0);
        let s = amplitudes_to_action_angle(a1, a2).unwrap();
        assert_abs_diff_eq!(s.action(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.angle(), FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn amplitudes_basis_state_uses_zero_angle() {
        let s = amplitudes_to_action_angle(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)).unwrap();
        assert_eq!(s.action(), 1.0);
        assert_eq!(s.angle(), 0.0);
    }

    #[test]
    fn amplitudes_reject_unnormalized_input() {
        let err =
            amplitudes_to_action_angle(Complex::new(1.0, 0.0), Complex::new(0.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn mmst_examples() {
        let eta1 = SystemParams::new(1.0, 0.0, [1.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(mmst_hamiltonian(state(0.0, 0.0), &eta1), -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mmst_hamiltonian(state(1.0, 1.9), &eta1), 2.0, epsilon = 1e-15);
        let transverse_only = SystemParams::new(1.0, 0.0, [1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            mmst_hamiltonian(state(0.0, FRAC_PI_4), &transverse_only),
            -SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn reduced_hamiltonian_examples() {
        assert_abs_diff_eq!(reduced_hamiltonian(state(0.0, 0.0)), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(reduced_hamiltonian(state(1.0, 0.0)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            reduced_hamiltonian(state(0.0, 3.0 * FRAC_PI_4)),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn squared_radius_examples() {
        assert_eq!(squared_radius(123.4, -5.6, 0.0, 0.0).r_squared, 1.0);
        assert_abs_diff_eq!(
            squared_radius(PI, 1.0, 0.1, 0.0).r_squared,
            1.0 - 0.2 * PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(squared_radius(2.0, 0.0, 5.0, 0.5).r_squared, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn negative_radius_is_flagged_not_thrown() {
        let r = squared_radius(10.0, 1.0, 1.0, 0.0);
        assert!(!r.is_physical());
        assert!(r.radius().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::symmetric(0.0, 0.1).is_err());
        assert!(SystemParams::symmetric(1.0, -0.1).is_err());
        let p = SystemParams::symmetric(1.0, 0.1).unwrap();
        assert_abs_diff_eq!(p.damping_ratio(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coupling(), 0.05 * PI, epsilon = 1e-15);
    }
}
