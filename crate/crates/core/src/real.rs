//! Scalar abstraction for the numerical kernels.
//!
//! Everything downstream is generic over [`Real`] so the whole stack can be
//! instantiated at `f32` or `f64`. The extra methods cover the few places
//! where `num_traits::Float` is not enough: literal conversion, the
//! complementary error function, and standard-normal draws.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::float::{Float, FloatConst};
use num_traits::FromPrimitive;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating-point scalar usable by every solver and quadrature in this crate.
///
/// `f64` is the precision all shipped tools run at; `f32` is supported for
/// callers that trade accuracy for footprint. Tolerances quoted in the
/// documentation assume `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding when the target is narrower.
    fn lit(value: f64) -> Self;

    /// Widens to `f64`, used for diagnostics and error payloads.
    fn as_f64(self) -> f64;

    /// Complementary error function, used for Gaussian tail masses.
    fn erfc(self) -> Self;

    /// One standard-normal draw from `rng`.
    fn standard_normal<G: Rng + ?Sized>(rng: &mut G) -> Self;
}

impl Real for f64 {
    fn lit(value: f64) -> Self {
        value
    }

    fn as_f64(self) -> f64 {
        self
    }

    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    fn standard_normal<G: Rng + ?Sized>(rng: &mut G) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f32 {
    fn lit(value: f64) -> Self {
        value as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }

    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    fn standard_normal<G: Rng + ?Sized>(rng: &mut G) -> Self {
        StandardNormal.sample(rng)
    }
}
