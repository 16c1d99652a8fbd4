//! Scalar abstraction shared by the numerical modules.
//!
//! Everything in [`crate::numlin`], [`crate::lossless`], [`crate::synth`] and
//! [`crate::swing`] is written against [`Real`], so the same code runs in
//! `f32` or `f64`. Tolerances are given as `f64` literals and converted with
//! [`lit`].

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by the dense kernels.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Lossy conversion to `f64`, used for diagnostics and error payloads.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Machine epsilon of `T`.
#[inline]
pub fn eps<T: Real>() -> T {
    T::default_epsilon()
}

/// Tolerance floor for `T`: `max(requested, 1e3 * eps)`.
///
/// Keeps `f64`-calibrated tolerances meaningful when the kernels run in `f32`.
#[inline]
pub fn tol_floor<T: Real>(requested: f64) -> T {
    lit::<T>(requested).max(eps::<T>() * lit(1e3))
}
