//! ODE integrators for the phase-space flow.
//!
//! [`Dop853`] is the workhorse: an explicit embedded 8(5,3) pair with step-size
//! control and a 7th-order continuous extension. [`ImplicitMidpoint`] is a
//! fixed-step symplectic engine for long-time drift studies.

mod dop853;
mod midpoint;
mod tableau;

pub use dop853::{Dop853, Dop853Settings};
pub use midpoint::ImplicitMidpoint;

use crate::error::Result;
use crate::scalar::Real;

/// A first-order system `y' = f(t, y)` of fixed dimension.
///
/// Returning an error from [`OdeSystem::rhs`] marks the trial point as
/// inadmissible (for example outside the chart); steppers react by shrinking the step.
pub trait OdeSystem<T, const N: usize> {
    fn rhs(&self, t: T, y: &[T; N]) -> Result<[T; N]>;
}

impl<T, const N: usize, F> OdeSystem<T, N> for F
where
    F: Fn(T, &[T; N]) -> Result<[T; N]>,
{
    fn rhs(&self, t: T, y: &[T; N]) -> Result<[T; N]> {
        self(t, y)
    }
}

#[inline]
pub(crate) fn axpy<T: Real, const N: usize>(y: &[T; N], a: T, x: &[T; N]) -> [T; N] {
    std::array::from_fn(|i| y[i] + a * x[i])
}
