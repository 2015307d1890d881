//! Floating-point abstraction the numerical core is generic over.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Scalar type for grids, fields, and solvers: `f64` for production runs,
/// `f32` for quick low-precision experiments.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Embeds an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite scalar literal")
    }

    /// Lossy view as `f64`, for diagnostics and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Target relative tolerance for iterative linear solves.
    fn solve_tol() -> Self;

    /// Contractual bound on the relative residual of an elliptic solve.
    fn residual_bound() -> Self;
}

impl Scalar for f64 {
    fn solve_tol() -> Self {
        1e-12
    }
    fn residual_bound() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn solve_tol() -> Self {
        1e-6
    }
    fn residual_bound() -> Self {
        1e-4
    }
}
