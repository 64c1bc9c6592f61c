//! Scalar abstractions.
//!
//! Numerical kernels (Laplacian solves, Gaussian formulas, survival
//! recursions, predictors) are written against [`Real`], implemented for
//! `f32` and `f64`. Exact linear systems (small-instance oracles) are written
//! against [`Field`], which additionally covers arbitrary-precision rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Floating point scalar used by the numerical kernels.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Unit roundoff of the type.
    const EPS: Self;

    /// Lossy conversion from `f64`; panics never, saturates to infinity.
    fn of(x: f64) -> Self;

    fn of_usize(x: usize) -> Self {
        Self::of(x as f64)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const EPS: Self = f32::EPSILON;

    fn of(x: f64) -> Self {
        x as f32
    }
}

impl Real for f64 {
    const EPS: Self = f64::EPSILON;

    fn of(x: f64) -> Self {
        x
    }
}

/// Exact or floating field arithmetic for dense elimination.
///
/// Pivots are chosen by largest absolute value, which for rationals simply
/// picks some nonzero entry and for floats gives partial pivoting.
pub trait Field: Num + Signed + Clone + PartialOrd + Debug {
    fn from_usize(x: usize) -> Self;
}

impl Field for f32 {
    fn from_usize(x: usize) -> Self {
        x as f32
    }
}

impl Field for f64 {
    fn from_usize(x: usize) -> Self {
        x as f64
    }
}

impl Field for num::BigRational {
    fn from_usize(x: usize) -> Self {
        num::BigRational::from_integer(num::BigInt::from(x))
    }
}

impl Field for num::Rational64 {
    fn from_usize(x: usize) -> Self {
        num::Rational64::from_integer(x as i64)
    }
}
