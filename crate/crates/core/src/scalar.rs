//! Scalar abstractions shared by the classical and quantum halves of the crate.
//!
//! Classical energies only need exact ring arithmetic and an ordering, so they
//! work over [`Scalar`] (f32, f64, or [`Rational`]). Anything that takes square
//! roots or exponentials goes through [`Real`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Exact 64-bit rational, used where energies must compare exactly.
pub type Rational = num_rational::Rational64;

/// Ordered signed ring elements convertible to and from machine floats.
pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Exact one half.
    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    /// Lossy conversion used by the JSON formats.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Copy
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Send
        + Sync
        + 'static
{
}

/// Floating point scalars used by the state-vector and density-matrix code.
pub trait Real: Scalar + Float + FloatConst + Sum + Display + LowerExp + Default {
    /// Norm drift accepted after a propagation call.
    fn norm_tolerance() -> Self;

    /// Residual tolerance for the iterative eigensolver.
    fn eigen_tolerance() -> Self;

    /// Convert an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for finite inputs with f32/f64.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in a float")
    }
}

impl Real for f64 {
    fn norm_tolerance() -> Self {
        1e-9
    }

    fn eigen_tolerance() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn norm_tolerance() -> Self {
        1e-4
    }

    fn eigen_tolerance() -> Self {
        1e-4
    }
}
