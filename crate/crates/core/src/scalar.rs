//! Numeric traits the rest of the crate is generic over.
//!
//! [`Field`] is the minimal ordered-field interface the simplex solver needs, so
//! it can run on `f32`, `f64` or exact [`BigRational`]s. [`Scalar`] adds the
//! transcendental functions used by the coverage objectives and is only
//! implemented for the two IEEE float types.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, NumAssign, Zero};

/// Ordered field with the tolerances used by the simplex tableau.
pub trait Field: Clone + PartialOrd + Debug + Num + Neg<Output = Self> {
    /// Entries with magnitude at or below this are treated as zero when pivoting.
    fn pivot_tolerance() -> Self;
    /// Allowed constraint violation when checking a solution.
    fn feasibility_tolerance() -> Self;
    /// Lossy conversion used for diagnostics and reporting.
    fn to_f64_lossy(&self) -> f64;
}

impl Field for f64 {
    fn pivot_tolerance() -> Self {
        1e-10
    }
    fn feasibility_tolerance() -> Self {
        1e-8
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Field for f32 {
    fn pivot_tolerance() -> Self {
        1e-5
    }
    fn feasibility_tolerance() -> Self {
        1e-4
    }
    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl Field for BigRational {
    fn pivot_tolerance() -> Self {
        BigRational::zero()
    }
    fn feasibility_tolerance() -> Self {
        BigRational::zero()
    }
    fn to_f64_lossy(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Floating-point scalar for the probabilistic and objective layers.
pub trait Scalar:
    Field
    + Float
    + FromPrimitive
    + NumAssign
    + Sum
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Tolerance for a transition or policy row summing to one.
    fn row_tolerance() -> Self;
    /// Tolerance for a distribution over states or pairs summing to one.
    fn sum_tolerance() -> Self;
    /// Tolerance for the occupancy flow-balance equations.
    fn flow_tolerance() -> Self;
    /// Pivot magnitude below which a dense linear system is declared singular.
    fn singular_tolerance() -> Self;

    /// Exact conversion to a rational, `None` for non-finite values.
    fn to_exact(self) -> Option<BigRational>;
}

impl Scalar for f64 {
    fn row_tolerance() -> Self {
        1e-12
    }
    fn sum_tolerance() -> Self {
        1e-10
    }
    fn flow_tolerance() -> Self {
        1e-8
    }
    fn singular_tolerance() -> Self {
        1e-12
    }
    fn to_exact(self) -> Option<BigRational> {
        BigRational::from_float(self)
    }
}

impl Scalar for f32 {
    fn row_tolerance() -> Self {
        1e-5
    }
    fn sum_tolerance() -> Self {
        1e-5
    }
    fn flow_tolerance() -> Self {
        1e-4
    }
    fn singular_tolerance() -> Self {
        1e-6
    }
    fn to_exact(self) -> Option<BigRational> {
        BigRational::from_float(self)
    }
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub fn from_count<T: Scalar>(n: u64) -> T {
    T::from_u64(n).expect("count representable in scalar type")
}

/// `n / d` as an exact rational.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
