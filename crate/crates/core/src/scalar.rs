//! Numeric traits the rest of the crate is generic over.
//!
//! [`Scalar`] is an ordered field and is enough for discrete priors, the LP
//! kit and the hull; it admits exact rationals. [`Real`] adds the
//! transcendental operations needed by continuous priors and quadrature.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Copy
    + Num
    + Neg<Output = Self>
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics if the type cannot represent it.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| panic!("literal {x} not representable"))
    }

    fn count(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(|| panic!("count {n} not representable"))
    }

    fn sup(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn inf(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn magnitude(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Copy
        + Num
        + Neg<Output = T>
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}
