//! The arithmetic a grid value has to support.
//!
//! Everything downstream (stencil, engines, solvers) is generic over
//! [`Scalar`], so the same code runs in IEEE double and in emulated
//! fixed point.

use core::fmt::Debug;
use core::ops::{Add, Mul, Neg, Sub};

use crate::fixed::{FixedSpec, FixedValue};

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Runtime format information (unit for `f64`, [`FixedSpec`] for fixed point).
    type Format: Copy + Debug + PartialEq;

    /// True for floating-point kinds, where sign tests on computed values
    /// are meaningful; fixed-point kinds only guard against exact zeros.
    const FLOATING: bool;

    fn zero(format: Self::Format) -> Self;
    fn from_f64(x: f64, format: Self::Format) -> Self;
    fn to_f64(self) -> f64;
    fn format(&self) -> Self::Format;

    /// `None` when `rhs` is exactly zero.
    fn try_div(self, rhs: Self) -> Option<Self>;

    fn is_zero(self) -> bool {
        self == Self::zero(self.format())
    }

    fn is_positive(self) -> bool {
        self.to_f64() > 0.0
    }

    /// Whether producing this value required saturation.
    fn saturated(self) -> bool {
        false
    }
}

impl Scalar for f64 {
    type Format = ();
    const FLOATING: bool = true;

    fn zero(_: ()) -> Self {
        0.0
    }

    fn from_f64(x: f64, _: ()) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn format(&self) {}

    fn try_div(self, rhs: Self) -> Option<Self> {
        (rhs != 0.0).then(|| self / rhs)
    }
}

impl Scalar for FixedValue {
    type Format = FixedSpec;
    const FLOATING: bool = false;

    fn zero(format: FixedSpec) -> Self {
        FixedValue::zero(format)
    }

    fn from_f64(x: f64, format: FixedSpec) -> Self {
        FixedValue::from_real(x, format)
    }

    fn to_f64(self) -> f64 {
        self.to_real()
    }

    fn format(&self) -> FixedSpec {
        self.spec()
    }

    fn try_div(self, rhs: Self) -> Option<Self> {
        FixedValue::try_div(self, rhs).ok()
    }

    fn is_positive(self) -> bool {
        self.raw() > 0
    }

    fn saturated(self) -> bool {
        self.is_saturated()
    }
}
