//! Number types the refinement forms can be evaluated in.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::dd::DoubleDouble;

/// An ordered field element: `f64`, [`DoubleDouble`] or an exact [`BigRational`].
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Exact conversion: every finite `f64` is representable in each implementor.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;
    /// Natural logarithm, where the type supports it.
    fn ln(&self) -> Option<Self>;

    /// Sum of absolute values of the terms that produced this value; plain
    /// numbers only know their own size.
    fn magnitude(&self) -> f64 {
        self.abs().to_f64()
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.square();
            n >>= 1;
        }
        acc
    }
}

/// A value paired with the running sum of absolute values of the terms that
/// produced it. Sums add magnitudes and products multiply them, so
/// `|value| << magnitude` exposes cancellation.
#[derive(Clone, Copy, Debug)]
pub struct Tracked<T> {
    pub value: T,
    pub magnitude: f64,
}

impl<T: Scalar> Tracked<T> {
    pub fn leaf(value: T) -> Self {
        let magnitude = value.abs().to_f64();
        Self { value, magnitude }
    }
}

impl<T: PartialEq> PartialEq for Tracked<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: PartialOrd> PartialOrd for Tracked<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl<T: Scalar> Add for Tracked<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            magnitude: self.magnitude + rhs.magnitude,
        }
    }
}

impl<T: Scalar> Sub for Tracked<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            magnitude: self.magnitude + rhs.magnitude,
        }
    }
}

impl<T: Scalar> Mul for Tracked<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self {
            value: self.value * rhs.value,
            magnitude: self.magnitude * rhs.magnitude,
        }
    }
}

impl<T: Scalar> Div for Tracked<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let denom = rhs.value.abs().to_f64();
        Self {
            value: self.value / rhs.value,
            magnitude: self.magnitude / denom,
        }
    }
}

impl<T: Scalar> Neg for Tracked<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            value: -self.value,
            magnitude: self.magnitude,
        }
    }
}

impl<T: Scalar> Scalar for Tracked<T> {
    fn zero() -> Self {
        Self::leaf(T::zero())
    }
    fn one() -> Self {
        Self::leaf(T::one())
    }
    fn from_f64(x: f64) -> Self {
        Self::leaf(T::from_f64(x))
    }
    fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
    fn abs(&self) -> Self {
        Self {
            value: self.value.abs(),
            magnitude: self.magnitude,
        }
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.magnitude.is_finite()
    }
    fn ln(&self) -> Option<Self> {
        self.value.ln().map(Self::leaf)
    }
    fn magnitude(&self) -> f64 {
        self.magnitude
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn ln(&self) -> Option<Self> {
        Some(f64::ln(*self))
    }
}

impl Scalar for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::ZERO
    }
    fn one() -> Self {
        DoubleDouble::ONE
    }
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        DoubleDouble::to_f64(*self)
    }
    fn abs(&self) -> Self {
        DoubleDouble::abs(*self)
    }
    fn is_finite(&self) -> bool {
        DoubleDouble::is_finite(*self)
    }
    fn ln(&self) -> Option<Self> {
        Some(DoubleDouble::ln(*self))
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as num_traits::One>::one()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite f64")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn ln(&self) -> Option<Self> {
        None
    }
}
