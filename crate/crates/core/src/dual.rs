//! Complex forward-mode dual numbers carrying one holomorphic tangent.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::Real;

/// `value + ε·tangent` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub value: Complex<T>,
    pub tangent: Complex<T>,
}

impl<T: Real> Dual<T> {
    pub fn new(value: Complex<T>, tangent: Complex<T>) -> Self {
        Self { value, tangent }
    }

    pub fn constant(value: Complex<T>) -> Self {
        Self { value, tangent: Complex::new(T::zero(), T::zero()) }
    }

    pub fn variable(value: Complex<T>) -> Self {
        Self { value, tangent: Complex::new(T::one(), T::zero()) }
    }

    pub fn zero() -> Self {
        Self::constant(Complex::new(T::zero(), T::zero()))
    }

    pub fn one() -> Self {
        Self::constant(Complex::new(T::one(), T::zero()))
    }

    /// Principal logarithm.
    pub fn ln(self) -> Self {
        Self { value: self.value.ln(), tangent: self.tangent / self.value }
    }

    pub fn scale_tangent(self, s: T) -> Self {
        Self { value: self.value, tangent: self.tangent * s }
    }

    pub fn scale(self, s: T) -> Self {
        Self { value: self.value * s, tangent: self.tangent * s }
    }

    pub fn powu(self, n: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { value: self.value + o.value, tangent: self.tangent + o.tangent }
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { value: self.value - o.value, tangent: self.tangent - o.tangent }
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            value: self.value * o.value,
            tangent: self.tangent * o.value + self.value * o.tangent,
        }
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.value / o.value;
        Self { value: q, tangent: (self.tangent - q * o.tangent) / o.value }
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, tangent: -self.tangent }
    }
}
