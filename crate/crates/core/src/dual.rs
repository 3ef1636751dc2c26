//! Forward-mode dual numbers.
//!
//! `Dual<T>` is itself a [`Scalar`], so nesting (`Dual<Dual<f64>>`) yields
//! exact second derivatives of anything written generically.

use std::cmp::Ordering;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }

    pub fn variable(re: T) -> Self {
        Dual { re, eps: T::one() }
    }

    #[inline]
    fn chain(self, value: T, slope: T) -> Self {
        if self.eps.is_zero() {
            Dual::constant(value)
        } else {
            Dual::new(value, slope * self.eps)
        }
    }
}

/// Lift `x` into duals with a unit tangent along coordinate `k`.
pub fn seed<T: Scalar>(x: &[T], k: usize) -> Vec<Dual<T>> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| if i == k { Dual::variable(v) } else { Dual::constant(v) })
        .collect()
}

/// Lift `x` into duals with tangent `direction`.
pub fn seed_direction<T: Scalar>(x: &[T], direction: &[T]) -> Vec<Dual<T>> {
    x.iter().zip(direction).map(|(&v, &d)| Dual::new(v, d)).collect()
}

pub fn constants<T: Scalar>(x: &[T]) -> Vec<Dual<T>> {
    x.iter().map(|&v| Dual::constant(v)).collect()
}

pub fn values<T: Scalar>(x: &[Dual<T>]) -> Vec<T> {
    x.iter().map(|d| d.re).collect()
}

pub fn tangents<T: Scalar>(x: &[Dual<T>]) -> Vec<T> {
    x.iter().map(|d| d.eps).collect()
}

/// Gradient of a scalar function by one dual sweep per coordinate.
pub fn gradient<T, F>(x: &[T], f: F) -> Vec<T>
where
    T: Scalar,
    F: Fn(&[Dual<T>]) -> Dual<T>,
{
    (0..x.len()).map(|k| f(&seed(x, k)).eps).collect()
}

/// Jacobian `J[i][k] = d f_i / d x_k` of a vector function, stored row-major.
pub fn jacobian<T, F>(x: &[T], f: F) -> Vec<Vec<T>>
where
    T: Scalar,
    F: Fn(&[Dual<T>]) -> Vec<Dual<T>>,
{
    let columns: Vec<Vec<T>> = (0..x.len()).map(|k| tangents(&f(&seed(x, k)))).collect();
    let rows = columns.first().map_or(0, |c| c.len());
    (0..rows)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect()
}

impl<T: Scalar> PartialEq for Dual<T> {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re
    }
}

impl<T: Scalar> PartialOrd for Dual<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.re;
        let value = self.re * inv;
        Dual::new(value, (self.eps - value * o.eps) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Scalar> DivAssign for Dual<T> {
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl<T: Scalar> Zero for Dual<T> {
    fn zero() -> Self {
        Dual::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<T: Scalar> One for Dual<T> {
    fn one() -> Self {
        Dual::constant(T::one())
    }
}

impl<T: Scalar> Sum for Dual<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(x: f64) -> Self {
        Dual::constant(T::from_f64(x))
    }

    fn re(self) -> f64 {
        self.re.re()
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        if self.eps.is_zero() {
            return Dual::constant(s);
        }
        Dual::new(s, self.eps / (s + s))
    }

    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::one() + t * t)
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::one() / self.re)
    }

    fn abs(self) -> Self {
        if self.re.re() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::one(),
            1 => self,
            _ => self.chain(self.re.powi(n), T::from_f64(n as f64) * self.re.powi(n - 1)),
        }
    }

    fn powf(self, p: Self) -> Self {
        let value = self.re.powf(p.re);
        let mut eps = T::zero();
        if !self.eps.is_zero() {
            eps += p.re * self.re.powf(p.re - T::one()) * self.eps;
        }
        if !p.eps.is_zero() {
            eps += value * self.re.ln() * p.eps;
        }
        Dual::new(value, eps)
    }

    fn is_finite(self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }
}
