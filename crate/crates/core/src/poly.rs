//! Dense univariate polynomials over any [`Scalar`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Polynomial stored as `coeffs[k]` = coefficient of `x^k`.
///
/// Trailing zero coefficients are always stripped, so the zero polynomial
/// has an empty coefficient list.
#[derive(Clone, PartialEq)]
pub struct Polynomial<T: Scalar = f64> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// The coordinate function `x`.
    pub fn x() -> Self {
        Self::monomial(1)
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Polynomial { coeffs }
    }

    pub fn from_f64s(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| T::from_f64(c)).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// `self ∘ inner`, evaluated by Horner's scheme in the polynomial ring.
    pub fn compose(&self, inner: &Polynomial<T>) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Polynomial::zero(), |acc, c| &(&acc * inner) + &Polynomial::constant(c.clone()))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Converts the coefficients into another numeric mode through `f64`.
    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial::new(self.coeffs.iter().map(|c| c.to_f64()).collect())
    }

    pub fn convert<U: Scalar>(&self) -> Polynomial<U> {
        Polynomial::new(self.coeffs.iter().map(|c| U::from_f64(c.to_f64())).collect())
    }
}

impl<T: Scalar> fmt::Debug for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{:?}", c)?,
                1 => write!(f, "{:?}·x", c)?,
                _ => write!(f, "{:?}·x^{}", c, k)?,
            }
        }
        Ok(())
    }
}

fn zip_coeffs<T: Scalar>(p: &[T], q: &[T], op: impl Fn(T, T) -> T) -> Vec<T> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|k| {
            let a = p.get(k).cloned().unwrap_or_else(T::zero);
            let b = q.get(k).cloned().unwrap_or_else(T::zero);
            op(a, b)
        })
        .collect()
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        Polynomial::new(zip_coeffs(&self.coeffs, &rhs.coeffs, |a, b| a + b))
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        Polynomial::new(zip_coeffs(&self.coeffs, &rhs.coeffs, |a, b| a - b))
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl<T: Scalar> $trait for Polynomial<T> {
            type Output = Polynomial<T>;
            fn $method(self, rhs: Self) -> Polynomial<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
