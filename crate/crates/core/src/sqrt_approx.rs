//! Monotone polynomial approximation of the square root on `[0, 1]`.
//!
//! The sequence starts at `p_0 = 0` and iterates `p_{n+1} = p_n + (x - p_n^2) / 2`.
//! On `[0, 1]` it increases pointwise towards `sqrt(x)`, and every member has
//! vanishing constant term. Composing with `b^2` therefore yields polynomials
//! in `b` that increase towards `|b|`.
//!
//! Degrees double at every step, so coefficient lists are only materialized
//! up to a cap; past the cap the same recursion is run on point values.

use crate::approx::SampledFunction;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// Default cap on the number of stored coefficients per polynomial.
pub const DEFAULT_DEGREE_CAP: usize = 1 << 16;

/// One step of the recursion at a point.
pub fn step<T: Scalar>(p: &T, x: &T) -> T {
    p.clone() + (x.clone() - p.clone() * p.clone()) / T::from_i64(2)
}

/// Values `p_0(x), ..., p_n(x)` by pointwise recursion.
pub fn pointwise<T: Scalar>(n: usize, x: &T) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut p = T::zero();
    out.push(p.clone());
    for _ in 0..n {
        p = step(&p, x);
        out.push(p.clone());
    }
    out
}

/// `p_n(x)` by pointwise recursion.
pub fn eval_pointwise<T: Scalar>(n: usize, x: &T) -> T {
    (0..n).fold(T::zero(), |p, _| step(&p, x))
}

#[derive(Clone, Debug)]
pub struct SqrtSequence<T: Scalar = f64> {
    polys: Vec<Polynomial<T>>,
    count: usize,
}

impl<T: Scalar> SqrtSequence<T> {
    pub fn new(n: usize) -> Self {
        Self::with_degree_cap(n, DEFAULT_DEGREE_CAP)
    }

    /// Materializes `p_0..p_m` where `m <= n` is the last index whose
    /// coefficient list fits into `cap` entries.
    pub fn with_degree_cap(n: usize, cap: usize) -> Self {
        let mut polys = vec![Polynomial::zero()];
        let x = Polynomial::<T>::x();
        let half = T::one() / T::from_i64(2);
        for k in 0..n {
            let prev = &polys[k];
            // deg p_{k+1} = max(1, 2 deg p_k)
            let next_len = prev.degree().map_or(2, |d| (2 * d).max(1) + 1);
            if next_len > cap {
                break;
            }
            let next = prev + &(&x - &prev.square()).scale(&half);
            polys.push(next);
        }
        SqrtSequence { polys, count: n }
    }

    /// Requested length `N` (the sequence describes `p_0..p_N`).
    pub fn count(&self) -> usize {
        self.count
    }

    /// The materialized prefix of the sequence.
    pub fn stored(&self) -> &[Polynomial<T>] {
        &self.polys
    }

    pub fn poly(&self, n: usize) -> Option<&Polynomial<T>> {
        self.polys.get(n)
    }

    /// `p_n(x)`: Horner on the stored polynomial, pointwise recursion past the cap.
    pub fn eval(&self, n: usize, x: &T) -> T {
        match self.polys.get(n) {
            Some(p) => p.eval(x),
            None => eval_pointwise(n, x),
        }
    }
}

/// Convenience constructor for `p_0..p_n` with the default cap.
pub fn sqrt_poly_sequence<T: Scalar>(n: usize) -> SqrtSequence<T> {
    SqrtSequence::new(n)
}

/// `max_x (sqrt(x) - p_n(x))` over `gridsize` equispaced points of `[0, 1]`.
pub fn uniform_error(n: usize, gridsize: usize) -> f64 {
    let gridsize = gridsize.max(2);
    (0..gridsize)
        .map(|i| {
            let x = if i == gridsize - 1 {
                1.0
            } else {
                i as f64 / (gridsize - 1) as f64
            };
            x.sqrt() - eval_pointwise(n, &x)
        })
        .fold(0.0, f64::max)
}

/// `x -> p_n((lam b(x))^2) / lam`, which increases in `n` towards `|b(x)|`.
///
/// Requires `lam > 0` and `|lam b| <= 1` on every grid point; the first
/// offending point is reported instead of clamping.
pub fn abs_via_squares(b: &SampledFunction, lam: f64, n: usize) -> Result<SampledFunction> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::InvalidInput(format!("scaling factor must be positive, got {}", lam)));
    }
    for (&x, &v) in b.grid().iter().zip(b.values()) {
        let scaled = (lam * v).abs();
        if scaled > 1.0 {
            return Err(Error::ScalingViolation { x, value: scaled });
        }
    }
    Ok(b.map(|v| {
        let y = (lam * v) * (lam * v);
        eval_pointwise(n, &y) / lam
    }))
}
