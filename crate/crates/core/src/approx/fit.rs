//! Discrete minimax polynomial fits by Remez exchange.

use serde::Serialize;

/// Best uniform polynomial approximation of samples, in Chebyshev form on
/// the affinely scaled abscissa.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimaxFit {
    /// Chebyshev coefficients in `t = (x - center) / half_width`.
    pub cheb: Vec<f64>,
    pub center: f64,
    pub half_width: f64,
    /// `max_i |y_i - p(x_i)|` over all samples.
    pub deviation: f64,
    pub iterations: usize,
}

impl MinimaxFit {
    pub fn eval(&self, x: f64) -> f64 {
        cheb_eval(&self.cheb, (x - self.center) / self.half_width)
    }

    /// `p(x) + deviation`, which dominates every fitted sample.
    pub fn upper(&self, x: f64) -> f64 {
        self.eval(x) + self.deviation
    }

    /// `sum_k |b_k| |s|^k + deviation`, with `b` the monomial coefficients
    /// in the scaled abscissa `s`. Bounds `upper` in absolute value and is
    /// nondecreasing in `|s|`.
    pub fn majorant(&self, x: f64) -> f64 {
        let s = ((x - self.center) / self.half_width).abs();
        let n = self.cheb.len();
        let mut b = vec![0.0; n];
        let (mut t0, mut t1) = (vec![1.0], vec![0.0, 1.0]);
        for (k, &a) in self.cheb.iter().enumerate() {
            let tk = if k == 0 { &t0 } else { &t1 };
            for (j, &c) in tk.iter().enumerate() {
                b[j] += a * c;
            }
            if k >= 1 {
                let mut next = vec![0.0; t1.len() + 1];
                for (j, &c) in t1.iter().enumerate() {
                    next[j + 1] += 2.0 * c;
                }
                for (j, &c) in t0.iter().enumerate() {
                    next[j] -= c;
                }
                t0 = std::mem::replace(&mut t1, next);
            }
        }
        b.iter().rev().fold(0.0, |acc, &c| acc * s + c.abs()) + self.deviation
    }
}

fn cheb_basis(t: f64, m: usize) -> Vec<f64> {
    let mut b = Vec::with_capacity(m);
    for j in 0..m {
        b.push(match j {
            0 => 1.0,
            1 => t,
            _ => 2.0 * t * b[j - 1] - b[j - 2],
        });
    }
    b
}

fn cheb_eval(c: &[f64], t: f64) -> f64 {
    // Clenshaw
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

const MAX_ITER: usize = 200;

/// Minimax fit of degree `degree` to `(xs, ys)`; `xs` strictly increasing.
///
/// With at most `degree + 1` samples the fit interpolates (degree reduced to
/// `len - 1`) and the deviation is zero up to rounding.
pub fn minimax_fit(xs: &[f64], ys: &[f64], degree: usize) -> MinimaxFit {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let n = xs.len();
    let (lo, hi) = (xs[0], xs[n - 1]);
    let center = 0.5 * (lo + hi);
    let half_width = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let ts: Vec<f64> = xs.iter().map(|&x| (x - center) / half_width).collect();
    let finish = |cheb: Vec<f64>, iterations: usize| {
        let deviation = ts
            .iter()
            .zip(ys)
            .map(|(&t, &y)| (y - cheb_eval(&cheb, t)).abs())
            .fold(0.0, f64::max);
        MinimaxFit {
            cheb,
            center,
            half_width,
            deviation,
            iterations,
        }
    };

    if n <= degree + 1 {
        let rows = ts.iter().map(|&t| cheb_basis(t, n)).collect();
        let cheb = solve_dense(rows, ys.to_vec()).unwrap_or_else(|| vec![ys[0]]);
        return finish(cheb, 0);
    }

    let m = degree + 1;
    let mut reference: Vec<usize> = (0..=m).map(|k| k * (n - 1) / m).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for iter in 1..=MAX_ITER {
        let rows = reference
            .iter()
            .enumerate()
            .map(|(r, &i)| {
                let mut row = cheb_basis(ts[i], m);
                row.push(if r % 2 == 0 { 1.0 } else { -1.0 });
                row
            })
            .collect();
        let rhs = reference.iter().map(|&i| ys[i]).collect();
        let Some(sol) = solve_dense(rows, rhs) else {
            break;
        };
        let level = sol[m].abs();
        let cheb = sol[..m].to_vec();
        let err: Vec<f64> = ts.iter().zip(ys).map(|(&t, &y)| y - cheb_eval(&cheb, t)).collect();
        let (worst, wmax) = err
            .iter()
            .enumerate()
            .map(|(i, e)| (i, e.abs()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if best.as_ref().is_none_or(|(d, _)| wmax < *d) {
            best = Some((wmax, cheb.clone()));
        }
        if wmax <= level * (1.0 + 1e-12) + 1e-300 || reference.contains(&worst) {
            return finish(cheb, iter);
        }
        exchange(&mut reference, &err, worst);
    }
    let (_, cheb) = best.unwrap_or((0.0, vec![ys[0]]));
    finish(cheb, MAX_ITER)
}

fn exchange(reference: &mut Vec<usize>, err: &[f64], z: usize) {
    let s = err[z] >= 0.0;
    let sign = |i: usize| err[i] >= 0.0;
    let last = reference.len() - 1;
    if z < reference[0] {
        if sign(reference[0]) == s {
            reference[0] = z;
        } else {
            reference.pop();
            reference.insert(0, z);
        }
    } else if z > reference[last] {
        if sign(reference[last]) == s {
            reference[last] = z;
        } else {
            reference.remove(0);
            reference.push(z);
        }
    } else {
        let k = reference.partition_point(|&r| r < z) - 1;
        if sign(reference[k]) == s {
            reference[k] = z;
        } else {
            reference[k + 1] = z;
        }
    }
}
