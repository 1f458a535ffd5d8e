//! GNS construction for the polynomial algebra under a moment functional.
//!
//! The Hankel matrix is the Gram matrix of the monomials. Its null space is
//! the truncated Gel'fand ideal, degree-graded Cholesky yields orthonormal
//! polynomials, and multiplication by `x` in that basis is the Jacobi matrix.

use serde::Serialize;

use crate::approx::SampledFunction;
use crate::error::{Error, Result};
use crate::functionals::{MomentSequence, QuadFunctional};
use crate::poly::Polynomial;
use crate::scalar::{Real, Scalar};

pub type Matrix<T> = Vec<Vec<T>>;

/// Default relative pivot threshold.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// Symmetric Gram matrix `H[i][j] = s_{i+j}`, possibly perturbed.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelMatrix<T: Scalar = f64> {
    entries: Matrix<T>,
}

pub fn hankel<T: Scalar>(ms: &MomentSequence<T>) -> HankelMatrix<T> {
    let n = ms.degree() + 1;
    let s = ms.moments();
    HankelMatrix {
        entries: (0..n).map(|i| (0..n).map(|j| s[i + j].clone()).collect()).collect(),
    }
}

impl<T: Scalar> HankelMatrix<T> {
    /// Any symmetric matrix; used for perturbation experiments.
    pub fn from_entries(entries: Matrix<T>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::InvalidInput(format!("matrix not symmetric at ({}, {})", i, j)));
                }
            }
        }
        Ok(HankelMatrix { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i][j]
    }

    /// Constant along anti-diagonals.
    pub fn is_hankel(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| i + 1 >= n || j == 0 || self.entries[i][j] == self.entries[i + 1][j - 1]))
    }

    /// Copy with `delta` added to the diagonal entry `(k, k)`.
    pub fn perturb_diagonal(&self, k: usize, delta: T) -> Self {
        let mut e = self.entries.clone();
        e[k][k] = e[k][k].clone() + delta;
        HankelMatrix { entries: e }
    }

    /// `v^T H v`, the squared seminorm of the polynomial with coefficients `v`.
    pub fn quadratic_form(&self, v: &[T]) -> T {
        let n = self.size().min(v.len());
        let mut acc = T::zero();
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..n {
                acc = acc + v[i].clone() * self.entries[i][j].clone() * v[j].clone();
            }
        }
        acc
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.entries
            .iter()
            .map(|r| r.iter().map(Scalar::to_f64).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdResult<T: Scalar = f64> {
    pub psd: bool,
    pub rank: usize,
    /// Accepted pivots, as monomial indices, in elimination order.
    pub pivots: Vec<usize>,
    /// Polynomials spanning the numerical null space.
    pub kernel_basis: Vec<Polynomial<T>>,
    /// Monomial index and Schur value witnessing indefiniteness.
    pub failure: Option<(usize, f64)>,
}

fn solve_generic<T: Scalar>(mut a: Matrix<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / a[col][col].clone();
            for k in col..n {
                a[r][k] = a[r][k].clone() - f.clone() * a[col][k].clone();
            }
            b[r] = b[r].clone() - f * b[col].clone();
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r].clone();
        for k in r + 1..n {
            s = s - a[r][k].clone() * x[k].clone();
        }
        x[r] = s / a[r][r].clone();
    }
    Some(x)
}

/// Pivoted LDLᵀ rank decision.
///
/// A remaining diagonal entry `S_kk` is accepted as a pivot iff
/// `S_kk > tol * H_kk`; in exact modes iff `S_kk > 0`. Pivots are chosen by
/// the largest ratio `S_kk / H_kk`. After elimination the residual Schur
/// complement must vanish within the same relative tolerance, otherwise the
/// matrix is reported indefinite.
pub fn psd_rank<T: Scalar>(h: &HankelMatrix<T>, tol: f64) -> PsdResult<T> {
    let n = h.size();
    let exact = T::EXACT;
    let tol_t = T::from_f64(tol);
    let diag: Vec<T> = (0..n).map(|i| h.get(i, i).clone()).collect();
    if let Some(k) = diag.iter().position(|d| *d < T::zero()) {
        return PsdResult {
            psd: false,
            rank: 0,
            pivots: Vec::new(),
            kernel_basis: Vec::new(),
            failure: Some((k, diag[k].to_f64())),
        };
    }
    let mut s = h.entries.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &k) in remaining.iter().enumerate() {
            let thr = if exact { T::zero() } else { tol_t.clone() * diag[k].clone() };
            if s[k][k] > thr {
                let ratio = if diag[k].is_zero() {
                    f64::INFINITY
                } else {
                    (s[k][k].clone() / diag[k].clone()).to_f64()
                };
                if best.is_none_or(|(_, r)| ratio > r) {
                    best = Some((pos, ratio));
                }
            }
        }
        let Some((pos, _)) = best else { break };
        let p = remaining.remove(pos);
        pivots.push(p);
        let pv = s[p][p].clone();
        for &i in &remaining {
            if s[i][p].is_zero() {
                continue;
            }
            let f = s[i][p].clone() / pv.clone();
            for &j in &remaining {
                s[i][j] = s[i][j].clone() - f.clone() * s[p][j].clone();
            }
        }
    }

    let mut failure = None;
    for &i in &remaining {
        let thr = if exact { T::zero() } else { tol_t.clone() * diag[i].clone() };
        if s[i][i] < -thr.clone() {
            failure = Some((i, s[i][i].to_f64()));
            break;
        }
    }
    if failure.is_none() {
        'outer: for &i in &remaining {
            for &j in &remaining {
                if i == j {
                    continue;
                }
                let bound = if exact {
                    T::zero()
                } else {
                    // PSD forces S_ij^2 <= S_ii S_jj <= tol^2 H_ii H_jj
                    let hij = (diag[i].to_f64() * diag[j].to_f64()).sqrt();
                    T::from_f64(2.0 * tol * hij)
                };
                if s[i][j].abs() > bound {
                    failure = Some((i, s[i][i].to_f64()));
                    break 'outer;
                }
            }
        }
    }

    let mut kernel_basis = Vec::new();
    if failure.is_none() {
        let mut acc = pivots.clone();
        acc.sort_unstable();
        let haa: Matrix<T> = acc
            .iter()
            .map(|&a| acc.iter().map(|&b| h.get(a, b).clone()).collect())
            .collect();
        for &j in &remaining {
            let rhs: Vec<T> = acc.iter().map(|&a| h.get(a, j).clone()).collect();
            let y = if acc.is_empty() {
                Some(Vec::new())
            } else {
                solve_generic(haa.clone(), rhs)
            };
            if let Some(y) = y {
                let mut v = vec![T::zero(); n];
                v[j] = T::one();
                for (&a, ya) in acc.iter().zip(y) {
                    v[a] = -ya;
                }
                kernel_basis.push(Polynomial::new(v));
            }
        }
    }
    PsdResult {
        psd: failure.is_none(),
        rank: pivots.len(),
        pivots,
        kernel_basis,
        failure,
    }
}

/// Orthonormal polynomials and the Jacobi data of the GNS quotient.
#[derive(Clone, Debug, PartialEq)]
pub struct GnsModel<T: Scalar = f64> {
    pub degree: usize,
    pub rank: usize,
    /// Row `k` holds the monomial coefficients of `q_k`.
    pub onb: Matrix<T>,
    /// Monomial indices accepted during orthonormalization.
    pub accepted: Vec<usize>,
    /// `<q_i, x q_j>` on the leading rows where the moments suffice.
    pub multmat: Matrix<T>,
    pub alpha: Vec<T>,
    /// Off-diagonal of `multmat`: `beta[k] = <q_k, x q_{k+1}>`.
    pub beta: Vec<T>,
    /// `<q_{m-1}, x q_m>` past the square block, when available.
    pub beta_coupling: Option<T>,
    /// Largest entry of `multmat` off the tridiagonal band.
    pub band_defect: f64,
    pub notice: Option<String>,
}

/// Degree-graded Cholesky `H = L Lᵀ` over independent monomials; the rows
/// of `L⁻¹` are the orthonormal polynomials. Monomial `k` is dependent when
/// its pivot is below `tol * H_kk`, and the matrix is rejected when a pivot
/// falls below `-tol * H_kk`.
pub fn orthonormalize<T: Real>(h: &HankelMatrix<T>, tol: f64) -> Result<(Matrix<T>, Vec<usize>)> {
    let n = h.size();
    let tol_t = T::from_f64(tol);
    let mut accepted: Vec<usize> = Vec::new();
    // l[k][j]: entry for monomial k against accepted position j
    let mut l: Vec<Vec<T>> = Vec::new();
    for k in 0..n {
        let hkk = h.get(k, k).clone();
        if hkk < T::zero() {
            return Err(Error::NotPositiveSemidefinite {
                index: k,
                pivot: hkk.to_f64(),
            });
        }
        let mut row: Vec<T> = Vec::with_capacity(accepted.len() + 1);
        for (j, &a) in accepted.iter().enumerate() {
            let mut v = h.get(k, a).clone();
            for m in 0..j {
                v = v - row[m].clone() * l[j][m].clone();
            }
            row.push(v / l[j][j].clone());
        }
        let mut pivot = hkk.clone();
        for v in &row {
            pivot = pivot - v.clone() * v.clone();
        }
        let thr = tol_t.clone() * hkk;
        if pivot > thr {
            row.push(pivot.sqrt());
            accepted.push(k);
            l.push(row);
        } else if pivot < -thr {
            return Err(Error::NotPositiveSemidefinite {
                index: k,
                pivot: pivot.to_f64(),
            });
        }
    }
    // invert the lower-triangular factor on the accepted monomials
    let r = accepted.len();
    let mut inv = vec![vec![T::zero(); r]; r];
    for i in 0..r {
        inv[i][i] = T::one() / l[i][i].clone();
        for j in (0..i).rev() {
            let mut s = T::zero();
            for m in j..i {
                s = s + l[i][m].clone() * inv[m][j].clone();
            }
            inv[i][j] = -s / l[i][i].clone();
        }
    }
    let onb = (0..r)
        .map(|i| {
            let mut c = vec![T::zero(); n];
            for (j, &a) in accepted.iter().enumerate() {
                c[a] = inv[i][j].clone();
            }
            c
        })
        .collect();
    Ok((onb, accepted))
}

/// `<p, x q>` through the shifted moments; `None` past the available degree.
fn shifted_inner<T: Scalar>(s: &[T], p: &[T], q: &[T]) -> Option<T> {
    let mut acc = T::zero();
    for (a, pa) in p.iter().enumerate() {
        if pa.is_zero() {
            continue;
        }
        for (b, qb) in q.iter().enumerate() {
            if qb.is_zero() {
                continue;
            }
            let m = s.get(a + b + 1)?;
            acc = acc + pa.clone() * qb.clone() * m.clone();
        }
    }
    Some(acc)
}

fn poly_degree<T: Scalar>(c: &[T]) -> usize {
    c.iter().rposition(|v| !v.is_zero()).unwrap_or(0)
}

/// Multiplication matrix and three-term recurrence from an orthonormal basis.
pub fn jacobi_from_onb<T: Real>(onb: &Matrix<T>, accepted: &[usize], ms: &MomentSequence<T>) -> GnsModel<T> {
    let s = ms.moments();
    let d = ms.degree();
    let r = onb.len();
    // rows whose products with x q_j stay within s_0..s_{2d}
    let m = onb
        .iter()
        .take_while(|q| 2 * poly_degree(q) < 2 * d)
        .count();
    let mut multmat = vec![vec![T::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let v = shifted_inner(s, &onb[i], &onb[j]).expect("degree checked");
            multmat[i][j] = v.clone();
            multmat[j][i] = v;
        }
    }
    let alpha: Vec<T> = (0..m).map(|k| multmat[k][k].clone()).collect();
    let beta: Vec<T> = (1..m).map(|k| multmat[k - 1][k].clone()).collect();
    let beta_coupling = if m >= 1 && m < r {
        shifted_inner(s, &onb[m - 1], &onb[m])
    } else {
        None
    };
    let mut band_defect: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i.abs_diff(j) > 1 {
                band_defect = band_defect.max(multmat[i][j].to_f64().abs());
            }
        }
    }
    let notice = if r < d + 1 {
        Some(format!(
            "rank {} below {}: Jacobi data truncated to the {}-dimensional quotient",
            r,
            d + 1,
            m
        ))
    } else {
        None
    };
    GnsModel {
        degree: d,
        rank: r,
        onb: onb.clone(),
        accepted: accepted.to_vec(),
        multmat,
        alpha,
        beta,
        beta_coupling,
        band_defect,
        notice,
    }
}

/// Hankel, orthonormalization and Jacobi data in one pass.
pub fn gns_model<T: Real>(ms: &MomentSequence<T>, tol: f64) -> Result<GnsModel<T>> {
    let h = hankel(ms);
    let (onb, accepted) = orthonormalize(&h, tol)?;
    Ok(jacobi_from_onb(&onb, &accepted, ms))
}

impl<T: Real> GnsModel<T> {
    /// Leading `level x level` block of the multiplication matrix.
    pub fn mult_operator_matrix(&self, level: usize) -> Result<Matrix<T>> {
        let max = self.multmat.len();
        if level == 0 || level > max {
            return Err(Error::LevelOutOfRange { level, max });
        }
        Ok(self.multmat[..level].iter().map(|r| r[..level].to_vec()).collect())
    }

    /// Recurrence coefficients including the coupling past the square block:
    /// `alpha[0..m]` and `beta` of length `m` when the coupling is known.
    pub fn recurrence(&self) -> (Vec<T>, Vec<T>) {
        let mut beta = self.beta.clone();
        if let Some(b) = &self.beta_coupling {
            beta.push(b.clone());
        }
        (self.alpha.clone(), beta)
    }

    pub fn onb_polys(&self) -> Vec<Polynomial<T>> {
        self.onb.iter().map(|c| Polynomial::new(c.clone())).collect()
    }

    /// `max |onb H onbᵀ - I|`.
    pub fn gram_defect(&self, h: &HankelMatrix<T>) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, qi) in self.onb.iter().enumerate() {
            for (j, qj) in self.onb.iter().enumerate() {
                let mut acc = T::zero();
                for (a, ca) in qi.iter().enumerate() {
                    if ca.is_zero() {
                        continue;
                    }
                    for (b, cb) in qj.iter().enumerate() {
                        acc = acc + ca.clone() * h.get(a, b).clone() * cb.clone();
                    }
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc.to_f64() - target).abs());
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule<T: Scalar = f64> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussRule<T> {
    pub fn apply(&self, f: impl Fn(&T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (x, w)| acc + w.clone() * f(x))
    }

    pub fn moment(&self, k: usize) -> T {
        self.apply(|x| {
            let mut p = T::one();
            for _ in 0..k {
                p = p * x.clone();
            }
            p
        })
    }

    pub fn to_quad(&self) -> Result<QuadFunctional> {
        QuadFunctional::new(
            self.nodes.iter().map(Scalar::to_f64).collect(),
            self.weights.iter().map(Scalar::to_f64).collect(),
        )
    }
}

/// Maximal QL sweeps per eigenvalue.
const QL_MAX_SWEEPS: usize = 60;

/// Nodes and weights of the `m`-point rule from the recurrence: eigenvalues
/// of the leading Jacobi block and `mass` times squared first eigenvector
/// components, by implicit QL with shifts.
pub fn gauss_quadrature<T: Real>(alpha: &[T], beta: &[T], mass: &T, m: usize) -> Result<GaussRule<T>> {
    if m == 0 || m > alpha.len() || m - 1 > beta.len() {
        return Err(Error::InsufficientMoments {
            needed: m,
            available: alpha.len().min(beta.len() + 1),
        });
    }
    if let Some(k) = beta[..m - 1].iter().position(|b| !(*b > T::zero())) {
        return Err(Error::InvalidRecurrence {
            index: k + 1,
            value: beta[k].to_f64(),
        });
    }
    let mut d: Vec<T> = alpha[..m].to_vec();
    let mut e: Vec<T> = beta[..m - 1].to_vec();
    e.push(T::zero());
    let mut z = vec![T::zero(); m];
    z[0] = T::one();
    let eps = T::epsilon();
    let two = T::from_i64(2);
    let sign_of = |a: T, b: &T| if *b >= T::zero() { a.abs() } else { -a.abs() };

    for l in 0..m {
        let mut sweeps = 0;
        loop {
            let mut mm = l;
            while mm + 1 < m {
                if e[mm].abs() <= eps.clone() * (d[mm].abs() + d[mm + 1].abs()) {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            if sweeps >= QL_MAX_SWEEPS {
                return Err(Error::NoConvergence { iterations: sweeps });
            }
            sweeps += 1;
            let p0 = d[l].clone();
            let mut g = (d[l + 1].clone() - p0.clone()) / (two.clone() * e[l].clone());
            let mut r = (g.clone() * g.clone() + T::one()).sqrt();
            g = d[mm].clone() - p0 + e[l].clone() / (g.clone() + sign_of(r.clone(), &g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            for i in (l..mm).rev() {
                let f = s.clone() * e[i].clone();
                let b = c.clone() * e[i].clone();
                if g.abs() <= f.abs() {
                    c = g.clone() / f.clone();
                    r = (c.clone() * c.clone() + T::one()).sqrt();
                    e[i + 1] = f * r.clone();
                    s = T::one() / r.clone();
                    c = c * s.clone();
                } else {
                    s = f / g.clone();
                    r = (s.clone() * s.clone() + T::one()).sqrt();
                    e[i + 1] = g.clone() * r.clone();
                    c = T::one() / r.clone();
                    s = s * c.clone();
                }
                g = d[i + 1].clone() - p.clone();
                r = (d[i].clone() - g.clone()) * s.clone() + two.clone() * c.clone() * b.clone();
                p = s.clone() * r.clone();
                d[i + 1] = g.clone() + p.clone();
                g = c.clone() * r.clone() - b;
                let zf = z[i + 1].clone();
                z[i + 1] = s.clone() * z[i].clone() + c.clone() * zf.clone();
                z[i] = c.clone() * z[i].clone() - s.clone() * zf;
            }
            d[l] = d[l].clone() - p;
            e[l] = g;
            e[mm] = T::zero();
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    Ok(GaussRule {
        nodes: order.iter().map(|&i| d[i].clone()).collect(),
        weights: order
            .iter()
            .map(|&i| mass.clone() * z[i].clone() * z[i].clone())
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsReport {
    pub normf: f64,
    pub normg: f64,
    pub inner: f64,
    /// `||f|| ||g|| - |<f, g>|`.
    pub cs_slack: f64,
}

/// Seminorms and inner product under the moment functional. Squared norms
/// that round below zero are clamped to zero.
pub fn seminorm_and_cs<T: Real>(ms: &MomentSequence<T>, f: &Polynomial<T>, g: &Polynomial<T>) -> Result<CsReport> {
    let ff = ms.eval(&(f * f))?;
    let gg = ms.eval(&(g * g))?;
    let fg = ms.eval(&(f * g))?;
    let clamp = |v: T| if v < T::zero() { T::zero() } else { v };
    let nf = clamp(ff).sqrt();
    let ng = clamp(gg).sqrt();
    let slack = nf.clone() * ng.clone() - fg.abs();
    Ok(CsReport {
        normf: nf.to_f64(),
        normg: ng.to_f64(),
        inner: fg.to_f64(),
        cs_slack: slack.to_f64(),
    })
}

/// Seminorm `Phi(p^2)^{1/2}` of a polynomial.
pub fn seminorm<T: Real>(ms: &MomentSequence<T>, p: &Polynomial<T>) -> Result<T> {
    let v = ms.eval(&(p * p))?;
    Ok(if v < T::zero() { T::zero() } else { v.sqrt() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolventReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `||(f + i lam)^{-1} g||` against `||g||` under a quadrature.
pub fn resolvent_contraction_check(
    q: &QuadFunctional,
    f: &SampledFunction,
    g: &SampledFunction,
    lam: f64,
) -> Result<ResolventReport> {
    if lam != 1.0 && lam != -1.0 {
        return Err(Error::InvalidInput(format!("lambda must be +1 or -1, got {}", lam)));
    }
    let mut lhs2 = 0.0;
    let mut rhs2 = 0.0;
    for (&x, &w) in q.nodes().iter().zip(q.weights()) {
        let fv = f.interpolate(x)?;
        let gv = g.interpolate(x)?;
        lhs2 += w * gv * gv / (fv * fv + lam * lam);
        rhs2 += w * gv * gv;
    }
    let (lhs, rhs) = (lhs2.sqrt(), rhs2.sqrt());
    Ok(ResolventReport {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-12),
    })
}
