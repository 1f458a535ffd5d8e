//! Finite-level evidence for (in)determinacy of a moment sequence.
//!
//! Three traces are computed from the Jacobi data: Carleman partial sums,
//! `S_N = sum_{n<=N} |p_n(i)|^2`, and the least-squares defect of `e_0` from
//! the range of `J + i lambda` restricted to the first `L` coordinates. No
//! finite truncation decides determinacy; the verdict grades evidence with
//! fixed thresholds.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::functionals::MomentSequence;
use crate::gns::{gns_model, hankel, psd_rank, GnsModel};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
struct Complex<T> {
    re: T,
    im: T,
}

impl<T: Real> Complex<T> {
    fn new(re: T, im: T) -> Self {
        Complex { re, im }
    }
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn real(re: T) -> Self {
        Complex::new(re, T::zero())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn norm_sqr(&self) -> T {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }
    fn scale(&self, s: &T) -> Self {
        Complex::new(self.re.clone() * s.clone(), self.im.clone() * s.clone())
    }
}

impl<T: Real> Add for Complex<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl<T: Real> Sub for Complex<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl<T: Real> Mul for Complex<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Complex::new(
            self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone(),
            self.re * o.im + self.im * o.re,
        )
    }
}

impl<T: Real> Neg for Complex<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Complex::new(-self.re, -self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarlemanResult {
    /// `C_n = sum_{k=1..n} s_{2k}^{-1/(2k)}` for `n = 1..=N`.
    pub partial_sums: Vec<f64>,
    /// `ln(C_N / C_h) / ln(N / h)` with `h = ceil(N / 2)`.
    pub elasticity: Option<f64>,
    pub divergent: bool,
}

/// Carleman partial sums and a divergence flag.
///
/// Diverging sums grow like a power of `N` with elasticity bounded away from
/// zero; convergent ones flatten and the elasticity tends to zero.
pub fn carleman_test<T: Real>(ms: &MomentSequence<T>, n: usize, elasticity_threshold: f64) -> Result<CarlemanResult> {
    if n > ms.degree() {
        return Err(Error::InsufficientMoments {
            needed: 2 * n + 1,
            available: ms.moments().len(),
        });
    }
    let s = ms.moments();
    let mut acc = 0.0;
    let mut partial_sums = Vec::with_capacity(n);
    for k in 1..=n {
        let m = &s[2 * k];
        if !(*m > T::zero()) {
            return Err(Error::NonPositiveMoment {
                index: 2 * k,
                value: m.to_f64(),
            });
        }
        let term = (-(m.ln() / T::from_i64(2 * k as i64))).exp();
        acc += term.to_f64();
        partial_sums.push(acc);
    }
    let elasticity = (n >= 2).then(|| {
        let h = n.div_ceil(2);
        (partial_sums[n - 1] / partial_sums[h - 1]).ln() / (n as f64 / h as f64).ln()
    });
    Ok(CarlemanResult {
        divergent: elasticity.is_some_and(|e| e >= elasticity_threshold),
        elasticity,
        partial_sums,
    })
}

fn check_beta<T: Real>(beta: &[T]) -> Result<()> {
    match beta.iter().position(|b| !(*b > T::zero())) {
        Some(k) => Err(Error::InvalidRecurrence {
            index: k + 1,
            value: beta[k].to_f64(),
        }),
        None => Ok(()),
    }
}

/// `S_0..S_N` with `S_N = sum_{n<=N} |p_n(i)|^2`, `p_0 = 1`, computed by the
/// three-term recurrence `beta_{k+1} p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}`
/// where `beta[k]` holds `beta_{k+1}`.
pub fn pn_at_i_partial_sums<T: Real>(alpha: &[T], beta: &[T], n: usize) -> Result<Vec<f64>> {
    if alpha.len() < n || beta.len() < n {
        return Err(Error::InsufficientMoments {
            needed: n,
            available: alpha.len().min(beta.len()),
        });
    }
    check_beta(&beta[..n])?;
    let i = Complex::new(T::zero(), T::one());
    let mut prev = Complex::zero();
    let mut cur = Complex::real(T::one());
    let mut acc = T::one();
    let mut out = vec![acc.to_f64()];
    for k in 0..n {
        let b_prev = if k == 0 { T::zero() } else { beta[k - 1].clone() };
        let next = ((i.clone() - Complex::real(alpha[k].clone())) * cur.clone() - prev.scale(&b_prev))
            .scale(&(T::one() / beta[k].clone()));
        prev = cur;
        cur = next;
        acc = acc + cur.norm_sqr();
        out.push(acc.to_f64());
    }
    Ok(out)
}

/// Defects `min_u ||(J + i lam) u - e_j||` for `u` on the first `level`
/// coordinates, with the image measured in the first `level + 1`
/// coordinates (the rectangular Jacobi block).
///
/// A numerically singular triangular factor yields defect 1.
pub fn range_defect_from_recurrence<T: Real>(
    alpha: &[T],
    beta: &[T],
    level: usize,
    lambda: f64,
    targets: &[usize],
) -> Result<Vec<f64>> {
    let avail = alpha.len().min(beta.len());
    if level == 0 || level > avail {
        return Err(Error::LevelOutOfRange { level, max: avail });
    }
    if lambda != 1.0 && lambda != -1.0 {
        return Err(Error::InvalidInput(format!("lambda must be +1 or -1, got {}", lambda)));
    }
    if let Some(&j) = targets.iter().find(|&&j| j > level) {
        return Err(Error::InvalidInput(format!("target e_{} outside the first {} coordinates", j, level + 1)));
    }
    check_beta(&beta[..level])?;
    let rows = level + 1;
    let lam = T::from_f64(lambda);
    let mut a = vec![vec![Complex::<T>::zero(); level]; rows];
    for k in 0..level {
        a[k][k] = Complex::new(alpha[k].clone(), lam.clone());
        a[k + 1][k] = Complex::real(beta[k].clone());
        if k + 1 < level {
            a[k][k + 1] = Complex::real(beta[k].clone());
        }
    }
    let mut bs: Vec<Vec<Complex<T>>> = targets
        .iter()
        .map(|&j| {
            let mut b = vec![Complex::zero(); rows];
            b[j] = Complex::real(T::one());
            b
        })
        .collect();
    // Givens QR: zero column k below the diagonal, bottom-up
    for k in 0..level {
        for r in (k + 1..rows).rev() {
            let (x, y) = (a[r - 1][k].clone(), a[r][k].clone());
            if y.norm_sqr().is_zero() {
                continue;
            }
            let nrm = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let inv = T::one() / nrm;
            let c = x.scale(&inv);
            let s = y.scale(&inv);
            let rot = |u: Complex<T>, v: Complex<T>| {
                (c.conj() * u.clone() + s.conj() * v.clone(), c.clone() * v - s.clone() * u)
            };
            for col in k..level {
                let (u, v) = rot(a[r - 1][col].clone(), a[r][col].clone());
                a[r - 1][col] = u;
                a[r][col] = v;
            }
            for b in bs.iter_mut() {
                let (u, v) = rot(b[r - 1].clone(), b[r].clone());
                b[r - 1] = u;
                b[r] = v;
            }
        }
    }
    let scale = (0..level)
        .map(|k| a[k][k].norm_sqr().to_f64().sqrt())
        .fold(0.0, f64::max);
    let singular = (0..level).any(|k| a[k][k].norm_sqr().to_f64().sqrt() <= 1e-14 * scale);
    Ok(bs
        .iter()
        .map(|b| {
            if singular {
                1.0
            } else {
                b[level].norm_sqr().sqrt().to_f64().clamp(0.0, 1.0)
            }
        })
        .collect())
}

/// Range defects of `J + i lam` for the Jacobi data of a GNS model.
pub fn range_density_defect<T: Real>(
    model: &GnsModel<T>,
    level: usize,
    lambda: f64,
    targets: &[usize],
) -> Result<Vec<f64>> {
    let (alpha, beta) = model.recurrence();
    range_defect_from_recurrence(&alpha, &beta, level, lambda, targets)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeterminacyVerdict {
    DeterminateEvidence,
    IndeterminateEvidence,
    Inconclusive,
}

impl DeterminacyVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            DeterminacyVerdict::DeterminateEvidence => "DeterminateEvidence",
            DeterminacyVerdict::IndeterminateEvidence => "IndeterminateEvidence",
            DeterminacyVerdict::Inconclusive => "Inconclusive",
        }
    }
}

impl Serialize for DeterminacyVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeterminacyConfig {
    pub psd_tol: f64,
    /// `S_N` has plateaued when `(S_N - S_{N-w}) / S_N` is below this.
    pub plateau_tol: f64,
    pub plateau_window: usize,
    pub defect_threshold: f64,
    pub carleman_elasticity: f64,
}

impl Default for DeterminacyConfig {
    fn default() -> Self {
        DeterminacyConfig {
            psd_tol: 1e-10,
            plateau_tol: 1e-2,
            plateau_window: 5,
            defect_threshold: 0.1,
            carleman_elasticity: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterminacyReport {
    pub verdict: DeterminacyVerdict,
    pub carleman: Vec<f64>,
    pub carleman_elasticity: Option<f64>,
    pub carleman_divergent: bool,
    pub s_at_i: Vec<f64>,
    /// `(level, lambda, defect)` for target `e_0`.
    pub defects: Vec<(usize, i32, f64)>,
    /// `(S_N - S_{N-w}) / S_N` over the plateau window.
    pub relative_increment: Option<f64>,
    pub levels: usize,
    pub rank: usize,
    pub evidence: Vec<String>,
}

impl DeterminacyReport {
    /// Defect trace for one sign of lambda, ordered by level.
    pub fn defects_for(&self, lambda: i32) -> Vec<f64> {
        self.defects
            .iter()
            .filter(|d| d.1 == lambda)
            .map(|d| d.2)
            .collect()
    }
}

pub fn determinacy_report<T: Real>(ms: &MomentSequence<T>, config: DeterminacyConfig) -> Result<DeterminacyReport> {
    let d = ms.degree();
    let mut evidence = Vec::new();
    let h = hankel(ms);
    let psd = psd_rank(&h, config.psd_tol);
    if !psd.psd {
        let (index, pivot) = psd.failure.unwrap_or((0, f64::NAN));
        return Err(Error::NotPositiveSemidefinite { index, pivot });
    }
    let carleman = carleman_test(ms, d, config.carleman_elasticity)?;
    let model = gns_model(ms, config.psd_tol)?;
    let (alpha, beta) = model.recurrence();
    let n = alpha.len().min(beta.len());
    let s_at_i = pn_at_i_partial_sums(&alpha, &beta, n)?;
    let mut defects = Vec::new();
    for level in 1..=n {
        for lam in [1i32, -1] {
            let v = range_defect_from_recurrence(&alpha, &beta, level, lam as f64, &[0])?;
            defects.push((level, lam, v[0]));
        }
    }
    let mut report = DeterminacyReport {
        verdict: DeterminacyVerdict::Inconclusive,
        carleman: carleman.partial_sums.clone(),
        carleman_elasticity: carleman.elasticity,
        carleman_divergent: carleman.divergent,
        s_at_i,
        defects,
        relative_increment: None,
        levels: n,
        rank: psd.rank,
        evidence: Vec::new(),
    };

    if psd.rank < d + 1 {
        evidence.push(format!(
            "Hankel rank {} < {}: the functional is carried by {} points",
            psd.rank,
            d + 1,
            psd.rank
        ));
        report.verdict = DeterminacyVerdict::DeterminateEvidence;
        report.evidence = evidence;
        return Ok(report);
    }
    let w = config.plateau_window;
    if n < w + 1 {
        evidence.push(format!("insufficient moments: recurrence length {} < {}", n, w + 1));
        report.evidence = evidence;
        return Ok(report);
    }

    let s = &report.s_at_i;
    let rel = (s[n] - s[n - w]) / s[n];
    report.relative_increment = Some(rel);
    let plateau = rel < config.plateau_tol;
    let tail = |lam: i32| -> Vec<f64> {
        let all = report.defects_for(lam);
        all[all.len() - w..].to_vec()
    };
    let (tp, tm) = (tail(1), tail(-1));
    let decreasing_below = [&tp, &tm].iter().all(|t| {
        t.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12)) && t[t.len() - 1] < config.defect_threshold
    });
    let plateau_above = [&tp, &tm]
        .iter()
        .all(|t| t.iter().all(|&v| v >= config.defect_threshold));

    match carleman.elasticity {
        Some(e) => evidence.push(format!(
            "Carleman elasticity {:.4} ({} threshold {})",
            e,
            if carleman.divergent { "at or above" } else { "below" },
            config.carleman_elasticity
        )),
        None => evidence.push("Carleman elasticity unavailable".into()),
    }
    evidence.push(format!(
        "S_N relative increment over last {} levels {:.3e} ({} plateau tolerance {})",
        w,
        rel,
        if plateau { "below" } else { "above" },
        config.plateau_tol
    ));
    evidence.push(format!(
        "range defect of e_0 at level {}: {:.4} / {:.4} for lambda = +1 / -1 (threshold {})",
        n,
        tp[w - 1],
        tm[w - 1],
        config.defect_threshold
    ));

    report.verdict = if carleman.divergent || (!plateau && decreasing_below) {
        DeterminacyVerdict::DeterminateEvidence
    } else if plateau && plateau_above {
        DeterminacyVerdict::IndeterminateEvidence
    } else {
        DeterminacyVerdict::Inconclusive
    };
    report.evidence = evidence;
    Ok(report)
}
