//! Positive linear functionals: moment sequences on polynomials and finite
//! quadratures on sampled functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::approx::{
    sw_lattice_approx, uniform_grid, Interval, SampledFunction, SampledSequence, SwOptions,
};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::{Real, Scalar};

/// `s_0..s_{2d}` with `s_k = Phi(x^k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence<T: Scalar = f64> {
    moments: Vec<T>,
}

impl<T: Scalar> MomentSequence<T> {
    pub fn new(moments: Vec<T>) -> Result<Self> {
        if moments.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "moment list must have odd length 2d+1, got {}",
                moments.len()
            )));
        }
        if !(moments[0] > T::zero()) {
            return Err(Error::NonPositiveMoment {
                index: 0,
                value: moments[0].to_f64(),
            });
        }
        Ok(MomentSequence { moments })
    }

    /// Standard normal: `s_{2k} = (2k-1)!!`, odd moments zero.
    pub fn normal(d: usize) -> Self {
        let mut m = Vec::with_capacity(2 * d + 1);
        let mut even = T::one();
        for k in 0..=2 * d {
            if k % 2 == 1 {
                m.push(T::zero());
            } else {
                if k > 0 {
                    even = even * T::from_i64(k as i64 - 1);
                }
                m.push(even.clone());
            }
        }
        MomentSequence { moments: m }
    }

    /// Uniform probability measure on `[-1, 1]`.
    pub fn uniform(d: usize) -> Self {
        let m = (0..=2 * d)
            .map(|k| {
                if k % 2 == 1 {
                    T::zero()
                } else {
                    T::one() / T::from_i64(k as i64 + 1)
                }
            })
            .collect();
        MomentSequence { moments: m }
    }

    /// Point mass at `a`.
    pub fn dirac(a: T, d: usize) -> Self {
        let mut m = Vec::with_capacity(2 * d + 1);
        let mut p = T::one();
        for _ in 0..=2 * d {
            m.push(p.clone());
            p = p * a.clone();
        }
        MomentSequence { moments: m }
    }

    /// Moments of the discrete measure `sum_i w_i delta_{x_i}`.
    pub fn from_quadrature(nodes: &[T], weights: &[T], d: usize) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidInput("nodes and weights differ in length".into()));
        }
        let mut m = vec![T::zero(); 2 * d + 1];
        for (x, w) in nodes.iter().zip(weights) {
            let mut p = w.clone();
            for s in m.iter_mut() {
                *s = s.clone() + p.clone();
                p = p * x.clone();
            }
        }
        Self::new(m)
    }

    pub fn moments(&self) -> &[T] {
        &self.moments
    }

    pub fn degree(&self) -> usize {
        (self.moments.len() - 1) / 2
    }

    /// `s_k -> c s_k`.
    pub fn scaled(&self, c: &T) -> Result<Self> {
        Self::new(self.moments.iter().map(|s| s.clone() * c.clone()).collect())
    }

    /// Ratio of the largest to the smallest nonzero `|s_k|`.
    pub fn dynamic_range(&self) -> f64 {
        let abs: Vec<f64> = self
            .moments
            .iter()
            .map(|s| s.to_f64().abs())
            .filter(|&v| v > 0.0)
            .collect();
        let hi = abs.iter().copied().fold(0.0, f64::max);
        let lo = abs.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }

    /// `sum_k c_k s_k`.
    pub fn eval(&self, p: &Polynomial<T>) -> Result<T> {
        let max = self.moments.len() - 1;
        if let Some(deg) = p.degree() {
            if deg > max {
                return Err(Error::DegreeOverflow { degree: deg, max });
            }
        }
        Ok(p
            .coeffs()
            .iter()
            .zip(&self.moments)
            .fold(T::zero(), |acc, (c, s)| acc + c.clone() * s.clone()))
    }

    pub fn convert<U: Scalar>(&self) -> MomentSequence<U> {
        MomentSequence {
            moments: self.moments.iter().map(|s| U::parse_decimal(&s.to_decimal_string()).unwrap_or_else(|| U::from_f64(s.to_f64()))).collect(),
        }
    }

    pub fn to_f64(&self) -> MomentSequence<f64> {
        MomentSequence {
            moments: self.moments.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Parses `{"degree": d, "moments": [...]}`; entries may be numbers or
    /// decimal strings.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::InvalidInput("moment file must be a JSON object".into()))?;
        let list = obj
            .get("moments")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("missing \"moments\" array".into()))?;
        let moments = list
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let parsed = match e {
                    Value::Number(n) => T::parse_decimal(&n.to_string()),
                    Value::String(s) => T::parse_decimal(s.trim()),
                    _ => None,
                };
                parsed.ok_or_else(|| Error::InvalidInput(format!("moment {} is not a number: {}", k, e)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(d) = obj.get("degree") {
            let d = d
                .as_u64()
                .ok_or_else(|| Error::InvalidInput("\"degree\" must be a nonnegative integer".into()))?;
            if moments.len() as u64 != 2 * d + 1 {
                return Err(Error::InvalidInput(format!(
                    "degree {} needs {} moments, got {}",
                    d,
                    2 * d + 1,
                    moments.len()
                )));
            }
        }
        Self::new(moments)
    }

    /// `{"degree", "moments"}` with decimal strings for non-f64 modes.
    pub fn to_json(&self) -> Value {
        let moments = if T::precision_tag() == "f64" {
            self.moments.iter().map(|s| Value::from(s.to_f64())).collect()
        } else {
            self.moments
                .iter()
                .map(|s| Value::from(s.to_decimal_string()))
                .collect()
        };
        serde_json::json!({ "degree": self.degree(), "moments": Value::Array(moments) })
    }
}

impl<T: Real> MomentSequence<T> {
    /// Log-normal density `exp(-(ln x)^2)` on `(0, inf)`, normalized to
    /// `s_0 = 1`: `s_k = exp((k^2 + 2k) / 4)`.
    pub fn lognormal(d: usize) -> Self {
        let four = T::from_i64(4);
        let m = (0..=2 * d as i64)
            .map(|k| (T::from_i64(k * k + 2 * k) / four.clone()).exp())
            .collect();
        MomentSequence { moments: m }
    }
}

/// `sum_i w_i f(x_i)` with nonnegative weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuad")]
pub struct QuadFunctional {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawQuad {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawQuad> for QuadFunctional {
    type Error = Error;
    fn try_from(r: RawQuad) -> Result<Self> {
        QuadFunctional::new(r.nodes, r.weights)
    }
}

impl QuadFunctional {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidInput("quadrature without nodes".into()));
        }
        if nodes.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite node or weight".into()));
        }
        if let Some(i) = weights.iter().position(|&w| w < 0.0) {
            return Err(Error::InvalidInput(format!(
                "weight {} is negative ({})",
                i, weights[i]
            )));
        }
        Ok(QuadFunctional { nodes, weights })
    }

    pub fn point_mass(a: f64) -> Self {
        QuadFunctional {
            nodes: vec![a],
            weights: vec![1.0],
        }
    }

    /// Equal weights summing to one on the given nodes.
    pub fn uniform(nodes: &[f64]) -> Result<Self> {
        let w = 1.0 / nodes.len() as f64;
        Self::new(nodes.to_vec(), vec![w; nodes.len()])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn eval_poly(&self, p: &Polynomial) -> f64 {
        self.eval_fn(|x| p.eval(&x))
    }

    /// Piecewise-linear interpolation of `f` at the nodes.
    pub fn eval_sampled(&self, f: &SampledFunction) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f.interpolate(x)?;
        }
        Ok(acc)
    }

    pub fn moments(&self, d: usize) -> Result<MomentSequence> {
        MomentSequence::from_quadrature(&self.nodes, &self.weights, d)
    }
}

/// Common surface of the functionals used by the checks below.
pub trait PositiveFunctional {
    fn apply_poly(&self, p: &Polynomial) -> Result<f64>;
    fn apply_sampled(&self, f: &SampledFunction) -> Result<f64>;
    /// Smallest interval carrying the functional, when it is known.
    fn support(&self) -> Option<Interval>;
}

impl PositiveFunctional for QuadFunctional {
    fn apply_poly(&self, p: &Polynomial) -> Result<f64> {
        Ok(self.eval_poly(p))
    }

    fn apply_sampled(&self, f: &SampledFunction) -> Result<f64> {
        self.eval_sampled(f)
    }

    fn support(&self) -> Option<Interval> {
        let lo = self.nodes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Interval { lo, hi })
    }
}

impl PositiveFunctional for MomentSequence<f64> {
    fn apply_poly(&self, p: &Polynomial) -> Result<f64> {
        self.eval(p)
    }

    fn apply_sampled(&self, _: &SampledFunction) -> Result<f64> {
        Err(Error::InvalidInput(
            "a moment sequence only acts on polynomials".into(),
        ))
    }

    fn support(&self) -> Option<Interval> {
        None
    }
}

/// The Riesz ideal in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdealSpec {
    AllContinuous,
    UniformlyBounded,
    /// Dominated by a polynomial of at most this degree.
    PolyBounded(usize),
}

impl fmt::Display for IdealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealSpec::AllContinuous => write!(f, "all"),
            IdealSpec::UniformlyBounded => write!(f, "bounded"),
            IdealSpec::PolyBounded(d) => write!(f, "poly:{}", d),
        }
    }
}

impl FromStr for IdealSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "all" => Ok(IdealSpec::AllContinuous),
            "bounded" => Ok(IdealSpec::UniformlyBounded),
            other => other
                .strip_prefix("poly:")
                .and_then(|d| d.parse().ok())
                .map(IdealSpec::PolyBounded)
                .ok_or_else(|| {
                    Error::InvalidInput(format!("unknown ideal {:?}; use all, bounded or poly:D", s))
                }),
        }
    }
}

impl Serialize for IdealSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub verdict: Verdict,
    /// `Phi(f_1), ..., Phi(f_K)`.
    pub trace: Vec<f64>,
    pub nonincreasing: bool,
    pub minimum: f64,
}

/// Checks that `Phi(f_k)` decreases to within `tol` of zero on a validated
/// decreasing sequence with pointwise infimum zero (up to `grid_tol`).
pub fn strict_continuity_check<F: PositiveFunctional + ?Sized>(
    phi: &F,
    fks: &SampledSequence,
    tol: f64,
    grid_tol: f64,
) -> Result<ContinuityReport> {
    let all = fks.all_indices();
    fks.check_nonincreasing(&all)?;
    fks.check_infimum_zero(&all, grid_tol)?;
    let trace = fks
        .members()
        .iter()
        .map(|f| phi.apply_sampled(f))
        .collect::<Result<Vec<_>>>()?;
    let nonincreasing = trace.windows(2).all(|w| w[1] <= w[0]);
    let minimum = trace.iter().copied().fold(f64::INFINITY, f64::min);
    let verdict = if nonincreasing && minimum <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ContinuityReport {
        verdict,
        trace,
        nonincreasing,
        minimum,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductValue {
    /// Exponent of each generator in the product.
    pub exponents: Vec<usize>,
    pub degree: usize,
    pub phi: f64,
    pub psi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatteryEntry {
    pub name: String,
    pub phi: f64,
    pub psi: f64,
    pub discrepancy: f64,
    /// `|phi(r) - psi(r)|` for the lattice approximant `r`, when it exists.
    pub lattice_discrepancy: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoincidenceReport {
    pub agree: bool,
    pub checked: Vec<ProductValue>,
    pub first_disagreement: Option<ProductValue>,
    pub battery: Vec<BatteryEntry>,
    pub max_battery_discrepancy: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoincidenceOptions {
    /// Relative tolerance for declaring two values equal.
    pub tol: f64,
    pub battery_points: usize,
    pub battery_eps: f64,
}

impl Default for CoincidenceOptions {
    fn default() -> Self {
        CoincidenceOptions {
            tol: 1e-10,
            battery_points: 201,
            battery_eps: 1e-2,
        }
    }
}

/// Products of the non-constant generators with total degree at most
/// `maxdeg`, including the empty product, in (degree, exponent) order.
fn generator_products(gens: &[Polynomial], maxdeg: usize) -> Vec<(Vec<usize>, Polynomial)> {
    let n = gens.len();
    let mut out = vec![(vec![0; n], Polynomial::one())];
    let mut frontier = vec![(vec![0; n], Polynomial::one())];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (exps, p) in &frontier {
            // extend only at or after the last used generator to avoid repeats
            let start = exps.iter().rposition(|&e| e > 0).unwrap_or(0);
            for (k, g) in gens.iter().enumerate().skip(start) {
                let Some(dg) = g.degree().filter(|&d| d > 0) else { continue };
                let dp = p.degree().unwrap_or(0);
                if dp + dg > maxdeg {
                    continue;
                }
                let mut e = exps.clone();
                e[k] += 1;
                next.push((e, p * g));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.sort_by(|a, b| {
        let da = a.1.degree().unwrap_or(0);
        let db = b.1.degree().unwrap_or(0);
        da.cmp(&db).then_with(|| b.0.cmp(&a.0))
    });
    out
}

/// Compares two functionals on the algebra generated by `gens` up to degree
/// `testdeg`; on agreement, also on a battery of non-polynomial functions.
///
/// Separation is only meaningful on grid nodes here; nothing is claimed
/// about the continuum.
pub fn coincidence_demo<F, G>(
    phi: &F,
    psi: &G,
    gens: &[Polynomial],
    testdeg: usize,
    opts: CoincidenceOptions,
) -> Result<CoincidenceReport>
where
    F: PositiveFunctional + ?Sized,
    G: PositiveFunctional + ?Sized,
{
    let mut checked = Vec::new();
    for (exponents, p) in generator_products(gens, testdeg) {
        let a = phi.apply_poly(&p)?;
        let b = psi.apply_poly(&p)?;
        let pv = ProductValue {
            exponents,
            degree: p.degree().unwrap_or(0),
            phi: a,
            psi: b,
        };
        let scale = 1.0f64.max(a.abs()).max(b.abs());
        let differ = (a - b).abs() > opts.tol * scale;
        checked.push(pv.clone());
        if differ {
            return Ok(CoincidenceReport {
                agree: false,
                checked,
                first_disagreement: Some(pv),
                battery: Vec::new(),
                max_battery_discrepancy: None,
            });
        }
    }
    let battery = match (phi.support(), psi.support()) {
        (Some(s), Some(t)) => run_battery(phi, psi, gens, s, t, opts)?,
        _ => Vec::new(),
    };
    let max_battery_discrepancy = battery
        .iter()
        .map(|e| e.discrepancy)
        .reduce(f64::max);
    Ok(CoincidenceReport {
        agree: true,
        checked,
        first_disagreement: None,
        battery,
        max_battery_discrepancy,
    })
}

fn run_battery<F, G>(
    phi: &F,
    psi: &G,
    gens: &[Polynomial],
    s: Interval,
    t: Interval,
    opts: CoincidenceOptions,
) -> Result<Vec<BatteryEntry>>
where
    F: PositiveFunctional + ?Sized,
    G: PositiveFunctional + ?Sized,
{
    let (mut lo, mut hi) = (s.lo.min(t.lo), s.hi.max(t.hi));
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let mid = 0.5 * (lo + hi);
    let grid = uniform_grid(lo, hi, opts.battery_points.max(2));
    let mut basis = vec![SampledFunction::constant(&grid, 1.0)?];
    for g in gens {
        basis.push(SampledFunction::from_fn(&grid, |x| g.eval(&x))?);
    }
    let compact = Interval { lo, hi };
    let tests: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
        ("abs_centered", Box::new(move |x: f64| (x - mid).abs())),
        ("gaussian_bump", Box::new(move |x: f64| (-(x - mid) * (x - mid)).exp())),
        ("cauchy_kernel", Box::new(move |x: f64| 1.0 / (1.0 + (x - mid) * (x - mid)))),
    ];
    let mut out = Vec::new();
    for (name, f) in tests.iter() {
        let target = SampledFunction::from_fn(&grid, f)?;
        let a = phi.apply_sampled(&target)?;
        let b = psi.apply_sampled(&target)?;
        let (lattice_discrepancy, note) =
            match sw_lattice_approx(&target, &basis, &compact, opts.battery_eps, SwOptions::default()) {
                Ok(sw) => {
                    let r = sw.expr.eval(&basis)?;
                    (Some((phi.apply_sampled(&r)? - psi.apply_sampled(&r)?).abs()), None)
                }
                Err(e) => (None, Some(e.to_string())),
            };
        out.push(BatteryEntry {
            name: name.to_string(),
            phi: a,
            psi: b,
            discrepancy: (a - b).abs(),
            lattice_discrepancy,
            note,
        });
    }
    Ok(out)
}
