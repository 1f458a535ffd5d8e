use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInput(format!("bad interval [{}, {}]", lo, hi)));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other` lies in the interior of `self`.
    pub fn contains_in_interior(&self, other: &Interval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }
}

/// A function known through its values on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSampled")]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSampled {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawSampled> for SampledFunction {
    type Error = Error;
    fn try_from(raw: RawSampled) -> Result<Self> {
        SampledFunction::new(raw.grid, raw.values)
    }
}

/// `n` equispaced points from `a` to `b` inclusive.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidInput("empty grid".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = grid.iter().chain(values.iter()).find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample {}", bad)));
        }
        if let Some(w) = grid.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "grid not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().map(|&x| f(x)).collect())
    }

    pub fn constant(grid: &[f64], c: f64) -> Result<Self> {
        Self::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn domain(&self) -> Interval {
        Interval {
            lo: self.grid[0],
            hi: self.grid[self.grid.len() - 1],
        }
    }

    pub fn same_grid(&self, other: &SampledFunction) -> bool {
        self.grid == other.grid
    }

    /// Pointwise image under `f` on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another function on the same grid.
    pub fn zip_with(
        &self,
        other: &SampledFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<SampledFunction> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("pointwise operation on distinct grids".into()));
        }
        Ok(SampledFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Indices of grid points inside `k`.
    pub fn indices_in(&self, k: &Interval) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| k.contains(self.grid[i])).collect()
    }

    /// Piecewise-linear interpolation; exact at grid points.
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let dom = self.domain();
        if !dom.contains(x) {
            return Err(Error::Domain {
                x,
                lo: dom.lo,
                hi: dom.hi,
            });
        }
        let j = self.grid.partition_point(|&g| g < x);
        if self.grid[j] == x {
            return Ok(self.values[j]);
        }
        let (x0, x1) = (self.grid[j - 1], self.grid[j]);
        let t = (x - x0) / (x1 - x0);
        // convex-combination form keeps interpolation monotone in the samples
        Ok((1.0 - t) * self.values[j - 1] + t * self.values[j])
    }

    pub fn max_abs_on(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.values[i].abs()).fold(0.0, f64::max)
    }
}

/// Members `f_1, f_2, ...` on one common grid, optionally with a dominating
/// bound `b` satisfying `|f_n| <= b` pointwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct SampledSequence {
    members: Vec<SampledFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dominator: Option<SampledFunction>,
}

#[derive(Deserialize)]
struct RawSequence {
    members: Vec<SampledFunction>,
    #[serde(default)]
    dominator: Option<SampledFunction>,
}

impl TryFrom<RawSequence> for SampledSequence {
    type Error = Error;
    fn try_from(raw: RawSequence) -> Result<Self> {
        let seq = SampledSequence::new(raw.members)?;
        match raw.dominator {
            Some(b) => seq.with_dominator(b),
            None => Ok(seq),
        }
    }
}

impl SampledSequence {
    pub fn new(members: Vec<SampledFunction>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidInput("empty sequence".into()));
        };
        if let Some(k) = members.iter().position(|m| !m.same_grid(first)) {
            return Err(Error::GridMismatch(format!(
                "member {} does not share the grid of member 1",
                k + 1
            )));
        }
        Ok(SampledSequence {
            members,
            dominator: None,
        })
    }

    /// Builds `f_k` for `k = 1..=count` by sampling `f(k, x)`.
    pub fn from_fn(grid: &[f64], count: usize, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let members = (1..=count)
            .map(|k| SampledFunction::from_fn(grid, |x| f(k, x)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn with_dominator(mut self, b: SampledFunction) -> Result<Self> {
        if !b.same_grid(&self.members[0]) {
            return Err(Error::GridMismatch("dominator grid differs from the members".into()));
        }
        for (n, m) in self.members.iter().enumerate() {
            for (i, (&v, &bound)) in m.values().iter().zip(b.values()).enumerate() {
                if v.abs() > bound {
                    return Err(Error::InvalidInput(format!(
                        "member {} exceeds the dominator at x = {}",
                        n + 1,
                        b.grid()[i]
                    )));
                }
            }
        }
        self.dominator = Some(b);
        Ok(self)
    }

    pub fn members(&self) -> &[SampledFunction] {
        &self.members
    }

    pub fn dominator(&self) -> Option<&SampledFunction> {
        self.dominator.as_ref()
    }

    pub fn grid(&self) -> &[f64] {
        self.members[0].grid()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Checks `f_{k+1} <= f_k` at the given grid indices. The error names the
    /// 1-based index `k` of the first member that increases and the grid point.
    pub fn check_nonincreasing(&self, idx: &[usize]) -> Result<()> {
        for (k, pair) in self.members.windows(2).enumerate() {
            for &i in idx {
                if pair[1].values()[i] > pair[0].values()[i] {
                    return Err(Error::NonMonotone {
                        k: k + 2,
                        x: self.grid()[i],
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks that the pointwise infimum, i.e. the last member, is within
    /// `tol` of zero at the given indices.
    pub fn check_infimum_zero(&self, idx: &[usize], tol: f64) -> Result<()> {
        for &i in idx {
            let smallest = self
                .members
                .iter()
                .map(|m| m.values()[i])
                .fold(f64::INFINITY, f64::min);
            if smallest > tol {
                return Err(Error::InfimumNotReached {
                    x: self.grid()[i],
                    value: smallest,
                    tol,
                });
            }
        }
        Ok(())
    }

    pub fn all_indices(&self) -> Vec<usize> {
        (0..self.grid().len()).collect()
    }
}
