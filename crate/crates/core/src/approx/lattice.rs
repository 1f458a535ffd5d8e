//! Lattice expressions over sampled generators and the constructive
//! Stone–Weierstraß approximation on grid compacts.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::{Interval, SampledFunction};
use crate::error::{Error, Result};

/// Expression tree of linear combinations, maxima and minima of generators.
#[derive(Clone, Debug, PartialEq)]
pub enum LatticeExpr {
    Lin { coeffs: Vec<f64>, gens: Vec<usize> },
    Max(Vec<LatticeExpr>),
    Min(Vec<LatticeExpr>),
}

impl LatticeExpr {
    pub fn lin(coeffs: Vec<f64>, gens: Vec<usize>) -> Self {
        LatticeExpr::Lin { coeffs, gens }
    }

    /// `Max` of the children, collapsing a single child.
    pub fn max_of(mut children: Vec<LatticeExpr>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            LatticeExpr::Max(children)
        }
    }

    pub fn min_of(mut children: Vec<LatticeExpr>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            LatticeExpr::Min(children)
        }
    }

    /// Value at grid index `i`.
    pub fn eval_at(&self, gens: &[SampledFunction], i: usize) -> f64 {
        match self {
            LatticeExpr::Lin { coeffs, gens: idx } => coeffs
                .iter()
                .zip(idx)
                .map(|(c, &g)| c * gens[g].values()[i])
                .sum(),
            LatticeExpr::Max(ch) => ch
                .iter()
                .map(|c| c.eval_at(gens, i))
                .fold(f64::NEG_INFINITY, f64::max),
            LatticeExpr::Min(ch) => ch
                .iter()
                .map(|c| c.eval_at(gens, i))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Evaluates on the full common grid of `gens`.
    pub fn eval(&self, gens: &[SampledFunction]) -> Result<SampledFunction> {
        self.audit(gens.len())?;
        let grid = gens
            .first()
            .ok_or_else(|| Error::InvalidInput("no generators".into()))?
            .grid();
        if gens.iter().any(|g| g.grid() != grid) {
            return Err(Error::GridMismatch("generators use different grids".into()));
        }
        let values = (0..grid.len()).map(|i| self.eval_at(gens, i)).collect();
        SampledFunction::new(grid.to_vec(), values)
    }

    pub fn node_count(&self) -> usize {
        match self {
            LatticeExpr::Lin { .. } => 1,
            LatticeExpr::Max(ch) | LatticeExpr::Min(ch) => {
                1 + ch.iter().map(LatticeExpr::node_count).sum::<usize>()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LatticeExpr::Lin { .. } => 1,
            LatticeExpr::Max(ch) | LatticeExpr::Min(ch) => {
                1 + ch.iter().map(LatticeExpr::depth).max().unwrap_or(0)
            }
        }
    }

    /// Structural audit: leaves reference existing generators with matching
    /// coefficient counts, and every max/min node has at least two children.
    pub fn audit(&self, n_gens: usize) -> Result<()> {
        match self {
            LatticeExpr::Lin { coeffs, gens } => {
                if coeffs.len() != gens.len() || gens.is_empty() {
                    return Err(Error::InvalidInput(
                        "linear leaf needs one coefficient per generator".into(),
                    ));
                }
                if let Some(&g) = gens.iter().find(|&&g| g >= n_gens) {
                    return Err(Error::InvalidInput(format!(
                        "generator index {} out of range ({} generators)",
                        g, n_gens
                    )));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput("non-finite coefficient".into()));
                }
                Ok(())
            }
            LatticeExpr::Max(ch) | LatticeExpr::Min(ch) => {
                if ch.len() < 2 {
                    return Err(Error::InvalidInput("max/min node with fewer than two children".into()));
                }
                ch.iter().try_for_each(|c| c.audit(n_gens))
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            LatticeExpr::Lin { coeffs, gens } => json!(["lin", coeffs, gens]),
            LatticeExpr::Max(ch) | LatticeExpr::Min(ch) => {
                let tag = if matches!(self, LatticeExpr::Max(_)) { "max" } else { "min" };
                let mut arr = vec![Value::from(tag)];
                arr.extend(ch.iter().map(LatticeExpr::to_json));
                Value::Array(arr)
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("malformed lattice expression: {}", v));
        let arr = v.as_array().ok_or_else(bad)?;
        let tag = arr.first().and_then(Value::as_str).ok_or_else(bad)?;
        match tag {
            "lin" => {
                if arr.len() != 3 {
                    return Err(bad());
                }
                let coeffs = arr[1]
                    .as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|c| c.as_f64().ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()?;
                let gens = arr[2]
                    .as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|g| g.as_u64().map(|g| g as usize).ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LatticeExpr::Lin { coeffs, gens })
            }
            "max" | "min" => {
                let ch = arr[1..]
                    .iter()
                    .map(LatticeExpr::from_json)
                    .collect::<Result<Vec<_>>>()?;
                Ok(if tag == "max" {
                    LatticeExpr::Max(ch)
                } else {
                    LatticeExpr::Min(ch)
                })
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for LatticeExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        LatticeExpr::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwOptions {
    /// Maximum number of expression nodes created during construction.
    pub node_budget: usize,
}

impl Default for SwOptions {
    fn default() -> Self {
        SwOptions { node_budget: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwApproximation {
    pub expr: LatticeExpr,
    /// `max |target - r|` over the grid points in the compact.
    pub sup_error: f64,
    pub nodes: usize,
    pub points: usize,
}

struct Builder<'a> {
    target: &'a [f64],
    gens: &'a [SampledFunction],
    pts: Vec<usize>,
    eps: f64,
    budget: usize,
    created: usize,
}

impl Builder<'_> {
    fn g(&self, k: usize, i: usize) -> f64 {
        self.gens[k].values()[i]
    }

    fn spend(&mut self, n: usize) -> Result<()> {
        self.created += n;
        if self.created > self.budget {
            return Err(Error::NodeBudgetExceeded {
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn grid_x(&self, i: usize) -> f64 {
        self.gens[0].grid()[i]
    }

    /// Multiple of the generator with the largest magnitude at `x`.
    fn s_x(&mut self, x: usize) -> Result<LatticeExpr> {
        let mut best = 0;
        for k in 1..self.gens.len() {
            if self.g(k, x).abs() > self.g(best, x).abs() {
                best = k;
            }
        }
        if self.g(best, x) == 0.0 {
            return Err(Error::Vanishing { x: self.grid_x(x) });
        }
        self.spend(1)?;
        Ok(LatticeExpr::lin(vec![self.target[x] / self.g(best, x)], vec![best]))
    }

    /// Combination of two generators matching the target at `x` and `y`.
    fn r_xy(&mut self, x: usize, y: usize) -> Result<LatticeExpr> {
        let n = self.gens.len();
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..n {
            for b in a + 1..n {
                let det = self.g(a, x) * self.g(b, y) - self.g(b, x) * self.g(a, y);
                if best.is_none_or(|(_, _, d)| det.abs() > d.abs()) {
                    best = Some((a, b, det));
                }
            }
        }
        let (tx, ty) = (self.target[x], self.target[y]);
        let scale = (0..n)
            .map(|k| self.g(k, x).abs().max(self.g(k, y).abs()))
            .fold(0.0, f64::max);
        if let Some((a, b, det)) = best {
            if det.abs() > 1e-12 * scale * scale {
                let ca = (tx * self.g(b, y) - ty * self.g(b, x)) / det;
                let cb = (self.g(a, x) * ty - self.g(a, y) * tx) / det;
                self.spend(1)?;
                return Ok(LatticeExpr::lin(vec![ca, cb], vec![a, b]));
            }
        }
        // no invertible pair; a single generator may still interpolate
        for k in 0..n {
            let gx = self.g(k, x);
            if gx != 0.0 {
                let c = tx / gx;
                if (c * self.g(k, y) - ty).abs() <= 1e-12 * (1.0 + ty.abs()) {
                    self.spend(1)?;
                    return Ok(LatticeExpr::lin(vec![c], vec![k]));
                }
            }
        }
        Err(Error::SeparationFailure {
            x: self.grid_x(x),
            y: self.grid_x(y),
        })
    }

    /// `r_x >= target - eps` on the compact with `r_x(x) = target(x)`.
    fn r_x(&mut self, x: usize) -> Result<LatticeExpr> {
        let mut parts = vec![self.s_x(x)?];
        let mut cur: Vec<f64> = self.pts.iter().map(|&i| parts[0].eval_at(self.gens, i)).collect();
        loop {
            let worst = self
                .pts
                .iter()
                .enumerate()
                .map(|(j, &i)| (j, self.target[i] - self.eps - cur[j]))
                .filter(|&(_, v)| v > 0.0)
                .fold(None, |acc: Option<(usize, f64)>, c| match acc {
                    Some(a) if a.1 >= c.1 => Some(a),
                    _ => Some(c),
                });
            let Some((j, _)) = worst else { break };
            let y = self.pts[j];
            let r = self.r_xy(x, y)?;
            for (jj, &i) in self.pts.iter().enumerate() {
                cur[jj] = cur[jj].max(r.eval_at(self.gens, i));
            }
            parts.push(r);
        }
        let expr = LatticeExpr::max_of(parts);
        if matches!(expr, LatticeExpr::Max(_)) {
            self.spend(1)?;
        }
        Ok(expr)
    }

    fn build(&mut self) -> Result<LatticeExpr> {
        let mut parts: Vec<LatticeExpr> = Vec::new();
        let mut cur = vec![f64::INFINITY; self.pts.len()];
        loop {
            let worst = self
                .pts
                .iter()
                .enumerate()
                .map(|(j, &i)| (j, cur[j] - self.target[i] - self.eps))
                .filter(|&(_, v)| v > 0.0)
                .fold(None, |acc: Option<(usize, f64)>, c| match acc {
                    Some(a) if a.1 >= c.1 => Some(a),
                    _ => Some(c),
                });
            let Some((j, _)) = worst else { break };
            let r = self.r_x(self.pts[j])?;
            for (jj, &i) in self.pts.iter().enumerate() {
                cur[jj] = cur[jj].min(r.eval_at(self.gens, i));
            }
            parts.push(r);
        }
        Ok(LatticeExpr::min_of(parts))
    }
}

/// Drops max/min children whose removal leaves the node's values on `pts`
/// unchanged, bottom-up.
fn prune(expr: LatticeExpr, gens: &[SampledFunction], pts: &[usize]) -> LatticeExpr {
    let (is_max, children) = match expr {
        LatticeExpr::Lin { .. } => return expr,
        LatticeExpr::Max(ch) => (true, ch),
        LatticeExpr::Min(ch) => (false, ch),
    };
    let children: Vec<LatticeExpr> = children.into_iter().map(|c| prune(c, gens, pts)).collect();
    let vals: Vec<Vec<f64>> = children
        .iter()
        .map(|c| pts.iter().map(|&i| c.eval_at(gens, i)).collect())
        .collect();
    let combine = |a: f64, b: f64| if is_max { a.max(b) } else { a.min(b) };
    let id = if is_max { f64::NEG_INFINITY } else { f64::INFINITY };
    let full: Vec<f64> = (0..pts.len())
        .map(|p| vals.iter().map(|v| v[p]).fold(id, combine))
        .collect();
    let mut keep = vec![true; children.len()];
    for k in 0..children.len() {
        if keep.iter().filter(|&&b| b).count() <= 1 {
            break;
        }
        keep[k] = false;
        let same = (0..pts.len()).all(|p| {
            let v = vals
                .iter()
                .zip(&keep)
                .filter(|(_, &kp)| kp)
                .map(|(v, _)| v[p])
                .fold(id, combine);
            v == full[p]
        });
        if !same {
            keep[k] = true;
        }
    }
    let kept: Vec<LatticeExpr> = children
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect();
    if is_max {
        LatticeExpr::max_of(kept)
    } else {
        LatticeExpr::min_of(kept)
    }
}

/// Lattice expression `r` in the generators with `|target - r| <= eps` at
/// every grid point of `compact`.
///
/// Follows the classical proof: two-point interpolants `r_{x,y}`, their
/// maxima `r_x` over a greedy cover, and a minimum over a second cover.
pub fn sw_lattice_approx(
    target: &SampledFunction,
    gens: &[SampledFunction],
    compact: &Interval,
    eps: f64,
    opts: SwOptions,
) -> Result<SwApproximation> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {}", eps)));
    }
    if gens.is_empty() {
        return Err(Error::InvalidInput("no generators".into()));
    }
    if let Some(k) = gens.iter().position(|g| !g.same_grid(target)) {
        return Err(Error::GridMismatch(format!(
            "generator {} does not share the target grid",
            k
        )));
    }
    let pts = target.indices_in(compact);
    if pts.is_empty() {
        return Err(Error::InvalidInput("no grid point lies in the compact".into()));
    }
    let mut b = Builder {
        target: target.values(),
        gens,
        pts: pts.clone(),
        eps,
        budget: opts.node_budget,
        created: 0,
    };
    let raw = b.build()?;
    let expr = prune(raw, gens, &pts);
    let sup_error = pts
        .iter()
        .map(|&i| (target.values()[i] - expr.eval_at(gens, i)).abs())
        .fold(0.0, f64::max);
    Ok(SwApproximation {
        nodes: expr.node_count(),
        expr,
        sup_error,
        points: pts.len(),
    })
}
