//! File readers for the JSON inputs.

use std::path::Path;

use serde_json::Value;

use crate::approx::{SampledFunction, SampledSequence};
use crate::error::{Error, Result};
use crate::functionals::{MomentSequence, QuadFunctional};
use crate::poly::Polynomial;
use crate::scalar::Scalar;

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| Error::Json(format!("{}: {}", path.display(), e)))
}

pub fn read_moments<T: Scalar>(path: &Path) -> Result<MomentSequence<T>> {
    MomentSequence::from_json(&read_json(path)?)
}

pub fn read_quadrature(path: &Path) -> Result<QuadFunctional> {
    serde_json::from_value(read_json(path)?).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn read_sampled(path: &Path) -> Result<SampledFunction> {
    serde_json::from_value(read_json(path)?).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// `{"members": [{"grid", "values"}, ...], "dominator"?: {...}}`, or the
/// compact form `{"grid": [...], "members": [[...], ...], "dominator"?: [...]}`.
pub fn parse_sequence(v: &Value) -> Result<SampledSequence> {
    let compact = v.get("grid").and_then(Value::as_array).is_some();
    if !compact {
        return serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(e.to_string()));
    }
    let grid = number_list(&v["grid"], "grid")?;
    let members = v
        .get("members")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidInput("missing \"members\" array".into()))?
        .iter()
        .map(|m| SampledFunction::new(grid.clone(), number_list(m, "member")?))
        .collect::<Result<Vec<_>>>()?;
    let seq = SampledSequence::new(members)?;
    match v.get("dominator") {
        None | Some(Value::Null) => Ok(seq),
        Some(b) => seq.with_dominator(SampledFunction::new(grid, number_list(b, "dominator")?)?),
    }
}

pub fn read_sequence(path: &Path) -> Result<SampledSequence> {
    parse_sequence(&read_json(path)?)
}

/// Generators as a list whose entries are sampled functions
/// `{"grid", "values"}` or polynomials `{"poly": [c_0, c_1, ...]}`;
/// polynomials are sampled on `grid`. A bare object `{"gens": [...]}` is
/// accepted too.
pub fn parse_generators(v: &Value, grid: &[f64]) -> Result<Vec<SampledFunction>> {
    let list = v
        .as_array()
        .or_else(|| v.get("gens").and_then(Value::as_array))
        .ok_or_else(|| Error::InvalidInput("generators must be a JSON array".into()))?;
    list.iter()
        .enumerate()
        .map(|(i, g)| {
            if let Some(c) = g.get("poly") {
                let p = Polynomial::from_f64s(&number_list(c, "poly")?);
                SampledFunction::from_fn(grid, |x| p.eval(&x))
            } else {
                let f: SampledFunction =
                    serde_json::from_value(g.clone()).map_err(|e| Error::InvalidInput(format!("generator {}: {}", i, e)))?;
                if f.grid() != grid {
                    return Err(Error::GridMismatch(format!("generator {} is not on the target grid", i)));
                }
                Ok(f)
            }
        })
        .collect()
}

pub fn read_generators(path: &Path, grid: &[f64]) -> Result<Vec<SampledFunction>> {
    parse_generators(&read_json(path)?, grid)
}

fn number_list(v: &Value, what: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidInput(format!("{} must be an array of numbers", what)))?
        .iter()
        .map(|e| {
            e.as_f64()
                .ok_or_else(|| Error::InvalidInput(format!("{} entry is not a number: {}", what, e)))
        })
        .collect()
}
