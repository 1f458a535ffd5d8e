use serde::Serialize;

use super::{Interval, SampledFunction, SampledSequence};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiniIndex {
    /// Minimal 1-based index with `max f_k <= eps` on the compact.
    pub k: usize,
    pub max_at_k: f64,
    /// `max f_{k-1}` on the compact; `None` when `k = 1`.
    pub max_before: Option<f64>,
}

/// Minimal `k` with `f_k(x) <= eps` for every grid point `x` in `compact`.
///
/// The members must be pointwise nonincreasing on `compact`. If even the last
/// member exceeds `eps` the sequence is reported as exhausted.
pub fn dini_index(fks: &SampledSequence, compact: &Interval, eps: f64) -> Result<DiniIndex> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {}", eps)));
    }
    let idx = fks.members()[0].indices_in(compact);
    if idx.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no grid point lies in [{}, {}]",
            compact.lo, compact.hi
        )));
    }
    fks.check_nonincreasing(&idx)?;
    let maxima: Vec<f64> = fks
        .members()
        .iter()
        .map(|f| idx.iter().map(|&i| f.values()[i]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    match maxima.iter().position(|&m| m <= eps) {
        Some(pos) => Ok(DiniIndex {
            k: pos + 1,
            max_at_k: maxima[pos],
            max_before: pos.checked_sub(1).map(|p| maxima[p]),
        }),
        None => Err(Error::SequenceExhausted {
            final_max: maxima[maxima.len() - 1],
            eps,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiniOptions {
    /// The weight must exceed this at both ends of the sampled window.
    pub escape_threshold: f64,
}

impl Default for DiniOptions {
    fn default() -> Self {
        DiniOptions {
            escape_threshold: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiniDominator {
    pub h: SampledFunction,
    /// For each requested eps, the minimal 1-based `k` with `f_k <= eps h`.
    pub ks: Vec<usize>,
}

/// Builds `h = 1 + p f_1` and, for every `eps`, the minimal `k` with
/// `f_k <= eps h` on the whole grid.
pub fn dini_dominator(
    fks: &SampledSequence,
    p: &SampledFunction,
    eps_list: &[f64],
    opts: DiniOptions,
) -> Result<DiniDominator> {
    if !p.same_grid(&fks.members()[0]) {
        return Err(Error::GridMismatch("weight and sequence use different grids".into()));
    }
    if let Some(i) = p.values().iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "weight is negative at x = {}",
            p.grid()[i]
        )));
    }
    let last = p.len() - 1;
    for i in [0, last] {
        if !(p.values()[i] > opts.escape_threshold) {
            return Err(Error::NotProper {
                x: p.grid()[i],
                boundary_value: p.values()[i],
                threshold: opts.escape_threshold,
            });
        }
    }
    fks.check_nonincreasing(&fks.all_indices())?;

    let f1 = &fks.members()[0];
    let h = p.zip_with(f1, |pv, fv| 1.0 + pv * fv)?;
    let ks = eps_list
        .iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return Err(Error::InvalidInput(format!("eps must be positive, got {}", eps)));
            }
            let fits = |f: &SampledFunction| {
                f.values()
                    .iter()
                    .zip(h.values())
                    .all(|(&fv, &hv)| fv <= eps * hv)
            };
            match fks.members().iter().position(fits) {
                Some(pos) => Ok(pos + 1),
                None => {
                    let tail = &fks.members()[fks.len() - 1];
                    let final_max = tail
                        .values()
                        .iter()
                        .zip(h.values())
                        .map(|(&fv, &hv)| fv / hv)
                        .fold(f64::NEG_INFINITY, f64::max);
                    Err(Error::SequenceExhausted { final_max, eps })
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiniDominator { h, ks })
}
