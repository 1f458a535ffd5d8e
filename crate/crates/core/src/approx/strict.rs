//! Strict convergence of sampled sequences relative to a Riesz ideal, checked
//! along two routes: the running-sup sequence of the definition and the
//! dominator-plus-uniform-convergence characterization.

use serde::Serialize;

use super::fit::minimax_fit;
use super::{CompactExhaustion, SampledFunction, SampledSequence};
use crate::error::{Error, Result};
use crate::functionals::IdealSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrictOptions {
    /// Tolerance for "pointwise infimum 0" and for uniform convergence.
    pub grid_tol: f64,
    /// Multiplicative slack applied to extrapolated growth bounds.
    pub slack: f64,
}

impl Default for StrictOptions {
    fn default() -> Self {
        StrictOptions {
            grid_tol: 1e-9,
            slack: 1.05,
        }
    }
}

/// Growth screen for membership in the ideal.
///
/// Everything on a finite grid is bounded, so membership is judged by
/// extrapolation: `|f|` is fitted on the second-largest box by a minimax
/// polynomial of the permitted degree in `|x|`, and the fit's monotone majorant, with
/// slack, must cover `|f|` on the outermost box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Largest `|f(x)| - (slack |u(x)| + tol)` over the outer shell.
    pub excess: f64,
    pub degree: Option<usize>,
}

pub fn admissible(
    f: &SampledFunction,
    ideal: IdealSpec,
    exhaustion: &CompactExhaustion,
    opts: StrictOptions,
) -> Admissibility {
    let degree = match ideal {
        IdealSpec::AllContinuous => {
            return Admissibility {
                admissible: true,
                excess: f64::NEG_INFINITY,
                degree: None,
            }
        }
        IdealSpec::UniformlyBounded => 0,
        IdealSpec::PolyBounded(d) => d,
    };
    let n = exhaustion.len();
    let vacuous = Admissibility {
        admissible: true,
        excess: f64::NEG_INFINITY,
        degree: Some(degree),
    };
    if n < 2 {
        return vacuous;
    }
    let inner_box = exhaustion.boxes()[n - 2];
    let outer_box = exhaustion.boxes()[n - 1];
    let inner = f.indices_in(&inner_box);
    let shell: Vec<usize> = f
        .indices_in(&outer_box)
        .into_iter()
        .filter(|&i| !inner_box.contains(f.grid()[i]))
        .collect();
    if inner.is_empty() || shell.is_empty() {
        return vacuous;
    }
    // envelope of |f| against t = |x|, one value per distinct t
    let mut pts: Vec<(f64, f64)> = inner.iter().map(|&i| (f.grid()[i].abs(), f.values()[i].abs())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 = a.1.max(b.1);
            true
        } else {
            false
        }
    });
    let (ts, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let fit = minimax_fit(&ts, &ys, degree);
    let excess = shell
        .iter()
        .map(|&i| {
            let t = f.grid()[i].abs();
            f.values()[i].abs() - (opts.slack * fit.majorant(t) + opts.grid_tol)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Admissibility {
        admissible: excess <= 0.0,
        excess,
        degree: Some(degree),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefinitionRoute {
    /// `max_x f_k(x)` for the running sups `f_k = sup_{n>=k} |ghat - g_n|`.
    pub running_sup_max: Vec<f64>,
    pub infimum_reached: bool,
    pub f1: Admissibility,
    pub ghat: Admissibility,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryRoute {
    /// `"given"` when the sequence carries a dominator, else `"envelope"`.
    pub dominator_source: String,
    pub dominator: Admissibility,
    pub ghat: Admissibility,
    /// Per box: the first 1-based index from which every member is within
    /// tolerance of the limit on that box.
    pub convergence_index: Vec<Option<usize>>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrictReport {
    pub verdict: bool,
    pub via_definition: bool,
    pub via_corollary: bool,
    pub definition: DefinitionRoute,
    pub corollary: CorollaryRoute,
}

/// Restriction to the grid points inside the outermost box.
fn restrict(f: &SampledFunction, idx: &[usize]) -> Result<SampledFunction> {
    SampledFunction::new(
        idx.iter().map(|&i| f.grid()[i]).collect(),
        idx.iter().map(|&i| f.values()[i]).collect(),
    )
}

pub fn strict_convergence_check(
    seq: &SampledSequence,
    ghat: &SampledFunction,
    ideal: IdealSpec,
    exhaustion: &CompactExhaustion,
    opts: StrictOptions,
) -> Result<StrictReport> {
    if !ghat.same_grid(&seq.members()[0]) {
        return Err(Error::GridMismatch("limit and sequence use different grids".into()));
    }
    if !(opts.grid_tol > 0.0 && opts.slack >= 1.0) {
        return Err(Error::InvalidInput("grid_tol must be positive and slack at least 1".into()));
    }
    if let Some(n) = exhaustion
        .boxes()
        .iter()
        .position(|k| ghat.indices_in(k).is_empty())
    {
        return Err(Error::InvalidInput(format!("box {} contains no grid point", n + 1)));
    }
    let dom = ghat.indices_in(exhaustion.outermost());
    let ghat_r = restrict(ghat, &dom)?;
    let members = seq
        .members()
        .iter()
        .map(|g| restrict(g, &dom))
        .collect::<Result<Vec<_>>>()?;
    let errs: Vec<Vec<f64>> = members
        .iter()
        .map(|g| {
            g.values()
                .iter()
                .zip(ghat_r.values())
                .map(|(a, b)| (b - a).abs())
                .collect()
        })
        .collect();
    let npts = dom.len();
    let ghat_adm = admissible(&ghat_r, ideal, exhaustion, opts);

    // definition route: running sups from the tail
    let mut running = vec![vec![0.0; npts]; errs.len()];
    for k in (0..errs.len()).rev() {
        for p in 0..npts {
            running[k][p] = if k + 1 < errs.len() {
                errs[k][p].max(running[k + 1][p])
            } else {
                errs[k][p]
            };
        }
    }
    let running_sup_max: Vec<f64> = running
        .iter()
        .map(|r| r.iter().copied().fold(0.0, f64::max))
        .collect();
    let last = &running[running.len() - 1];
    let infimum_reached = last.iter().all(|&v| v <= opts.grid_tol);
    let f1 = SampledFunction::new(ghat_r.grid().to_vec(), running[0].clone())?;
    let f1_adm = admissible(&f1, ideal, exhaustion, opts);
    let def_holds = infimum_reached && f1_adm.admissible && ghat_adm.admissible;

    // corollary route: dominator and uniform convergence on each box
    let (dominator_source, b) = match seq.dominator() {
        Some(b) => ("given", restrict(b, &dom)?),
        None => {
            let env = (0..npts)
                .map(|p| members.iter().map(|g| g.values()[p].abs()).fold(0.0, f64::max))
                .collect();
            ("envelope", SampledFunction::new(ghat_r.grid().to_vec(), env)?)
        }
    };
    let b_adm = admissible(&b, ideal, exhaustion, opts);
    let convergence_index: Vec<Option<usize>> = exhaustion
        .boxes()
        .iter()
        .map(|k| {
            let pts = ghat_r.indices_in(k);
            let sup: Vec<f64> = errs
                .iter()
                .map(|e| pts.iter().map(|&p| e[p]).fold(0.0, f64::max))
                .collect();
            let tail_bad = sup.iter().rposition(|&s| s > opts.grid_tol);
            match tail_bad {
                None => Some(1),
                Some(n) if n + 1 < sup.len() => Some(n + 2),
                Some(_) => None,
            }
        })
        .collect();
    let uniform = convergence_index.iter().all(Option::is_some);
    let cor_holds = uniform && b_adm.admissible && ghat_adm.admissible;

    if def_holds != cor_holds {
        return Err(Error::EquivalenceViolated {
            via_definition: def_holds,
            via_corollary: cor_holds,
        });
    }
    Ok(StrictReport {
        verdict: def_holds,
        via_definition: def_holds,
        via_corollary: cor_holds,
        definition: DefinitionRoute {
            running_sup_max,
            infimum_reached,
            f1: f1_adm,
            ghat: ghat_adm.clone(),
            holds: def_holds,
        },
        corollary: CorollaryRoute {
            dominator_source: dominator_source.into(),
            dominator: b_adm,
            ghat: ghat_adm,
            convergence_index,
            holds: cor_holds,
        },
    })
}

/// The discrete-space fixture: grid `1..=window`, `g_n = n` at `x = n` and
/// zero elsewhere, for `n = 1..=count`.
pub fn indicator_fixture(window: usize, count: usize) -> Result<(SampledSequence, SampledFunction)> {
    let grid: Vec<f64> = (1..=window).map(|i| i as f64).collect();
    let seq = SampledSequence::from_fn(&grid, count, |n, x| if x == n as f64 { n as f64 } else { 0.0 })?;
    let zero = SampledFunction::constant(&grid, 0.0)?;
    Ok((seq, zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{compact_exhaustion, uniform_grid};

    fn example() -> (SampledSequence, SampledFunction, CompactExhaustion) {
        let (seq, zero) = indicator_fixture(100, 150).unwrap();
        (seq, zero, compact_exhaustion(10, 10.0).unwrap())
    }

    #[test]
    fn indicator_fixture_depends_on_the_ideal() {
        let (seq, zero, ex) = example();
        let all = strict_convergence_check(&seq, &zero, IdealSpec::AllContinuous, &ex, StrictOptions::default())
            .unwrap();
        assert!(all.verdict && all.via_corollary);
        let bdd = strict_convergence_check(&seq, &zero, IdealSpec::UniformlyBounded, &ex, StrictOptions::default())
            .unwrap();
        assert!(!bdd.verdict && !bdd.via_corollary);
        assert!(!bdd.definition.f1.admissible);
        let lin = strict_convergence_check(&seq, &zero, IdealSpec::PolyBounded(1), &ex, StrictOptions::default())
            .unwrap();
        assert!(lin.verdict);
    }

    #[test]
    fn constant_sequence_converges_with_zero_running_sup() {
        let g = uniform_grid(-5.0, 5.0, 51);
        let ghat = SampledFunction::from_fn(&g, |x| x.sin()).unwrap();
        let seq = SampledSequence::new(vec![ghat.clone(); 4]).unwrap();
        let ex = compact_exhaustion(5, 1.0).unwrap();
        for ideal in [IdealSpec::AllContinuous, IdealSpec::UniformlyBounded, IdealSpec::PolyBounded(2)] {
            let r = strict_convergence_check(&seq, &ghat, ideal, &ex, StrictOptions::default()).unwrap();
            assert!(r.verdict);
            assert!(r.definition.running_sup_max.iter().all(|&m| m == 0.0));
        }
    }

    #[test]
    fn non_convergent_sequence_fails_both_routes() {
        let g = uniform_grid(-3.0, 3.0, 31);
        let ghat = SampledFunction::constant(&g, 0.0).unwrap();
        let seq = SampledSequence::from_fn(&g, 10, |_, x| 0.5 * x.cos()).unwrap();
        let ex = compact_exhaustion(3, 1.0).unwrap();
        let r = strict_convergence_check(&seq, &ghat, IdealSpec::AllContinuous, &ex, StrictOptions::default())
            .unwrap();
        assert!(!r.verdict);
        assert!(!r.definition.infimum_reached);
        assert!(r.corollary.convergence_index.iter().all(Option::is_none));
    }

    #[test]
    fn convergence_index_tracks_each_box() {
        let g = uniform_grid(-4.0, 4.0, 81);
        let ghat = SampledFunction::constant(&g, 0.0).unwrap();
        // bump sitting at |x| >= n is gone from K_m once n > 4
        let seq = SampledSequence::from_fn(&g, 6, |n, x| if x.abs() >= n as f64 { 1.0 } else { 0.0 }).unwrap();
        let ex = compact_exhaustion(4, 1.0).unwrap();
        let r = strict_convergence_check(&seq, &ghat, IdealSpec::AllContinuous, &ex, StrictOptions::default())
            .unwrap();
        assert_eq!(r.corollary.convergence_index, vec![Some(2), Some(3), Some(4), Some(5)]);
        assert!(r.verdict);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let (seq, _, ex) = example();
        let other = SampledFunction::constant(&[1.0, 2.0], 0.0).unwrap();
        assert!(matches!(
            strict_convergence_check(&seq, &other, IdealSpec::AllContinuous, &ex, StrictOptions::default()),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn admissibility_screen() {
        let g = uniform_grid(-10.0, 10.0, 201);
        let ex = compact_exhaustion(5, 2.0).unwrap();
        let o = StrictOptions::default();
        let cubic = SampledFunction::from_fn(&g, |x| x * x * x).unwrap();
        assert!(!admissible(&cubic, IdealSpec::PolyBounded(2), &ex, o).admissible);
        assert!(admissible(&cubic, IdealSpec::PolyBounded(3), &ex, o).admissible);
        let bdd = SampledFunction::from_fn(&g, |x| 2.0 + x.sin()).unwrap();
        assert!(admissible(&bdd, IdealSpec::UniformlyBounded, &ex, o).admissible);
        let one = compact_exhaustion(1, 10.0).unwrap();
        assert!(admissible(&cubic, IdealSpec::UniformlyBounded, &one, o).admissible);
    }
}
