//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::approx::{
    compact_exhaustion, dini_index, indicator_fixture, strict_convergence_check, sw_lattice_approx, Interval,
    StrictOptions, SwOptions,
};
use crate::determinacy::{determinacy_report, DeterminacyConfig};
use crate::error::{Error, Result};
use crate::functionals::{IdealSpec, MomentSequence};
use crate::gns::{gauss_quadrature, gns_model, hankel, psd_rank};
use crate::io;
use crate::report::{emit, envelope, scalar_array, scalar_matrix, scalar_value, to_value};
use crate::scalar::{Ext, Precision, Real, Scalar};
use crate::with_precision;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable that overrides `--precision`.
pub const PRECISION_ENV: &str = "MOMENTGATE_PRECISION";

#[derive(Parser, Debug)]
#[command(name = "momentgate", version, about = "Moment-problem diagnostics and order-theoretic approximation")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// auto, f64, or extN with N >= 128
    #[arg(long, global = true, default_value = "auto")]
    pub precision: String,
    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub psd_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub grid_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-2)]
    pub plateau_tol: f64,
    #[arg(long, global = true, default_value_t = 0.1)]
    pub defect_threshold: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hankel matrix, positive semidefiniteness and rank
    Hankel { moments: PathBuf },
    /// Orthonormal polynomials and Jacobi data
    Gns { moments: PathBuf },
    /// Gauss rule from the Jacobi data
    Quadrature {
        moments: PathBuf,
        #[arg(long)]
        points: usize,
    },
    /// Determinacy evidence report
    Determinacy { moments: PathBuf },
    /// Lattice approximation
    Approx {
        #[command(subcommand)]
        method: ApproxMethod,
    },
    /// Dini index of a decreasing sequence on an interval
    Dini {
        seq: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        interval: Vec<f64>,
    },
    /// Strict convergence of a sequence to a limit
    Strict {
        seq: PathBuf,
        limit: PathBuf,
        /// all, bounded or poly:D
        #[arg(long)]
        ideal: String,
        /// Number of exhaustion boxes
        #[arg(long, default_value_t = 10)]
        boxes: usize,
        /// Half-width step of the boxes; defaults to cover the grid
        #[arg(long)]
        base: Option<f64>,
    },
    /// Writes a named input file: normal, lognormal, uniform, example32, zero
    Fixture {
        name: String,
        #[arg(long, default_value_t = 16)]
        degree: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ApproxMethod {
    /// Constructive Stone-Weierstrass approximation
    Sw {
        target: PathBuf,
        gens: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        interval: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        node_budget: usize,
    },
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub precision: Precision,
    pub psd_tol: f64,
    pub grid_tol: f64,
    pub plateau_tol: f64,
    pub defect_threshold: f64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(a: &ConfigArgs, env_precision: Option<&str>) -> Result<Self> {
        let text = env_precision.unwrap_or(&a.precision);
        let precision: Precision = text.parse().map_err(Error::InvalidInput)?;
        for (name, v) in [
            ("psd_tol", a.psd_tol),
            ("grid_tol", a.grid_tol),
            ("plateau_tol", a.plateau_tol),
            ("defect_threshold", a.defect_threshold),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{} must be positive, got {}", name, v)));
            }
        }
        Ok(RunConfig {
            precision,
            psd_tol: a.psd_tol,
            grid_tol: a.grid_tol,
            plateau_tol: a.plateau_tol,
            defect_threshold: a.defect_threshold,
            output: a.output.clone(),
        })
    }

    fn determinacy(&self) -> DeterminacyConfig {
        DeterminacyConfig {
            psd_tol: self.psd_tol,
            plateau_tol: self.plateau_tol,
            defect_threshold: self.defect_threshold,
            ..DeterminacyConfig::default()
        }
    }
}

fn interval(v: &[f64]) -> Result<Interval> {
    match v {
        [a, b] => Interval::new(*a, *b),
        _ => Err(Error::InvalidInput("--interval takes two numbers".into())),
    }
}

/// Reads a moment file and resolves `auto` against its dynamic range.
fn moment_input(path: &Path, p: Precision) -> Result<(Value, Precision)> {
    let v = io::read_json(path)?;
    let range = MomentSequence::<f64>::from_json(&v)?.dynamic_range();
    Ok((v, p.resolve(range)))
}

fn hankel_report<T: Scalar>(v: &Value, cfg: &RunConfig) -> Result<Value> {
    let ms = MomentSequence::<T>::from_json(v)?;
    let h = hankel(&ms);
    let r = psd_rank(&h, cfg.psd_tol);
    let kernel: Vec<Value> = r.kernel_basis.iter().map(|p| scalar_array(p.coeffs())).collect();
    Ok(json!({
        "hankel": scalar_matrix(h.entries()),
        "psd": r.psd,
        "rank": r.rank,
        "pivots": r.pivots,
        "kernel_dim": kernel.len(),
        "kernel_basis": kernel,
        "failure": r.failure.map(|(i, p)| json!({"index": i, "pivot": p})),
    }))
}

fn gns_report<T: Real>(v: &Value, cfg: &RunConfig) -> Result<Value> {
    let ms = MomentSequence::<T>::from_json(v)?;
    let h = hankel(&ms);
    let psd = psd_rank(&h, cfg.psd_tol);
    let m = gns_model(&ms, cfg.psd_tol)?;
    Ok(json!({
        "psd": psd.psd,
        "rank": m.rank,
        "kernel_dim": h.size() - m.rank,
        "accepted": m.accepted,
        "onb": scalar_matrix(&m.onb),
        "alpha": scalar_array(&m.alpha),
        "beta": scalar_array(&m.beta),
        "beta_coupling": m.beta_coupling.as_ref().map(scalar_value),
        "band_defect": m.band_defect,
        "gram_defect": m.gram_defect(&h),
        "notice": m.notice,
    }))
}

fn quadrature_report<T: Real>(v: &Value, cfg: &RunConfig, points: usize) -> Result<Value> {
    let ms = MomentSequence::<T>::from_json(v)?;
    let m = gns_model(&ms, cfg.psd_tol)?;
    let (alpha, beta) = m.recurrence();
    let rule = gauss_quadrature(&alpha, &beta, &ms.moments()[0], points)?;
    let residual = (0..2 * points)
        .filter(|&k| k < ms.moments().len())
        .map(|k| {
            let want = ms.moments()[k].clone();
            let scale = Scalar::max_of(want.abs(), T::one());
            ((rule.moment(k) - want).abs() / scale).to_f64()
        })
        .fold(0.0, f64::max);
    Ok(json!({
        "points": points,
        "nodes": scalar_array(&rule.nodes),
        "weights": scalar_array(&rule.weights),
        "moment_residual": residual,
    }))
}

fn determinacy_json<T: Real>(v: &Value, cfg: &RunConfig) -> Result<Value> {
    let ms = MomentSequence::<T>::from_json(v)?;
    let r = determinacy_report(&ms, cfg.determinacy())?;
    to_value(&r)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Value> {
    let prec = cfg.precision;
    let (name, tag, body) = match &cli.command {
        Command::Hankel { moments } => {
            let (v, p) = moment_input(moments, prec)?;
            ("hankel", p, with_precision!(p, T => hankel_report::<T>(&v, cfg))?)
        }
        Command::Gns { moments } => {
            let (v, p) = moment_input(moments, prec)?;
            ("gns", p, with_precision!(p, T => gns_report::<T>(&v, cfg))?)
        }
        Command::Quadrature { moments, points } => {
            let (v, p) = moment_input(moments, prec)?;
            ("quadrature", p, with_precision!(p, T => quadrature_report::<T>(&v, cfg, *points))?)
        }
        Command::Determinacy { moments } => {
            let (v, p) = moment_input(moments, prec)?;
            ("determinacy", p, with_precision!(p, T => determinacy_json::<T>(&v, cfg))?)
        }
        Command::Approx {
            method: ApproxMethod::Sw { target, gens, eps, interval: iv, node_budget },
        } => {
            let t = io::read_sampled(target)?;
            let g = io::read_generators(gens, t.grid())?;
            let k = interval(iv)?;
            let r = sw_lattice_approx(&t, &g, &k, *eps, SwOptions { node_budget: *node_budget })?;
            ("approx sw", Precision::F64, to_value(&r)?)
        }
        Command::Dini { seq, eps, interval: iv } => {
            let s = io::read_sequence(seq)?;
            let r = dini_index(&s, &interval(iv)?, *eps)?;
            ("dini", Precision::F64, to_value(&r)?)
        }
        Command::Strict { seq, limit, ideal, boxes, base } => {
            let s = io::read_sequence(seq)?;
            let l = io::read_sampled(limit)?;
            let ideal: IdealSpec = ideal.parse()?;
            let base = match base {
                Some(b) => *b,
                None => {
                    let reach = s.grid().iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    if reach > 0.0 { reach / *boxes.max(&1) as f64 } else { 1.0 }
                }
            };
            let ex = compact_exhaustion(*boxes, base)?;
            let opts = StrictOptions {
                grid_tol: cfg.grid_tol,
                ..StrictOptions::default()
            };
            let r = strict_convergence_check(&s, &l, ideal, &ex, opts)?;
            let mut v = to_value(&r)?;
            v["ideal"] = Value::from(ideal.to_string());
            v["exhaustion"] = to_value(&ex)?;
            ("strict", Precision::F64, v)
        }
        Command::Fixture { name, degree } => return fixture(name, *degree, prec),
    };
    Ok(envelope(name, &tag.tag(), body))
}

fn fixture(name: &str, d: usize, prec: Precision) -> Result<Value> {
    let moments = |v: Value| Ok(v);
    match name {
        "normal" => with_precision!(prec, T => moments(MomentSequence::<T>::normal(d).to_json())),
        "uniform" => with_precision!(prec, T => moments(MomentSequence::<T>::uniform(d).to_json())),
        "lognormal" => match prec {
            Precision::Extended(_) => with_precision!(prec, T => moments(MomentSequence::<T>::lognormal(d).to_json())),
            _ => Ok(MomentSequence::<Ext<256>>::lognormal(d).to_json()),
        },
        "example32" => {
            let (seq, _) = indicator_fixture(100, 150)?;
            to_value(&seq)
        }
        "zero" => {
            let (_, zero) = indicator_fixture(100, 150)?;
            to_value(&zero)
        }
        other => Err(Error::InvalidInput(format!(
            "unknown fixture `{}` (normal, lognormal, uniform, example32, zero)",
            other
        ))),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let env = std::env::var(PRECISION_ENV).ok().filter(|s| !s.trim().is_empty());
    let outcome = RunConfig::from_args(&cli.config, env.as_deref())
        .and_then(|cfg| run(&cli, &cfg).and_then(|v| emit(&v, cfg.output.as_deref())));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}
