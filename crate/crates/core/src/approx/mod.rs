//! Order-theoretic approximation on sampled compacts: exhaustions, Dini
//! indices and dominators, constructive Stone–Weierstraß, and strict
//! convergence relative to a Riesz ideal.

pub mod dini;
pub mod exhaustion;
pub mod fit;
pub mod lattice;
pub mod sampled;
pub mod strict;

pub use dini::{dini_dominator, dini_index, DiniDominator, DiniIndex, DiniOptions};
pub use exhaustion::{compact_exhaustion, CompactExhaustion};
pub use fit::{minimax_fit, MinimaxFit};
pub use lattice::{sw_lattice_approx, LatticeExpr, SwApproximation, SwOptions};
pub use sampled::{uniform_grid, Interval, SampledFunction, SampledSequence};
pub use strict::{
    admissible, indicator_fixture, strict_convergence_check, Admissibility, StrictOptions,
    StrictReport,
};
