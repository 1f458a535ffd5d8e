#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod approx;
pub mod cli;
pub mod determinacy;
pub mod error;
pub mod functionals;
pub mod gns;
pub mod io;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod sqrt_approx;
