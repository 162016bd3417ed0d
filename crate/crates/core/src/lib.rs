//! Exact first- and second-order statistics of a linear Hawkes process.
//!
//! The crate evaluates closed-form means and covariances of the counting
//! process `H` and its intensity `lambda` from the resolvent `Psi` of the
//! excitation kernel, simulates the process exactly (branching and
//! thinning), and evaluates the pathwise-derivative machinery of the
//! Poisson imbedding on finite configurations of atoms.
//!
//! The modules build on each other:
//!
//! - [`kernel`]: admissible excitation kernels and model parameters
//! - [`resolvent`]: iterated convolutions, the resolvent, Volterra solves
//! - [`moments`]: expectations and covariances from a [`ResolventTable`]
//! - [`simulate`]: branching and thinning simulators, Monte Carlo estimates
//! - [`malliavin`]: add-points, pathwise derivatives and chaos coefficients
//! - [`cli`]: the `hawkes` command-line front end
//!
//! See `crates/core/examples/` for one runnable program per capability.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod kernel;
pub mod malliavin;
pub mod moments;
pub mod resolvent;
pub mod simulate;

pub use error::{HawkesError, Result};
pub use kernel::{Kernel, KernelShape, ModelParams};
pub use malliavin::{Atom, Configuration, Zeta};
pub use moments::{CovarianceSurface, MixedOrder, Quantity};
pub use resolvent::{resolvent, Grid, ResolventTable};
pub use simulate::{McEstimate, SimulatedPath};

/// Fixed float formatting used for every CSV and scalar output: 17
/// significant digits, which round-trips any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
