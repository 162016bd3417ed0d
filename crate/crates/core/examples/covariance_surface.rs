//! Write the count covariance on a grid of (s, t) pairs as CSV.

use std::io;

use hawkes_core::moments::cov_surface;
use hawkes_core::resolvent::{resolvent, Grid};
use hawkes_core::{HawkesError, Kernel, ModelParams, Quantity};

fn main() -> Result<(), HawkesError> {
    let params = ModelParams::new(0.5, Kernel::power_law(1.5, 1.0, 4.0)?)?;
    let nodes: Vec<f64> = (1..=6).map(|k| 0.5 * k as f64).collect();
    let res = resolvent(params.kernel(), &Grid::with_horizon(3.0, 1e-3)?)?;
    let surface = cov_surface(&params, &res, &nodes, &nodes, Quantity::CovCount)?;
    surface.write_csv(io::stdout().lock())
}
