//! Monte Carlo check of all six closed-form moments at one (s, t) pair.

use std::io;

use hawkes_core::resolvent::{resolvent, Grid};
use hawkes_core::simulate::{validate_moments, write_validation_csv};
use hawkes_core::{HawkesError, Kernel, ModelParams};

fn main() -> Result<(), HawkesError> {
    let params = ModelParams::new(1.0, Kernel::exponential(1.0, 2.0)?)?;
    let (s, t) = (1.0, 2.0);
    let res = resolvent(params.kernel(), &Grid::with_horizon(t, 1e-3)?)?;
    let rows = validate_moments(&params, &res, s, t, 100_000, 7)?;
    write_validation_csv(&rows, io::stdout().lock())?;
    let failed = rows.iter().filter(|r| !r.passes(4.0)).count();
    eprintln!(
        "{} of {} quantities within 4 standard errors",
        rows.len() - failed,
        rows.len()
    );
    Ok(())
}
