//! Simulate paths with the branching and thinning methods and compare their
//! average event counts with the closed form.

use std::io;

use hawkes_core::moments::mean_count;
use hawkes_core::resolvent::{resolvent, Grid};
use hawkes_core::simulate::{
    sample_paths, simulate_hawkes, simulate_hawkes_with, simulate_thinning_with, write_paths_csv,
    McEstimate,
};
use hawkes_core::{HawkesError, Kernel, ModelParams};

fn main() -> Result<(), HawkesError> {
    let params = ModelParams::new(1.0, Kernel::exponential(1.0, 2.0)?)?;
    let horizon = 5.0;

    let path = simulate_hawkes(&params, horizon, 42)?;
    write_paths_csv(&[path], io::stdout().lock())?;

    let n = 20_000;
    let seed = 1;
    let branching: Vec<f64> = sample_paths(n, seed, |rng| {
        simulate_hawkes_with(&params, horizon, rng).unwrap().len() as f64
    });
    let thinning: Vec<f64> = sample_paths(n, seed + 1, |rng| {
        simulate_thinning_with(&params, horizon, rng).unwrap().len() as f64
    });
    let res = resolvent(params.kernel(), &Grid::with_horizon(horizon, 1e-3)?)?;
    let exact = mean_count(&params, &res, horizon)?;
    for (name, counts, s) in [
        ("branching", &branching, seed),
        ("thinning", &thinning, seed + 1),
    ] {
        let est = McEstimate::mean(counts, s)?;
        eprintln!(
            "{name:>9}: E[H_5] = {:.4} +- {:.4} (closed form {exact:.4}, z = {:.2})",
            est.value,
            est.std_error,
            est.z_score(exact)
        );
    }
    Ok(())
}
