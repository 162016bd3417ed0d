//! Truncated chaos expansions of E[H_t] and E[lambda_t] - mu at increasing
//! orders.

use hawkes_core::malliavin::{expectation_via_chaos, Zeta};
use hawkes_core::moments::{mean_count, mean_intensity};
use hawkes_core::resolvent::{resolvent, Grid};
use hawkes_core::{HawkesError, Kernel, ModelParams};

fn main() -> Result<(), HawkesError> {
    let params = ModelParams::new(1.0, Kernel::exponential(1.0, 2.0)?)?;
    let t = 1.0;
    let grid = Grid::with_horizon(t, 1e-3)?;
    let res = resolvent(params.kernel(), &grid)?;
    let targets = [
        (Zeta::One, mean_count(&params, &res, t)?),
        (Zeta::Phi, mean_intensity(&params, &res, t)? - params.mu()),
    ];
    for (zeta, exact) in targets {
        println!("zeta = {zeta:?}, closed form {exact:.10}");
        for order in [1, 2, 4, 8] {
            let chaos = expectation_via_chaos(&params, t, zeta, order, &grid)?;
            println!(
                "  N = {order}: {:.10}  error {:.2e}  bound {:.2e}",
                chaos.value,
                (chaos.value - exact).abs(),
                chaos.truncation_bound
            );
        }
    }
    Ok(())
}
