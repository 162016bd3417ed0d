//! Closed-form first and second moments of the counting process and its
//! intensity.

use hawkes_core::moments::{evaluate, MomentRequest};
use hawkes_core::resolvent::{resolvent, Grid};
use hawkes_core::{HawkesError, Kernel, ModelParams, Quantity};

fn main() -> Result<(), HawkesError> {
    let params = ModelParams::new(1.0, Kernel::exponential(1.0, 2.0)?)?;
    let res = resolvent(params.kernel(), &Grid::with_horizon(2.0, 1e-3)?)?;

    let (s, t) = (1.0, 2.0);
    for quantity in Quantity::ALL {
        let v = evaluate(&params, &res, MomentRequest { quantity, s, t })?;
        let label = if quantity.is_two_time() {
            format!("{quantity}({s}, {t})")
        } else {
            format!("{quantity}({t})")
        };
        println!("{label:<30} {:.10}", v.value);
    }

    // every covariance is linear in mu
    let doubled = params.with_mu(2.0)?;
    let var = evaluate(
        &doubled,
        &res,
        MomentRequest {
            quantity: Quantity::CovIntensity,
            s: 1.0,
            t: 1.0,
        },
    )?;
    println!("Var(lambda_1) with mu = 2: {:.6}", var.value);
    Ok(())
}
