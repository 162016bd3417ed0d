//! Means of the intensity and count after forcing extra atoms, closed form
//! against simulation.

use hawkes_core::malliavin::{shifted_mean_intensity, shifted_mean_x, Zeta};
use hawkes_core::resolvent::{resolvent, Grid};
use hawkes_core::simulate::mc_shifted_estimates;
use hawkes_core::{HawkesError, Kernel, ModelParams};

fn main() -> Result<(), HawkesError> {
    let params = ModelParams::new(1.0, Kernel::exponential(1.0, 2.0)?)?;
    let t = 1.0;
    let res = resolvent(params.kernel(), &Grid::with_horizon(t, 1e-3)?)?;

    for forced in [vec![], vec![0.5], vec![0.25, 0.5, 0.75]] {
        let lambda = shifted_mean_intensity(&params, &res, &forced, t)?;
        let count = shifted_mean_x(&params, &res, Zeta::One, &forced, t)?;
        let mc = mc_shifted_estimates(&params, t, &forced, t, 50_000, 3)?;
        println!("forced {forced:?}");
        println!(
            "  E[lambda_1] = {lambda:.6}  MC {:.6} +- {:.6}",
            mc.mean_intensity.value, mc.mean_intensity.std_error
        );
        println!(
            "  E[H_1]      = {count:.6}  MC {:.6} +- {:.6}",
            mc.mean_count.value, mc.mean_count.std_error
        );
    }
    Ok(())
}
