//! Tabulate the resolvent of an exponential kernel and compare it with the
//! closed form `Psi(t) = alpha e^{-(beta - alpha) t}`.

use hawkes_core::resolvent::{resolvent, Grid};
use hawkes_core::{HawkesError, Kernel};

fn main() -> Result<(), HawkesError> {
    let (alpha, beta) = (1.0, 2.0);
    let kernel = Kernel::exponential(alpha, beta)?;
    let grid = Grid::with_horizon(10.0, 1e-3)?;
    let res = resolvent(&kernel, &grid)?;

    println!(
        "||Phi||_1 = {}, ||Psi||_1 = {}",
        kernel.l1_norm(),
        res.l1_limit()
    );
    println!("{:>6} {:>14} {:>14} {:>14}", "t", "psi", "exact", "cum");
    for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let k = grid.snap(t)?.index;
        let exact = alpha * (-(beta - alpha) * t).exp();
        println!(
            "{t:>6.2} {:>14.8} {exact:>14.8} {:>14.8}",
            res.psi()[k],
            res.cum()[k]
        );
    }
    println!(
        "max residual of Psi = Phi + Phi * Psi: {:.3e}",
        res.residual(&kernel)
    );

    // a power-law kernel has no closed form; the running integral still
    // approaches ||Phi|| / (1 - ||Phi||)
    let power = Kernel::power_law(1.5, 1.0, 4.0)?;
    let res = resolvent(&power, &Grid::with_horizon(50.0, 1e-2)?)?;
    println!(
        "power law: cum(50) = {:.6}, limit = {:.6}",
        res.cum().last().unwrap(),
        res.l1_limit()
    );
    Ok(())
}
