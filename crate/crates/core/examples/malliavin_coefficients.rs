//! Pathwise derivatives and chaos coefficients on a small configuration of
//! time-mark atoms.

use hawkes_core::malliavin::{
    coefficient_c_n, in_support, intensity_of, pathwise_derivative, theta_integral_c_n, Atom, Zeta,
};
use hawkes_core::{HawkesError, Kernel, ModelParams};

fn main() -> Result<(), HawkesError> {
    let params = ModelParams::new(1.0, Kernel::exponential(1.0, 2.0)?)?;
    let t = 1.0;

    let inside = [
        Atom::new(0.2, 0.5),
        Atom::new(0.5, 1.3),
        Atom::new(0.8, 1.6),
    ];
    let outside = [
        Atom::new(0.2, 1.5),
        Atom::new(0.5, 1.3),
        Atom::new(0.8, 1.6),
    ];
    for atoms in [&inside[..], &outside[..]] {
        println!(
            "atoms {atoms:?} (in support: {})",
            in_support(atoms, &params)
        );
        for zeta in [Zeta::One, Zeta::Phi] {
            println!(
                "  c_3 with zeta = {zeta:?}: {}",
                coefficient_c_n(atoms, &params, zeta, t)?
            );
        }
    }

    let d2 = pathwise_derivative(|sub| intensity_of(sub, &params, t), &inside[..2])?;
    println!("second derivative of lambda_1: {d2:.6}");

    let times = [0.2, 0.5, 0.8];
    for zeta in [Zeta::One, Zeta::Phi] {
        println!(
            "mark integral of c_3, zeta = {zeta:?}: {:.10}",
            theta_integral_c_n(&times, &params, zeta, t)?
        );
    }
    Ok(())
}
