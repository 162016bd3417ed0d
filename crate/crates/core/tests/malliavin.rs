//! Pathwise derivatives, chaos coefficients and shifted expectations.

use hawkes_core::malliavin::{
    coefficient_c_n, eval_x_config, in_support, pathwise_derivative, shifted_mean_intensity,
    shifted_mean_x, theta_integral_c_n, Atom, Configuration, Zeta, MAX_DERIVATIVE_ORDER,
};
use hawkes_core::resolvent::{resolvent, Grid};
use hawkes_core::{HawkesError, Kernel, ModelParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exp_params() -> ModelParams {
    ModelParams::new(1.0, Kernel::exponential(1.0, 2.0).unwrap()).unwrap()
}

fn random_atoms(rng: &mut ChaCha8Rng, n: usize, t: f64, theta_max: f64) -> Vec<Atom> {
    let mut times: Vec<f64> = (0..n)
        .map(|_| t * (1e-9 + rng.random::<f64>() * (1.0 - 2e-9)))
        .collect();
    times.sort_by(f64::total_cmp);
    times
        .into_iter()
        .map(|s| Atom::new(s, theta_max * rng.random::<f64>()))
        .collect()
}

#[test]
fn coefficients_vanish_off_support() {
    let params = exp_params();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut outside = 0;
    for n in 1..=4 {
        for _ in 0..200 {
            let atoms = random_atoms(&mut rng, n, 1.0, 1.0 + n as f64);
            for zeta in [Zeta::One, Zeta::Phi] {
                let c = coefficient_c_n(&atoms, &params, zeta, 1.0).unwrap();
                if !in_support(&atoms, &params) {
                    outside += 1;
                    assert_eq!(c, 0.0, "n={n} {atoms:?}");
                }
            }
        }
    }
    assert!(outside > 100);
}

#[test]
fn first_coefficient_is_baseline_indicator() {
    let params = exp_params();
    for (theta, want) in [(0.3, 1.0), (1.0, 1.0), (1.2, 0.0)] {
        let c = coefficient_c_n(&[Atom::new(0.4, theta)], &params, Zeta::One, 1.0).unwrap();
        assert_eq!(c, want);
    }
}

/// Midpoint rule on a uniform mark grid, independent of the breakpoint
/// bookkeeping in the library.
fn theta_integral_by_grid(
    times: &[f64],
    params: &ModelParams,
    zeta: Zeta,
    t: f64,
    cells: usize,
) -> f64 {
    let n = times.len();
    let top = params.mu() + n as f64 * params.kernel().sup() + 0.1;
    let h = top / cells as f64;
    let mut total = 0.0;
    let mut index = vec![0usize; n];
    loop {
        let atoms: Vec<Atom> = times
            .iter()
            .zip(&index)
            .map(|(s, k)| Atom::new(*s, (*k as f64 + 0.5) * h))
            .collect();
        total += coefficient_c_n(&atoms, params, zeta, t).unwrap();
        let mut d = 0;
        loop {
            if d == n {
                return total * h.powi(n as i32);
            }
            index[d] += 1;
            if index[d] < cells {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}

#[test]
fn theta_integral_matches_grid_quadrature() {
    let params = exp_params();
    for (times, cells) in [
        (vec![0.4], 2000),
        (vec![0.2, 0.7], 800),
        (vec![0.1, 0.3, 0.6], 90),
    ] {
        for zeta in [Zeta::One, Zeta::Phi] {
            let exact = theta_integral_c_n(&times, &params, zeta, 1.0).unwrap();
            let grid = theta_integral_by_grid(&times, &params, zeta, 1.0, cells);
            let tol = 5e-2 * exact.abs().max(1e-3) * times.len() as f64 / 3.0 + 1e-3;
            assert!(
                (exact - grid).abs() < tol,
                "{times:?} {zeta:?}: {exact} vs {grid}"
            );
        }
    }
}

#[test]
fn theta_integral_closed_form_on_random_times() {
    let params = ModelParams::new(0.7, Kernel::power_law(1.5, 1.0, 4.0).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in 1..=6 {
        for _ in 0..20 {
            let times: Vec<f64> = random_atoms(&mut rng, n, 2.0, 0.0)
                .iter()
                .map(|a| a.t)
                .collect();
            let prod: f64 = times
                .windows(2)
                .map(|w| params.kernel().at(w[1] - w[0]))
                .product();
            for zeta in [Zeta::One, Zeta::Phi] {
                let want = params.mu() * zeta.weight(params.kernel(), times[n - 1], 2.0) * prod;
                let got = theta_integral_c_n(&times, &params, zeta, 2.0).unwrap();
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
    }
}

#[test]
fn derivative_order_is_capped() {
    let atoms: Vec<Atom> = (1..=MAX_DERIVATIVE_ORDER + 1)
        .map(|k| Atom::new(k as f64, 0.0))
        .collect();
    let err = pathwise_derivative(|_| 1.0, &atoms).unwrap_err();
    assert!(matches!(err, HawkesError::Size { .. }));
}

#[test]
fn configurations_reject_bad_atoms() {
    assert!(Configuration::new(vec![Atom::new(0.0, 1.0)]).is_err());
    assert!(Configuration::new(vec![Atom::new(1.0, -1.0)]).is_err());
    assert!(Configuration::new(vec![Atom::new(1.0, 1.0), Atom::new(1.0, 0.5)]).is_err());
    let c = Configuration::new(vec![Atom::new(2.0, 0.1), Atom::new(1.0, 0.1)]).unwrap();
    assert_eq!(c.atoms()[0].t, 1.0);
    assert_eq!(eval_x_config(&c, &exp_params(), Zeta::One, 3.0), 2.0);
}

#[test]
fn shifted_means_match_frozen_values() {
    let params = exp_params();
    let res = resolvent(params.kernel(), &Grid::with_horizon(1.0, 1e-3).unwrap()).unwrap();
    let lam = shifted_mean_intensity(&params, &res, &[0.5], 1.0).unwrap();
    assert!((lam - 2.238_651_218_541_191).abs() < 1e-6);
    let count = shifted_mean_x(&params, &res, Zeta::One, &[0.5], 1.0).unwrap();
    assert!((count - 2.761_348_781_458_809).abs() < 1e-6);
    // no forced atoms: plain means
    let plain = shifted_mean_intensity(&params, &res, &[], 1.0).unwrap();
    assert!((plain - (2.0 - (-1.0f64).exp())).abs() < 1e-6);
}

proptest! {
    #[test]
    fn constants_are_annihilated(n in 1usize..8, value in -5.0f64..5.0) {
        let atoms: Vec<Atom> = (1..=n).map(|k| Atom::new(k as f64, 0.5)).collect();
        prop_assert_eq!(pathwise_derivative(|_| value, &atoms).unwrap(), 0.0);
    }

    #[test]
    fn first_derivative_is_add_one_difference(t in 0.01f64..1.0, theta in 0.0f64..3.0, s in 1.0f64..2.0) {
        let params = exp_params();
        let f = |sub: &[Atom]| hawkes_core::malliavin::intensity_of(sub, &params, s);
        let d = pathwise_derivative(f, &[Atom::new(t, theta)]).unwrap();
        prop_assert_eq!(d, f(&[Atom::new(t, theta)]) - f(&[]));
    }

    #[test]
    fn support_property_holds(seed in any::<u64>(), n in 1usize..5) {
        let params = exp_params();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = random_atoms(&mut rng, n, 1.0, 1.0 + n as f64);
        let c = coefficient_c_n(&atoms, &params, Zeta::Phi, 1.0).unwrap();
        prop_assert!(in_support(&atoms, &params) || c == 0.0);
    }
}
