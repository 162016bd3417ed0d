//! Acceptance gate: every criterion at its stated tolerance, one PASS/FAIL
//! line each. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hawkes_core::malliavin::{
    coefficient_c_n, expectation_via_chaos, in_support, theta_integral_c_n, Atom, Zeta,
};
use hawkes_core::moments::{self, MixedOrder};
use hawkes_core::resolvent::{cumulative_trapezoid, resolvent, trapezoid_convolution, Grid};
use hawkes_core::simulate::{mc_moment_estimates, mc_shifted_estimates, validate_moments};
use hawkes_core::{Kernel, ModelParams, Quantity, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn exp_kernel() -> Kernel {
    Kernel::exponential(1.0, 2.0).unwrap()
}

fn exp_params(mu: f64) -> ModelParams {
    ModelParams::new(mu, exp_kernel()).unwrap()
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

fn resolvent_correctness() -> Result<Outcome> {
    let start = Instant::now();
    let grid = Grid::with_horizon(10.0, 1e-3)?;
    let res = resolvent(&exp_kernel(), &grid)?;
    let elapsed = start.elapsed();
    let max_err = grid
        .nodes()
        .zip(res.psi())
        .map(|(t, p)| (p - (-t).exp()).abs())
        .fold(0.0, f64::max);
    let cum_err = (res.cum().last().unwrap() - 1.0).abs();
    Ok(Outcome::new(
        max_err <= 1e-4 && cum_err <= 1e-3 && within(elapsed, 5),
        format!("max|psi - e^-t| = {max_err:.3e}, |cum - 1| = {cum_err:.3e}, {elapsed:.2?}"),
    ))
}

fn l1_power_law() -> Result<Outcome> {
    let cases = [
        ("exponential", exp_kernel(), Grid::with_horizon(25.0, 2e-3)?),
        (
            "power-law",
            Kernel::power_law(1.5, 1.0, 4.0)?,
            Grid::with_horizon(60.0, 4e-3)?,
        ),
    ];
    let mut worst = 0.0f64;
    for (_, kernel, grid) in &cases {
        let phi = grid.sample(|t| kernel.at(t));
        let mut phi_n = phi.clone();
        for n in 1..=6 {
            if n > 1 {
                phi_n = trapezoid_convolution(&phi, &phi_n, grid.step());
            }
            let norm = *cumulative_trapezoid(&phi_n, grid.step()).last().unwrap();
            let want = kernel.l1_norm().powi(n);
            worst = worst.max(((norm - want) / want).abs());
        }
    }
    Ok(Outcome::new(
        worst <= 1e-4,
        format!("worst relative error {worst:.3e} over n <= 6"),
    ))
}

fn mu_factor() -> Result<Outcome> {
    let start = Instant::now();
    let est = mc_moment_estimates(&exp_params(2.0), 1.0, 1.0, 1.0, 200_000, 2024)?;
    let elapsed = start.elapsed();
    let var = est[&Quantity::CovIntensity];
    let base = 1.0 - (-1.0f64).exp();
    let z_with = var.z_score(2.0 * base);
    let z_without = var.z_score(base);
    Ok(Outcome::new(
        z_with <= 4.0 && z_without >= 10.0 && within(elapsed, 120),
        format!(
            "Var = {:.5} +- {:.5}; z(with mu) = {z_with:.2}, z(without mu) = {z_without:.1}, {elapsed:.2?}",
            var.value, var.std_error
        ),
    ))
}

fn full_validation() -> Result<Outcome> {
    let start = Instant::now();
    let params = exp_params(1.0);
    let res = resolvent(params.kernel(), &Grid::with_horizon(2.0, 1e-3)?)?;
    let rows = validate_moments(&params, &res, 1.0, 2.0, 100_000, 7)?;
    let elapsed = start.elapsed();
    let worst = rows.iter().map(|r| r.abs_z).fold(0.0, f64::max);
    Ok(Outcome::new(
        rows.len() == 6 && rows.iter().all(|r| r.passes(4.0)) && within(elapsed, 120),
        format!(
            "max |z| = {worst:.2} over {} quantities, {elapsed:.2?}",
            rows.len()
        ),
    ))
}

fn poisson_collapse() -> Result<Outcome> {
    let params = ModelParams::new(1.0, Kernel::zero())?;
    let res = resolvent(params.kernel(), &Grid::with_horizon(2.0, 1e-3)?)?;
    let analytic = [
        (moments::cov_count(&params, &res, 1.0, 2.0)?, 1.0),
        (moments::cov_intensity(&params, &res, 1.0, 2.0)?, 0.0),
        (
            moments::cov_mixed(&params, &res, 1.0, 2.0, MixedOrder::IntensityFirst)?,
            0.0,
        ),
        (
            moments::cov_mixed(&params, &res, 1.0, 2.0, MixedOrder::CountFirst)?,
            0.0,
        ),
    ];
    let exact_err = analytic
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let rows = validate_moments(&params, &res, 1.0, 2.0, 10_000, 5)?;
    let worst = rows.iter().map(|r| r.abs_z).fold(0.0, f64::max);
    Ok(Outcome::new(
        exact_err <= 1e-12 && rows.iter().all(|r| r.passes(4.0)),
        format!("max analytic error {exact_err:.1e}, MC max |z| = {worst:.2}"),
    ))
}

fn malliavin_suite() -> Result<Outcome> {
    let start = Instant::now();
    let params = exp_params(1.0);
    let t = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut zeros, mut bad_zero, mut theta_err) = (0usize, 0usize, 0.0f64);
    for n in 1..=4 {
        for _ in 0..200 {
            let mut times: Vec<f64> = (0..n)
                .map(|_| t * (0.001 + 0.998 * rng.random::<f64>()))
                .collect();
            times.sort_by(f64::total_cmp);
            let atoms: Vec<Atom> = times
                .iter()
                .map(|&s| Atom::new(s, (1.0 + n as f64) * rng.random::<f64>()))
                .collect();
            for zeta in [Zeta::One, Zeta::Phi] {
                // errors out if the two routes disagree beyond 1e-12
                let c = coefficient_c_n(&atoms, &params, zeta, t)?;
                if !in_support(&atoms, &params) {
                    zeros += 1;
                    if c != 0.0 {
                        bad_zero += 1;
                    }
                }
                let prod: f64 = times
                    .windows(2)
                    .map(|w| params.kernel().at(w[1] - w[0]))
                    .product();
                let closed = params.mu() * zeta.weight(params.kernel(), times[n - 1], t) * prod;
                let integral = theta_integral_c_n(&times, &params, zeta, t)?;
                theta_err = theta_err.max((integral - closed).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        bad_zero == 0 && theta_err <= 1e-12 && within(elapsed, 10),
        format!(
            "1600 coefficients agree; {zeros} off-support cases, {bad_zero} nonzero; theta error {theta_err:.1e}; {elapsed:.2?}"
        ),
    ))
}

fn shifted_expectation() -> Result<Outcome> {
    let est = mc_shifted_estimates(&exp_params(1.0), 1.0, &[0.5], 1.0, 100_000, 8)?;
    let z_lambda = est.mean_intensity.z_score(2.238_65);
    // count oracle: Simpson quadrature of the closed-form shifted mean
    let z_count = est.mean_count.z_score(2.761_348_781_458_809);
    Ok(Outcome::new(
        z_lambda <= 4.0 && z_count <= 4.0,
        format!(
            "intensity {:.5} (z = {z_lambda:.2}), count {:.5} (z = {z_count:.2})",
            est.mean_intensity.value, est.mean_count.value
        ),
    ))
}

fn chaos_truncation() -> Result<Outcome> {
    let params = exp_params(1.0);
    let grid = Grid::with_horizon(1.0, 1e-3)?;
    let res = resolvent(params.kernel(), &grid)?;
    let one = expectation_via_chaos(&params, 1.0, Zeta::One, 8, &grid)?;
    let phi = expectation_via_chaos(&params, 1.0, Zeta::Phi, 8, &grid)?;
    let gap_one = (one.value - moments::mean_count(&params, &res, 1.0)?).abs();
    let gap_phi = (phi.value - (moments::mean_intensity(&params, &res, 1.0)? - params.mu())).abs();
    Ok(Outcome::new(
        gap_one <= one.truncation_bound + 1e-3 && gap_phi <= phi.truncation_bound + 1e-3,
        format!(
            "count gap {gap_one:.2e} (bound {:.2e}), intensity gap {gap_phi:.2e} (bound {:.2e})",
            one.truncation_bound, phi.truncation_bound
        ),
    ))
}

fn diagonal_identities() -> Result<Outcome> {
    let h = 1e-3;
    let mut mixed_equal = true;
    let (mut second_err, mut diff_err) = (0.0f64, 0.0f64);
    for params in [
        exp_params(1.0),
        ModelParams::new(0.8, Kernel::power_law(1.5, 1.0, 4.0)?)?,
    ] {
        let res = resolvent(params.kernel(), &Grid::with_horizon(3.0, h)?)?;
        for t in [0.5, 1.0, 2.0] {
            let a = moments::cov_mixed(&params, &res, t, t, MixedOrder::IntensityFirst)?;
            let b = moments::cov_mixed(&params, &res, t, t, MixedOrder::CountFirst)?;
            mixed_equal &= a == b;
            let m = moments::mean_count(&params, &res, t)?;
            let second = moments::second_moment_count(&params, &res, t)?;
            let cov = moments::cov_count(&params, &res, t, t)?;
            second_err = second_err.max((second - m * m - cov).abs());
            let up = moments::mean_count(&params, &res, t + h)?;
            let down = moments::mean_count(&params, &res, t - h)?;
            let lam = moments::mean_intensity(&params, &res, t)?;
            diff_err = diff_err.max(((up - down) / (2.0 * h) - lam).abs());
        }
    }
    Ok(Outcome::new(
        mixed_equal && second_err <= 1e-10 && diff_err <= 1e-4,
        format!("mixed orders equal: {mixed_equal}; second moment gap {second_err:.1e}; derivative gap {diff_err:.1e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("resolvent correctness", resolvent_correctness),
        ("L1 power law", l1_power_law),
        ("mu-factor discrimination", mu_factor),
        ("full moment validation", full_validation),
        ("Poisson collapse", poisson_collapse),
        ("Malliavin suite", malliavin_suite),
        ("shifted expectation", shifted_expectation),
        ("chaos truncation", chaos_truncation),
        ("diagonal identities", diagonal_identities),
    ];
    let mut failed = 0;
    for (name, check) in criteria.iter() {
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {}", outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
