//! Pathwise derivatives and pseudo-chaotic coefficients on finite
//! configurations of the Poisson imbedding.
//!
//! A configuration is a finite set of atoms `(t, theta)` in time-mark space.
//! Atom `k` is accepted as an event of the Hawkes process when
//! `theta_k <= lambda_{t_k}`, where the intensity only sees the accepted
//! atoms strictly before `t_k`. Every functional here (intensity, `X^zeta`,
//! acceptance indicators) is evaluated by running that recursion over the
//! atoms in time order.
//!
//! `X^zeta_t = sum_{accepted k} zeta(t - t_k)` with `zeta = 1` (the counting
//! process, atoms with `t_k <= t`) or `zeta = Phi` (the intensity minus `mu`,
//! atoms with `t_k < t`).

use crate::error::{argument, HawkesError, Result};
use crate::kernel::{Kernel, ModelParams};
use crate::resolvent::{
    cumulative_trapezoid, trapezoid, trapezoid_convolution, Grid, ResolventTable,
};

/// Largest atom count accepted by [`pathwise_derivative`] (2^n subsets).
pub const MAX_DERIVATIVE_ORDER: usize = 20;

/// A point `(t, theta)` of time-mark space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub theta: f64,
}

impl Atom {
    pub fn new(t: f64, theta: f64) -> Self {
        Self { t, theta }
    }
}

/// Finite set of atoms, stored in strictly increasing time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Configuration {
    atoms: Vec<Atom>,
}

impl Configuration {
    /// Sorts `atoms` by time; rejects `t <= 0`, `theta < 0` and repeated times.
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self> {
        if let Some(a) = atoms
            .iter()
            .find(|a| !(a.t > 0.0 && a.t.is_finite() && a.theta >= 0.0 && a.theta.is_finite()))
        {
            return Err(argument(format!("invalid atom ({}, {})", a.t, a.theta)));
        }
        atoms.sort_by(|a, b| a.t.total_cmp(&b.t));
        check_ordered(&atoms)?;
        Ok(Self { atoms })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

fn check_ordered(atoms: &[Atom]) -> Result<()> {
    if atoms.windows(2).any(|w| !(w[0].t < w[1].t)) {
        return Err(argument("atoms must be strictly increasing in time"));
    }
    Ok(())
}

/// The weight function of `X^zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zeta {
    /// `zeta = 1`: `X` is the counting process.
    One,
    /// `zeta = Phi`: `X` is the intensity minus `mu`.
    Phi,
}

impl Zeta {
    /// `zeta(t - s)` for an atom at `s`, zero when the atom is outside the
    /// window of `X_t` (`s <= t` for `One`, `s < t` for `Phi`).
    pub fn weight(self, kernel: &Kernel, s: f64, t: f64) -> f64 {
        match self {
            Zeta::One if s <= t => 1.0,
            Zeta::Phi if s < t => kernel.at(t - s),
            _ => 0.0,
        }
    }
}

/// Acceptance flags of time-ordered `atoms`.
pub fn acceptance(atoms: &[Atom], params: &ModelParams) -> Vec<bool> {
    let kernel = params.kernel();
    let mut accepted: Vec<bool> = Vec::with_capacity(atoms.len());
    for (k, atom) in atoms.iter().enumerate() {
        let lambda = params.mu()
            + atoms[..k]
                .iter()
                .zip(&accepted)
                .filter(|(_, a)| **a)
                .map(|(prev, _)| kernel.at(atom.t - prev.t))
                .sum::<f64>();
        accepted.push(atom.theta <= lambda);
    }
    accepted
}

/// `lambda_t` on time-ordered atoms.
pub fn intensity_of(atoms: &[Atom], params: &ModelParams, t: f64) -> f64 {
    let kernel = params.kernel();
    params.mu()
        + atoms
            .iter()
            .zip(acceptance(atoms, params))
            .filter(|(a, acc)| *acc && a.t < t)
            .map(|(a, _)| kernel.at(t - a.t))
            .sum::<f64>()
}

/// `X^zeta_t` on time-ordered atoms.
pub fn x_of(atoms: &[Atom], params: &ModelParams, zeta: Zeta, t: f64) -> f64 {
    atoms
        .iter()
        .zip(acceptance(atoms, params))
        .filter(|(_, acc)| *acc)
        .map(|(a, _)| zeta.weight(params.kernel(), a.t, t))
        .sum()
}

pub fn eval_intensity_config(config: &Configuration, params: &ModelParams, t: f64) -> f64 {
    intensity_of(config.atoms(), params, t)
}

pub fn eval_x_config(config: &Configuration, params: &ModelParams, zeta: Zeta, t: f64) -> f64 {
    x_of(config.atoms(), params, zeta, t)
}

/// `D^n F = sum_{J subset of atoms} (-1)^{n - |J|} F(J)`, with `F` applied to
/// each time-ordered sub-configuration. `n = 0` gives `F(empty)`.
pub fn pathwise_derivative<F>(functional: F, atoms: &[Atom]) -> Result<f64>
where
    F: Fn(&[Atom]) -> f64,
{
    let n = atoms.len();
    if n > MAX_DERIVATIVE_ORDER {
        return Err(HawkesError::Size {
            n,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    check_ordered(atoms)?;
    let mut subset = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(1 << n.saturating_sub(1));
    let mut minus = Vec::with_capacity(1 << n.saturating_sub(1));
    for mask in 0u32..(1u32 << n) {
        subset.clear();
        subset.extend((0..n).filter(|i| mask & (1 << i) != 0).map(|i| atoms[i]));
        let value = functional(&subset);
        if (n - subset.len()).is_multiple_of(2) {
            plus.push(value);
        } else {
            minus.push(value);
        }
    }
    // sorted sums: terms that cancel as multisets give exactly zero
    plus.sort_by(f64::total_cmp);
    minus.sort_by(f64::total_cmp);
    Ok(plus.iter().sum::<f64>() - minus.iter().sum::<f64>())
}

fn consistency(a: f64, b: f64, what: &str) -> Result<()> {
    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
        return Err(HawkesError::InternalConsistency(format!(
            "{what}: routes disagree ({a} vs {b})"
        )));
    }
    Ok(())
}

fn check_window(atoms: &[Atom], t: f64) -> Result<()> {
    check_ordered(atoms)?;
    match atoms.last() {
        Some(last) if last.t > t => Err(argument(format!(
            "last atom at {} is after t = {t}",
            last.t
        ))),
        _ => Ok(()),
    }
}

/// Chaos coefficient `c_n^{zeta,t}` at time-ordered atoms, computed both as
/// `D^n X^zeta_t` and as `zeta(t - t_n) D^{n-1} 1{theta_n <= lambda_{t_n}}`.
pub fn coefficient_c_n(atoms: &[Atom], params: &ModelParams, zeta: Zeta, t: f64) -> Result<f64> {
    let last = *atoms
        .last()
        .ok_or_else(|| argument("c_n needs at least one atom"))?;
    check_window(atoms, t)?;
    let direct = pathwise_derivative(|sub| x_of(sub, params, zeta, t), atoms)?;
    let head = &atoms[..atoms.len() - 1];
    let accepted_last = pathwise_derivative(
        |sub| f64::from(u8::from(last.theta <= intensity_of(sub, params, last.t))),
        head,
    )?;
    let factored = zeta.weight(params.kernel(), last.t, t) * accepted_last;
    consistency(direct, factored, "c_n")?;
    Ok(direct)
}

/// Whether the marks lie in the support region
/// `theta_i <= mu + sum_{j<i} Phi(t_i - t_j)` for every `i`.
pub fn in_support(atoms: &[Atom], params: &ModelParams) -> bool {
    let kernel = params.kernel();
    atoms.iter().enumerate().all(|(i, a)| {
        a.theta <= params.mu() + atoms[..i].iter().map(|p| kernel.at(a.t - p.t)).sum::<f64>()
    })
}

/// `int c_n^{zeta,t} dtheta_1 .. dtheta_n` at time-ordered `times`, equal to
/// `mu zeta(t - t_n) prod_{i>=2} Phi(t_i - t_{i-1})`.
///
/// The closed form is checked against an exact evaluation of the integral:
/// the innermost mark is integrated with `int 1{theta <= a} dtheta = a`,
/// which turns the integrand into `zeta(t - t_n) D^{n-1} lambda_{t_n}`, and
/// the remaining marks are integrated one at a time as piecewise-constant
/// functions whose breakpoints are the intensities that predecessors can
/// produce.
pub fn theta_integral_c_n(times: &[f64], params: &ModelParams, zeta: Zeta, t: f64) -> Result<f64> {
    let n = times.len();
    if n == 0 {
        return Err(argument("theta integral needs at least one time"));
    }
    if n > MAX_DERIVATIVE_ORDER {
        return Err(HawkesError::Size {
            n,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    let mut atoms: Vec<Atom> = times.iter().map(|&s| Atom::new(s, 0.0)).collect();
    check_window(&atoms, t)?;
    let kernel = params.kernel();
    let closed = params.mu()
        * zeta.weight(kernel, times[n - 1], t)
        * times
            .windows(2)
            .map(|w| kernel.at(w[1] - w[0]))
            .product::<f64>();

    let last_weight = zeta.weight(kernel, times[n - 1], t);
    let t_last = times[n - 1];
    let leaf = |head: &[Atom]| -> Result<f64> {
        Ok(last_weight * pathwise_derivative(|sub| intensity_of(sub, params, t_last), head)?)
    };
    let recursive = integrate_marks(&mut atoms[..n - 1], 0, params, &leaf)?;
    consistency(closed, recursive, "theta integral of c_n")?;
    Ok(closed)
}

/// Integrates `leaf(atoms)` over the marks of `atoms[level..]`.
fn integrate_marks(
    atoms: &mut [Atom],
    level: usize,
    params: &ModelParams,
    leaf: &dyn Fn(&[Atom]) -> Result<f64>,
) -> Result<f64> {
    if level == atoms.len() {
        return leaf(atoms);
    }
    // intensities at t_level reachable from any subset of earlier atoms
    let earlier = &atoms[..level];
    let t_level = atoms[level].t;
    let mut cuts: Vec<f64> = (0u32..(1u32 << level))
        .map(|mask| {
            let sub: Vec<Atom> = (0..level)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| earlier[i])
                .collect();
            intensity_of(&sub, params, t_level)
        })
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    let mut lower = 0.0;
    for &upper in &cuts {
        if upper > lower {
            atoms[level].theta = 0.5 * (lower + upper);
            total += (upper - lower) * integrate_marks(atoms, level + 1, params, leaf)?;
        }
        lower = upper;
    }
    // above every cut the atom is never accepted and the integrand must vanish
    atoms[level].theta = lower + 1.0;
    let beyond = integrate_marks(atoms, level + 1, params, leaf)?;
    if beyond.abs() > 1e-12 * (1.0 + total.abs()) {
        return Err(HawkesError::InternalConsistency(format!(
            "integrand does not vanish for large marks ({beyond})"
        )));
    }
    Ok(total)
}

fn forced_nodes(res: &ResolventTable, forced_times: &[f64], it: usize) -> Result<Vec<usize>> {
    if forced_times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(argument("forced times must be strictly increasing"));
    }
    forced_times
        .iter()
        .map(|&s| {
            if !(s > 0.0) {
                return Err(argument(format!("forced time {s} must be > 0")));
            }
            let k = res.grid().snap(s)?.index;
            Ok(k.min(it + 1))
        })
        .collect()
}

/// `E[lambda_t]` with atoms added at `forced_times`:
/// `mu (1 + I(t)) + sum_j Psi(t - t_j) 1{t >= t_j}`.
pub fn shifted_mean_intensity(
    params: &ModelParams,
    res: &ResolventTable,
    forced_times: &[f64],
    t: f64,
) -> Result<f64> {
    let it = res.grid().snap(t)?.index;
    let shift: f64 = forced_nodes(res, forced_times, it)?
        .into_iter()
        .filter(|&k| k <= it)
        .map(|k| res.psi()[it - k])
        .sum();
    Ok(params.mu() * (1.0 + res.cum()[it]) + shift)
}

/// `E[X^zeta_t]` with atoms added at `forced_times`:
/// `int_0^t zeta(t-u) phi(u) du + sum_i zeta(t - t_i)` with
/// `phi(u) = mu (1 + I(u)) + sum_j Psi(u - t_j) 1{u >= t_j}`.
///
/// The quadrature is split at each forced time, where `phi` jumps.
pub fn shifted_mean_x(
    params: &ModelParams,
    res: &ResolventTable,
    zeta: Zeta,
    forced_times: &[f64],
    t: f64,
) -> Result<f64> {
    let grid = res.grid();
    let it = grid.snap(t)?.index;
    let nodes = forced_nodes(res, forced_times, it)?;
    if let Some(s) = forced_times.iter().find(|&&s| s > t) {
        return Err(argument(format!("forced time {s} is after t = {t}")));
    }
    let kernel = params.kernel();
    let h = grid.step();
    let weight = |u: usize| match zeta {
        Zeta::One => 1.0,
        Zeta::Phi => kernel.at(grid.node(it - u)),
    };
    let (psi, cum) = (res.psi(), res.cum());

    let base: Vec<f64> = (0..=it)
        .map(|u| weight(u) * params.mu() * (1.0 + cum[u]))
        .collect();
    let mut total = trapezoid(&base, h, it);
    for &k in &nodes {
        let tail: Vec<f64> = (k..=it).map(|u| weight(u) * psi[u - k]).collect();
        total += trapezoid(&tail, h, it - k);
        total += zeta.weight(kernel, grid.node(k), grid.node(it));
    }
    Ok(total)
}

/// Truncated chaos expansion of `E[X^zeta_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosExpectation {
    /// Sum of the first `terms.len()` terms.
    pub value: f64,
    /// `terms[n-1]` is the order-`n` contribution.
    pub terms: Vec<f64>,
    /// Upper bound on the neglected orders.
    pub truncation_bound: f64,
}

/// `E[X^zeta_t] ~ mu sum_{n<=order} int_{0<t_1<..<t_n<t} zeta(t-t_n) prod Phi(t_i - t_{i-1})`.
///
/// Each simplex integral is reduced to
/// `int_0^t zeta(t-u) (int_0^u Phi_{n-1}(u-r) dr) du` (with the inner factor
/// equal to 1 for `n = 1`), so only one-dimensional quadratures on `grid` are
/// needed. The bound on the neglected orders is
/// `mu t ||Phi||^order / (1 - ||Phi||)` for `zeta = 1` and
/// `mu ||Phi||^(order+1) / (1 - ||Phi||)` for `zeta = Phi`.
pub fn expectation_via_chaos(
    params: &ModelParams,
    t: f64,
    zeta: Zeta,
    order: usize,
    grid: &Grid,
) -> Result<ChaosExpectation> {
    if order == 0 {
        return Err(argument("truncation order must be >= 1"));
    }
    let it = grid.snap(t)?.index;
    let kernel = params.kernel();
    let h = grid.step();
    let t_used = grid.node(it);
    let phi = grid.sample(|s| kernel.at(s));
    let weight: Vec<f64> = (0..=it)
        .map(|u| match zeta {
            Zeta::One => 1.0,
            Zeta::Phi => kernel.at(t_used - grid.node(u)),
        })
        .collect();

    let mut terms = Vec::with_capacity(order);
    let mut phi_n = phi.clone();
    for n in 1..=order {
        let inner: Vec<f64> = if n == 1 {
            vec![1.0; it + 1]
        } else {
            if n > 2 {
                phi_n = trapezoid_convolution(&phi, &phi_n, h);
            }
            cumulative_trapezoid(&phi_n[..=it], h)
        };
        let integrand: Vec<f64> = weight.iter().zip(&inner).map(|(w, c)| w * c).collect();
        terms.push(params.mu() * trapezoid(&integrand, h, it));
    }
    let norm = kernel.l1_norm();
    let truncation_bound = match zeta {
        Zeta::One => params.mu() * t_used * norm.powi(order as i32) / (1.0 - norm),
        Zeta::Phi => params.mu() * norm.powi(order as i32 + 1) / (1.0 - norm),
    };
    Ok(ChaosExpectation {
        value: terms.iter().sum(),
        terms,
        truncation_bound,
    })
}
