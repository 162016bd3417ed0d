//! Exact simulation of the Hawkes process and Monte Carlo estimation.
//!
//! The primary simulator uses the branching representation: immigrants
//! arrive as a Poisson process of rate `mu`, and every event independently
//! spawns children as an inhomogeneous Poisson process of rate
//! `Phi(. - parent)`. Thinning of the Poisson imbedding (Ogata) is kept as an
//! independent second simulator for nonincreasing kernels.
//!
//! Path `i` of a run with master seed `seed` draws from its own ChaCha8
//! stream `(seed, i)`, so results do not depend on how paths are scheduled
//! across threads.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;

use crate::error::{argument, HawkesError, Result};
use crate::format_float;
use crate::kernel::{Kernel, KernelShape, ModelParams};
use crate::moments::{self, MixedOrder, Quantity};
use crate::resolvent::ResolventTable;

/// Random stream of path `path` under master seed `seed`.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Event times of one realization on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    events: Vec<f64>,
    forced: Vec<bool>,
    horizon: f64,
}

impl SimulatedPath {
    fn from_marked(mut marked: Vec<(f64, bool)>, horizon: f64) -> Self {
        // stable: coincident times keep insertion order
        marked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (events, forced) = marked.into_iter().unzip();
        Self {
            events,
            forced,
            horizon,
        }
    }

    /// Event times in nondecreasing order.
    pub fn events(&self) -> &[f64] {
        &self.events
    }

    /// `forced()[i]` marks `events()[i]` as an added atom.
    pub fn forced(&self) -> &[bool] {
        &self.forced
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `H_t`: number of events in `[0, t]`.
    pub fn count(&self, t: f64) -> usize {
        self.events.partition_point(|e| *e <= t)
    }
}

/// `lambda_t = mu + sum_{e < t} Phi(t - e)`, a left limit.
pub fn intensity_on_path(path: &SimulatedPath, params: &ModelParams, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t <= path.horizon) {
        return Err(HawkesError::Range {
            time: t,
            horizon: path.horizon,
        });
    }
    Ok(intensity_before(&path.events, params, t))
}

fn intensity_before(events: &[f64], params: &ModelParams, t: f64) -> f64 {
    let kernel = params.kernel();
    let before = events.partition_point(|e| *e < t);
    params.mu()
        + events[..before]
            .iter()
            .map(|e| kernel.at(t - e))
            .sum::<f64>()
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(())
    } else {
        Err(argument(format!(
            "horizon must be finite and > 0, got {horizon}"
        )))
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as usize
}

/// Appends the direct children of an event at `parent` that land in
/// `(parent, horizon]`. `horizon` may be infinite.
fn push_children<R: Rng + ?Sized>(
    kernel: &Kernel,
    parent: f64,
    horizon: f64,
    rng: &mut R,
    out: &mut Vec<f64>,
) {
    let window = horizon - parent;
    if !(window > 0.0) {
        return;
    }
    match kernel.shape() {
        KernelShape::Exponential { alpha, beta } => {
            // exact inversion of the truncated integrated rate
            let reach = -(-beta * window).exp_m1();
            for _ in 0..poisson_count(alpha / beta * reach, rng) {
                let u: f64 = rng.random();
                out.push(parent - (-u * reach).ln_1p() / beta);
            }
        }
        KernelShape::PowerLaw { alpha, c, gamma } => {
            let a = 1.0 - gamma;
            let head = c.powf(a);
            let tail = (c + window).powf(a);
            let scale = alpha / (gamma - 1.0);
            for _ in 0..poisson_count(scale * (head - tail), rng) {
                let u: f64 = rng.random();
                let level = head - u * (head - tail);
                out.push(parent + level.powf(1.0 / a) - c);
            }
        }
        KernelShape::Tabulated { .. } => {
            let sup = kernel.sup();
            let support = kernel
                .support_end()
                .expect("tabulated kernels have bounded support");
            let span = window.min(support);
            for _ in 0..poisson_count(sup * span, rng) {
                let tau = span * rng.random::<f64>();
                if rng.random::<f64>() * sup < kernel.at(tau) {
                    out.push(parent + tau);
                }
            }
        }
    }
}

/// All descendants (children, grandchildren, ...) of the given roots inside
/// `(root, horizon]`, in generation order. The roots themselves are not
/// included.
pub fn descendants<R: Rng + ?Sized>(
    kernel: &Kernel,
    roots: &[f64],
    horizon: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::new();
    if kernel.is_zero() {
        return out;
    }
    let mut queue: VecDeque<f64> = roots.iter().copied().collect();
    let mut children = Vec::new();
    while let Some(parent) = queue.pop_front() {
        children.clear();
        push_children(kernel, parent, horizon, rng, &mut children);
        queue.extend(children.iter().copied());
        out.extend(children.iter().copied());
    }
    out
}

fn immigrants<R: Rng + ?Sized>(mu: f64, horizon: f64, rng: &mut R) -> Vec<f64> {
    (0..poisson_count(mu * horizon, rng))
        .map(|_| horizon * rng.random::<f64>())
        .collect()
}

/// One branching-method path drawn from `rng`.
pub fn simulate_hawkes_with<R: Rng + ?Sized>(
    params: &ModelParams,
    horizon: f64,
    rng: &mut R,
) -> Result<SimulatedPath> {
    check_horizon(horizon)?;
    let roots = immigrants(params.mu(), horizon, rng);
    let offspring = descendants(params.kernel(), &roots, horizon, rng);
    let marked = roots
        .into_iter()
        .chain(offspring)
        .map(|t| (t, false))
        .collect();
    Ok(SimulatedPath::from_marked(marked, horizon))
}

/// Branching-method path; identical inputs give an identical path.
pub fn simulate_hawkes(params: &ModelParams, horizon: f64, seed: u64) -> Result<SimulatedPath> {
    simulate_hawkes_with(params, horizon, &mut path_rng(seed, 0))
}

/// Counters from one thinning run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThinningStats {
    pub candidates: usize,
    pub accepted: usize,
    /// Largest `lambda / majorant` seen at a candidate; at most 1 when the
    /// majorant is valid.
    pub max_ratio: f64,
}

/// Ogata thinning path plus its acceptance statistics.
pub fn simulate_thinning_traced<R: Rng + ?Sized>(
    params: &ModelParams,
    horizon: f64,
    rng: &mut R,
) -> Result<(SimulatedPath, ThinningStats)> {
    check_horizon(horizon)?;
    let kernel = params.kernel();
    if !kernel.is_nonincreasing() {
        return Err(HawkesError::UnsupportedKernel(
            "thinning needs a nonincreasing kernel; use the branching simulator".into(),
        ));
    }
    let mut events: Vec<f64> = Vec::new();
    let mut stats = ThinningStats::default();
    let mut now = 0.0;
    loop {
        // right limit at `now`, valid until the next event since Phi is nonincreasing
        let majorant = params.mu() + events.iter().map(|e| kernel.at(now - e)).sum::<f64>();
        if !(majorant > 0.0) {
            break;
        }
        now += Exp::new(majorant).expect("positive rate").sample(rng);
        if now > horizon {
            break;
        }
        stats.candidates += 1;
        let lambda = intensity_before(&events, params, now);
        let ratio = lambda / majorant;
        debug_assert!(ratio <= 1.0 + 1e-12, "thinning majorant violated: {ratio}");
        stats.max_ratio = stats.max_ratio.max(ratio);
        if rng.random::<f64>() * majorant <= lambda {
            events.push(now);
            stats.accepted += 1;
        }
    }
    let forced = vec![false; events.len()];
    Ok((
        SimulatedPath {
            events,
            forced,
            horizon,
        },
        stats,
    ))
}

pub fn simulate_thinning_with<R: Rng + ?Sized>(
    params: &ModelParams,
    horizon: f64,
    rng: &mut R,
) -> Result<SimulatedPath> {
    simulate_thinning_traced(params, horizon, rng).map(|(path, _)| path)
}

/// Thinning path; equal in law to [`simulate_hawkes`].
pub fn simulate_thinning(params: &ModelParams, horizon: f64, seed: u64) -> Result<SimulatedPath> {
    simulate_thinning_with(params, horizon, &mut path_rng(seed, 0))
}

fn check_forced(forced: &[f64], horizon: f64) -> Result<()> {
    if let Some(bad) = forced.iter().find(|t| !(**t > 0.0 && **t <= horizon)) {
        return Err(argument(format!(
            "forced time {bad} outside (0, {horizon}]"
        )));
    }
    if forced.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(argument("forced times must be strictly increasing"));
    }
    Ok(())
}

/// A path under the add-points operator: a standard path, plus atoms forced
/// at `forced_times` (always accepted), plus the branching clusters they
/// seed.
pub fn simulate_shifted_with<R: Rng + ?Sized>(
    params: &ModelParams,
    horizon: f64,
    forced_times: &[f64],
    rng: &mut R,
) -> Result<SimulatedPath> {
    check_horizon(horizon)?;
    check_forced(forced_times, horizon)?;
    let base = simulate_hawkes_with(params, horizon, rng)?;
    let offspring = descendants(params.kernel(), forced_times, horizon, rng);
    let marked = base
        .events
        .into_iter()
        .map(|t| (t, false))
        .chain(forced_times.iter().map(|t| (*t, true)))
        .chain(offspring.into_iter().map(|t| (t, false)))
        .collect();
    Ok(SimulatedPath::from_marked(marked, horizon))
}

pub fn simulate_shifted(
    params: &ModelParams,
    horizon: f64,
    forced_times: &[f64],
    seed: u64,
) -> Result<SimulatedPath> {
    simulate_shifted_with(params, horizon, forced_times, &mut path_rng(seed, 0))
}

/// CSV with header `path_id,event_time,forced`.
pub fn write_paths_csv<W: Write>(paths: &[SimulatedPath], mut out: W) -> Result<()> {
    writeln!(out, "path_id,event_time,forced")?;
    for (id, path) in paths.iter().enumerate() {
        for (t, f) in path.events.iter().zip(&path.forced) {
            writeln!(out, "{id},{},{}", format_float(*t), u8::from(*f))?;
        }
    }
    Ok(())
}

/// Runs `f` once per path index on the path's own stream; output is in path
/// order regardless of thread count.
pub fn sample_paths<T, F>(n_paths: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| f(&mut path_rng(seed, i)))
        .collect()
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    let sq: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    pairwise_sum(&sq) / (values.len() - 1) as f64
}

impl McEstimate {
    /// Sample mean and `sd / sqrt(n)`.
    pub fn mean(samples: &[f64], seed: u64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(argument(format!("need at least 2 samples, got {n}")));
        }
        let mean = pairwise_sum(samples) / n as f64;
        let var = sample_variance(samples, mean);
        Ok(Self {
            value: mean,
            std_error: (var / n as f64).sqrt(),
            n_paths: n,
            seed,
        })
    }

    /// Unbiased sample covariance; the standard error is that of the mean of
    /// the centered products.
    pub fn covariance(x: &[f64], y: &[f64], seed: u64) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(argument("covariance samples must have equal length"));
        }
        if n < 2 {
            return Err(argument(format!("need at least 2 samples, got {n}")));
        }
        let mx = pairwise_sum(x) / n as f64;
        let my = pairwise_sum(y) / n as f64;
        let products: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
        let pm = pairwise_sum(&products) / n as f64;
        let var = sample_variance(&products, pm);
        Ok(Self {
            value: pm * n as f64 / (n - 1) as f64,
            std_error: (var / n as f64).sqrt(),
            n_paths: n,
            seed,
        })
    }

    /// `|value - reference| / std_error`; infinite when the error is zero and
    /// the values differ.
    pub fn z_score(&self, reference: f64) -> f64 {
        let gap = (self.value - reference).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.std_error
        }
    }
}

/// Per-path observations used by [`mc_moment_estimates`].
#[derive(Debug, Clone, Copy, PartialEq)]
struct Observation {
    count_s: f64,
    count_t: f64,
    intensity_s: f64,
    intensity_t: f64,
}

/// Empirical counterparts of every [`Quantity`] at `(s, t)`, from
/// `n_paths` branching-method paths on `[0, horizon]`. Single-time
/// quantities are taken at `t`.
pub fn mc_moment_estimates(
    params: &ModelParams,
    horizon: f64,
    s: f64,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<BTreeMap<Quantity, McEstimate>> {
    check_horizon(horizon)?;
    if !(0.0 <= s && s <= t && t <= horizon) {
        return Err(argument(format!(
            "need 0 <= s <= t <= horizon, got s={s}, t={t}, horizon={horizon}"
        )));
    }
    if n_paths < 2 {
        return Err(argument(format!("need at least 2 paths, got {n_paths}")));
    }
    let obs = sample_paths(n_paths, seed, |rng| {
        let path = simulate_hawkes_with(params, horizon, rng).expect("horizon validated above");
        Observation {
            count_s: path.count(s) as f64,
            count_t: path.count(t) as f64,
            intensity_s: intensity_before(&path.events, params, s),
            intensity_t: intensity_before(&path.events, params, t),
        }
    });
    let col = |f: fn(&Observation) -> f64| obs.iter().map(f).collect::<Vec<f64>>();
    let (hs, ht) = (col(|o| o.count_s), col(|o| o.count_t));
    let (ls, lt) = (col(|o| o.intensity_s), col(|o| o.intensity_t));
    let ht_sq: Vec<f64> = ht.iter().map(|h| h * h).collect();

    let mut out = BTreeMap::new();
    out.insert(Quantity::MeanCount, McEstimate::mean(&ht, seed)?);
    out.insert(Quantity::MeanIntensity, McEstimate::mean(&lt, seed)?);
    out.insert(Quantity::CovCount, McEstimate::covariance(&hs, &ht, seed)?);
    out.insert(
        Quantity::CovIntensity,
        McEstimate::covariance(&ls, &lt, seed)?,
    );
    out.insert(
        Quantity::CovIntensityCount,
        McEstimate::covariance(&ls, &ht, seed)?,
    );
    out.insert(
        Quantity::CovCountIntensity,
        McEstimate::covariance(&hs, &lt, seed)?,
    );
    out.insert(Quantity::SecondMomentCount, McEstimate::mean(&ht_sq, seed)?);
    Ok(out)
}

/// Monte Carlo means of `lambda_t` and `H_t` under added atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedEstimates {
    pub mean_intensity: McEstimate,
    pub mean_count: McEstimate,
}

pub fn mc_shifted_estimates(
    params: &ModelParams,
    horizon: f64,
    forced_times: &[f64],
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<ShiftedEstimates> {
    check_horizon(horizon)?;
    check_forced(forced_times, horizon)?;
    if !(0.0 <= t && t <= horizon) {
        return Err(HawkesError::Range { time: t, horizon });
    }
    let obs = sample_paths(n_paths, seed, |rng| {
        let path = simulate_shifted_with(params, horizon, forced_times, rng)
            .expect("arguments validated above");
        (
            intensity_before(&path.events, params, t),
            path.count(t) as f64,
        )
    });
    let (lambda, count): (Vec<f64>, Vec<f64>) = obs.into_iter().unzip();
    Ok(ShiftedEstimates {
        mean_intensity: McEstimate::mean(&lambda, seed)?,
        mean_count: McEstimate::mean(&count, seed)?,
    })
}

/// One line of a Monte Carlo versus closed-form comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationRow {
    pub quantity: Quantity,
    pub s: f64,
    pub t: f64,
    pub estimate: McEstimate,
    pub analytic: f64,
    pub abs_z: f64,
}

impl ValidationRow {
    /// Passes when `|z| <= z_max`.
    pub fn passes(&self, z_max: f64) -> bool {
        self.abs_z <= z_max
    }
}

/// The six quantities compared in [`validate_moments`]: both means at `t` and
/// the four covariances at `(s, t)`.
pub const VALIDATED: [Quantity; 6] = [
    Quantity::MeanCount,
    Quantity::MeanIntensity,
    Quantity::CovCount,
    Quantity::CovIntensity,
    Quantity::CovIntensityCount,
    Quantity::CovCountIntensity,
];

/// Monte Carlo estimates against closed forms for every quantity in
/// [`VALIDATED`]. The simulation horizon is `t`.
pub fn validate_moments(
    params: &ModelParams,
    res: &ResolventTable,
    s: f64,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<ValidationRow>> {
    let estimates = mc_moment_estimates(params, t, s, t, n_paths, seed)?;
    VALIDATED
        .iter()
        .map(|&q| {
            let analytic = match q {
                Quantity::MeanCount => moments::mean_count(params, res, t)?,
                Quantity::MeanIntensity => moments::mean_intensity(params, res, t)?,
                Quantity::CovCount => moments::cov_count(params, res, s, t)?,
                Quantity::CovIntensity => moments::cov_intensity(params, res, s, t)?,
                Quantity::CovIntensityCount => {
                    moments::cov_mixed(params, res, s, t, MixedOrder::IntensityFirst)?
                }
                Quantity::CovCountIntensity => {
                    moments::cov_mixed(params, res, s, t, MixedOrder::CountFirst)?
                }
                Quantity::SecondMomentCount => moments::second_moment_count(params, res, t)?,
            };
            let estimate = estimates[&q];
            Ok(ValidationRow {
                quantity: q,
                s: if q.is_two_time() { s } else { t },
                t,
                estimate,
                analytic,
                abs_z: estimate.z_score(analytic),
            })
        })
        .collect()
}

/// CSV with header `quantity,s,t,mc_value,std_error,analytic,abs_z`.
pub fn write_validation_csv<W: Write>(rows: &[ValidationRow], mut out: W) -> Result<()> {
    writeln!(out, "quantity,s,t,mc_value,std_error,analytic,abs_z")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.quantity,
            format_float(r.s),
            format_float(r.t),
            format_float(r.estimate.value),
            format_float(r.estimate.std_error),
            format_float(r.analytic),
            format_float(r.abs_z)
        )?;
    }
    Ok(())
}
