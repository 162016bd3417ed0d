//! Closed-form means and covariances of `H` and `lambda`.
//!
//! Every inner integral of the form `int_v^s Psi(y - v) dy` or
//! `int_0^v Psi(v - w) dw` is a lookup of the running integral `I` of the
//! resolvent, so each quantity is a single trapezoid over the grid nodes in
//! `[0, s]`.
//!
//! Requested times are snapped to the nearest grid node. [`evaluate`]
//! reports the snap distance; the scalar helpers drop it.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{argument, HawkesError, Result};
use crate::format_float;
use crate::kernel::ModelParams;
use crate::resolvent::{trapezoid, ResolventTable};

/// The statistics available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    /// `E[H_t]`
    MeanCount,
    /// `E[lambda_t]`
    MeanIntensity,
    /// `Cov(H_s, H_t)`
    CovCount,
    /// `Cov(lambda_s, lambda_t)`
    CovIntensity,
    /// `Cov(lambda_s, H_t)`
    CovIntensityCount,
    /// `Cov(H_s, lambda_t)`
    CovCountIntensity,
    /// `E[H_t^2]`
    SecondMomentCount,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::MeanCount,
        Quantity::MeanIntensity,
        Quantity::CovCount,
        Quantity::CovIntensity,
        Quantity::CovIntensityCount,
        Quantity::CovCountIntensity,
        Quantity::SecondMomentCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::MeanCount => "mean_count",
            Quantity::MeanIntensity => "mean_intensity",
            Quantity::CovCount => "cov_count",
            Quantity::CovIntensity => "cov_intensity",
            Quantity::CovIntensityCount => "cov_intensity_count",
            Quantity::CovCountIntensity => "cov_count_intensity",
            Quantity::SecondMomentCount => "second_moment_count",
        }
    }

    /// Whether the quantity depends on the pair `(s, t)` rather than `t` alone.
    pub fn is_two_time(self) -> bool {
        matches!(
            self,
            Quantity::CovCount
                | Quantity::CovIntensity
                | Quantity::CovIntensityCount
                | Quantity::CovCountIntensity
        )
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = HawkesError;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| argument(format!("unknown quantity {s:?}")))
    }
}

/// Which factor of a mixed covariance is the intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedOrder {
    /// `Cov(lambda_s, H_t)`
    IntensityFirst,
    /// `Cov(H_s, lambda_t)`
    CountFirst,
}

impl MixedOrder {
    pub fn transposed(self) -> Self {
        match self {
            MixedOrder::IntensityFirst => MixedOrder::CountFirst,
            MixedOrder::CountFirst => MixedOrder::IntensityFirst,
        }
    }
}

fn node(res: &ResolventTable, t: f64) -> Result<usize> {
    Ok(res.grid().snap(t)?.index)
}

fn ordered_nodes(res: &ResolventTable, s: f64, t: f64) -> Result<(usize, usize)> {
    let (is, it) = (node(res, s)?, node(res, t)?);
    if is > it {
        return Err(argument(format!("expected s <= t, got s={s}, t={t}")));
    }
    Ok((is, it))
}

/// `mu * trapezoid_{v in [0, s]} f(v)` with `f` given node indices.
fn weighted_integral(
    params: &ModelParams,
    res: &ResolventTable,
    is: usize,
    f: impl Fn(usize) -> f64,
) -> f64 {
    let values: Vec<f64> = (0..=is).map(f).collect();
    params.mu() * trapezoid(&values, res.grid().step(), is)
}

/// `E[lambda_t] = mu (1 + I(t))`.
pub fn mean_intensity(params: &ModelParams, res: &ResolventTable, t: f64) -> Result<f64> {
    let it = node(res, t)?;
    Ok(params.mu() * (1.0 + res.cum()[it]))
}

/// `E[H_t] = mu int_0^t (1 + I(u)) du`.
pub fn mean_count(params: &ModelParams, res: &ResolventTable, t: f64) -> Result<f64> {
    let it = node(res, t)?;
    let cum = res.cum();
    Ok(weighted_integral(params, res, it, |u| 1.0 + cum[u]))
}

/// `Cov(H_s, H_t) = mu int_0^s (1 + I(v)) (1 + I(s-v)) (1 + I(t-v)) dv`, `s <= t`.
pub fn cov_count(params: &ModelParams, res: &ResolventTable, s: f64, t: f64) -> Result<f64> {
    let (is, it) = ordered_nodes(res, s, t)?;
    let cum = res.cum();
    Ok(weighted_integral(params, res, is, |v| {
        (1.0 + cum[v]) * (1.0 + cum[is - v]) * (1.0 + cum[it - v])
    }))
}

/// `Cov(lambda_s, lambda_t) = mu int_0^s Psi(s-v) Psi(t-v) (1 + I(v)) dv`, `s <= t`.
///
/// The leading `mu` is the one carried through the derivation of this
/// identity; the commonly displayed form omits it. Linear scaling in `mu` is
/// confirmed by the Poisson limit and by simulation.
pub fn cov_intensity(params: &ModelParams, res: &ResolventTable, s: f64, t: f64) -> Result<f64> {
    let (is, it) = ordered_nodes(res, s, t)?;
    let (psi, cum) = (res.psi(), res.cum());
    Ok(weighted_integral(params, res, is, |v| {
        psi[is - v] * psi[it - v] * (1.0 + cum[v])
    }))
}

/// Mixed covariance for `s <= t`, with the same leading `mu` as
/// [`cov_intensity`]:
///
/// - `Cov(lambda_s, H_t) = mu int_0^s Psi(s-v) (1 + I(v)) (1 + I(t-v)) dv`
/// - `Cov(H_s, lambda_t) = mu int_0^s Psi(t-v) (1 + I(v)) (1 + I(s-v)) dv`
pub fn cov_mixed(
    params: &ModelParams,
    res: &ResolventTable,
    s: f64,
    t: f64,
    order: MixedOrder,
) -> Result<f64> {
    let (is, it) = ordered_nodes(res, s, t)?;
    let (psi, cum) = (res.psi(), res.cum());
    Ok(match order {
        MixedOrder::IntensityFirst => weighted_integral(params, res, is, |v| {
            psi[is - v] * (1.0 + cum[v]) * (1.0 + cum[it - v])
        }),
        MixedOrder::CountFirst => weighted_integral(params, res, is, |v| {
            psi[it - v] * (1.0 + cum[v]) * (1.0 + cum[is - v])
        }),
    })
}

/// `E[H_t^2] = E[H_t]^2 + mu int_0^t (1 + I(v)) (1 + I(t-v))^2 dv`.
pub fn second_moment_count(params: &ModelParams, res: &ResolventTable, t: f64) -> Result<f64> {
    let it = node(res, t)?;
    let cum = res.cum();
    let mean = mean_count(params, res, t)?;
    let var = weighted_integral(params, res, it, |v| {
        (1.0 + cum[v]) * (1.0 + cum[it - v]).powi(2)
    });
    Ok(mean * mean + var)
}

/// One closed-form query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRequest {
    pub quantity: Quantity,
    pub s: f64,
    pub t: f64,
}

/// Result of a query, at the grid nodes actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentValue {
    pub quantity: Quantity,
    pub s: f64,
    pub t: f64,
    pub value: f64,
    /// Largest distance between a requested time and its grid node.
    pub snap_distance: f64,
}

/// Evaluates `request`, normalizing `s > t` by swapping the arguments (and
/// the factor order for mixed covariances). Single-time quantities ignore `s`.
pub fn evaluate(
    params: &ModelParams,
    res: &ResolventTable,
    request: MomentRequest,
) -> Result<MomentValue> {
    let grid = res.grid();
    let (ss, st) = (grid.snap(request.s)?, grid.snap(request.t)?);
    let quantity = request.quantity;
    let (value, s, t, snap_distance) = if quantity.is_two_time() {
        (
            two_time(params, res, quantity, ss.time, st.time)?,
            ss.time,
            st.time,
            ss.distance.max(st.distance),
        )
    } else {
        let v = match quantity {
            Quantity::MeanCount => mean_count(params, res, st.time)?,
            Quantity::MeanIntensity => mean_intensity(params, res, st.time)?,
            Quantity::SecondMomentCount => second_moment_count(params, res, st.time)?,
            _ => unreachable!("two-time quantities handled above"),
        };
        (v, st.time, st.time, st.distance)
    };
    Ok(MomentValue {
        quantity,
        s,
        t,
        value,
        snap_distance,
    })
}

fn two_time(
    params: &ModelParams,
    res: &ResolventTable,
    q: Quantity,
    s: f64,
    t: f64,
) -> Result<f64> {
    let (lo, hi, swapped) = if s <= t { (s, t, false) } else { (t, s, true) };
    let mixed = |order: MixedOrder| {
        let order = if swapped { order.transposed() } else { order };
        cov_mixed(params, res, lo, hi, order)
    };
    match q {
        Quantity::CovCount => cov_count(params, res, lo, hi),
        Quantity::CovIntensity => cov_intensity(params, res, lo, hi),
        Quantity::CovIntensityCount => mixed(MixedOrder::IntensityFirst),
        Quantity::CovCountIntensity => mixed(MixedOrder::CountFirst),
        other => Err(argument(format!("{other} is not a covariance"))),
    }
}

/// A covariance evaluated on every `(s, t)` pair of two node lists.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSurface {
    pub quantity: Quantity,
    pub s_nodes: Vec<f64>,
    pub t_nodes: Vec<f64>,
    /// `values[i][j]` is the quantity at `(s_nodes[i], t_nodes[j])`.
    pub values: Vec<Vec<f64>>,
}

impl CovarianceSurface {
    /// CSV with header `s,t,value`, row-major in `s`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,t,value")?;
        for (s, row) in self.s_nodes.iter().zip(&self.values) {
            for (t, v) in self.t_nodes.iter().zip(row) {
                writeln!(
                    out,
                    "{},{},{}",
                    format_float(*s),
                    format_float(*t),
                    format_float(*v)
                )?;
            }
        }
        Ok(())
    }
}

pub fn cov_surface(
    params: &ModelParams,
    res: &ResolventTable,
    s_nodes: &[f64],
    t_nodes: &[f64],
    quantity: Quantity,
) -> Result<CovarianceSurface> {
    if !quantity.is_two_time() {
        return Err(argument(format!("{quantity} is not a covariance")));
    }
    let values = s_nodes
        .par_iter()
        .map(|&s| {
            t_nodes
                .iter()
                .map(|&t| two_time(params, res, quantity, s, t))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CovarianceSurface {
        quantity,
        s_nodes: s_nodes.to_vec(),
        t_nodes: t_nodes.to_vec(),
        values,
    })
}
