//! Iterated convolutions of the kernel, the resolvent `Psi = sum_n Phi_n`,
//! and linear Volterra equations of the second kind on a uniform grid.
//!
//! Every convolution uses the trapezoidal rule with half weights at both
//! endpoints. The resolvent is obtained by forward substitution of the
//! discretized equation `Psi = Phi + Phi * Psi`, one node at a time.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{argument, HawkesError, Result};
use crate::format_float;
use crate::kernel::Kernel;

/// Uniform nodes `t_k = k * step`, `k = 0..n_nodes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    step: f64,
    n_nodes: usize,
}

/// Grid node nearest to a requested time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snap {
    pub index: usize,
    pub time: f64,
    /// `|requested - time|`.
    pub distance: f64,
}

impl Grid {
    pub fn new(step: f64, n_nodes: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(argument(format!(
                "grid step must be finite and > 0, got {step}"
            )));
        }
        if n_nodes < 2 {
            return Err(argument(format!(
                "grid needs at least 2 nodes, got {n_nodes}"
            )));
        }
        Ok(Self { step, n_nodes })
    }

    /// Grid ending exactly at `horizon`, with step as close to `step` as the
    /// node count allows.
    pub fn with_horizon(horizon: f64, step: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(argument(format!(
                "horizon must be finite and > 0, got {horizon}"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(argument(format!(
                "grid step must be finite and > 0, got {step}"
            )));
        }
        let intervals = (horizon / step).round().max(1.0) as usize;
        Self::new(horizon / intervals as f64, intervals + 1)
    }

    /// `min(1e-3, horizon / 1e4)` over `[0, horizon]`.
    pub fn default_for(horizon: f64) -> Result<Self> {
        Self::with_horizon(horizon, default_step(horizon))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn horizon(&self) -> f64 {
        self.step * (self.n_nodes - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(|k| self.node(k))
    }

    /// Nearest node to `t`; errors if `t` lies outside `[0, horizon]` by more
    /// than half a step.
    pub fn snap(&self, t: f64) -> Result<Snap> {
        let horizon = self.horizon();
        if !(t >= -0.5 * self.step && t <= horizon + 0.5 * self.step) {
            return Err(HawkesError::Range { time: t, horizon });
        }
        let index = ((t / self.step).round().max(0.0) as usize).min(self.n_nodes - 1);
        let time = self.node(index);
        Ok(Snap {
            index,
            time,
            distance: (t - time).abs(),
        })
    }

    /// Samples `f` on every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }
}

pub fn default_step(horizon: f64) -> f64 {
    (horizon / 1e4).min(1e-3)
}

/// Trapezoidal convolution `(a * b)(t_k)` on nodes; node 0 is the empty integral.
pub fn trapezoid_convolution(a: &[f64], b: &[f64], step: f64) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "convolution operands must share a grid");
    (0..a.len())
        .into_par_iter()
        .map(|k| convolution_at(a, b, step, k))
        .collect()
}

fn convolution_at(a: &[f64], b: &[f64], step: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let inner: f64 = (1..k).map(|j| a[k - j] * b[j]).sum();
    step * (0.5 * (a[k] * b[0] + a[0] * b[k]) + inner)
}

/// Trapezoid of `values` over the nodes `0..=upto`.
pub(crate) fn trapezoid(values: &[f64], step: f64, upto: usize) -> f64 {
    if upto == 0 {
        return 0.0;
    }
    let inner: f64 = values[1..upto].iter().sum();
    step * (0.5 * (values[0] + values[upto]) + inner)
}

/// Running trapezoid: `out[k] = int_0^{t_k} values`.
pub fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * step * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

/// `Phi_n` on the grid: `Phi_1 = Phi`, `Phi_n = Phi * Phi_{n-1}`.
pub fn iterated_convolution(kernel: &Kernel, n: usize, grid: &Grid) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(argument("iterated convolution order must be >= 1"));
    }
    let phi = grid.sample(|t| kernel.at(t));
    let mut current = phi.clone();
    for _ in 1..n {
        current = trapezoid_convolution(&phi, &current, grid.step());
    }
    Ok(current)
}

/// Forward substitution of `f = g + kernel * f` with trapezoidal weights.
fn solve_forward(g: &[f64], phi: &[f64], step: f64) -> Result<Vec<f64>> {
    let n = g.len();
    let diag = 1.0 - 0.5 * step * phi[0];
    if !(diag > 0.0) {
        return Err(HawkesError::NumericalFailure(format!(
            "grid step {step} too coarse for kernel value {} at 0",
            phi[0]
        )));
    }
    let mut f = Vec::with_capacity(n);
    f.push(g[0]);
    for k in 1..n {
        let inner: f64 = (1..k).map(|j| phi[k - j] * f[j]).sum();
        let rhs = g[k] + step * (0.5 * phi[k] * f[0] + inner);
        let value = rhs / diag;
        if !value.is_finite() {
            return Err(HawkesError::NumericalFailure(format!(
                "non-finite value at node {k} of the Volterra solve"
            )));
        }
        f.push(value);
    }
    Ok(f)
}

/// The resolvent `Psi` and its running integral `I(t) = int_0^t Psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventTable {
    grid: Grid,
    psi: Vec<f64>,
    cum: Vec<f64>,
    kernel_l1: f64,
}

impl ResolventTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    pub fn kernel_l1(&self) -> f64 {
        self.kernel_l1
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    /// `||Psi||_1 = ||Phi||_1 / (1 - ||Phi||_1)`, the limit of `I(t)`.
    pub fn l1_limit(&self) -> f64 {
        self.kernel_l1 / (1.0 - self.kernel_l1)
    }

    /// `max_k |Psi(t_k) - Phi(t_k) - (Phi * Psi)(t_k)|` against `kernel`.
    pub fn residual(&self, kernel: &Kernel) -> f64 {
        let phi = self.grid.sample(|t| kernel.at(t));
        let conv = trapezoid_convolution(&phi, &self.psi, self.grid.step());
        self.psi
            .iter()
            .zip(&phi)
            .zip(&conv)
            .map(|((p, f), c)| (p - f - c).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,psi,cum`, one row per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,psi,cum")?;
        for (k, (p, c)) in self.psi.iter().zip(&self.cum).enumerate() {
            writeln!(
                out,
                "{},{},{}",
                format_float(self.grid.node(k)),
                format_float(*p),
                format_float(*c)
            )?;
        }
        Ok(())
    }
}

/// Solves `Psi = Phi + Phi * Psi` on `grid`.
pub fn resolvent(kernel: &Kernel, grid: &Grid) -> Result<ResolventTable> {
    let phi = grid.sample(|t| kernel.at(t));
    let psi = solve_forward(&phi, &phi, grid.step())?;
    let cum = cumulative_trapezoid(&psi, grid.step());
    Ok(ResolventTable {
        grid: *grid,
        psi,
        cum,
        kernel_l1: kernel.l1_norm(),
    })
}

/// Solution `f_g` of `f = g + Phi * f`, computed directly and through the
/// resolvent as `g + Psi * g`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub values: Vec<f64>,
    pub via_resolvent: Vec<f64>,
    /// Largest node-wise gap between the two routes.
    pub discrepancy: f64,
}

pub fn solve_volterra(g: &[f64], kernel: &Kernel, grid: &Grid) -> Result<VolterraSolution> {
    if g.len() != grid.n_nodes() {
        return Err(argument(format!(
            "right-hand side has {} values for a grid of {} nodes",
            g.len(),
            grid.n_nodes()
        )));
    }
    if let Some(k) = g.iter().position(|v| !v.is_finite()) {
        return Err(argument(format!(
            "right-hand side is not finite at node {k}"
        )));
    }
    let phi = grid.sample(|t| kernel.at(t));
    let values = solve_forward(g, &phi, grid.step())?;
    let res = resolvent(kernel, grid)?;
    let conv = trapezoid_convolution(res.psi(), g, grid.step());
    let via_resolvent: Vec<f64> = g.iter().zip(&conv).map(|(a, b)| a + b).collect();
    let discrepancy = values
        .iter()
        .zip(&via_resolvent)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(VolterraSolution {
        values,
        via_resolvent,
        discrepancy,
    })
}
