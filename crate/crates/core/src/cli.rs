//! The `hawkes` command-line front end.
//!
//! One subcommand per invocation; every output is CSV with 17 significant
//! digits, so a fixed command line (including `--seed`) always produces
//! byte-identical output.
//!
//! Exit codes: 0 success, 1 failed validation or I/O error, 2 malformed
//! input or arguments, 3 unstable kernel (`||Phi||_1 >= 1`), 4 numerical
//! failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{argument, HawkesError, Result};
use crate::format_float;
use crate::kernel::{Kernel, ModelParams};
use crate::malliavin::{self, Zeta};
use crate::moments::{self, MomentRequest, Quantity};
use crate::resolvent::{self, Grid, ResolventTable};
use crate::simulate::{self, path_rng, SimulatedPath};

/// Largest `|z|` accepted by `validate`.
pub const VALIDATION_Z_MAX: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(
    name = "hawkes",
    version,
    about = "Exact moments and simulation of linear Hawkes processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: RunConfig,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Kernel description (JSON)
    #[arg(long)]
    pub kernel: PathBuf,
    /// Baseline intensity mu
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Grid step; defaults to min(1e-3, horizon / 1e4)
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Branching,
    Thinning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZetaArg {
    One,
    Phi,
}

impl From<ZetaArg> for Zeta {
    fn from(z: ZetaArg) -> Self {
        match z {
            ZetaArg::One => Zeta::One,
            ZetaArg::Phi => Zeta::Phi,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum RunConfig {
    /// Tabulate Psi and its running integral as `t,psi,cum`
    Resolvent {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print closed-form moments as `quantity,s,t,value`
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        /// A quantity name or `all`
        #[arg(long, default_value = "all")]
        quantity: String,
        /// Defaults to t
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        t: f64,
        /// Defaults to max(s, t)
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Covariance surface over node lists as `s,t,value`
    Surface {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        quantity: String,
        /// Comma-separated times
        #[arg(long, value_delimiter = ',', required = true)]
        s_nodes: Vec<f64>,
        /// Comma-separated times
        #[arg(long, value_delimiter = ',', required = true)]
        t_nodes: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate paths as `path_id,event_time,forced`
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated forced atom times
        #[arg(long, value_delimiter = ',')]
        forced: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Method::Branching)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo against closed forms for six quantities at (s, t)
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated chaos expansion of E[X^zeta_t] next to the closed form
    Chaos {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        /// Truncation order N
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, value_enum, default_value_t = ZetaArg::One)]
        zeta: ZetaArg,
    },
}

/// Maps an error to the process exit status.
pub fn exit_code(err: &HawkesError) -> i32 {
    match err {
        HawkesError::StabilityViolation { .. } => 3,
        HawkesError::NumericalFailure(_) | HawkesError::InternalConsistency(_) => 4,
        HawkesError::Io(_) => 1,
        HawkesError::Argument(_)
        | HawkesError::Range { .. }
        | HawkesError::UnsupportedKernel(_)
        | HawkesError::Size { .. }
        | HawkesError::Json(_) => 2,
    }
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        let text = std::fs::read_to_string(&self.kernel).map_err(|e| {
            argument(format!(
                "cannot read kernel file {}: {e}",
                self.kernel.display()
            ))
        })?;
        ModelParams::new(self.mu, Kernel::from_json(&text)?)
    }

    fn grid(&self, horizon: f64) -> Result<Grid> {
        match self.step {
            Some(step) => Grid::with_horizon(horizon, step),
            None => Grid::default_for(horizon),
        }
    }

    fn resolvent(&self, params: &ModelParams, horizon: f64) -> Result<ResolventTable> {
        resolvent::resolvent(params.kernel(), &self.grid(horizon)?)
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(argument(format!("--{name} must be > 0, got {v}")))
    }
}

fn sink<'a>(out: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(stdout),
    })
}

/// Executes one command, writing results to `out` (or to the `--out` file).
/// Returns the exit status for a completed run.
pub fn run(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    match config {
        RunConfig::Resolvent {
            model,
            horizon,
            out,
        } => {
            let params = model.params()?;
            let res = model.resolvent(&params, positive("horizon", *horizon)?)?;
            let mut w = sink(out.as_deref(), stdout)?;
            res.write_csv(&mut w)?;
            w.flush()?;
        }
        RunConfig::Moments {
            model,
            quantity,
            s,
            t,
            horizon,
        } => {
            let params = model.params()?;
            let s = s.unwrap_or(*t);
            let horizon = horizon.unwrap_or(s.max(*t));
            let res = model.resolvent(&params, positive("horizon", horizon)?)?;
            let quantities = if quantity == "all" {
                Quantity::ALL.to_vec()
            } else {
                vec![quantity.parse()?]
            };
            writeln!(stdout, "quantity,s,t,value")?;
            for q in quantities {
                let v = moments::evaluate(
                    &params,
                    &res,
                    MomentRequest {
                        quantity: q,
                        s,
                        t: *t,
                    },
                )?;
                writeln!(
                    stdout,
                    "{},{},{},{}",
                    q,
                    format_float(v.s),
                    format_float(v.t),
                    format_float(v.value)
                )?;
            }
        }
        RunConfig::Surface {
            model,
            quantity,
            s_nodes,
            t_nodes,
            out,
        } => {
            let params = model.params()?;
            let horizon = s_nodes.iter().chain(t_nodes).copied().fold(0.0, f64::max);
            let res = model.resolvent(&params, positive("horizon", horizon)?)?;
            let surface = moments::cov_surface(&params, &res, s_nodes, t_nodes, quantity.parse()?)?;
            let mut w = sink(out.as_deref(), stdout)?;
            surface.write_csv(&mut w)?;
            w.flush()?;
        }
        RunConfig::Simulate {
            model,
            horizon,
            paths,
            seed,
            forced,
            method,
            out,
        } => {
            let params = model.params()?;
            let horizon = positive("horizon", *horizon)?;
            if *method == Method::Thinning && !forced.is_empty() {
                return Err(argument(
                    "--forced is only supported with the branching method",
                ));
            }
            let simulated: Vec<SimulatedPath> = (0..*paths as u64)
                .map(|i| {
                    let rng = &mut path_rng(*seed, i);
                    match method {
                        Method::Branching => {
                            simulate::simulate_shifted_with(&params, horizon, forced, rng)
                        }
                        Method::Thinning => simulate::simulate_thinning_with(&params, horizon, rng),
                    }
                })
                .collect::<Result<_>>()?;
            let mut w = sink(out.as_deref(), stdout)?;
            simulate::write_paths_csv(&simulated, &mut w)?;
            w.flush()?;
        }
        RunConfig::Validate {
            model,
            s,
            t,
            paths,
            seed,
            out,
        } => {
            let params = model.params()?;
            let (s, t) = if s <= t { (*s, *t) } else { (*t, *s) };
            let res = model.resolvent(&params, positive("t", t)?)?;
            let rows = simulate::validate_moments(&params, &res, s, t, *paths, *seed)?;
            let mut w = sink(out.as_deref(), stdout)?;
            simulate::write_validation_csv(&rows, &mut w)?;
            w.flush()?;
            if rows.iter().any(|r| !r.passes(VALIDATION_Z_MAX)) {
                return Ok(1);
            }
        }
        RunConfig::Chaos {
            model,
            t,
            order,
            zeta,
        } => {
            let params = model.params()?;
            let t = positive("t", *t)?;
            let grid = model.grid(t)?;
            let zeta = Zeta::from(*zeta);
            let chaos = malliavin::expectation_via_chaos(&params, t, zeta, *order, &grid)?;
            let res = resolvent::resolvent(params.kernel(), &grid)?;
            let analytic = match zeta {
                Zeta::One => moments::mean_count(&params, &res, t)?,
                Zeta::Phi => moments::mean_intensity(&params, &res, t)? - params.mu(),
            };
            let name = match zeta {
                Zeta::One => "one",
                Zeta::Phi => "phi",
            };
            writeln!(stdout, "zeta,t,order,value,truncation_bound,analytic")?;
            writeln!(
                stdout,
                "{name},{},{order},{},{},{}",
                format_float(t),
                format_float(chaos.value),
                format_float(chaos.truncation_bound),
                format_float(analytic)
            )?;
        }
    }
    Ok(0)
}

/// Parses `args`, runs, and returns the exit status; errors are reported on
/// `stderr`.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return e.exit_code();
        }
    };
    match run(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Caps the global thread pool from `HAWKES_THREADS` when set. Results do
/// not depend on the thread count.
pub fn configure_threads() -> io::Result<()> {
    if let Ok(value) = std::env::var("HAWKES_THREADS") {
        let threads: usize = value.parse().map_err(|_| {
            io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("HAWKES_THREADS={value:?} is not a count"),
            )
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(io::Error::other)?;
    }
    Ok(())
}
