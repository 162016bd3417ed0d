//! Excitation kernels and model parameters.
//!
//! A [`Kernel`] is a nonnegative function on `[0, inf)` whose L1 norm is
//! strictly below one. The norm is computed once at construction and the
//! kernel is rejected if it fails the stability check, so every value of
//! type `Kernel` is admissible.

use serde::{Deserialize, Serialize};

use crate::error::{argument, HawkesError, Result};

/// Parametric or tabulated shape of an excitation kernel.
///
/// Serialized as `{"type":"exponential","alpha":1.0,"beta":2.0}`,
/// `{"type":"powerlaw","alpha":..,"c":..,"gamma":..}` or
/// `{"type":"tabulated","step":..,"values":[..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelShape {
    /// `alpha * exp(-beta t)`.
    Exponential { alpha: f64, beta: f64 },
    /// `alpha * (c + t)^(-gamma)` with `gamma > 1`.
    #[serde(rename = "powerlaw")]
    PowerLaw { alpha: f64, c: f64, gamma: f64 },
    /// Values on nodes `k * step`, linearly interpolated, zero past the last node.
    Tabulated { step: f64, values: Vec<f64> },
}

/// An admissible excitation kernel: nonnegative, bounded, `||Phi||_1 < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    shape: KernelShape,
    l1: f64,
}

// Power-law norm: trapezoid on [0, POWER_LAW_SPAN * c] plus the analytic tail.
const POWER_LAW_SPAN: f64 = 50.0;
const POWER_LAW_STEPS: usize = 100_000;

impl Kernel {
    pub fn new(shape: KernelShape) -> Result<Self> {
        validate_shape(&shape)?;
        let l1 = shape_l1_norm(&shape);
        if !l1.is_finite() {
            return Err(HawkesError::NumericalFailure(format!(
                "kernel L1 norm is not finite ({l1})"
            )));
        }
        if l1 >= 1.0 {
            return Err(HawkesError::StabilityViolation { norm: l1 });
        }
        Ok(Self { shape, l1 })
    }

    pub fn exponential(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(KernelShape::Exponential { alpha, beta })
    }

    pub fn power_law(alpha: f64, c: f64, gamma: f64) -> Result<Self> {
        Self::new(KernelShape::PowerLaw { alpha, c, gamma })
    }

    pub fn tabulated(step: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(KernelShape::Tabulated { step, values })
    }

    /// The identically zero kernel (Poisson case).
    pub fn zero() -> Self {
        Self {
            shape: KernelShape::Tabulated {
                step: 1.0,
                values: vec![0.0, 0.0],
            },
            l1: 0.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let shape: KernelShape = serde_json::from_str(text)?;
        Self::new(shape)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.shape).expect("kernel shapes always serialize")
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    /// `Phi(t)`; errors on negative `t`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(argument(format!("kernel evaluated at negative time {t}")));
        }
        Ok(self.at(t))
    }

    /// `Phi(t)` extended by zero to `t < 0`.
    pub fn at(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.shape {
            KernelShape::Exponential { alpha, beta } => alpha * (-beta * t).exp(),
            KernelShape::PowerLaw { alpha, c, gamma } => alpha * (c + t).powf(-gamma),
            KernelShape::Tabulated { step, values } => interpolate(*step, values, t),
        }
    }

    /// `||Phi||_1`, always `< 1`.
    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    /// Whether `Phi` is nonincreasing on `[0, inf)`.
    pub fn is_nonincreasing(&self) -> bool {
        match &self.shape {
            KernelShape::Exponential { .. } | KernelShape::PowerLaw { .. } => true,
            // the drop to zero after the last node is also a decrease
            KernelShape::Tabulated { values, .. } => values.windows(2).all(|w| w[1] <= w[0]),
        }
    }

    /// Last time at which `Phi` can be nonzero, if the support is bounded.
    pub fn support_end(&self) -> Option<f64> {
        match &self.shape {
            KernelShape::Tabulated { step, values } => Some(step * (values.len() - 1) as f64),
            _ => None,
        }
    }

    /// An upper bound of `Phi` on `[0, inf)`.
    pub fn sup(&self) -> f64 {
        match &self.shape {
            KernelShape::Exponential { alpha, .. } => *alpha,
            KernelShape::PowerLaw { alpha, c, gamma } => alpha * c.powf(-gamma),
            KernelShape::Tabulated { values, .. } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Composite trapezoid of `Phi` over `[0, horizon]` with the first
    /// Euler-Maclaurin end correction, which makes the rule fourth order for
    /// smooth kernels.
    pub fn trapezoid_l1(&self, step: f64, horizon: f64) -> f64 {
        corrected_trapezoid(|t| self.at(t), step, horizon)
    }

    pub fn is_zero(&self) -> bool {
        match &self.shape {
            KernelShape::Exponential { alpha, .. } | KernelShape::PowerLaw { alpha, .. } => {
                *alpha == 0.0
            }
            KernelShape::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }
}

fn validate_shape(shape: &KernelShape) -> Result<()> {
    let finite_nonneg = |name: &str, v: f64| {
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(argument(format!("{name} must be finite and >= 0, got {v}")))
        }
    };
    let finite_pos = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(argument(format!("{name} must be finite and > 0, got {v}")))
        }
    };
    match shape {
        KernelShape::Exponential { alpha, beta } => {
            finite_nonneg("alpha", *alpha)?;
            finite_pos("beta", *beta)
        }
        KernelShape::PowerLaw { alpha, c, gamma } => {
            finite_nonneg("alpha", *alpha)?;
            finite_pos("c", *c)?;
            if !(gamma.is_finite() && *gamma > 1.0) {
                return Err(argument(format!(
                    "gamma must be finite and > 1, got {gamma}"
                )));
            }
            Ok(())
        }
        KernelShape::Tabulated { step, values } => {
            finite_pos("step", *step)?;
            if values.is_empty() {
                return Err(argument("tabulated kernel needs at least one value"));
            }
            values
                .iter()
                .enumerate()
                .try_for_each(|(k, v)| finite_nonneg(&format!("values[{k}]"), *v))
        }
    }
}

fn shape_l1_norm(shape: &KernelShape) -> f64 {
    match shape {
        KernelShape::Exponential { alpha, beta } => alpha / beta,
        KernelShape::PowerLaw { alpha, c, gamma } => {
            let horizon = POWER_LAW_SPAN * c;
            let step = horizon / POWER_LAW_STEPS as f64;
            let body = corrected_trapezoid(|t| alpha * (c + t).powf(-gamma), step, horizon);
            let tail = alpha * (c + horizon).powf(1.0 - gamma) / (gamma - 1.0);
            body + tail
        }
        // exact for the piecewise-linear interpolant
        KernelShape::Tabulated { step, values } => match values.len() {
            1 => 0.0,
            n => step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
        },
    }
}

fn interpolate(step: f64, values: &[f64], t: f64) -> f64 {
    let last = values.len() - 1;
    let pos = t / step;
    let k = pos.floor();
    if k >= last as f64 {
        return if pos == last as f64 {
            values[last]
        } else {
            0.0
        };
    }
    let k = k as usize;
    let frac = pos - k as f64;
    values[k] + frac * (values[k + 1] - values[k])
}

fn corrected_trapezoid(f: impl Fn(f64) -> f64, step: f64, horizon: f64) -> f64 {
    let n = (horizon / step).round().max(2.0) as usize;
    let h = horizon / n as f64;
    let mut sum = 0.5 * (f(0.0) + f(horizon));
    for k in 1..n {
        sum += f(k as f64 * h);
    }
    // one-sided second-order derivative estimates at both ends
    let d0 = (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
    let d1 = (3.0 * f(horizon) - 4.0 * f(horizon - h) + f(horizon - 2.0 * h)) / (2.0 * h);
    h * sum - h * h / 12.0 * (d1 - d0)
}

/// Baseline intensity together with an admissible kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    mu: f64,
    kernel: Kernel,
}

impl ModelParams {
    pub fn new(mu: f64, kernel: Kernel) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(argument(format!(
                "baseline mu must be finite and > 0, got {mu}"
            )));
        }
        Ok(Self { mu, kernel })
    }

    /// Skips the `mu > 0` check; only used to exercise degenerate simulations.
    #[cfg(test)]
    pub(crate) fn with_any_baseline(mu: f64, kernel: Kernel) -> Self {
        Self { mu, kernel }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Same kernel, different baseline.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(mu, self.kernel.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_values() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        assert_eq!(k.evaluate(0.0).unwrap(), 1.0);
        assert!((k.evaluate(2f64.ln() / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(k.evaluate(-0.1).is_err());
    }

    #[test]
    fn exponential_norm_and_stability() {
        let k = Kernel::exponential(1.0, 2.0).unwrap();
        assert_eq!(k.l1_norm(), 0.5);
        assert!((k.trapezoid_l1(1e-4, 40.0) - 0.5).abs() < 1e-10);
        match Kernel::exponential(3.0, 2.0) {
            Err(HawkesError::StabilityViolation { norm }) => assert_eq!(norm, 1.5),
            other => panic!("expected stability violation, got {other:?}"),
        }
    }

    #[test]
    fn stability_is_strict_without_slack() {
        let almost = 1.0 - 1e-12;
        assert!(Kernel::exponential(almost, 1.0).is_ok());
        assert!(Kernel::exponential(1.0, 1.0).is_err());
    }

    #[test]
    fn quadrature_norm_matches_closed_form() {
        for beta in [0.5, 2.0, 7.0] {
            let alpha = 0.6 * beta;
            let k = Kernel::exponential(alpha, beta).unwrap();
            let step = 1e-3 / beta;
            // tail beyond 30/beta is below 1e-13 relative
            let q = k.trapezoid_l1(step, 30.0 / beta);
            assert!(((q - 0.6) / 0.6).abs() < 1e-8, "beta={beta}: {q}");
        }
    }

    #[test]
    fn power_law_norm() {
        let k = Kernel::power_law(1.5, 1.0, 4.0).unwrap();
        assert!((k.l1_norm() - 0.5).abs() < 1e-10, "{}", k.l1_norm());
        let k = Kernel::power_law(0.3, 0.5, 1.5).unwrap();
        let exact = 0.3 * 0.5f64.powf(-0.5) / 0.5;
        assert!((k.l1_norm() - exact).abs() < 1e-9 * exact);
        assert!(Kernel::power_law(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_interpolation_and_norm() {
        let k = Kernel::tabulated(0.5, vec![0.4, 0.2, 0.0]).unwrap();
        assert!((k.at(0.25) - 0.3).abs() < 1e-15);
        assert_eq!(k.at(1.0), 0.0);
        assert_eq!(k.at(5.0), 0.0);
        assert!((k.l1_norm() - 0.2).abs() < 1e-15);

        let k = Kernel::tabulated(1.0, vec![0.1, 0.1]).unwrap();
        assert_eq!(k.at(1.0), 0.1);
        assert_eq!(k.at(1.0 + 1e-9), 0.0);
    }

    #[test]
    fn zero_kernel() {
        let k = Kernel::zero();
        assert_eq!(k.l1_norm(), 0.0);
        assert!(k.is_zero());
        let k = Kernel::tabulated(0.1, vec![0.0; 20]).unwrap();
        assert_eq!(k.l1_norm(), 0.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Kernel::tabulated(0.0, vec![0.1]).is_err());
        assert!(Kernel::tabulated(0.1, vec![0.1, f64::NAN]).is_err());
        assert!(Kernel::tabulated(0.1, vec![-0.1]).is_err());
        assert!(Kernel::tabulated(0.1, vec![]).is_err());
    }

    #[test]
    fn json_schema() {
        let k = Kernel::from_json(r#"{"type":"exponential","alpha":1.0,"beta":2.0}"#).unwrap();
        assert_eq!(k, Kernel::exponential(1.0, 2.0).unwrap());
        let k =
            Kernel::from_json(r#"{"type":"powerlaw","alpha":1.5,"c":1.0,"gamma":4.0}"#).unwrap();
        assert!(matches!(k.shape(), KernelShape::PowerLaw { .. }));
        let k = Kernel::from_json(r#"{"type":"tabulated","step":0.1,"values":[0.5,0.2]}"#).unwrap();
        assert_eq!(Kernel::from_json(&k.to_json()).unwrap(), k);
        assert!(matches!(
            Kernel::from_json(r#"{"type":"exponential","alpha":1.0}"#),
            Err(HawkesError::Json(_))
        ));
        assert!(matches!(
            Kernel::from_json(r#"{"type":"exponential","alpha":3.0,"beta":2.0}"#),
            Err(HawkesError::StabilityViolation { .. })
        ));
    }

    #[test]
    fn monotonicity_flags() {
        assert!(Kernel::exponential(1.0, 2.0).unwrap().is_nonincreasing());
        assert!(Kernel::tabulated(0.1, vec![0.3, 0.3, 0.1])
            .unwrap()
            .is_nonincreasing());
        assert!(!Kernel::tabulated(0.1, vec![0.1, 0.3, 0.1])
            .unwrap()
            .is_nonincreasing());
    }

    #[test]
    fn baseline_must_be_positive() {
        assert!(ModelParams::new(0.0, Kernel::zero()).is_err());
        assert!(ModelParams::new(-1.0, Kernel::zero()).is_err());
        assert!(ModelParams::new(f64::INFINITY, Kernel::zero()).is_err());
        assert_eq!(ModelParams::new(2.0, Kernel::zero()).unwrap().mu(), 2.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exponential_nonincreasing(alpha in 0.0..0.9f64, beta in 1.0..10.0f64,
                                         t1 in 0.0..20.0f64, dt in 0.0..5.0f64) {
                let k = Kernel::exponential(alpha, beta).unwrap();
                prop_assert!(k.at(t1) >= k.at(t1 + dt));
                prop_assert!(k.at(t1) >= 0.0);
            }

            #[test]
            fn tabulated_nonnegative_on_and_between_nodes(
                values in proptest::collection::vec(0.0..0.1f64, 2..20),
                t in 0.0..3.0f64,
            ) {
                let k = Kernel::tabulated(0.1, values).unwrap();
                prop_assert!(k.at(t) >= 0.0);
                prop_assert!(k.l1_norm() < 1.0);
            }
        }
    }
}
