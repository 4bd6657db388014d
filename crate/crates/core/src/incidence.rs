//! Incidence functions φ and their structural checks.
//!
//! The transmission term of the model is `λ·u·φ(v)`. An incidence is
//! admissible when `φ(0) = 0` and `0 < v·φ'(v) ≤ φ(v)` for every `v > 0`;
//! the second condition makes `φ(v)/v` non-increasing, which the
//! equilibrium search and both Lyapunov arguments rely on.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied incidence. `slope_at_zero` is given explicitly so that
/// R0 never depends on a finite difference taken near the origin.
#[derive(Clone)]
pub struct CustomIncidence {
    pub phi: ScalarFn,
    pub dphi: ScalarFn,
    pub slope_at_zero: f64,
}

impl fmt::Debug for CustomIncidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomIncidence")
            .field("slope_at_zero", &self.slope_at_zero)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Incidence {
    /// φ(v) = αv
    Linear { alpha: f64 },
    /// φ(v) = αv / (1 + kv)
    Saturated { alpha: f64, k: f64 },
    /// φ(v) = kv / (1 + v/α)
    HalfSaturation { k: f64, alpha: f64 },
    Custom(CustomIncidence),
}

/// Serializable descriptor for the three closed-form families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidenceSpec {
    Linear { alpha: f64 },
    Saturated { alpha: f64, k: f64 },
    HalfSaturation { k: f64, alpha: f64 },
}

impl IncidenceSpec {
    pub fn build(&self) -> Result<Incidence> {
        match *self {
            IncidenceSpec::Linear { alpha } => Incidence::linear(alpha),
            IncidenceSpec::Saturated { alpha, k } => Incidence::saturated(alpha, k),
            IncidenceSpec::HalfSaturation { k, alpha } => Incidence::half_saturation(k, alpha),
        }
    }

    /// Coefficient lookup used by parameter sweeps.
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        match (*self, name) {
            (IncidenceSpec::Linear { alpha }, "alpha")
            | (IncidenceSpec::Saturated { alpha, .. }, "alpha")
            | (IncidenceSpec::HalfSaturation { alpha, .. }, "alpha") => Some(alpha),
            (IncidenceSpec::Saturated { k, .. }, "k")
            | (IncidenceSpec::HalfSaturation { k, .. }, "k") => Some(k),
            _ => None,
        }
    }

    pub fn with_coefficient(mut self, name: &str, value: f64) -> Option<Self> {
        match (&mut self, name) {
            (IncidenceSpec::Linear { alpha }, "alpha")
            | (IncidenceSpec::Saturated { alpha, .. }, "alpha")
            | (IncidenceSpec::HalfSaturation { alpha, .. }, "alpha") => *alpha = value,
            (IncidenceSpec::Saturated { k, .. }, "k")
            | (IncidenceSpec::HalfSaturation { k, .. }, "k") => *k = value,
            _ => return None,
        }
        Some(self)
    }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidParams(format!(
            "incidence coefficient {name} must be positive, got {x}"
        )))
    }
}

impl Incidence {
    pub fn linear(alpha: f64) -> Result<Self> {
        Ok(Incidence::Linear {
            alpha: positive("alpha", alpha)?,
        })
    }

    pub fn saturated(alpha: f64, k: f64) -> Result<Self> {
        Ok(Incidence::Saturated {
            alpha: positive("alpha", alpha)?,
            k: positive("k", k)?,
        })
    }

    pub fn half_saturation(k: f64, alpha: f64) -> Result<Self> {
        Ok(Incidence::HalfSaturation {
            k: positive("k", k)?,
            alpha: positive("alpha", alpha)?,
        })
    }

    pub fn custom<F, D>(phi: F, dphi: D, slope_at_zero: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Incidence::Custom(CustomIncidence {
            phi: Arc::new(phi),
            dphi: Arc::new(dphi),
            slope_at_zero,
        })
    }

    /// φ(v) without a domain check; the hot loops of the integrators call this.
    ///
    /// The saturating families are evaluated as `v·q(v)` with `q = φ(v)/v`
    /// so that `v·φ'(v) ≤ φ(v)` survives rounding.
    #[inline]
    pub fn phi(&self, v: f64) -> f64 {
        match self {
            Incidence::Linear { alpha } => alpha * v,
            Incidence::Saturated { alpha, k } => v * (alpha / (1.0 + k * v)),
            Incidence::HalfSaturation { k, alpha } => v * (k / (1.0 + v / alpha)),
            Incidence::Custom(c) => (c.phi)(v),
        }
    }

    #[inline]
    pub fn dphi(&self, v: f64) -> f64 {
        match self {
            Incidence::Linear { alpha } => *alpha,
            Incidence::Saturated { alpha, k } => {
                let d = 1.0 + k * v;
                (alpha / d) / d
            }
            Incidence::HalfSaturation { k, alpha } => {
                let d = 1.0 + v / alpha;
                (k / d) / d
            }
            Incidence::Custom(c) => {
                if v == 0.0 {
                    c.slope_at_zero
                } else {
                    (c.dphi)(v)
                }
            }
        }
    }

    /// φ'(0), exact for the closed-form families.
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            Incidence::Linear { alpha } | Incidence::Saturated { alpha, .. } => *alpha,
            Incidence::HalfSaturation { k, .. } => *k,
            Incidence::Custom(c) => c.slope_at_zero,
        }
    }

    pub fn eval_phi(&self, v: f64) -> Result<f64> {
        check_domain(v)?;
        Ok(self.phi(v))
    }

    pub fn eval_dphi(&self, v: f64) -> Result<f64> {
        check_domain(v)?;
        Ok(self.dphi(v))
    }

    pub fn spec(&self) -> Option<IncidenceSpec> {
        match *self {
            Incidence::Linear { alpha } => Some(IncidenceSpec::Linear { alpha }),
            Incidence::Saturated { alpha, k } => Some(IncidenceSpec::Saturated { alpha, k }),
            Incidence::HalfSaturation { k, alpha } => {
                Some(IncidenceSpec::HalfSaturation { k, alpha })
            }
            Incidence::Custom(_) => None,
        }
    }
}

fn check_domain(v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("incidence evaluated at v = {v} < 0")))
    }
}

/// `a ≤ b` up to relative 1e-12 with an absolute floor of 1e-14.
pub(crate) fn le_tol(a: f64, b: f64) -> bool {
    a <= b + (1e-12 * b.abs()).max(1e-14)
}

/// Log-spaced samples covering twelve decades below `v_max`.
pub fn log_grid(v_max: f64, n: usize) -> Vec<f64> {
    const DECADES: f64 = 12.0;
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            v_max * 10f64.powf(-DECADES * (1.0 - s))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// φ(0) = 0
    VanishesAtZero,
    /// φ'(0) positive and finite
    PositiveSlopeAtZero,
    /// 0 < v·φ'(v) ≤ φ(v)
    SlopeBelowSecant,
    /// 0 < φ(v)/v ≤ φ'(0)
    SecantBelowInitialSlope,
    /// φ(v) < φ'(0)·eᵛ
    ExponentialBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub v: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub passed: bool,
    pub samples: usize,
    /// First violating sample of each failed condition, in order of discovery.
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    pub fn violates(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Samples `n_samples` points of a log grid in `(0, v_max]` and checks the
/// admissibility conditions at each. Violations are collected, never raised.
pub fn check_admissible(inc: &Incidence, v_max: f64, n_samples: usize) -> AdmissibilityReport {
    let mut violations: Vec<Violation> = Vec::new();
    let mut record = |condition, v, lhs, rhs| {
        if !violations.iter().any(|x: &Violation| x.condition == condition) {
            violations.push(Violation {
                condition,
                v,
                lhs,
                rhs,
            });
        }
    };

    let at_zero = inc.phi(0.0);
    if at_zero != 0.0 {
        record(Condition::VanishesAtZero, 0.0, at_zero, 0.0);
    }
    let s0 = inc.slope_at_zero();
    if !(s0.is_finite() && s0 > 0.0) {
        record(Condition::PositiveSlopeAtZero, 0.0, s0, 0.0);
    }

    let grid = log_grid(v_max, n_samples);
    for &v in &grid {
        let phi = inc.phi(v);
        let vd = v * inc.dphi(v);
        if !(vd > 0.0 && le_tol(vd, phi)) {
            record(Condition::SlopeBelowSecant, v, vd, phi);
        }
        let secant = phi / v;
        if !(secant > 0.0 && le_tol(secant, s0)) {
            record(Condition::SecantBelowInitialSlope, v, secant, s0);
        }
        let bound = s0 * v.exp();
        if !le_tol(phi, bound) || !phi.is_finite() {
            record(Condition::ExponentialBound, v, phi, bound);
        }
    }

    AdmissibilityReport {
        passed: violations.is_empty(),
        samples: grid.len(),
        violations,
    }
}
