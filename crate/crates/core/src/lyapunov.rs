//! Lyapunov functionals of the two steady states and descent monitors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::{le_tol, Incidence};
use crate::params::ModelParams;
use crate::pde::{trapezoid, Field1D};

/// Default per-step relative tolerance for descent checks.
pub const DEFAULT_MONOTONE_TOL: f64 = 1e-8;

/// Volterra function `L(x) = x − 1 − ln x`.
pub fn volterra(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("L(x) needs x > 0, got {x}")));
    }
    Ok(volterra_raw(x))
}

#[inline]
fn volterra_raw(x: f64) -> f64 {
    // ln_1p keeps L(x) ≥ 0 near x = 1 where x − 1 − ln x cancels.
    let d = x - 1.0;
    d - d.ln_1p()
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Report {
    pub passed: bool,
    pub samples: usize,
    /// Largest `L(φ(v)/φ(v*)) − L(v/v*)` seen.
    pub max_gap: f64,
    pub first_violation: Option<f64>,
}

/// Checks `L(φ(v)/φ(v*)) ≤ L(v/v*)` at every sample, 1e-12 absolute slack.
pub fn lemma2_check(inc: &Incidence, v_star: f64, samples: &[f64]) -> Result<Lemma2Report> {
    if !(v_star > 0.0) {
        return Err(Error::Domain(format!("v* = {v_star} must be positive")));
    }
    let phi_star = inc.phi(v_star);
    let mut report = Lemma2Report {
        passed: true,
        samples: samples.len(),
        max_gap: f64::NEG_INFINITY,
        first_violation: None,
    };
    for &v in samples {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("sample v = {v} must be positive")));
        }
        let lhs = volterra_raw(inc.phi(v) / phi_star);
        let rhs = volterra_raw(v / v_star);
        let gap = lhs - rhs;
        report.max_gap = report.max_gap.max(gap);
        if gap > 1e-12 && report.passed {
            report.passed = false;
            report.first_violation = Some(v);
        }
    }
    Ok(report)
}

/// Integrand of the disease-free functional at a single state.
pub fn v_theta_point(p: &ModelParams, theta: f64, u: f64, v: f64) -> f64 {
    let du = u - p.recruitment / p.death;
    u * v + 0.5 * theta * du * du + 0.5 * v * v + p.recruitment / p.recovery * v
}

/// Integrand of the endemic functional at a single state; needs u, v > 0.
pub fn v_endemic_point((us, vs): (f64, f64), u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0 && v > 0.0) {
        return Err(Error::NonPositiveState { index: 0, u, v });
    }
    Ok(us * volterra_raw(u / us) + vs * volterra_raw(v / vs))
}

/// `V_θ = ∫ [uv + θ/2·(u − Λ/μ)² + v²/2 + (Λ/σ)·v] dx` by trapezoid.
pub fn v_theta_eval(u: &Field1D, v: &Field1D, p: &ModelParams, theta: f64) -> Result<f64> {
    u.ensure_same_grid(v)?;
    let vals: Vec<f64> = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(&a, &b)| v_theta_point(p, theta, a, b))
        .collect();
    Ok(trapezoid(&vals, u.dx()))
}

/// `V = ∫ [u*·L(u/u*) + v*·L(v/v*)] dx` by trapezoid.
pub fn v_endemic_eval(u: &Field1D, v: &Field1D, equilibrium: (f64, f64)) -> Result<f64> {
    u.ensure_same_grid(v)?;
    let (us, vs) = equilibrium;
    let mut vals = Vec::with_capacity(u.len());
    for (i, (&a, &b)) in u.values().iter().zip(v.values()).enumerate() {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::NonPositiveState { index: i, u: a, v: b });
        }
        vals.push(us * volterra_raw(a / us) + vs * volterra_raw(b / vs));
    }
    Ok(trapezoid(&vals, u.dx()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Functional {
    Theta { theta: f64 },
    Endemic,
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSeries {
    pub functional: Functional,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl LyapunovSeries {
    pub fn new(functional: Functional) -> Self {
        LyapunovSeries {
            functional,
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, value: f64) {
        self.times.push(t);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest positive forward difference (0 when none).
    pub fn max_increase(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotonicityReport {
    pub passed: bool,
    pub max_increase: f64,
    pub allowed: f64,
}

/// Passes iff every forward difference is at most `tol·max(1, max|V|)`.
pub fn monotonicity_check(series: &LyapunovSeries, tol: f64) -> MonotonicityReport {
    let scale = series.values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let allowed = tol * scale;
    let max_increase = series.max_increase();
    MonotonicityReport {
        passed: max_increase <= allowed && series.values.iter().all(|x| x.is_finite()),
        max_increase,
        allowed,
    }
}

/// Convexity of L used as a property check: `L(x) ≥ L(y) + (1 − 1/y)(x − y)`.
pub fn volterra_supports(x: f64, y: f64) -> bool {
    let lhs = volterra_raw(x);
    let rhs = volterra_raw(y) + (1.0 - 1.0 / y) * (x - y);
    le_tol(rhs, lhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::log_grid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn volterra_examples() {
        assert_eq!(volterra(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(volterra(E).unwrap(), E - 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(volterra(0.5).unwrap(), LN_2 - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(volterra(0.5).unwrap(), 0.19315, epsilon = 1e-5);
        assert!(volterra(0.0).is_err());
        assert!(volterra(-2.0).is_err());
    }

    #[test]
    fn lemma2_linear_is_equality() {
        let inc = Incidence::linear(3.0).unwrap();
        let g = log_grid(100.0, 500);
        let r = lemma2_check(&inc, 3.0, &g).unwrap();
        assert!(r.passed);
        assert!(r.max_gap.abs() < 1e-12);
        let at = lemma2_check(&inc, 3.0, &[3.0]).unwrap();
        assert_eq!(at.max_gap, 0.0);
    }

    #[test]
    fn lemma2_saturated() {
        let inc = Incidence::saturated(13.0 / 4.0, 0.5).unwrap();
        let r = lemma2_check(&inc, 2.2617, &log_grid(100.0, 1000)).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn lemma2_catches_superlinear() {
        let sq = Incidence::custom(|v| v * v, |v| 2.0 * v, 0.0);
        let r = lemma2_check(&sq, 1.0, &log_grid(10.0, 100)).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn v_theta_examples() {
        let p = ModelParams::new(6.0, 4.0, 2.0, 1.5, 3.0, 1.25).unwrap();
        let u = Field1D::constant(10.0, 51, 1.5).unwrap();
        let zero = Field1D::constant(10.0, 51, 0.0).unwrap();
        assert_eq!(v_theta_eval(&u, &zero, &p, 1.3).unwrap(), 0.0);

        let c = 0.7;
        let v = Field1D::constant(10.0, 51, c).unwrap();
        let expect = 10.0 * (c * 1.5 + 0.5 * c * c + c * 6.0 / 1.5);
        assert_abs_diff_eq!(v_theta_eval(&u, &v, &p, 1.3).unwrap(), expect, epsilon = 1e-12);

        let (a, b, th) = (2.0, 0.5, 1.2);
        let point = a * b + 0.5 * th * (a - 1.5f64).powi(2) + 0.125 + 4.0 * b;
        assert_abs_diff_eq!(v_theta_point(&p, th, a, b), point, epsilon = 1e-15);
    }

    #[test]
    fn v_endemic_examples() {
        let eq = (2.0, 3.0);
        let u = Field1D::constant(10.0, 31, 2.0).unwrap();
        let v = Field1D::constant(10.0, 31, 3.0).unwrap();
        assert_eq!(v_endemic_eval(&u, &v, eq).unwrap(), 0.0);

        let u2 = Field1D::constant(10.0, 31, 4.0).unwrap();
        let got = v_endemic_eval(&u2, &v, eq).unwrap();
        assert_abs_diff_eq!(got, 20.0 * (1.0 - LN_2), epsilon = 1e-12);
        assert_abs_diff_eq!(got, 6.1371, epsilon = 1e-4);

        let mut vals = vec![3.0; 31];
        vals[7] = 0.0;
        let bad = Field1D::new(10.0, vals).unwrap();
        match v_endemic_eval(&u, &bad, eq) {
            Err(Error::NonPositiveState { index, .. }) => assert_eq!(index, 7),
            other => panic!("{other:?}"),
        }
        let short = Field1D::constant(10.0, 30, 3.0).unwrap();
        assert!(matches!(v_endemic_eval(&u, &short, eq), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn monotonicity_examples() {
        let mut s = LyapunovSeries::new(Functional::Endemic);
        for i in 0..10 {
            s.push(i as f64, 2.0);
        }
        let r = monotonicity_check(&s, 1e-8);
        assert!(r.passed);
        assert_eq!(r.max_increase, 0.0);

        let mut s = LyapunovSeries::new(Functional::Theta { theta: 1.0 });
        for i in 0..10 {
            s.push(i as f64, i as f64);
        }
        assert!(!monotonicity_check(&s, 1e-8).passed);
    }

    #[test]
    fn quadrature_is_second_order() {
        let p = ModelParams::new(6.0, 4.0, 2.0, 1.5, 3.0, 1.25).unwrap();
        let exact = {
            // fine-grid reference
            let u = Field1D::from_fn(10.0, 200_001, |x| 1.5 + 0.3 * x.cos()).unwrap();
            let v = Field1D::from_fn(10.0, 200_001, |x| 0.5 + 0.2 * x.sin()).unwrap();
            v_theta_eval(&u, &v, &p, 1.2).unwrap()
        };
        let err = |n| {
            let u = Field1D::from_fn(10.0, n, |x| 1.5 + 0.3 * x.cos()).unwrap();
            let v = Field1D::from_fn(10.0, n, |x| 0.5 + 0.2 * x.sin()).unwrap();
            (v_theta_eval(&u, &v, &p, 1.2).unwrap() - exact).abs()
        };
        let order = (err(51) / err(101)).log2();
        assert!(order >= 1.9, "order {order}");
    }

    proptest! {
        #[test]
        fn volterra_positive_away_from_one(x in 1e-6f64..1e6) {
            prop_assume!((x - 1.0).abs() > 1e-6);
            prop_assert!(volterra(x).unwrap() > 0.0);
        }

        #[test]
        fn volterra_is_convex(x in 1e-3f64..1e3, y in 1e-3f64..1e3) {
            prop_assert!(volterra_supports(x, y));
        }

        #[test]
        fn v_endemic_positive_off_equilibrium(
            us in 0.1f64..10.0, vs in 0.1f64..10.0, a in 0.01f64..20.0, b in 0.01f64..20.0,
        ) {
            prop_assume!((a - us).abs() > 1e-6 || (b - vs).abs() > 1e-6);
            prop_assert!(v_endemic_point((us, vs), a, b).unwrap() > 0.0);
        }
    }
}
