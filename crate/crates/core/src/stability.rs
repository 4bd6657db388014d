//! Local stability of the constant steady states and the θ-window of the
//! disease-free Lyapunov functional.

use std::f64::consts::PI;

use serde::Serialize;

use crate::equilibria::{basic_reproduction_number, find_endemic};
use crate::error::{Error, Result};
use crate::incidence::Incidence;
use crate::params::ModelParams;

/// Truncation used for reported spectral detail.
pub const DEFAULT_MODES: usize = 50;

pub type Mat2 = [[f64; 2]; 2];

pub fn trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    Stable,
    /// Zero eigenvalue at R0 = 1; stable in the nonlinear sense but not
    /// decided by linearization.
    NonHyperbolicPaperStable,
    Unstable,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::NonHyperbolicPaperStable => "non_hyperbolic_paper_stable",
            StabilityClass::Unstable => "unstable",
        }
    }
}

/// Jacobian of the reaction terms at `(u, v)`.
pub fn jacobian_at(p: &ModelParams, inc: &Incidence, u: f64, v: f64) -> Mat2 {
    let lam = p.transmission;
    let phi = inc.phi(v);
    let uphi_prime = lam * u * inc.dphi(v);
    [
        [-lam * phi - p.death, -uphi_prime],
        [lam * phi, uphi_prime - p.recovery],
    ]
}

/// Growth rate of infectives at E0, `λΛφ'(0)/μ − σ = σ(R0 − 1)`.
fn infective_rate_at_e0(p: &ModelParams, inc: &Incidence) -> f64 {
    p.transmission * p.recruitment * inc.slope_at_zero() / p.death - p.recovery
}

fn classify_e0(r0: f64) -> StabilityClass {
    if r0 < 1.0 {
        StabilityClass::Stable
    } else if r0 == 1.0 {
        StabilityClass::NonHyperbolicPaperStable
    } else {
        StabilityClass::Unstable
    }
}

fn classify_trace_det(tr: f64, dt: f64) -> StabilityClass {
    if tr < 0.0 && dt > 0.0 {
        StabilityClass::Stable
    } else {
        StabilityClass::Unstable
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OdeStability {
    pub disease_free: StabilityClass,
    pub endemic: Option<StabilityClass>,
}

/// E0 from the eigenvalues `−μ` and `σ(R0 − 1)`; E* from trace/determinant.
pub fn ode_local_stability(p: &ModelParams, inc: &Incidence) -> Result<OdeStability> {
    let r0 = basic_reproduction_number(p, inc);
    let endemic = find_endemic(p, inc)?.map(|(u, v)| {
        let j = jacobian_at(p, inc, u, v);
        classify_trace_det(trace(&j), det(&j))
    });
    Ok(OdeStability {
        disease_free: classify_e0(r0),
        endemic,
    })
}

/// Neumann spectrum of `−Δ` on `(0, L)`: `λ_i = (iπ/L)²`.
#[derive(Debug, Clone, Serialize)]
pub struct NeumannSpectrum {
    pub length: f64,
    pub eigenvalues: Vec<f64>,
}

impl NeumannSpectrum {
    pub fn new(length: f64, modes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("interval length {length} must be positive")));
        }
        let eigenvalues = (0..=modes)
            .map(|i| {
                let w = i as f64 * PI / length;
                w * w
            })
            .collect();
        Ok(NeumannSpectrum {
            length,
            eigenvalues,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralRecord {
    pub eigenvalue: f64,
    /// `(−d1λ_i − μ, −d2λ_i + σ(R0 − 1))`
    pub disease_free_rates: (f64, f64),
    pub endemic_trace: Option<f64>,
    pub endemic_det: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeStability {
    pub disease_free: StabilityClass,
    pub endemic: Option<StabilityClass>,
    /// `H0 = −(d2·J11 + d1·J22)` at E*, the linear coefficient of `det_i`.
    pub h0: Option<f64>,
    /// Lower bound `d2·Λ/u*` for H0.
    pub h0_lower_bound: Option<f64>,
    pub detail: Vec<SpectralRecord>,
}

/// Stability of E0 and E* for the linearization `J − λ_i·diag(d1, d2)` over
/// every mode of `spectrum`.
///
/// Modes beyond the truncation cannot change the verdict: the trace is
/// decreasing in λ_i and the determinant is a quadratic in λ_i with
/// nonnegative coefficients once `H0 > 0`.
pub fn pde_spectral_check(
    p: &ModelParams,
    inc: &Incidence,
    spectrum: &NeumannSpectrum,
) -> Result<PdeStability> {
    if spectrum.eigenvalues.is_empty() {
        return Err(Error::Domain("empty spectrum".into()));
    }
    let (d1, d2) = (p.d1, p.d2);
    let r0 = basic_reproduction_number(p, inc);
    let e0_rate = infective_rate_at_e0(p, inc);

    let endemic = find_endemic(p, inc)?;
    let j_star = endemic.map(|(u, v)| jacobian_at(p, inc, u, v));
    let h0 = j_star.map(|j| -(d2 * j[0][0] + d1 * j[1][1]));
    let h0_lower_bound = endemic.map(|(u, _)| d2 * p.recruitment / u);

    let detail: Vec<SpectralRecord> = spectrum
        .eigenvalues
        .iter()
        .map(|&ev| {
            let (tr, dt) = match (j_star, h0) {
                (Some(j), Some(h0)) => (
                    Some(trace(&j) - ev * (d1 + d2)),
                    Some(d1 * d2 * ev * ev + ev * h0 + det(&j)),
                ),
                _ => (None, None),
            };
            SpectralRecord {
                eigenvalue: ev,
                disease_free_rates: (-d1 * ev - p.death, -d2 * ev + e0_rate),
                endemic_trace: tr,
                endemic_det: dt,
            }
        })
        .collect();

    // r_i2 is largest at i = 0, so the sign of R0 − 1 decides E0.
    let disease_free = classify_e0(r0);
    let endemic_class = h0.map(|h0| {
        let all_modes = detail.iter().all(|r| {
            matches!((r.endemic_trace, r.endemic_det), (Some(t), Some(d)) if t < 0.0 && d > 0.0)
        });
        if all_modes && h0 > 0.0 {
            StabilityClass::Stable
        } else {
            StabilityClass::Unstable
        }
    });

    Ok(PdeStability {
        disease_free,
        endemic: endemic_class,
        h0,
        h0_lower_bound,
        detail,
    })
}

/// `(d1 + d2)² / (4·d1·d2)`, the smallest θ for which the gradient form is
/// positive semidefinite. Equal to 1 in the homogeneous case.
pub fn theta_lower(d1: f64, d2: f64) -> Result<f64> {
    match (d1 == 0.0, d2 == 0.0) {
        (true, true) => Ok(1.0),
        (false, false) if d1 == d2 => Ok(1.0),
        (false, false) => {
            let s = d1 + d2;
            Ok(s * s / (4.0 * d1 * d2))
        }
        _ => Err(Error::Domain(format!(
            "θ-window needs both diffusivities positive or both zero (d1 = {d1}, d2 = {d2})"
        ))),
    }
}

/// Largest θ allowed by `φ'(0) ≤ (μ+σ) / (λ(θΛ/μ + Λ/σ))`.
pub fn theta_upper(p: &ModelParams, inc: &Incidence) -> f64 {
    let (big, mu, lam, sigma) = (p.recruitment, p.death, p.transmission, p.recovery);
    (mu / big) * ((mu + sigma) / (lam * inc.slope_at_zero()) - big / sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaWindow {
    pub lo: f64,
    pub hi: f64,
}

impl ThetaWindow {
    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }
}

/// The interval of θ for which the disease-free Lyapunov functional is
/// certified, or `None` when it is empty.
pub fn theta_window(p: &ModelParams, inc: &Incidence) -> Result<Option<ThetaWindow>> {
    let lo = theta_lower(p.d1, p.d2)?;
    let hi = theta_upper(p, inc);
    Ok((lo <= hi).then_some(ThetaWindow { lo, hi }))
}

/// Whether `Q(a, b) = d1·θ·a² + (d1 + d2)·a·b + d2·b²` is positive semidefinite.
pub fn gradient_form_is_psd(d1: f64, d2: f64, theta: f64) -> bool {
    let a = d1 * theta;
    let b = 0.5 * (d1 + d2);
    a >= 0.0 && d2 >= 0.0 && a * d2 - b * b >= 0.0
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub ode: OdeStability,
    pub pde: Option<PdeStability>,
    pub theta_window: Option<ThetaWindow>,
    /// Set when the window cannot be formed (exactly one diffusivity zero).
    pub theta_window_error: Option<String>,
    pub jacobian_disease_free: Mat2,
    pub jacobian_endemic: Option<Mat2>,
}

/// Full local picture. `spectrum` is consulted only for diffusive parameters.
pub fn stability_report(
    p: &ModelParams,
    inc: &Incidence,
    spectrum: Option<&NeumannSpectrum>,
) -> Result<StabilityReport> {
    let ode = ode_local_stability(p, inc)?;
    let pde = match spectrum {
        Some(s) => Some(pde_spectral_check(p, inc, s)?),
        None => None,
    };
    let (theta_window, theta_window_error) = match theta_window(p, inc) {
        Ok(w) => (w, None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (u0, v0) = p.disease_free();
    let jacobian_endemic = find_endemic(p, inc)?.map(|(u, v)| jacobian_at(p, inc, u, v));
    Ok(StabilityReport {
        ode,
        pde,
        theta_window,
        theta_window_error,
        jacobian_disease_free: jacobian_at(p, inc, u0, v0),
        jacobian_endemic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ex1(set: u8) -> (ModelParams, Incidence) {
        match set {
            1 => (
                ModelParams::new(8.0, 1.0, 1.0 / 3.0, 2.0, 3.0, 1.25).unwrap(),
                Incidence::linear(3.0).unwrap(),
            ),
            _ => (
                ModelParams::new(6.0, 4.0, 2.0, 1.5, 3.0, 1.25).unwrap(),
                Incidence::linear(1.0 / 3.0).unwrap(),
            ),
        }
    }

    #[test]
    fn jacobian_examples() {
        let (p, inc) = ex1(1);
        let (u0, v0) = p.disease_free();
        let j = jacobian_at(&p, &inc, u0, v0);
        let s = p.transmission * p.recruitment * 3.0 / p.death;
        assert_eq!(j, [[-p.death, -s], [0.0, s - p.recovery]]);

        let j = jacobian_at(&p, &inc, 0.0, 0.0);
        assert_eq!(j, [[-1.0, 0.0], [0.0, -2.0]]);

        // trace = −Λ/u*, det = λ²u*φ(v*)²/v* for linear incidence
        let j = jacobian_at(&p, &inc, 2.0, 3.0);
        assert_abs_diff_eq!(trace(&j), -4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(det(&j), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn ode_classes() {
        let (p, inc) = ex1(2);
        let s = ode_local_stability(&p, &inc).unwrap();
        assert_eq!(s.disease_free, StabilityClass::Stable);
        assert!(s.endemic.is_none());

        let p = ModelParams::ode(4.0, 1.0, 0.5, 2.0).unwrap();
        let inc = Incidence::linear(1.0).unwrap();
        let s = ode_local_stability(&p, &inc).unwrap();
        assert_eq!(s.disease_free, StabilityClass::NonHyperbolicPaperStable);
        let j = jacobian_at(&p, &inc, 4.0, 0.0);
        assert_eq!((j[0][0], j[1][1]), (-1.0, 0.0));

        let p = ModelParams::ode(33.0 / 4.0, 5.0 / 4.0, 7.0 / 12.0, 9.0 / 4.0).unwrap();
        let inc = Incidence::saturated(13.0 / 4.0, 0.5).unwrap();
        let s = ode_local_stability(&p, &inc).unwrap();
        assert_eq!(s.disease_free, StabilityClass::Unstable);
        assert_eq!(s.endemic, Some(StabilityClass::Stable));
    }

    #[test]
    fn spectrum_is_increasing_from_zero() {
        let s = NeumannSpectrum::new(10.0, 50).unwrap();
        assert_eq!(s.eigenvalues.len(), 51);
        assert_eq!(s.eigenvalues[0], 0.0);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
        assert_abs_diff_eq!(s.eigenvalues[1], (PI / 10.0).powi(2), epsilon = 1e-15);
        assert!(NeumannSpectrum::new(0.0, 5).is_err());
    }

    #[test]
    fn spectral_check_example1() {
        let spectrum = NeumannSpectrum::new(10.0, DEFAULT_MODES).unwrap();
        let (p, inc) = ex1(1);
        let r = pde_spectral_check(&p, &inc, &spectrum).unwrap();
        assert_eq!(r.endemic, Some(StabilityClass::Stable));
        assert_eq!(r.disease_free, StabilityClass::Unstable);
        assert_eq!(r.detail.len(), 51);
        for rec in &r.detail {
            assert!(rec.endemic_trace.unwrap() < 0.0);
            assert!(rec.endemic_det.unwrap() > 0.0);
        }
        assert!(r.h0.unwrap() >= r.h0_lower_bound.unwrap());

        // i = 0 reproduces the ODE Jacobian exactly
        let j = jacobian_at(&p, &inc, 2.0, 3.0);
        let (u, v) = find_endemic(&p, &inc).unwrap().unwrap();
        let j_root = jacobian_at(&p, &inc, u, v);
        assert_abs_diff_eq!(r.detail[0].endemic_trace.unwrap(), trace(&j), epsilon = 1e-7);
        assert_eq!(r.detail[0].endemic_trace.unwrap(), trace(&j_root));
        assert_eq!(r.detail[0].endemic_det.unwrap(), det(&j_root));

        let (p, inc) = ex1(2);
        let r = pde_spectral_check(&p, &inc, &spectrum).unwrap();
        assert_eq!(r.disease_free, StabilityClass::Stable);
        assert!(r.endemic.is_none());
        assert!(r.detail.iter().all(|rec| rec.disease_free_rates.1 < 0.0));
        let (u0, v0) = p.disease_free();
        let j = jacobian_at(&p, &inc, u0, v0);
        assert_eq!(r.detail[0].disease_free_rates, (j[0][0], j[1][1]));
    }

    #[test]
    fn trace_decreases_with_mode() {
        let spectrum = NeumannSpectrum::new(10.0, DEFAULT_MODES).unwrap();
        let (p, inc) = ex1(1);
        let r = pde_spectral_check(&p, &inc, &spectrum).unwrap();
        assert!(r
            .detail
            .windows(2)
            .all(|w| w[1].endemic_trace.unwrap() < w[0].endemic_trace.unwrap()));
    }

    #[test]
    fn theta_window_examples() {
        let (p, inc) = ex1(2);
        let w = theta_window(&p, &inc).unwrap().unwrap();
        assert_abs_diff_eq!(w.lo, 289.0 / 240.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.hi, 17.0 / 6.0, epsilon = 1e-12);

        let p = ModelParams::new(3.0 / 4.0, 3.0 / 7.0, 0.5, 2.0, 3.0, 1.25).unwrap();
        let inc = Incidence::half_saturation(4.0 / 3.0, 1.0).unwrap();
        let w = theta_window(&p, &inc).unwrap().unwrap();
        assert_abs_diff_eq!(w.hi, 183.0 / 98.0, epsilon = 1e-12);

        // endemic parameters: window empty
        let (p, inc) = ex1(1);
        assert!(theta_window(&p, &inc).unwrap().is_none());

        assert_eq!(theta_lower(2.5, 2.5).unwrap(), 1.0);
        assert_eq!(theta_lower(0.0, 0.0).unwrap(), 1.0);
        assert!(matches!(theta_lower(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn homogeneous_window_matches_threshold() {
        // θ = 1 is admissible exactly when R0 ≤ 1
        let inc = Incidence::linear(1.0).unwrap();
        for lam in [0.1, 0.2, 0.24, 0.25, 0.26, 0.5] {
            let p = ModelParams::ode(4.0, 1.0, lam, 1.0).unwrap();
            let r0 = basic_reproduction_number(&p, &inc);
            let w = theta_window(&p, &inc).unwrap();
            assert_eq!(w.is_some(), r0 <= 1.0, "λ = {lam}");
        }
    }

    #[test]
    fn e0_class_flips_at_threshold() {
        // R0 = 12λ for Example 1 Set 1 rates
        let inc = Incidence::linear(3.0).unwrap();
        let mut last = None;
        let mut flips = 0;
        for i in 0..200 {
            let lam = 0.05 + i as f64 * 0.0005;
            let p = ModelParams::ode(8.0, 1.0, lam, 2.0).unwrap();
            let c = ode_local_stability(&p, &inc).unwrap().disease_free;
            let r0 = basic_reproduction_number(&p, &inc);
            assert_eq!(c == StabilityClass::Unstable, r0 > 1.0);
            if last.is_some_and(|l| l != c) {
                flips += 1;
            }
            last = Some(c);
        }
        assert!(flips >= 1 && flips <= 2);
    }

    proptest! {
        #[test]
        fn theta_lower_at_least_one(d1 in 1e-3f64..1e3, d2 in 1e-3f64..1e3) {
            prop_assert!(theta_lower(d1, d2).unwrap() >= 1.0);
        }

        #[test]
        fn gradient_form_psd_iff_above_lower(d1 in 1e-2f64..10.0, d2 in 1e-2f64..10.0) {
            let lo = theta_lower(d1, d2).unwrap();
            prop_assert!(gradient_form_is_psd(d1, d2, lo + 1e-9));
            prop_assert!(!gradient_form_is_psd(d1, d2, lo - 1e-9));
        }

        #[test]
        fn h0_dominates_its_bound(
            big in 0.1f64..10.0, mu in 0.1f64..10.0, lam in 0.1f64..10.0, sigma in 0.1f64..10.0,
            alpha in 0.1f64..10.0, k in 0.1f64..10.0, d1 in 0.0f64..5.0, d2 in 0.0f64..5.0,
        ) {
            let p = ModelParams::new(big, mu, lam, sigma, d1, d2).unwrap();
            let spectrum = NeumannSpectrum::new(10.0, 10).unwrap();
            let inc = Incidence::saturated(alpha, k).unwrap();
            let r = pde_spectral_check(&p, &inc, &spectrum).unwrap();
            if let (Some(h0), Some(b)) = (r.h0, r.h0_lower_bound) {
                prop_assert!(h0 >= b - 1e-9 * b.abs().max(1.0));
            }
        }
    }
}
