//! Basic reproduction number and constant steady states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::Incidence;
use crate::params::ModelParams;

/// Maximum admissible residual `|h(v*)|` at an accepted root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

const EPS_START: f64 = 1e-6;
const MAX_HALVINGS: usize = 60;
const MAX_BISECTIONS: usize = 200;
const MAX_NEWTON: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub disease_free: (f64, f64),
    pub r0: f64,
    pub endemic: Option<(f64, f64)>,
    /// Bracket `[ε, Λ/σ0]` handed to the bisection, when a search ran.
    pub bracket: Option<(f64, f64)>,
    /// `|h(v*)|` at the accepted root.
    pub residual: Option<f64>,
}

/// R0 = Λ·λ·φ'(0)/(μ·σ), the spectral radius of the next-generation matrix.
pub fn basic_reproduction_number(p: &ModelParams, inc: &Incidence) -> f64 {
    p.recruitment * p.transmission * inc.slope_at_zero() / (p.death * p.recovery)
}

/// The one-dimensional residual whose positive root is v*:
/// `h(v) = (Λλ/(μσ))·φ(v)/v − (λ/μ)·φ(v) − 1`.
pub fn h_eval(p: &ModelParams, inc: &Incidence, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("h evaluated at v = {v} ≤ 0")));
    }
    Ok(h_raw(p, inc, v))
}

fn h_raw(p: &ModelParams, inc: &Incidence, v: f64) -> f64 {
    let phi = inc.phi(v);
    let scale = p.recruitment * p.transmission / (p.death * p.recovery);
    scale * (phi / v) - (p.transmission / p.death) * phi - 1.0
}

/// u* recovered from v* through `λu*φ(v*) = σv*`.
fn susceptible_at(p: &ModelParams, inc: &Incidence, v: f64) -> f64 {
    p.recovery * v / (p.transmission * inc.phi(v))
}

struct RootSearch {
    root: f64,
    bracket: (f64, f64),
    residual: f64,
}

fn search_root(p: &ModelParams, inc: &Incidence) -> Result<RootSearch> {
    let h = |v: f64| h_raw(p, inc, v);

    let mut lo = EPS_START;
    let mut h_lo = h(lo);
    let mut halvings = 0;
    while !(h_lo > 0.0) {
        if halvings == MAX_HALVINGS {
            return Err(Error::Convergence(format!(
                "h stayed non-positive down to v = {lo:e}; incidence is probably not admissible"
            )));
        }
        lo *= 0.5;
        h_lo = h(lo);
        halvings += 1;
    }
    let mut hi = p.population_cap();
    let h_hi = h(hi);
    if !(h_hi < 0.0) {
        return Err(Error::Convergence(format!(
            "h(Λ/σ0) = {h_hi} is not negative; incidence is probably not admissible"
        )));
    }
    let bracket = (lo, hi);

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h_mid = h(mid);
        if h_mid > 0.0 {
            lo = mid;
        } else if h_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
            break;
        }
    }

    // Newton polish inside the final bracket, derivative by central difference.
    let mut v = 0.5 * (lo + hi);
    let mut hv = h(v);
    for _ in 0..MAX_NEWTON {
        if hv == 0.0 {
            break;
        }
        let step = 1e-7 * v.max(1.0);
        let a = (v - step).max(0.5 * v);
        let b = v + step;
        let slope = (h(b) - h(a)) / (b - a);
        if !(slope.is_finite() && slope != 0.0) {
            break;
        }
        let next = v - hv / slope;
        if !(next > 0.0) || !next.is_finite() {
            break;
        }
        let h_next = h(next);
        if h_next.abs() >= hv.abs() {
            break;
        }
        v = next;
        hv = h_next;
    }

    if !(hv.abs() <= ROOT_RESIDUAL_TOL) {
        return Err(Error::Convergence(format!(
            "residual |h(v*)| = {:e} above tolerance",
            hv.abs()
        )));
    }
    Ok(RootSearch {
        root: v,
        bracket,
        residual: hv.abs(),
    })
}

/// Endemic equilibrium by bisection on `[ε, Λ/σ0]` followed by Newton polish.
/// `None` when R0 ≤ 1.
pub fn find_endemic(p: &ModelParams, inc: &Incidence) -> Result<Option<(f64, f64)>> {
    if basic_reproduction_number(p, inc) <= 1.0 {
        return Ok(None);
    }
    let s = search_root(p, inc)?;
    Ok(Some((susceptible_at(p, inc, s.root), s.root)))
}

/// Analytic endemic equilibrium of the closed-form families.
pub fn closed_form_endemic(p: &ModelParams, inc: &Incidence) -> Result<Option<(f64, f64)>> {
    let r0 = basic_reproduction_number(p, inc);
    let (mu, lam, sigma) = (p.death, p.transmission, p.recovery);
    let point = match *inc {
        Incidence::Linear { alpha } => {
            let v = mu * (r0 - 1.0) / (lam * alpha);
            (sigma / (lam * alpha), v)
        }
        Incidence::Saturated { alpha, k } => {
            let v = mu * (r0 - 1.0) / (lam * alpha + k * mu);
            (sigma * (1.0 + k * v) / (lam * alpha), v)
        }
        Incidence::HalfSaturation { k, alpha } => {
            let v = mu * alpha * (r0 - 1.0) / (lam * alpha * k + mu);
            (sigma * (alpha + v) / (lam * alpha * k), v)
        }
        Incidence::Custom(_) => return Err(Error::UnsupportedFamily),
    };
    Ok((r0 > 1.0).then_some(point))
}

pub fn equilibria(p: &ModelParams, inc: &Incidence) -> Result<EquilibriumReport> {
    let r0 = basic_reproduction_number(p, inc);
    let mut report = EquilibriumReport {
        disease_free: p.disease_free(),
        r0,
        endemic: None,
        bracket: None,
        residual: None,
    };
    if r0 > 1.0 {
        let s = search_root(p, inc)?;
        report.endemic = Some((susceptible_at(p, inc, s.root), s.root));
        report.bracket = Some(s.bracket);
        report.residual = Some(s.residual);
    }
    Ok(report)
}

/// Residuals of the two steady-state equations at `(u, v)`.
pub fn steady_state_residuals(p: &ModelParams, inc: &Incidence, (u, v): (f64, f64)) -> (f64, f64) {
    let infection = p.transmission * u * inc.phi(v);
    (
        p.recruitment - infection - p.death * u,
        infection - p.recovery * v,
    )
}
