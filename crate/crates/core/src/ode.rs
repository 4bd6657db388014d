//! Spatially homogeneous dynamics and the invariant-region monitor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::Incidence;
use crate::params::ModelParams;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_STRIDE: usize = 100;
const BLOW_UP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeState {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

impl OdeState {
    pub fn total(&self) -> f64 {
        self.u + self.v
    }
}

/// `(Λ − μu − λuφ(v), λuφ(v) − σv)`
#[inline]
pub fn rhs_ode(p: &ModelParams, inc: &Incidence, u: f64, v: f64) -> (f64, f64) {
    let infection = p.transmission * u * inc.phi(v);
    (
        p.recruitment - p.death * u - infection,
        infection - p.recovery * v,
    )
}

#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    /// Step actually used, `t_end / ceil(t_end / dt)`.
    pub dt: f64,
    pub states: Vec<OdeState>,
    /// `|(F, G)|₂` at the final state.
    pub final_rhs_norm: f64,
}

impl OdeTrajectory {
    pub fn last(&self) -> &OdeState {
        self.states.last().expect("trajectory is never empty")
    }

    /// Max-norm distance to `target` stays below `tol` over the last 10% of
    /// recorded samples.
    pub fn converged_to(&self, target: (f64, f64), tol: f64) -> bool {
        let n = self.states.len();
        let tail = (n / 10).max(1);
        self.states[n - tail..]
            .iter()
            .all(|s| (s.u - target.0).abs().max((s.v - target.1).abs()) < tol)
    }
}

fn rk4(p: &ModelParams, inc: &Incidence, u: f64, v: f64, h: f64) -> (f64, f64) {
    let (a1, b1) = rhs_ode(p, inc, u, v);
    let (a2, b2) = rhs_ode(p, inc, u + 0.5 * h * a1, v + 0.5 * h * b1);
    let (a3, b3) = rhs_ode(p, inc, u + 0.5 * h * a2, v + 0.5 * h * b2);
    let (a4, b4) = rhs_ode(p, inc, u + h * a3, v + h * b3);
    (
        u + h / 6.0 * (a1 + 2.0 * (a2 + a3) + a4),
        v + h / 6.0 * (b1 + 2.0 * (b2 + b3) + b4),
    )
}

/// Classical fixed-step RK4 on `[0, t_end]`, recording the initial state,
/// every `stride`-th step and the final state.
pub fn integrate_ode(
    p: &ModelParams,
    inc: &Incidence,
    (u0, v0): (f64, f64),
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<OdeTrajectory> {
    if !(u0 >= 0.0 && v0 >= 0.0) {
        return Err(Error::Domain(format!("initial state ({u0}, {v0}) must be nonnegative")));
    }
    if !(dt > 0.0 && t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("need dt > 0 and t_end > 0 (dt = {dt}, t_end = {t_end})")));
    }
    let stride = stride.max(1);
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;

    let mut states = Vec::with_capacity(steps / stride + 2);
    states.push(OdeState { t: 0.0, u: u0, v: v0 });
    let (mut u, mut v) = (u0, v0);
    for k in 1..=steps {
        (u, v) = rk4(p, inc, u, v, h);
        let t = k as f64 * h;
        if !(u.is_finite() && v.is_finite()) || u.abs() > BLOW_UP || v.abs() > BLOW_UP {
            return Err(Error::BlowUp { t });
        }
        if k % stride == 0 || k == steps {
            states.push(OdeState { t, u, v });
        }
    }
    let (f, g) = rhs_ode(p, inc, u, v);
    Ok(OdeTrajectory {
        dt: h,
        states,
        final_rhs_norm: f.hypot(g),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionReport {
    pub passed: bool,
    /// Largest `N(t) − envelope(t)`, or most negative component, whichever is worse.
    pub worst_excess: f64,
    pub tolerance: f64,
}

/// Checks `N(t) ≤ Λ/σ0·(1 − e^{−σ0 t}) + N(0)·e^{−σ0 t}` and `u, v ≥ 0`
/// pointwise, with tolerance `1e-9·(1 + Λ/σ0)`.
pub fn invariant_region_monitor(states: &[OdeState], p: &ModelParams) -> RegionReport {
    let cap = p.population_cap();
    let s0 = p.sigma0();
    let tol = 1e-9 * (1.0 + cap);
    let n0 = states.first().map_or(0.0, |s| s.total());
    let mut worst = f64::NEG_INFINITY;
    for s in states {
        let decay = (-s0 * s.t).exp();
        let envelope = cap * (1.0 - decay) + n0 * decay;
        worst = worst.max(s.total() - envelope).max(-s.u).max(-s.v);
    }
    RegionReport {
        passed: worst <= tol,
        worst_excess: worst,
        tolerance: tol,
    }
}
