//! Method-of-lines solver for the reaction–diffusion system on `(0, L)` with
//! zero-flux boundaries.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::Incidence;
use crate::params::ModelParams;

/// Diffusive stability safety factor.
pub const CFL_SAFETY: f64 = 0.4;
/// Upper cap on the automatic step; keeps reaction-only runs accurate.
pub const MAX_AUTO_DT: f64 = 1e-3;
pub const BLOW_UP: f64 = 1e12;

/// Samples of a function on the uniform grid `x_i = i·L/(n−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    length: f64,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(length: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::GridTooSmall(values.len()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("domain length {length} must be positive")));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at grid point {i}")));
        }
        Ok(Field1D { length, values })
    }

    pub fn from_fn(length: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::GridTooSmall(n));
        }
        let dx = length / (n - 1) as f64;
        Self::new(length, (0..n).map(|i| f(i as f64 * dx)).collect())
    }

    pub fn constant(length: f64, n: usize, c: f64) -> Result<Self> {
        Self::from_fn(length, n, |_| c)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
    }

    pub fn inf(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &x| m.min(x))
    }

    /// Composite trapezoid rule over `(0, L)`.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.dx())
    }

    /// Mean-square deviation from the spatial mean, both by trapezoid.
    pub fn variance(&self) -> f64 {
        let mean = self.integral() / self.length;
        let dev: Vec<f64> = self.values.iter().map(|x| (x - mean) * (x - mean)).collect();
        trapezoid(&dev, self.dx()) / self.length
    }

    pub fn same_grid(&self, other: &Field1D) -> bool {
        self.len() == other.len() && self.length == other.length
    }

    pub fn ensure_same_grid(&self, other: &Field1D) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(L = {}, n = {}) vs (L = {}, n = {})",
                self.length,
                self.len(),
                other.length,
                other.len()
            )))
        }
    }

    /// One-sided second-order derivative at the left and right ends.
    pub fn boundary_slopes(&self) -> (f64, f64) {
        let f = &self.values;
        let n = f.len();
        let h = self.dx();
        (
            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h),
            (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h),
        )
    }
}

pub(crate) fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    dx * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Writes `Δf` into `out` using ghost-point reflection at both ends.
fn laplacian_into(f: &[f64], inv_dx2: f64, out: &mut [f64]) {
    let n = f.len();
    out[0] = 2.0 * (f[1] - f[0]) * inv_dx2;
    for i in 1..n - 1 {
        out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv_dx2;
    }
    out[n - 1] = 2.0 * (f[n - 2] - f[n - 1]) * inv_dx2;
}

/// Second-order Neumann Laplacian.
pub fn apply_laplacian_neumann(f: &Field1D) -> Result<Field1D> {
    if f.len() < 3 {
        return Err(Error::GridTooSmall(f.len()));
    }
    let h = f.dx();
    let mut out = vec![0.0; f.len()];
    laplacian_into(&f.values, 1.0 / (h * h), &mut out);
    Ok(Field1D {
        length: f.length,
        values: out,
    })
}

/// `c0 + a·cos(b·x) + c·sin(d·x)`; every initial condition of the built-in
/// experiments has this form.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Profile {
    pub constant: f64,
    pub cos_amp: f64,
    pub cos_freq: f64,
    pub sin_amp: f64,
    pub sin_freq: f64,
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile {
            constant: c,
            ..Default::default()
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.constant + self.cos_amp * (self.cos_freq * x).cos() + self.sin_amp * (self.sin_freq * x).sin()
    }

    pub fn sample(&self, length: f64, n: usize) -> Result<Field1D> {
        Field1D::from_fn(length, n, |x| self.eval(x))
    }

    /// Parses expressions such as `4 + cos(x)/10`, `0.6+cos(x)/7`,
    /// `2*sin(3x)`, `5 - 0.1*cos(2*x)`.
    pub fn parse(expr: &str) -> Result<Self> {
        static NUM: OnceLock<Regex> = OnceLock::new();
        static TRIG: OnceLock<Regex> = OnceLock::new();
        const N: &str = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?";
        let num = NUM.get_or_init(|| Regex::new(&format!(r"^({N})(?:/({N}))?$")).unwrap());
        let trig = TRIG.get_or_init(|| {
            Regex::new(&format!(
                r"^(?:({N})\*?)?(cos|sin)\((?:({N})\*?)?x\)(?:/({N}))?$"
            ))
            .unwrap()
        });
        let bad = || Error::Profile(expr.to_string());
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad());

        let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut out = Profile::default();
        let (mut seen_cos, mut seen_sin) = (false, false);
        for (sign, term) in split_terms(&compact).ok_or_else(bad)? {
            if let Some(c) = num.captures(term) {
                let mut x = parse_f(&c[1])?;
                if let Some(d) = c.get(2) {
                    x /= parse_f(d.as_str())?;
                }
                out.constant += sign * x;
            } else if let Some(c) = trig.captures(term) {
                let mut amp = c.get(1).map_or(Ok(1.0), |m| parse_f(m.as_str()))?;
                let freq = c.get(3).map_or(Ok(1.0), |m| parse_f(m.as_str()))?;
                if let Some(d) = c.get(4) {
                    amp /= parse_f(d.as_str())?;
                }
                let slot = if &c[2] == "cos" { &mut seen_cos } else { &mut seen_sin };
                if *slot {
                    return Err(bad());
                }
                *slot = true;
                if &c[2] == "cos" {
                    out.cos_amp = sign * amp;
                    out.cos_freq = freq;
                } else {
                    out.sin_amp = sign * amp;
                    out.sin_freq = freq;
                }
            } else {
                return Err(bad());
            }
        }
        if [out.constant, out.cos_amp, out.sin_amp, out.cos_freq, out.sin_freq]
            .iter()
            .any(|x| !x.is_finite())
        {
            return Err(bad());
        }
        Ok(out)
    }
}

/// Splits at top-level `+`/`-`, keeping exponent signs attached.
fn split_terms(s: &str) -> Option<Vec<(f64, &str)>> {
    let bytes = s.as_bytes();
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut sign = 1.0;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                let exponent = i > 0 && matches!(bytes[i - 1], b'e' | b'E') && i > 1 && bytes[i - 2].is_ascii_digit();
                if exponent {
                    continue;
                }
                if i > start {
                    terms.push((sign, &s[start..i]));
                } else if i != 0 {
                    return None;
                }
                sign = if b == b'-' { -1.0 } else { 1.0 };
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 || start >= s.len() {
        return None;
    }
    terms.push((sign, &s[start..]));
    Some(terms)
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        let sign = |a: f64| if a < 0.0 { '-' } else { '+' };
        if self.cos_amp != 0.0 {
            write!(f, " {} {}*cos({}*x)", sign(self.cos_amp), self.cos_amp.abs(), self.cos_freq)?;
        }
        if self.sin_amp != 0.0 {
            write!(f, " {} {}*sin({}*x)", sign(self.sin_amp), self.sin_amp.abs(), self.sin_freq)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PdeSnapshot {
    pub t: f64,
    pub u: Field1D,
    pub v: Field1D,
    pub sup_u: f64,
    pub sup_v: f64,
    /// `∫(u + v) dx`
    pub mass: f64,
}

impl PdeSnapshot {
    fn new(t: f64, u: Field1D, v: Field1D) -> Self {
        let mass = u.integral() + v.integral();
        PdeSnapshot {
            t,
            sup_u: u.sup(),
            sup_v: v.sup(),
            u,
            v,
            mass,
        }
    }

    /// Sup-norm distance of both components to a constant state.
    pub fn distance_to(&self, (ue, ve): (f64, f64)) -> f64 {
        let du = self.u.values().iter().fold(0.0f64, |m, x| m.max((x - ue).abs()));
        let dv = self.v.values().iter().fold(0.0f64, |m, x| m.max((x - ve).abs()));
        du.max(dv)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PdeOptions {
    /// Overrides the automatic step.
    pub dt: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PdeRun {
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<PdeSnapshot>,
}

/// Automatic step: `0.4·dx²/(2·max(d1, d2, ε))`, capped at [`MAX_AUTO_DT`].
pub fn auto_dt(p: &ModelParams, dx: f64) -> f64 {
    let d = p.d1.max(p.d2).max(1e-12);
    (CFL_SAFETY * dx * dx / (2.0 * d)).min(MAX_AUTO_DT)
}

struct Mol<'a> {
    p: &'a ModelParams,
    inc: &'a Incidence,
    inv_dx2: f64,
    lap_u: Vec<f64>,
    lap_v: Vec<f64>,
}

impl Mol<'_> {
    fn rhs(&mut self, u: &[f64], v: &[f64], du: &mut [f64], dv: &mut [f64]) {
        let p = self.p;
        laplacian_into(u, self.inv_dx2, &mut self.lap_u);
        laplacian_into(v, self.inv_dx2, &mut self.lap_v);
        for i in 0..u.len() {
            let infection = p.transmission * u[i] * self.inc.phi(v[i]);
            du[i] = p.d1 * self.lap_u[i] + p.recruitment - p.death * u[i] - infection;
            dv[i] = p.d2 * self.lap_v[i] + infection - p.recovery * v[i];
        }
    }
}

struct Rk4Buffers {
    k: [Vec<f64>; 8],
    tmp_u: Vec<f64>,
    tmp_v: Vec<f64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        Rk4Buffers {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp_u: vec![0.0; n],
            tmp_v: vec![0.0; n],
        }
    }
}

fn rk4_step(mol: &mut Mol<'_>, b: &mut Rk4Buffers, u: &mut [f64], v: &mut [f64], h: f64) {
    let n = u.len();
    let [k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v] = &mut b.k;
    mol.rhs(u, v, k1u, k1v);
    for i in 0..n {
        b.tmp_u[i] = u[i] + 0.5 * h * k1u[i];
        b.tmp_v[i] = v[i] + 0.5 * h * k1v[i];
    }
    mol.rhs(&b.tmp_u, &b.tmp_v, k2u, k2v);
    for i in 0..n {
        b.tmp_u[i] = u[i] + 0.5 * h * k2u[i];
        b.tmp_v[i] = v[i] + 0.5 * h * k2v[i];
    }
    mol.rhs(&b.tmp_u, &b.tmp_v, k3u, k3v);
    for i in 0..n {
        b.tmp_u[i] = u[i] + h * k3u[i];
        b.tmp_v[i] = v[i] + h * k3v[i];
    }
    mol.rhs(&b.tmp_u, &b.tmp_v, k4u, k4v);
    let w = h / 6.0;
    for i in 0..n {
        u[i] += w * (k1u[i] + 2.0 * (k2u[i] + k3u[i]) + k4u[i]);
        v[i] += w * (k1v[i] + 2.0 * (k2v[i] + k3v[i]) + k4v[i]);
    }
}

/// Snapshot times `0, s, 2s, …, t_end` (the last one always `t_end`).
fn snapshot_times(t_end: f64, every: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let count = (t_end / every).floor() as usize;
    for j in 1..=count {
        let t = j as f64 * every;
        if t < t_end * (1.0 - 1e-12) {
            times.push(t);
        }
    }
    times.push(t_end);
    times
}

/// Integrates with classical RK4 on the semi-discrete system. Each interval
/// between snapshots is covered by equal steps no longer than `dt`.
pub fn integrate_pde(
    p: &ModelParams,
    inc: &Incidence,
    u0: &Field1D,
    v0: &Field1D,
    t_end: f64,
    snapshot_every: f64,
    opts: PdeOptions,
) -> Result<PdeRun> {
    u0.ensure_same_grid(v0)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end = {t_end} must be positive")));
    }
    if !(snapshot_every > 0.0) {
        return Err(Error::Domain(format!("snapshot interval {snapshot_every} must be positive")));
    }
    if let Some(i) = (0..u0.len()).find(|&i| u0.values[i] < 0.0 || v0.values[i] < 0.0) {
        return Err(Error::Domain(format!("negative initial data at grid point {i}")));
    }
    let dx = u0.dx();
    let dt = opts.dt.unwrap_or_else(|| auto_dt(p, dx));
    if !(dt.is_normal() && dt > 1e-14) {
        return Err(Error::StepUnderflow(dt));
    }

    let n = u0.len();
    let mut mol = Mol {
        p,
        inc,
        inv_dx2: 1.0 / (dx * dx),
        lap_u: vec![0.0; n],
        lap_v: vec![0.0; n],
    };
    let mut bufs = Rk4Buffers::new(n);
    let mut u = u0.values.clone();
    let mut v = v0.values.clone();
    let length = u0.length;

    let times = snapshot_times(t_end, snapshot_every);
    let mut snapshots = Vec::with_capacity(times.len());
    snapshots.push(PdeSnapshot::new(0.0, u0.clone(), v0.clone()));
    let mut steps = 0;
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let m = (span / dt).ceil().max(1.0) as usize;
        let h = span / m as f64;
        for _ in 0..m {
            rk4_step(&mut mol, &mut bufs, &mut u, &mut v, h);
        }
        steps += m;
        let blown = u.iter().chain(v.iter()).any(|x| !x.is_finite() || x.abs() > BLOW_UP);
        if blown {
            return Err(Error::BlowUp { t: w[1] });
        }
        snapshots.push(PdeSnapshot::new(
            w[1],
            Field1D { length, values: u.clone() },
            Field1D { length, values: v.clone() },
        ));
    }
    Ok(PdeRun {
        dt,
        steps,
        snapshots,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundednessReport {
    pub passed: bool,
    /// Largest `sup_u(t) − max(Λ/μ, sup u0)`.
    pub sup_excess: f64,
    /// Largest excess of the mass over its Gronwall envelope.
    pub mass_excess: f64,
    pub min_value: f64,
    pub first_failure: Option<String>,
}

/// Checks the a-priori bounds on a run: `sup u ≤ max(Λ/μ, ‖u0‖∞)`, the mass
/// envelope `Λ|Ω|/σ0·(1 − e^{−σ0 t}) + M0·e^{−σ0 t}`, and nonnegativity.
/// Tolerances are 1e-6 relative to each bound.
pub fn boundedness_monitor(
    snapshots: &[PdeSnapshot],
    p: &ModelParams,
    u0: &Field1D,
    v0: &Field1D,
) -> BoundednessReport {
    const REL: f64 = 1e-6;
    let sup_bound = (p.recruitment / p.death).max(u0.sup());
    let s0 = p.sigma0();
    let area = u0.length();
    let mass0 = u0.integral() + v0.integral();

    let mut report = BoundednessReport {
        passed: true,
        sup_excess: f64::NEG_INFINITY,
        mass_excess: f64::NEG_INFINITY,
        min_value: f64::INFINITY,
        first_failure: None,
    };
    let fail = |r: &mut BoundednessReport, msg: String| {
        if r.passed {
            r.first_failure = Some(msg);
        }
        r.passed = false;
    };
    for s in snapshots {
        let excess = s.sup_u - sup_bound;
        report.sup_excess = report.sup_excess.max(excess);
        if excess > REL * sup_bound.max(1.0) {
            fail(&mut report, format!("sup u = {} exceeds {} at t = {}", s.sup_u, sup_bound, s.t));
        }
        let decay = (-s0 * s.t).exp();
        let envelope = p.recruitment * area / s0 * (1.0 - decay) + mass0 * decay;
        let excess = s.mass - envelope;
        report.mass_excess = report.mass_excess.max(excess);
        if excess > REL * envelope.max(1.0) {
            fail(&mut report, format!("mass {} exceeds envelope {} at t = {}", s.mass, envelope, s.t));
        }
        let low = s.u.inf().min(s.v.inf());
        report.min_value = report.min_value.min(low);
        if low < -REL * sup_bound.max(1.0) {
            fail(&mut report, format!("negative value {low} at t = {}", s.t));
        }
    }
    report
}
