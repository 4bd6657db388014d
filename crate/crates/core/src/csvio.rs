//! CSV artifacts. Floats are written in scientific notation with 17
//! significant digits, which round-trips every finite `f64` exactly.
//!
//! Schemas:
//! - ODE trajectory: `t,u,v,N,V_theta,V_endemic` (empty cell when not applicable)
//! - PDE snapshots, long format: `t,x,u,v`
//! - PDE series: `t,sup_u,sup_v,mass,V_theta,V_endemic`
//! - sweep: see [`SWEEP_HEADER`]

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pde::PdeSnapshot;

pub const ODE_HEADER: [&str; 6] = ["t", "u", "v", "N", "V_theta", "V_endemic"];
pub const PDE_HEADER: [&str; 4] = ["t", "x", "u", "v"];
pub const SERIES_HEADER: [&str; 6] = ["t", "sup_u", "sup_v", "mass", "V_theta", "V_endemic"];
pub const SWEEP_HEADER: [&str; 14] = [
    "param",
    "value",
    "R0",
    "E0_u",
    "E0_v",
    "Estar_u",
    "Estar_v",
    "ode_E0",
    "ode_Estar",
    "pde_E0",
    "pde_Estar",
    "theta_lo",
    "theta_hi",
    "verdict",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Domain(format!("cannot parse `{s}` as a number")))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeRow {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub n: f64,
    pub v_theta: Option<f64>,
    pub v_endemic: Option<f64>,
}

pub fn write_ode_csv(path: impl AsRef<Path>, rows: &[OdeRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_record(ODE_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.t),
            fmt_f64(r.u),
            fmt_f64(r.v),
            fmt_f64(r.n),
            fmt_opt(r.v_theta),
            fmt_opt(r.v_endemic),
        ])?;
    }
    finish(w, path)
}

pub fn read_ode_csv(path: impl AsRef<Path>) -> Result<Vec<OdeRow>> {
    let mut rows = Vec::new();
    for rec in open(path.as_ref())?.records() {
        let rec = rec?;
        rows.push(OdeRow {
            t: parse_f64(&rec[0])?,
            u: parse_f64(&rec[1])?,
            v: parse_f64(&rec[2])?,
            n: parse_f64(&rec[3])?,
            v_theta: parse_opt(&rec[4])?,
            v_endemic: parse_opt(&rec[5])?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdePoint {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub v: f64,
}

pub fn write_pde_csv(path: impl AsRef<Path>, snapshots: &[PdeSnapshot]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_record(PDE_HEADER)?;
    for s in snapshots {
        for (i, (u, v)) in s.u.values().iter().zip(s.v.values()).enumerate() {
            w.write_record([fmt_f64(s.t), fmt_f64(s.u.x(i)), fmt_f64(*u), fmt_f64(*v)])?;
        }
    }
    finish(w, path)
}

pub fn read_pde_csv(path: impl AsRef<Path>) -> Result<Vec<PdePoint>> {
    let mut out = Vec::new();
    for rec in open(path.as_ref())?.records() {
        let rec = rec?;
        out.push(PdePoint {
            t: parse_f64(&rec[0])?,
            x: parse_f64(&rec[1])?,
            u: parse_f64(&rec[2])?,
            v: parse_f64(&rec[3])?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub mass: f64,
    pub v_theta: Option<f64>,
    pub v_endemic: Option<f64>,
}

pub fn write_series_csv(path: impl AsRef<Path>, rows: &[SeriesRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_record(SERIES_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.t),
            fmt_f64(r.sup_u),
            fmt_f64(r.sup_v),
            fmt_f64(r.mass),
            fmt_opt(r.v_theta),
            fmt_opt(r.v_endemic),
        ])?;
    }
    finish(w, path)
}

/// One row of a parameter sweep; stability classes as strings, empty when
/// not applicable.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub param: String,
    pub value: f64,
    pub r0: f64,
    pub disease_free: (f64, f64),
    pub endemic: Option<(f64, f64)>,
    pub ode_e0: String,
    pub ode_endemic: Option<String>,
    pub pde_e0: Option<String>,
    pub pde_endemic: Option<String>,
    pub theta: Option<(f64, f64)>,
    pub verdict: String,
}

pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.param.clone(),
            fmt_f64(r.value),
            fmt_f64(r.r0),
            fmt_f64(r.disease_free.0),
            fmt_f64(r.disease_free.1),
            fmt_opt(r.endemic.map(|e| e.0)),
            fmt_opt(r.endemic.map(|e| e.1)),
            r.ode_e0.clone(),
            r.ode_endemic.clone().unwrap_or_default(),
            r.pde_e0.clone().unwrap_or_default(),
            r.pde_endemic.clone().unwrap_or_default(),
            fmt_opt(r.theta.map(|w| w.0)),
            fmt_opt(r.theta.map(|w| w.1)),
            r.verdict.clone(),
        ])?;
    }
    finish(w, path)
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let text = |s: &str| (!s.is_empty()).then(|| s.to_string());
    let mut out = Vec::new();
    for rec in open(path.as_ref())?.records() {
        let rec = rec?;
        let pair = |a: &str, b: &str| -> Result<Option<(f64, f64)>> {
            Ok(match (parse_opt(a)?, parse_opt(b)?) {
                (Some(x), Some(y)) => Some((x, y)),
                _ => None,
            })
        };
        out.push(SweepRecord {
            param: rec[0].to_string(),
            value: parse_f64(&rec[1])?,
            r0: parse_f64(&rec[2])?,
            disease_free: (parse_f64(&rec[3])?, parse_f64(&rec[4])?),
            endemic: pair(&rec[5], &rec[6])?,
            ode_e0: rec[7].to_string(),
            ode_endemic: text(&rec[8]),
            pde_e0: text(&rec[9]),
            pde_endemic: text(&rec[10]),
            theta: pair(&rec[11], &rec[12])?,
            verdict: rec[13].to_string(),
        });
    }
    Ok(out)
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: impl AsRef<Path>, value: &impl serde::Serialize) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
