//! Analysis, simulation, table reproduction, sweeps and verification.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, InitialData, Mode, ThetaChoice};
use crate::csvio::{self, OdeRow, SeriesRow, SweepRecord};
use crate::equilibria::equilibria;
use crate::error::{Error, Result};
use crate::incidence::{check_admissible, log_grid, AdmissibilityReport, Incidence, IncidenceSpec};
use crate::lyapunov::{
    lemma2_check, monotonicity_check, v_endemic_eval, v_endemic_point, v_theta_eval, v_theta_point,
    Functional, Lemma2Report, LyapunovSeries, DEFAULT_MONOTONE_TOL,
};
use crate::ode::{integrate_ode, invariant_region_monitor, OdeTrajectory, RegionReport};
use crate::params::ModelParams;
use crate::pde::{boundedness_monitor, integrate_pde, BoundednessReport, Field1D, PdeOptions, PdeRun};
use crate::stability::{
    stability_report, theta_lower, theta_upper, Mat2, NeumannSpectrum, OdeStability, PdeStability,
    ThetaWindow, DEFAULT_MODES,
};
use crate::tables::{Printed, TableRow};

pub const R0_TOL: f64 = 1e-4;
pub const EQUILIBRIUM_TOL: f64 = 1e-3;
pub const THETA_TOL: f64 = 1e-4;
pub const ODE_CONVERGENCE_TOL: f64 = 1e-3;
pub const PDE_CONVERGENCE_TOL: f64 = 1e-2;
pub const ADMISSIBILITY_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EndemicGlobal,
    DiseaseFreeGlobal,
    DiseaseFreeLocal,
}

impl Verdict {
    pub fn code(&self) -> &'static str {
        match self {
            Verdict::EndemicGlobal => "endemic_global",
            Verdict::DiseaseFreeGlobal => "disease_free_global",
            Verdict::DiseaseFreeLocal => "disease_free_local",
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Verdict::EndemicGlobal => "E* globally asymptotically stable (endemic Lyapunov functional)",
            Verdict::DiseaseFreeGlobal => {
                "E0 globally asymptotically stable (theta-weighted Lyapunov functional)"
            }
            Verdict::DiseaseFreeLocal => "E0 locally stable; theta-window condition not met",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub mode: Mode,
    pub params: ModelParams,
    pub incidence: IncidenceSpec,
    pub r0: f64,
    pub disease_free: (f64, f64),
    pub endemic: Option<(f64, f64)>,
    pub endemic_residual: Option<f64>,
    pub root_bracket: Option<(f64, f64)>,
    pub ode_stability: OdeStability,
    pub pde_stability: Option<PdeStability>,
    pub theta_window: Option<ThetaWindow>,
    pub theta_window_error: Option<String>,
    pub jacobian_disease_free: Mat2,
    pub jacobian_endemic: Option<Mat2>,
    pub verdict: Verdict,
    pub verdict_text: &'static str,
}

impl Analysis {
    /// E* when R0 > 1, E0 otherwise.
    pub fn attractor(&self) -> (f64, f64) {
        self.endemic.unwrap_or(self.disease_free)
    }

    /// Deterministic pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn analyze(cfg: &ExperimentConfig) -> Result<Analysis> {
    let p = cfg.analysis_params();
    let inc = cfg.incidence()?;
    let eq = equilibria(&p, &inc)?;
    let spectrum = match (cfg.mode, cfg.grid) {
        (Mode::Pde, Some(g)) => Some(NeumannSpectrum::new(g.length, DEFAULT_MODES)?),
        _ => None,
    };
    let st = stability_report(&p, &inc, spectrum.as_ref())?;
    let verdict = if eq.r0 > 1.0 {
        Verdict::EndemicGlobal
    } else if st.theta_window.is_some() {
        Verdict::DiseaseFreeGlobal
    } else {
        Verdict::DiseaseFreeLocal
    };
    Ok(Analysis {
        mode: cfg.mode,
        params: p,
        incidence: cfg.incidence,
        r0: eq.r0,
        disease_free: eq.disease_free,
        endemic: eq.endemic,
        endemic_residual: eq.residual,
        root_bracket: eq.bracket,
        ode_stability: st.ode,
        pde_stability: st.pde,
        theta_window: st.theta_window,
        theta_window_error: st.theta_window_error,
        jacobian_disease_free: st.jacobian_disease_free,
        jacobian_endemic: st.jacobian_endemic,
        verdict,
        verdict_text: verdict.text(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovCheck {
    pub functional: Functional,
    /// Whether the run must pass this check: the endemic functional when
    /// R0 > 1, the θ functional when R0 ≤ 1 and θ lies in the window.
    pub required: bool,
    pub samples: usize,
    pub passed: bool,
    pub max_increase: f64,
    pub allowed: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorResults {
    pub invariant_region: Option<RegionReport>,
    pub boundedness: Option<BoundednessReport>,
    pub lyapunov: Vec<LyapunovCheck>,
}

impl MonitorResults {
    pub fn passed(&self) -> bool {
        self.invariant_region.as_ref().is_none_or(|r| r.passed)
            && self.boundedness.as_ref().is_none_or(|r| r.passed)
            && self.lyapunov.iter().all(|l| !l.required || l.passed)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Convergence {
    pub target: (f64, f64),
    /// Max-norm distance of the final state (sup over the grid for PDE runs).
    pub distance: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub mode: Mode,
    pub dt: f64,
    pub steps: usize,
    pub samples: usize,
    pub t_end: f64,
    /// Final `(u, v)` for ODE runs, final spatial means for PDE runs.
    pub final_state: (f64, f64),
    pub convergence: Convergence,
    pub monitors: MonitorResults,
    pub monitors_passed: bool,
}

#[derive(Debug, Clone)]
pub enum Trajectory {
    Ode(OdeTrajectory),
    Pde(PdeRun),
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub analysis: Analysis,
    pub summary: SimulationSummary,
    pub trajectory: Trajectory,
    pub theta: Option<f64>,
}

/// θ used for the disease-free functional, if one can be formed.
fn chosen_theta(cfg: &ExperimentConfig, p: &ModelParams) -> Option<f64> {
    match cfg.monitors.theta {
        ThetaChoice::Value(t) => Some(t),
        ThetaChoice::Named(_) => theta_lower(p.d1, p.d2).ok(),
    }
}

fn lyapunov_check(
    functional: Functional,
    required: bool,
    series: Result<LyapunovSeries>,
) -> LyapunovCheck {
    match series {
        Ok(s) => {
            let r = monotonicity_check(&s, DEFAULT_MONOTONE_TOL);
            LyapunovCheck {
                functional,
                required,
                samples: s.len(),
                passed: r.passed,
                max_increase: r.max_increase,
                allowed: r.allowed,
                note: None,
            }
        }
        Err(e) => LyapunovCheck {
            functional,
            required,
            samples: 0,
            passed: false,
            max_increase: f64::NAN,
            allowed: f64::NAN,
            note: Some(e.to_string()),
        },
    }
}

fn lyapunov_checks(
    analysis: &Analysis,
    theta: Option<f64>,
    mut theta_series: impl FnMut(f64) -> Result<LyapunovSeries>,
    mut endemic_series: impl FnMut((f64, f64)) -> Result<LyapunovSeries>,
) -> Vec<LyapunovCheck> {
    let mut out = Vec::new();
    if let Some(th) = theta {
        let required = analysis.r0 <= 1.0 && analysis.theta_window.is_some_and(|w| w.contains(th));
        out.push(lyapunov_check(Functional::Theta { theta: th }, required, theta_series(th)));
    }
    if let Some(e) = analysis.endemic {
        out.push(lyapunov_check(Functional::Endemic, analysis.r0 > 1.0, endemic_series(e)));
    }
    out
}

pub fn ode_series(traj: &OdeTrajectory, p: &ModelParams, functional: Functional, endemic: Option<(f64, f64)>) -> Result<LyapunovSeries> {
    let mut s = LyapunovSeries::new(functional);
    for st in &traj.states {
        let value = match functional {
            Functional::Theta { theta } => v_theta_point(p, theta, st.u, st.v),
            Functional::Endemic => {
                let e = endemic.ok_or_else(|| Error::Domain("no endemic equilibrium".into()))?;
                v_endemic_point(e, st.u, st.v)?
            }
        };
        s.push(st.t, value);
    }
    Ok(s)
}

pub fn pde_series(run: &PdeRun, p: &ModelParams, functional: Functional, endemic: Option<(f64, f64)>) -> Result<LyapunovSeries> {
    let mut s = LyapunovSeries::new(functional);
    for snap in &run.snapshots {
        let value = match functional {
            Functional::Theta { theta } => v_theta_eval(&snap.u, &snap.v, p, theta)?,
            Functional::Endemic => {
                let e = endemic.ok_or_else(|| Error::Domain("no endemic equilibrium".into()))?;
                v_endemic_eval(&snap.u, &snap.v, e)?
            }
        };
        s.push(snap.t, value);
    }
    Ok(s)
}

fn initial_fields(cfg: &ExperimentConfig) -> Result<(Field1D, Field1D)> {
    let grid = cfg
        .grid
        .ok_or_else(|| Error::ConfigValidation("mode pde requires a grid".into()))?;
    match &cfg.initial {
        InitialData::Pde { u, v } => Ok((u.sample(grid.length, grid.n)?, v.sample(grid.length, grid.n)?)),
        InitialData::Ode { u, v } => Ok((
            Field1D::constant(grid.length, grid.n, *u)?,
            Field1D::constant(grid.length, grid.n, *v)?,
        )),
    }
}

fn ode_initial(cfg: &ExperimentConfig) -> (f64, f64) {
    match &cfg.initial {
        InitialData::Ode { u, v } => (*u, *v),
        InitialData::Pde { u, v } => (u.constant, v.constant),
    }
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    let analysis = analyze(cfg)?;
    let p = analysis.params;
    let inc = cfg.incidence()?;
    let theta = chosen_theta(cfg, &p);
    let target = analysis.attractor();
    let mon = cfg.monitors;

    match cfg.mode {
        Mode::Ode => {
            let dt = cfg.time.dt.unwrap_or(crate::ode::DEFAULT_DT);
            let traj = integrate_ode(&p, &inc, ode_initial(cfg), cfg.time.t_end, dt, cfg.time.stride)?;
            let last = *traj.last();
            let distance = (last.u - target.0).abs().max((last.v - target.1).abs());
            let lyapunov = if mon.lyapunov {
                lyapunov_checks(
                    &analysis,
                    theta,
                    |th| ode_series(&traj, &p, Functional::Theta { theta: th }, None),
                    |e| ode_series(&traj, &p, Functional::Endemic, Some(e)),
                )
            } else {
                Vec::new()
            };
            let monitors = MonitorResults {
                invariant_region: mon.invariant_region.then(|| invariant_region_monitor(&traj.states, &p)),
                boundedness: None,
                lyapunov,
            };
            let summary = SimulationSummary {
                mode: Mode::Ode,
                dt: traj.dt,
                steps: (cfg.time.t_end / traj.dt).round() as usize,
                samples: traj.states.len(),
                t_end: last.t,
                final_state: (last.u, last.v),
                convergence: Convergence {
                    target,
                    distance,
                    tolerance: ODE_CONVERGENCE_TOL,
                    passed: distance < ODE_CONVERGENCE_TOL,
                },
                monitors_passed: monitors.passed(),
                monitors,
            };
            Ok(Simulation {
                analysis,
                summary,
                trajectory: Trajectory::Ode(traj),
                theta,
            })
        }
        Mode::Pde => {
            let (u0, v0) = initial_fields(cfg)?;
            let run = integrate_pde(
                &p,
                &inc,
                &u0,
                &v0,
                cfg.time.t_end,
                cfg.time.snapshot_every,
                PdeOptions { dt: cfg.time.dt },
            )?;
            let last = run.snapshots.last().expect("at least two snapshots");
            let distance = last.distance_to(target);
            let len = last.u.length();
            let lyapunov = if mon.lyapunov {
                lyapunov_checks(
                    &analysis,
                    theta,
                    |th| pde_series(&run, &p, Functional::Theta { theta: th }, None),
                    |e| pde_series(&run, &p, Functional::Endemic, Some(e)),
                )
            } else {
                Vec::new()
            };
            let monitors = MonitorResults {
                invariant_region: None,
                boundedness: mon.boundedness.then(|| boundedness_monitor(&run.snapshots, &p, &u0, &v0)),
                lyapunov,
            };
            let summary = SimulationSummary {
                mode: Mode::Pde,
                dt: run.dt,
                steps: run.steps,
                samples: run.snapshots.len(),
                t_end: last.t,
                final_state: (last.u.integral() / len, last.v.integral() / len),
                convergence: Convergence {
                    target,
                    distance,
                    tolerance: PDE_CONVERGENCE_TOL,
                    passed: distance < PDE_CONVERGENCE_TOL,
                },
                monitors_passed: monitors.passed(),
                monitors,
            };
            Ok(Simulation {
                analysis,
                summary,
                trajectory: Trajectory::Pde(run),
                theta,
            })
        }
    }
}

/// Rows of the ODE trajectory CSV.
pub fn ode_rows(sim: &Simulation) -> Vec<OdeRow> {
    let Trajectory::Ode(traj) = &sim.trajectory else {
        return Vec::new();
    };
    let p = &sim.analysis.params;
    traj.states
        .iter()
        .map(|s| OdeRow {
            t: s.t,
            u: s.u,
            v: s.v,
            n: s.total(),
            v_theta: sim.theta.map(|th| v_theta_point(p, th, s.u, s.v)),
            v_endemic: sim.analysis.endemic.and_then(|e| v_endemic_point(e, s.u, s.v).ok()),
        })
        .collect()
}

/// Rows of the PDE series CSV.
pub fn series_rows(sim: &Simulation) -> Vec<SeriesRow> {
    let Trajectory::Pde(run) = &sim.trajectory else {
        return Vec::new();
    };
    let p = &sim.analysis.params;
    run.snapshots
        .iter()
        .map(|s| SeriesRow {
            t: s.t,
            sup_u: s.sup_u,
            sup_v: s.sup_v,
            mass: s.mass,
            v_theta: sim.theta.and_then(|th| v_theta_eval(&s.u, &s.v, p, th).ok()),
            v_endemic: sim.analysis.endemic.and_then(|e| v_endemic_eval(&s.u, &s.v, e).ok()),
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct SimulationDoc<'a> {
    config: serde_json::Value,
    analysis: &'a Analysis,
    simulation: &'a SimulationSummary,
}

/// Writes the trajectory CSV(s) and `summary.json`; returns the files written.
pub fn write_simulation(sim: &Simulation, cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    match &sim.trajectory {
        Trajectory::Ode(_) => {
            let path = out_dir.join("trajectory.csv");
            csvio::write_ode_csv(&path, &ode_rows(sim))?;
            written.push(path);
        }
        Trajectory::Pde(run) => {
            let path = out_dir.join("snapshots.csv");
            csvio::write_pde_csv(&path, &run.snapshots)?;
            written.push(path);
            let path = out_dir.join("series.csv");
            csvio::write_series_csv(&path, &series_rows(sim))?;
            written.push(path);
        }
    }
    let path = out_dir.join("summary.json");
    csvio::write_json(
        &path,
        &SimulationDoc {
            config: cfg.to_json(),
            analysis: &sim.analysis,
            simulation: &sim.summary,
        },
    )?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Out of tolerance, but a known disagreement in the printed value.
    Discrepancy,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: &'static str,
    pub computed: f64,
    pub expected: f64,
    pub printed: &'static str,
    pub tolerance: f64,
    pub abs_error: f64,
    pub status: Status,
    pub note: Option<&'static str>,
}

fn compare(quantity: &'static str, computed: f64, expected: Printed, tolerance: f64, note: Option<&'static str>) -> Comparison {
    let abs_error = (computed - expected.value).abs();
    let status = if abs_error <= tolerance {
        Status::Pass
    } else if note.is_some() {
        Status::Discrepancy
    } else {
        Status::Fail
    };
    Comparison {
        quantity,
        computed,
        expected: expected.value,
        printed: expected.text,
        tolerance,
        abs_error,
        status,
        note,
    }
}

/// Computed quantities against the printed ones for a row.
pub fn compare_row(row: &TableRow, analysis: &Analysis) -> Vec<Comparison> {
    let mut out = vec![compare("R0", analysis.r0, row.r0, R0_TOL, row.r0_note)];
    let eq = if row.endemic {
        analysis.endemic.unwrap_or((f64::NAN, f64::NAN))
    } else {
        analysis.disease_free
    };
    out.push(compare("u_eq", eq.0, row.equilibrium.0, EQUILIBRIUM_TOL, None));
    out.push(compare("v_eq", eq.1, row.equilibrium.1, EQUILIBRIUM_TOL, None));
    if let Some((lo, hi)) = row.theta {
        let p = &analysis.params;
        let computed_lo = theta_lower(p.d1, p.d2).unwrap_or(f64::NAN);
        let computed_hi = analysis
            .incidence
            .build()
            .map(|inc| theta_upper(p, &inc))
            .unwrap_or(f64::NAN);
        out.push(compare("theta_lo", computed_lo, lo, THETA_TOL, None));
        out.push(compare("theta_hi", computed_hi, hi, THETA_TOL, row.theta_hi_note));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceSummary {
    pub id: String,
    pub table: u8,
    pub mode: Mode,
    pub set: u8,
    pub config: serde_json::Value,
    pub analysis: Analysis,
    pub simulation: SimulationSummary,
    pub comparisons: Vec<Comparison>,
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

/// Runs a row and writes its artifacts under `out_dir/<row id>/`.
pub fn reproduce(row: &TableRow, out_dir: &Path) -> Result<ReproduceSummary> {
    let cfg = row.config();
    let sim = simulate(&cfg)?;
    let dir = out_dir.join(row.id());
    let mut files = write_simulation(&sim, &cfg, &dir)?;
    let comparisons = compare_row(row, &sim.analysis);
    let passed = comparisons.iter().all(|c| c.status != Status::Fail)
        && sim.summary.monitors_passed
        && sim.summary.convergence.passed;
    let summary = ReproduceSummary {
        id: row.id(),
        table: row.table,
        mode: row.mode,
        set: row.set,
        config: cfg.to_json(),
        analysis: sim.analysis,
        simulation: sim.summary,
        comparisons,
        passed,
        files: Vec::new(),
    };
    let path = dir.join("reproduce.json");
    files.push(path.clone());
    let summary = ReproduceSummary { files, ..summary };
    csvio::write_json(&path, &summary)?;
    Ok(summary)
}

/// Runs rows concurrently on the current rayon pool; results keep input order.
pub fn reproduce_batch(rows: &[TableRow], out_dir: &Path) -> Vec<Result<ReproduceSummary>> {
    rows.par_iter().map(|r| reproduce(r, out_dir)).collect()
}

/// Canonical sweep name for `name`, accepting Greek aliases.
pub fn sweep_param(name: &str) -> Result<&'static str> {
    Ok(match name {
        "Lambda" | "Λ" => "Lambda",
        "mu" | "μ" => "mu",
        "lambda" | "λ" => "lambda",
        "sigma" | "σ" => "sigma",
        "d1" => "d1",
        "d2" => "d2",
        "alpha" | "α" => "alpha",
        "k" => "k",
        _ => return Err(Error::UnknownParameter(name.to_string())),
    })
}

/// Copy of `cfg` with one parameter replaced.
pub fn with_param(cfg: &ExperimentConfig, name: &str, value: f64) -> Result<ExperimentConfig> {
    let name = sweep_param(name)?;
    let mut out = cfg.clone();
    let p = &mut out.params;
    match name {
        "Lambda" => p.recruitment = value,
        "mu" => p.death = value,
        "lambda" => p.transmission = value,
        "sigma" => p.recovery = value,
        "d1" | "d2" if cfg.mode == Mode::Ode => {
            return Err(Error::InvalidParams(format!("{name} has no effect in ode mode")))
        }
        "d1" => p.d1 = value,
        "d2" => p.d2 = value,
        coef => {
            out.incidence = cfg
                .incidence
                .with_coefficient(coef, value)
                .ok_or_else(|| Error::UnknownParameter(format!("{coef} (not a coefficient of this family)")))?;
        }
    }
    out.params.validate()?;
    out.incidence.build()?;
    Ok(out)
}

pub fn sweep_record(name: &str, value: f64, a: &Analysis) -> SweepRecord {
    SweepRecord {
        param: name.to_string(),
        value,
        r0: a.r0,
        disease_free: a.disease_free,
        endemic: a.endemic,
        ode_e0: a.ode_stability.disease_free.as_str().to_string(),
        ode_endemic: a.ode_stability.endemic.map(|c| c.as_str().to_string()),
        pde_e0: a.pde_stability.as_ref().map(|s| s.disease_free.as_str().to_string()),
        pde_endemic: a
            .pde_stability
            .as_ref()
            .and_then(|s| s.endemic)
            .map(|c| c.as_str().to_string()),
        theta: a.theta_window.map(|w| (w.lo, w.hi)),
        verdict: a.verdict.code().to_string(),
    }
}

/// Analyzes `cfg` at every value of one parameter, concurrently.
pub fn sweep(cfg: &ExperimentConfig, name: &str, values: &[f64]) -> Result<Vec<SweepRecord>> {
    let canonical = sweep_param(name)?;
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParams(format!("sweep value {bad} is not finite")));
    }
    values
        .par_iter()
        .map(|&x| {
            let c = with_param(cfg, canonical, x)?;
            Ok(sweep_record(canonical, x, &analyze(&c)?))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub admissibility: AdmissibilityReport,
    pub lemma2: Option<Lemma2Report>,
    pub simulation: SimulationSummary,
    pub passed: bool,
}

fn admissibility_range(p: &ModelParams) -> f64 {
    10.0 * p.population_cap().max(1.0)
}

/// Admissibility of φ, the Volterra comparison at v* and every monitor of a
/// simulation.
pub fn verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let inc: Incidence = cfg.incidence()?;
    let p = cfg.analysis_params();
    let v_max = admissibility_range(&p);
    let admissibility = check_admissible(&inc, v_max, ADMISSIBILITY_SAMPLES);
    let sim = simulate(cfg)?;
    let lemma2 = match sim.analysis.endemic {
        Some((_, vs)) => Some(lemma2_check(&inc, vs, &log_grid(v_max, ADMISSIBILITY_SAMPLES))?),
        None => None,
    };
    let passed = admissibility.passed && lemma2.as_ref().is_none_or(|r| r.passed) && sim.summary.monitors_passed;
    Ok(VerifyReport {
        admissibility,
        lemma2,
        simulation: sim.summary,
        passed,
    })
}
