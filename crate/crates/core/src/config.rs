//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "params": { "Lambda": 8, "mu": 1, "lambda": 0.3333333333333333, "sigma": 2, "d1": 3, "d2": 1.25 },
//!   "incidence": { "family": "linear", "alpha": 3 },
//!   "mode": "pde",
//!   "initial": { "u": "4 + cos(x)/10", "v": "5 + sin(x)/10" },
//!   "grid": { "length": 10, "n": 201 },
//!   "time": { "t_end": 100, "dt": "auto", "snapshot_every": 1 },
//!   "monitors": { "invariant_region": true, "boundedness": true, "lyapunov": true, "theta": "lo" }
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::{Incidence, IncidenceSpec};
use crate::ode::{DEFAULT_DT, DEFAULT_STRIDE};
use crate::params::ModelParams;
use crate::pde::Profile;

pub const DEFAULT_LENGTH: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 201;
pub const DEFAULT_T_END_ODE: f64 = 200.0;
pub const DEFAULT_T_END_PDE: f64 = 100.0;
pub const DEFAULT_SNAPSHOT_EVERY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ode,
    Pde,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ode => "ode",
            Mode::Pde => "pde",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InitialData {
    Ode { u: f64, v: f64 },
    Pde { u: Profile, v: Profile },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSpec {
    pub t_end: f64,
    /// `None` selects the automatic step.
    pub dt: Option<f64>,
    pub snapshot_every: f64,
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaChoice {
    Named(ThetaName),
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaName {
    /// Lower end of the θ-window.
    Lo,
}

impl Default for ThetaChoice {
    fn default() -> Self {
        ThetaChoice::Named(ThetaName::Lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Monitors {
    pub invariant_region: bool,
    pub boundedness: bool,
    pub lyapunov: bool,
    pub theta: ThetaChoice,
}

impl Default for Monitors {
    fn default() -> Self {
        Monitors {
            invariant_region: true,
            boundedness: true,
            lyapunov: true,
            theta: ThetaChoice::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub incidence: IncidenceSpec,
    pub mode: Mode,
    pub initial: InitialData,
    pub grid: Option<Grid>,
    pub time: TimeSpec,
    pub monitors: Monitors,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn incidence(&self) -> Result<Incidence> {
        self.incidence.build()
    }

    /// Parameters seen by the analysis: the homogeneous model has no diffusion.
    pub fn analysis_params(&self) -> ModelParams {
        match self.mode {
            Mode::Ode => self.params.with_diffusion(0.0, 0.0),
            Mode::Pde => self.params,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        raw.validate()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let initial = match &self.initial {
            InitialData::Ode { u, v } => serde_json::json!({ "u": u, "v": v }),
            InitialData::Pde { u, v } => {
                serde_json::json!({ "u": u.to_string(), "v": v.to_string() })
            }
        };
        let dt = match self.time.dt {
            Some(dt) => serde_json::json!(dt),
            None => serde_json::json!("auto"),
        };
        serde_json::json!({
            "params": self.params,
            "incidence": self.incidence,
            "mode": self.mode,
            "initial": initial,
            "grid": self.grid,
            "time": {
                "t_end": self.time.t_end,
                "dt": dt,
                "snapshot_every": self.time.snapshot_every,
                "stride": self.time.stride,
            },
            "monitors": self.monitors,
        })
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_json_str(&text)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Step {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    u: Scalar,
    v: Scalar,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: Option<f64>,
    dt: Option<Step>,
    snapshot_every: Option<f64>,
    stride: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: ModelParams,
    incidence: IncidenceSpec,
    mode: Mode,
    initial: RawInitial,
    grid: Option<Grid>,
    #[serde(default)]
    time: RawTime,
    #[serde(default)]
    monitors: Monitors,
    #[serde(default)]
    output: RawOutput,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigValidation(msg.into())
}

fn profile(which: &str, s: &Scalar) -> Result<Profile> {
    match s {
        Scalar::Number(x) => Ok(Profile::constant(*x)),
        Scalar::Text(t) => Profile::parse(t)
            .map_err(|_| invalid(format!("initial.{which}: cannot parse profile `{t}`"))),
    }
}

impl RawConfig {
    fn validate(self) -> Result<ExperimentConfig> {
        self.params.validate().map_err(|e| match e {
            Error::InvalidParams(m) => invalid(m),
            other => other,
        })?;
        self.incidence.build().map_err(|e| match e {
            Error::InvalidParams(m) => invalid(m),
            other => other,
        })?;

        let initial = match self.mode {
            Mode::Ode => {
                let num = |which: &str, s: &Scalar| match s {
                    Scalar::Number(x) if x.is_finite() && *x >= 0.0 => Ok(*x),
                    Scalar::Number(x) => Err(invalid(format!("initial.{which} = {x} must be nonnegative"))),
                    Scalar::Text(_) => Err(invalid(format!("initial.{which} must be a number in ode mode"))),
                };
                InitialData::Ode {
                    u: num("u", &self.initial.u)?,
                    v: num("v", &self.initial.v)?,
                }
            }
            Mode::Pde => InitialData::Pde {
                u: profile("u", &self.initial.u)?,
                v: profile("v", &self.initial.v)?,
            },
        };

        let grid = match (self.mode, self.grid) {
            (Mode::Pde, None) => return Err(invalid("mode pde requires a grid")),
            (_, Some(g)) if g.n < 3 => return Err(invalid("grid.n must be at least 3")),
            (_, Some(g)) if !(g.length.is_finite() && g.length > 0.0) => {
                return Err(invalid("grid.length must be positive"))
            }
            (_, g) => g,
        };
        if let (InitialData::Pde { u, v }, Some(g)) = (&initial, grid) {
            let (fu, fv) = (u.sample(g.length, g.n)?, v.sample(g.length, g.n)?);
            if fu.inf() < 0.0 || fv.inf() < 0.0 {
                return Err(invalid("initial profiles must be nonnegative on the grid"));
            }
        }

        let t_end = self.time.t_end.unwrap_or(match self.mode {
            Mode::Ode => DEFAULT_T_END_ODE,
            Mode::Pde => DEFAULT_T_END_PDE,
        });
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(invalid("time.t_end must be positive"));
        }
        let dt = match self.time.dt {
            None => match self.mode {
                Mode::Ode => Some(DEFAULT_DT),
                Mode::Pde => None,
            },
            Some(Step::Text(s)) if s == "auto" => match self.mode {
                Mode::Ode => Some(DEFAULT_DT),
                Mode::Pde => None,
            },
            Some(Step::Text(s)) => return Err(invalid(format!("time.dt: expected a number or \"auto\", got `{s}`"))),
            Some(Step::Number(x)) if x.is_finite() && x > 0.0 => Some(x),
            Some(Step::Number(_)) => return Err(invalid("time.dt must be positive")),
        };
        let snapshot_every = self.time.snapshot_every.unwrap_or(DEFAULT_SNAPSHOT_EVERY);
        if !(snapshot_every.is_finite() && snapshot_every > 0.0) {
            return Err(invalid("time.snapshot_every must be positive"));
        }
        let stride = self.time.stride.unwrap_or(DEFAULT_STRIDE);
        if stride == 0 {
            return Err(invalid("time.stride must be at least 1"));
        }
        if let ThetaChoice::Value(th) = self.monitors.theta {
            if !(th.is_finite() && th > 0.0) {
                return Err(invalid("monitors.theta must be positive"));
            }
        }

        Ok(ExperimentConfig {
            params: self.params,
            incidence: self.incidence,
            mode: self.mode,
            initial,
            grid,
            time: TimeSpec {
                t_end,
                dt,
                snapshot_every,
                stride,
            },
            monitors: self.monitors,
            output_dir: self.output.dir,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ODE: &str = r#"{
        "params": { "Lambda": 8, "mu": 1, "lambda": 0.3333333333333333, "sigma": 2 },
        "incidence": { "family": "linear", "alpha": 3 },
        "mode": "ode",
        "initial": { "u": 6, "v": 1.5 }
    }"#;

    #[test]
    fn minimal_ode_config_gets_defaults() {
        let c = ExperimentConfig::from_json_str(ODE).unwrap();
        assert_eq!(c.mode, Mode::Ode);
        assert_eq!(c.initial, InitialData::Ode { u: 6.0, v: 1.5 });
        assert_eq!(c.time.t_end, DEFAULT_T_END_ODE);
        assert_eq!(c.time.dt, Some(DEFAULT_DT));
        assert_eq!(c.time.stride, DEFAULT_STRIDE);
        assert_eq!(c.monitors, Monitors::default());
        assert_eq!((c.params.d1, c.params.d2), (0.0, 0.0));
    }

    #[test]
    fn negative_rate_is_rejected() {
        let text = ODE.replace("\"lambda\": 0.3333333333333333", "\"lambda\": -1");
        let err = ExperimentConfig::from_json_str(&text).unwrap_err();
        assert!(matches!(err, Error::ConfigValidation(_)));
        assert!(err.to_string().contains("λ must be positive"), "{err}");
    }

    #[test]
    fn pde_requires_grid() {
        let text = ODE.replace("\"ode\"", "\"pde\"");
        let err = ExperimentConfig::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("requires a grid"), "{err}");
    }

    #[test]
    fn greek_aliases_and_profiles() {
        let text = r#"{
            "params": { "Λ": 8, "μ": 1, "λ": 0.5, "σ": 2, "d1": 3, "d2": 1.25 },
            "incidence": { "family": "saturated", "alpha": 3.25, "k": 0.5 },
            "mode": "pde",
            "initial": { "u": "4 + cos(x)/10", "v": 5 },
            "grid": { "length": 10, "n": 101 },
            "time": { "t_end": 5, "dt": "auto", "snapshot_every": 0.5 },
            "monitors": { "theta": 1.5 }
        }"#;
        let c = ExperimentConfig::from_json_str(text).unwrap();
        assert_eq!(c.params.recruitment, 8.0);
        assert_eq!(c.time.dt, None);
        assert_eq!(c.monitors.theta, ThetaChoice::Value(1.5));
        match c.initial {
            InitialData::Pde { u, v } => {
                assert_eq!(u.cos_amp, 0.1);
                assert_eq!(v, Profile::constant(5.0));
            }
            _ => panic!(),
        }
        // to_json re-parses to the same config
        let again = ExperimentConfig::from_json_str(&c.to_json().to_string()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ExperimentConfig::from_json_str("{\n  \"params\": [1,\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse(_)));
        assert!(err.to_string().contains("line"), "{err}");

        let text = ODE.replace("\"mode\"", "\"mood\"");
        let err = ExperimentConfig::from_json_str(&text).unwrap_err();
        assert!(err.to_string().contains("mood"), "{err}");
    }

    #[test]
    fn other_validation_errors() {
        let cases = [
            (ODE.replace("\"u\": 6", "\"u\": \"6 + cos(x)\""), "must be a number"),
            (ODE.replace("\"u\": 6", "\"u\": -6"), "nonnegative"),
            (ODE.replace("\"alpha\": 3", "\"alpha\": 0"), "alpha"),
            (
                ODE.replace("\"initial\"", "\"time\": {\"dt\": \"fast\"}, \"initial\""),
                "time.dt",
            ),
            (
                ODE.replace("\"initial\"", "\"grid\": {\"length\": 10, \"n\": 2}, \"initial\""),
                "grid.n",
            ),
        ];
        for (text, needle) in cases {
            let err = ExperimentConfig::from_json_str(&text).unwrap_err();
            assert!(err.to_string().contains(needle), "{needle}: {err}");
        }
    }
}
