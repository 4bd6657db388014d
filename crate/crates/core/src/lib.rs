//! Analysis and simulation of a two-compartment SIS epidemic model with
//! diffusion and a general incidence `u·φ(v)`:
//!
//! ```text
//! u_t = d1·u_xx + Λ − μu − λuφ(v)
//! v_t = d2·v_xx + λuφ(v) − σv
//! ```
//!
//! on `(0, L)` with zero-flux boundaries. Setting `d1 = d2 = 0` gives the
//! spatially homogeneous system.
//!
//! ```
//! use sisrd_core::{find_endemic, basic_reproduction_number, Incidence, ModelParams};
//!
//! let p = ModelParams::ode(8.0, 1.0, 1.0 / 3.0, 2.0).unwrap();
//! let inc = Incidence::linear(3.0).unwrap();
//! assert_eq!(basic_reproduction_number(&p, &inc), 4.0);
//! let (u, v) = find_endemic(&p, &inc).unwrap().unwrap();
//! assert!((u - 2.0).abs() < 1e-9 && (v - 3.0).abs() < 1e-9);
//! ```

pub mod config;
pub mod csvio;
pub mod equilibria;
pub mod error;
pub mod experiment;
pub mod incidence;
pub mod lyapunov;
pub mod ode;
pub mod params;
pub mod pde;
pub mod stability;
pub mod tables;

pub use config::{load_config, ExperimentConfig, Grid, InitialData, Mode, Monitors, ThetaChoice, TimeSpec};
pub use equilibria::{
    basic_reproduction_number, closed_form_endemic, equilibria, find_endemic, h_eval, steady_state_residuals,
    EquilibriumReport,
};
pub use error::{Error, Result};
pub use experiment::{
    analyze, reproduce, reproduce_batch, simulate, sweep, verify, Analysis, ReproduceSummary, Simulation, Status,
    Verdict, VerifyReport,
};
pub use incidence::{check_admissible, AdmissibilityReport, Condition, Incidence, IncidenceSpec};
pub use lyapunov::{
    lemma2_check, monotonicity_check, v_endemic_eval, v_theta_eval, volterra, Functional, LyapunovSeries,
    MonotonicityReport,
};
pub use ode::{integrate_ode, invariant_region_monitor, OdeState, OdeTrajectory, RegionReport};
pub use params::ModelParams;
pub use pde::{
    apply_laplacian_neumann, boundedness_monitor, integrate_pde, BoundednessReport, Field1D, PdeOptions, PdeRun,
    PdeSnapshot, Profile,
};
pub use stability::{
    gradient_form_is_psd, jacobian_at, ode_local_stability, pde_spectral_check, stability_report, theta_lower,
    theta_upper, theta_window, NeumannSpectrum, OdeStability, PdeStability, StabilityClass, StabilityReport,
    ThetaWindow,
};
pub use tables::{all_rows, find_row, TableRow};
