use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Epidemiological rates and diffusivities of the SIS system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Recruitment rate Λ.
    #[serde(rename = "Lambda", alias = "Λ")]
    pub recruitment: f64,
    /// Natural death rate μ.
    #[serde(rename = "mu", alias = "μ")]
    pub death: f64,
    /// Transmission rate λ.
    #[serde(rename = "lambda", alias = "λ")]
    pub transmission: f64,
    /// Recovery rate σ.
    #[serde(rename = "sigma", alias = "σ")]
    pub recovery: f64,
    /// Susceptible diffusivity.
    #[serde(default)]
    pub d1: f64,
    /// Infective diffusivity.
    #[serde(default)]
    pub d2: f64,
}

impl ModelParams {
    pub fn new(
        recruitment: f64,
        death: f64,
        transmission: f64,
        recovery: f64,
        d1: f64,
        d2: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            recruitment,
            death,
            transmission,
            recovery,
            d1,
            d2,
        };
        p.validate()?;
        Ok(p)
    }

    /// Spatially homogeneous variant (both diffusivities zero).
    pub fn ode(recruitment: f64, death: f64, transmission: f64, recovery: f64) -> Result<Self> {
        Self::new(recruitment, death, transmission, recovery, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("Λ", self.recruitment),
            ("μ", self.death),
            ("λ", self.transmission),
            ("σ", self.recovery),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        for (name, x) in [("d1", self.d1), ("d2", self.d2)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be nonnegative")));
            }
        }
        Ok(())
    }

    /// σ0 = min(σ, μ).
    pub fn sigma0(&self) -> f64 {
        self.recovery.min(self.death)
    }

    /// Upper edge Λ/σ0 of the invariant region.
    pub fn population_cap(&self) -> f64 {
        self.recruitment / self.sigma0()
    }

    /// Disease-free equilibrium (Λ/μ, 0).
    pub fn disease_free(&self) -> (f64, f64) {
        (self.recruitment / self.death, 0.0)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0
    }

    pub fn with_diffusion(mut self, d1: f64, d2: f64) -> Self {
        self.d1 = d1;
        self.d2 = d2;
        self
    }
}
