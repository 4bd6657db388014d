//! Shared fixtures for the solver benchmarks.

use sisrd_core::{Field1D, Incidence, ModelParams, Profile};

/// Linear-incidence endemic case with diffusion (R0 = 4, E* = (2, 3)).
pub fn endemic_linear() -> (ModelParams, Incidence) {
    (
        ModelParams::new(8.0, 1.0, 1.0 / 3.0, 2.0, 3.0, 1.25).expect("valid rates"),
        Incidence::linear(3.0).expect("positive coefficient"),
    )
}

/// Half-saturation endemic case (R0 = 12).
pub fn endemic_half_saturation() -> (ModelParams, Incidence) {
    (
        ModelParams::new(6.0, 1.0 / 3.0, 1.0, 3.0, 3.0, 1.25).expect("valid rates"),
        Incidence::half_saturation(2.0, 2.0).expect("positive coefficients"),
    )
}

/// `4 + cos(x)/10`, `5 + sin(x)/10` on `(0, 10)` with `n` points.
pub fn perturbed_fields(n: usize) -> (Field1D, Field1D) {
    let u = Profile::parse("4 + cos(x)/10").expect("valid profile");
    let v = Profile::parse("5 + sin(x)/10").expect("valid profile");
    (
        u.sample(10.0, n).expect("n >= 3"),
        v.sample(10.0, n).expect("n >= 3"),
    )
}
