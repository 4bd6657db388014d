use proptest::prelude::*;

use sisrd_core::lyapunov::DEFAULT_MONOTONE_TOL;
use sisrd_core::{
    basic_reproduction_number, find_endemic, integrate_ode, integrate_pde, monotonicity_check,
    ode_local_stability, steady_state_residuals, theta_window, v_endemic_eval, v_theta_eval, Field1D,
    Functional, Incidence, LyapunovSeries, ModelParams, PdeOptions, StabilityClass,
};

fn linear_case(d1: f64, d2: f64) -> (ModelParams, Incidence) {
    (
        ModelParams::new(8.0, 1.0, 1.0 / 3.0, 2.0, d1, d2).unwrap(),
        Incidence::linear(3.0).unwrap(),
    )
}

#[test]
fn mass_follows_linear_law_when_rates_match() {
    // μ = σ: dM/dt = Λ·L − μ·M exactly for the semi-discrete system
    let p = ModelParams::new(3.0, 0.5, 0.8, 0.5, 2.0, 0.7).unwrap();
    let inc = Incidence::saturated(1.5, 0.4).unwrap();
    let u0 = Field1D::from_fn(10.0, 81, |x| 2.0 + (x * 0.7).cos()).unwrap();
    let v0 = Field1D::from_fn(10.0, 81, |x| 1.0 + 0.5 * (x * 0.3).sin()).unwrap();
    let m0 = u0.integral() + v0.integral();
    let run = integrate_pde(&p, &inc, &u0, &v0, 10.0, 1.0, PdeOptions::default()).unwrap();
    let eq = p.recruitment * 10.0 / p.death;
    for s in &run.snapshots {
        let expected = eq + (m0 - eq) * (-p.death * s.t).exp();
        assert!((s.mass - expected).abs() < 1e-9 * eq, "t = {}: {} vs {}", s.t, s.mass, expected);
    }
}

#[test]
fn solutions_homogenize() {
    let (p, inc) = linear_case(3.0, 1.25);
    let u0 = Field1D::from_fn(10.0, 51, |x| 4.0 + x.cos() / 10.0).unwrap();
    let v0 = Field1D::from_fn(10.0, 51, |x| 5.0 + x.sin() / 10.0).unwrap();
    let run = integrate_pde(&p, &inc, &u0, &v0, 60.0, 10.0, PdeOptions::default()).unwrap();
    let last = run.snapshots.last().unwrap();
    assert!(last.u.variance() < 1e-8 && last.v.variance() < 1e-8);
    assert!(u0.variance() > 1e-4);
}

#[test]
fn boundary_flux_is_second_order_small() {
    // The initial v has slope 0.1 at x = 0; the discrete solution's one-sided
    // boundary slope after t = 1 shrinks like dx².
    let (p, inc) = linear_case(3.0, 1.25);
    let slope = |n: usize| {
        let u0 = Field1D::from_fn(10.0, n, |x| 4.0 + x.cos() / 10.0).unwrap();
        let v0 = Field1D::from_fn(10.0, n, |x| 5.0 + x.sin() / 10.0).unwrap();
        let run = integrate_pde(&p, &inc, &u0, &v0, 1.0, 1.0, PdeOptions::default()).unwrap();
        let s = run.snapshots.last().unwrap();
        let (a, b) = s.u.boundary_slopes();
        let (c, d) = s.v.boundary_slopes();
        a.abs().max(b.abs()).max(c.abs()).max(d.abs())
    };
    let (coarse, fine) = (slope(51), slope(101));
    assert!(fine < 1e-3, "{fine}");
    assert!(coarse / fine > 3.5, "{coarse} / {fine}");
}

#[test]
fn endemic_functional_decreases_on_the_grid() {
    let (p, inc) = linear_case(0.5, 4.0);
    let e = find_endemic(&p, &inc).unwrap().unwrap();
    let u0 = Field1D::from_fn(10.0, 61, |x| 0.5 + 3.0 * (x * 0.9).cos().powi(2)).unwrap();
    let v0 = Field1D::from_fn(10.0, 61, |x| 0.2 + x / 5.0).unwrap();
    let run = integrate_pde(&p, &inc, &u0, &v0, 30.0, 0.05, PdeOptions::default()).unwrap();
    let mut s = LyapunovSeries::new(Functional::Endemic);
    for snap in &run.snapshots {
        s.push(snap.t, v_endemic_eval(&snap.u, &snap.v, e).unwrap());
    }
    let r = monotonicity_check(&s, DEFAULT_MONOTONE_TOL);
    assert!(r.passed, "{r:?}");
    assert!(s.values.last().unwrap() < &(1e-3 * s.values[0]));
}

#[test]
fn equilibrium_class_flips_at_threshold() {
    // R0 = 24λ here, so λ = 1/24 is the threshold
    let base = ModelParams::ode(8.0, 1.0, 1.0, 2.0).unwrap();
    let inc = Incidence::saturated(0.5, 1.0).unwrap();
    let classes: Vec<(f64, StabilityClass)> = [0.02, 0.04, 1.0 / 24.0 * 1.001, 0.05, 0.3]
        .iter()
        .map(|&lam| {
            let p = ModelParams { transmission: lam, ..base };
            (basic_reproduction_number(&p, &inc), ode_local_stability(&p, &inc).unwrap().disease_free)
        })
        .collect();
    for (r0, c) in classes {
        let expected = if r0 < 1.0 { StabilityClass::Stable } else { StabilityClass::Unstable };
        assert_eq!(c, expected, "R0 = {r0}");
    }
}

fn rate() -> impl Strategy<Value = f64> {
    (0.1f64.ln()..10.0f64.ln()).prop_map(f64::exp)
}

fn incidence() -> impl Strategy<Value = Incidence> {
    (0..3usize, rate(), rate()).prop_map(|(f, a, b)| match f {
        0 => Incidence::linear(a).unwrap(),
        1 => Incidence::saturated(a, b).unwrap(),
        _ => Incidence::half_saturation(a, b).unwrap(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn theta_functional_decreases_when_window_holds(
        big in rate(), mu in rate(), lam in rate(), sigma in rate(),
        d1 in 0.2f64..3.0, d2 in 0.2f64..3.0, inc in incidence(),
        a in 0.0f64..1.0, b in 0.0f64..1.0,
    ) {
        let p = ModelParams::new(big, mu, lam, sigma, d1, d2).unwrap();
        let r0 = basic_reproduction_number(&p, &inc);
        let w = theta_window(&p, &inc).unwrap();
        prop_assume!(r0 <= 1.0 && w.is_some());
        let th = w.unwrap().lo;
        let cap = p.population_cap();
        let u0 = Field1D::from_fn(10.0, 31, |x| cap * a * (1.0 + (x * 0.5).cos()) / 2.0).unwrap();
        let v0 = Field1D::from_fn(10.0, 31, |x| cap * b * (1.0 + (x * 0.8).sin()) / 2.0).unwrap();
        let run = integrate_pde(&p, &inc, &u0, &v0, 5.0, 0.05, PdeOptions::default()).unwrap();
        let mut s = LyapunovSeries::new(Functional::Theta { theta: th });
        for snap in &run.snapshots {
            s.push(snap.t, v_theta_eval(&snap.u, &snap.v, &p, th).unwrap());
        }
        let r = monotonicity_check(&s, DEFAULT_MONOTONE_TOL);
        prop_assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn ode_trajectories_stay_nonnegative_and_approach_the_attractor(
        big in 0.2f64..5.0, mu in 0.2f64..5.0, lam in 0.2f64..5.0, sigma in 0.2f64..5.0,
        inc in incidence(), u0 in 0.0f64..10.0, v0 in 0.01f64..10.0,
    ) {
        let p = ModelParams::ode(big, mu, lam, sigma).unwrap();
        let target = find_endemic(&p, &inc).unwrap().unwrap_or(p.disease_free());
        let r0 = basic_reproduction_number(&p, &inc);
        // slow near threshold; skip the critical band
        prop_assume!((r0 - 1.0).abs() > 0.5);
        let t = integrate_ode(&p, &inc, (u0, v0), 600.0, 1e-3, 1000).unwrap();
        prop_assert!(t.states.iter().all(|s| s.u >= 0.0 && s.v >= 0.0));
        let last = t.last();
        let scale = 1.0 + target.0 + target.1;
        prop_assert!((last.u - target.0).abs() < 1e-3 * scale, "{:?} vs {:?}", last, target);
        prop_assert!((last.v - target.1).abs() < 1e-3 * scale, "{:?} vs {:?}", last, target);
        let (f, g) = steady_state_residuals(&p, &inc, target);
        prop_assert!(f.abs() < 1e-9 * big && g.abs() < 1e-9 * big);
    }
}
