//! End-to-end solver behavior at small sizes.

use std::f64::consts::TAU;

use surfnema::diagnostics::{dissipation_audit, observed_order};
use surfnema::geometry::{build_chart, ChartGeometry, DerivativeScheme, SurfaceKind};
use surfnema::qtensor::ThermotropicRoots;
use surfnema::solvers::*;
use surfnema::terms::ModelParams;
use surfnema::{Error, RateFlavor};

fn flat(n: usize) -> ChartGeometry {
    build_chart(SurfaceKind::FlatTorus { p1: TAU, p2: TAU }, n, n, DerivativeScheme::Spectral).unwrap()
}

fn torus(n: usize) -> ChartGeometry {
    build_chart(SurfaceKind::EmbeddedTorus { r_major: 2.0, r_minor: 1.0 }, n, n, DerivativeScheme::Spectral).unwrap()
}

fn active_state(c: &ChartGeometry) -> SimState {
    let mut s = SimState::zeros(c.len());
    s.v = taylor_green(c, 0.5);
    s.q = random_tangential_q(c, 7, 0.3, 3);
    s
}

fn nematic(phi: RateFlavor) -> ModelParams {
    ModelParams { xi: 0.5, a: -1.0, b: -1.0, c: 1.0, upsilon: 0.5, phi, ..Default::default() }
}

#[test]
fn flat_run_dissipates_with_first_order_audit() {
    let c = flat(16);
    for phi in [RateFlavor::Jaumann, RateFlavor::Material] {
        let p = nematic(phi);
        let mut res = Vec::new();
        for dt in [2e-3, 1e-3] {
            let opts = SolverOptions { dt, n_steps: (0.05 / dt).round() as usize, ..Default::default() };
            let rec = run_flat_be2d(&c, &p, &active_state(&c), &opts).unwrap();
            for w in rec.samples.windows(2) {
                assert!(w[1].e_tot <= w[0].e_tot, "{phi:?} energy rose at t = {}", w[1].t);
            }
            res.push(dissipation_audit(&rec.samples).unwrap().max_abs);
        }
        let order = observed_order(res[0], res[1]);
        assert!((0.8..1.3).contains(&order), "{phi:?} audit order {order}");
    }
}

#[test]
fn stress_form_does_not_change_the_trajectory() {
    let c = flat(16);
    for phi in [RateFlavor::Jaumann, RateFlavor::Material] {
        let p = nematic(phi);
        let run = |form| {
            let opts = SolverOptions { dt: 1e-3, n_steps: 100, nv_form: form, sample_every: 0, ..Default::default() };
            run_flat_be2d(&c, &p, &active_state(&c), &opts).unwrap().final_state.unwrap()
        };
        let (a, b) = (run(RateFlavor::Jaumann), run(RateFlavor::Material));
        assert!(a.v.sub(&b.v).max_abs() < 1e-9 && a.q.sub(&b.q).max_abs() < 1e-9, "{phi:?}");
    }
}

#[test]
fn reruns_are_bit_identical() {
    let c = flat(16);
    let p = nematic(RateFlavor::Jaumann);
    let opts = SolverOptions { dt: 1e-3, n_steps: 20, ..Default::default() };
    let a = run_flat_be2d(&c, &p, &active_state(&c), &opts).unwrap();
    let b = run_flat_be2d(&c, &p, &active_state(&c), &opts).unwrap();
    let bits = |r: &TrajectoryRecord| r.samples.iter().map(|s| s.e_tot.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn unstable_step_aborts_with_blow_up() {
    let c = flat(16);
    let p = ModelParams { a: -40.0, c: 1.0, ..Default::default() };
    let opts = SolverOptions { dt: 0.5, n_steps: 200, blowup_factor: 1e3, ..Default::default() };
    let r = run_flat_be2d(&c, &p, &active_state(&c), &opts);
    assert!(matches!(r, Err(Error::BlowUp { .. })), "{r:?}");
}

#[test]
fn fast_flow_records_a_cfl_warning() {
    let c = flat(16);
    let mut s = SimState::zeros(c.len());
    s.v = taylor_green(&c, 50.0);
    let opts = SolverOptions { dt: 1e-2, n_steps: 2, ..Default::default() };
    let rec = run_flat_be2d(&c, &ModelParams::default(), &s, &opts).unwrap();
    assert_eq!(rec.warnings.len(), 1);
    assert!(rec.warnings[0].contains("CFL"));
}

#[test]
fn gradient_flow_reaches_equilibrium_on_torus() {
    let c = torus(32);
    let p = ModelParams { a: -5.0, b: -6.0, c: 3.0, ..Default::default() };
    let s = ThermotropicRoots::new(p.a, p.b, p.c).unwrap().s_star;
    let mut init = SimState::zeros(c.len());
    let (q0, _) = uniform_uniaxial(&c, s, std::f64::consts::FRAC_PI_2);
    init.q = q0.add(&random_tangential_q(&c, 3, 0.2, 2));
    let opts = SolverOptions { dt: 0.2, n_steps: 600, sample_every: 10, ..Default::default() };
    let rec = run_gradient_flow(&c, &p, &init, &opts, BetaMode::Fixed(-s / 3.0)).unwrap();
    for w in rec.samples.windows(2) {
        assert!(w[1].e_tot - w[0].e_tot <= 1e-12 * w[0].e_tot.abs());
    }
    let f = rec.final_state.unwrap();
    assert!(molecular_residual(&c, &p, &f.q, &f.beta).unwrap() < 1e-6);
}

#[test]
fn free_normal_eigenvalue_lowers_energy_further() {
    let c = torus(24);
    let p = ModelParams { a: -5.0, b: -6.0, c: 3.0, ..Default::default() };
    let s = ThermotropicRoots::new(p.a, p.b, p.c).unwrap().s_star;
    let mut init = SimState::zeros(c.len());
    let (q0, beta) = uniform_uniaxial(&c, s, std::f64::consts::FRAC_PI_2);
    init.q = q0;
    init.beta = beta;
    let opts = SolverOptions { dt: 0.2, n_steps: 100, sample_every: 0, ..Default::default() };
    let fixed = run_gradient_flow(&c, &p, &init, &opts, BetaMode::Fixed(-s / 3.0)).unwrap();
    let free = run_gradient_flow(&c, &p, &init, &opts, BetaMode::Free).unwrap();
    let (ef, eb) = (fixed.samples.last().unwrap().e_tot, free.samples.last().unwrap().e_tot);
    assert!(eb < ef, "free {eb} vs fixed {ef}");
    for w in free.samples.windows(2) {
        assert!(w[1].e_tot <= w[0].e_tot);
    }
}

#[test]
fn stationary_nematodynamics_dissipates() {
    let c = torus(24);
    let p = ModelParams { a: -1.0, b: -1.0, c: 1.0, upsilon: 0.5, m: 1.0, ..Default::default() };
    let s = ThermotropicRoots::new(p.a, p.b, p.c).unwrap().s_star;
    let mut init = SimState::zeros(c.len());
    init.q = random_tangential_q(&c, 4, 0.4, 2);
    let opts = SolverOptions { dt: 5e-3, n_steps: 40, ..Default::default() };
    let rec = run_stationary_nemato(&c, &p, &init, -s / 3.0, &opts).unwrap();
    for w in rec.samples.windows(2) {
        assert!(w[1].e_tot <= w[0].e_tot + 1e-10 * w[0].e_tot.abs(), "energy rose at t = {}", w[1].t);
    }
    assert!(rec.samples.last().unwrap().e_k > 0.0, "the nematic must drive a flow");
}
