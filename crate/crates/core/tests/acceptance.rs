//! Acceptance run: ten criteria, one PASS/FAIL line each. Exits nonzero if
//! any criterion fails. A criterion also fails when it exceeds its time budget.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfnema::diagnostics::{
    adjointness_residual, dissipation_audit, divergence_relation_residual, leslie_coefficients, observed_order,
    random_matrix_field, random_vector_field,
};
use surfnema::fields::{frob, l2_inner, proj_q, proj_qs, Field, MatrixField};
use surfnema::geometry::{area_integral, build_chart, from_embedding, ChartGeometry, DerivativeScheme, SurfaceKind};
use surfnema::kinematics::{deformation_gradients, jaumann_from_material};
use surfnema::qtensor::{
    biaxiality_measure_point, biaxiality_poly, conforming_compose, decompose_point, is_uniaxial, random_q,
    recompose_point, trace_power_residuals, uniaxial_point, ThermotropicRoots,
};
use surfnema::solvers::{
    molecular_residual, random_tangential_q, run_flat_be2d, run_gradient_flow, taylor_green, uniform_uniaxial,
    BetaMode, SimState, SolverOptions,
};
use surfnema::terms::*;
use surfnema::{Mat3, RateFlavor, Vec3};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn torus(n: usize, scheme: DerivativeScheme) -> ChartGeometry {
    build_chart(SurfaceKind::EmbeddedTorus { r_major: 2.0, r_minor: 1.0 }, n, n, scheme).expect("torus chart")
}

fn flat(n: usize) -> ChartGeometry {
    build_chart(SurfaceKind::FlatTorus { p1: TAU, p2: TAU }, n, n, DerivativeScheme::Spectral).expect("flat chart")
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return v / n;
        }
    }
}

fn random_mat(rng: &mut ChaCha8Rng) -> Mat3 {
    Mat3::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

fn algebraic_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 1000;
    let mut worst = [0.0_f64; 6];
    for _ in 0..n {
        let q = random_q(&mut rng) * rng.gen_range(0.1..3.0);
        let t2 = (q * q).trace();
        worst[0] = worst[0].max(trace_power_residuals(&q).into_iter().fold(0.0, f64::max));
        let b = biaxiality_poly(&q);
        let lhs = b.norm_squared();
        let rhs = t2 / 54.0 * biaxiality_measure_point(&q);
        worst[1] = worst[1].max((lhs - rhs).abs() / t2.powi(4));

        // B vanishes on uniaxial tensors; random tensors are biaxial and it does not.
        let u = uniaxial_point(rng.gen_range(-1.0..1.0), &random_unit(&mut rng));
        let tu = (u * u).trace();
        let kernel = biaxiality_poly(&u).norm() / (tu * tu);
        let classified = is_uniaxial(&u) && !is_uniaxial(&q) && b.norm() > 0.0;
        worst[2] = worst[2].max(if classified { kernel } else { 1.0 });

        let nu = random_unit(&mut rng);
        let (qt, eta, beta) = decompose_point(&q, &nu);
        worst[3] = worst[3].max((recompose_point(&qt, &eta, beta, &nu) - q).amax() / q.amax());

        let r = random_mat(&mut rng);
        let s = random_mat(&mut rng);
        let pq = proj_q(&r);
        let pqs = proj_qs(&r, &nu);
        let idem = (proj_q(&pq) - pq).amax().max((proj_qs(&pqs, &nu) - pqs).amax());
        worst[4] = worst[4].max(idem / r.amax());
        let adj_q = (frob(&proj_q(&r), &s) - frob(&r, &proj_q(&s))).abs();
        let adj_s = (frob(&proj_qs(&r, &nu), &s) - frob(&r, &proj_qs(&s, &nu))).abs();
        worst[5] = worst[5].max(adj_q.max(adj_s) / (r.norm() * s.norm()));
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    outcome(
        max < 1e-12,
        format!(
            "{n} samples; trace powers {:.1e}, |B|^2 {:.1e}, kernel {:.1e}, decomposition {:.1e}, idempotency {:.1e}, adjointness {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    )
}

fn discrete_calculus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = flat(64);
    let adj_flat = (0..4).map(|_| adjointness_residual(&f, &mut rng)).fold(0.0, f64::max);
    let rel_flat = divergence_relation_residual(&f);
    let t32 = torus(32, DerivativeScheme::Fd4);
    let t64 = torus(64, DerivativeScheme::Fd4);
    let adj_torus = (0..2)
        .map(|_| adjointness_residual(&t32, &mut rng).max(adjointness_residual(&t64, &mut rng)))
        .fold(0.0, f64::max);
    let (e32, e64) = (divergence_relation_residual(&t32), divergence_relation_residual(&t64));
    let order = observed_order(e32, e64);
    let want = DerivativeScheme::Fd4.order().expect("fd4 has an order") as f64 - 0.5;
    outcome(
        adj_flat < 1e-10 && rel_flat < 1e-10 && adj_torus < 1e-10 && order >= want,
        format!(
            "flat N=64 adjointness {adj_flat:.1e}, relation {rel_flat:.1e}; torus fd4 adjointness {adj_torus:.1e}, relation {e32:.2e} -> {e64:.2e}, order {order:.2} (need {want})"
        ),
    )
}

/// Minimum over an epsilon sweep of `|dE/de + <H, D>| / |<H, D>|`.
fn fd_sweep(energy: impl Fn(f64) -> f64, pairing: f64) -> f64 {
    [1e-2, 1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&e| ((energy(e) - energy(-e)) / (2.0 * e) + pairing).abs() / pairing.abs())
        .fold(f64::INFINITY, f64::min)
}

fn variational_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = torus(32, DerivativeScheme::Spectral);
    let q = random_matrix_field(&c, &mut rng, 3).map(proj_q);
    let d = random_matrix_field(&c, &mut rng, 3).map(proj_q);

    let p = ModelParams { l: 1.3, a: -1.2, b: 0.8, c: 2.1, ..Default::default() };
    let h_el = elastic(&c, &p, &q).expect("elastic").h.expect("h");
    let err_el = fd_sweep(|e| elastic_energy(&c, &p, &q.axpy(e, &d)).expect("energy"), l2_inner(&c, &h_el, &d));

    let e_th = |e: f64| {
        let dens: Vec<f64> = q.axpy(e, &d).data.iter().map(|m| thermotropic_density(&p, m)).collect();
        area_integral(&c, &dens).expect("sized")
    };
    let h_th = q.map(|m| thermotropic_h_point(&p, m));
    let err_th = fd_sweep(e_th, l2_inner(&c, &h_th, &d));

    // Bending: normal perturbations of the embedding, fd4 refinement pair.
    let pb = ModelParams { kappa: 1.0, h0: 0.3, ..Default::default() };
    let bending_error = |n: usize| -> f64 {
        let base = torus(n, DerivativeScheme::Fd4);
        let chart = from_embedding(base.grid, base.x.clone(), DerivativeScheme::Fd4).expect("embedding");
        let phi = Field::from_fn(n * n, |k| {
            let (a, b) = chart.grid.coords(k);
            a.cos() + b.cos() + 0.5 * (2.0 * b).sin() + 0.3 * (a + 2.0 * b).cos()
        });
        let energy = |e: f64| {
            let x: Vec<Vec3> =
                chart.x.iter().zip(&chart.normal).zip(&phi.data).map(|((x, nu), f)| x + nu * (e * f)).collect();
            bending_energy(&from_embedding(chart.grid, x, DerivativeScheme::Fd4).expect("perturbed"), &pb)
        };
        let fp = bending_normal_force(&chart, &pb);
        let pairing = l2_inner(&chart, &fp, &phi);
        let eps = 1e-4;
        ((energy(eps) - energy(-eps)) / (2.0 * eps) + pairing).abs() / pairing.abs()
    };
    let (b32, b64) = (bending_error(32), bending_error(64));
    let b_order = observed_order(b32, b64);

    // Round sphere of radius R with H0 = 0: H = 2/R, K = 1/R^2, Delta H = 0.
    let sphere = [0.5, 1.0, 3.0]
        .iter()
        .map(|r: &f64| bending_normal_force_point(1.7, 0.0, 0.0, 2.0 / r, 1.0 / (r * r)).abs())
        .fold(0.0, f64::max);

    outcome(
        err_el < 1e-6 && err_th < 1e-6 && b_order >= 3.5 && sphere == 0.0,
        format!(
            "H_EL {err_el:.1e}, H_TH {err_th:.1e}; f_perp_BE fd4 {b32:.2e} -> {b64:.2e} (order {b_order:.2}); sphere {sphere:.1e}"
        ),
    )
}

fn dual_formulas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c = torus(48, DerivativeScheme::Spectral);
    let n = c.len();
    // Random conforming state and material rates.
    let q = random_tangential_q(&c, 11, 0.4, 3);
    let beta = Field::new(random_matrix_field(&c, &mut rng, 2).data.iter().map(|m| 0.2 * m[(0, 0)]).collect());
    let qq = conforming_compose(&c, &q, &beta).expect("compose");
    let w = random_vector_field(&c, &mut rng, 3).scale(0.5);
    let dg = deformation_gradients(&c, &w).expect("gradients");
    let dm = random_matrix_field(&c, &mut rng, 3).map(proj_q);
    let dj = Field::from_fn(n, |k| jaumann_from_material(&dm.data[k], &dg.acal.data[k], &qq.data[k]));

    let mut form_err = 0.0_f64;
    let mut h2_err = 0.0_f64;
    let mut scale = 0.0_f64;
    for phi in [RateFlavor::Jaumann, RateFlavor::Material] {
        let p = ModelParams { upsilon: 0.9, xi: 0.7, phi, ..Default::default() };
        let rate = if phi == RateFlavor::Jaumann { &dj } else { &dm };
        let tj = nematic_viscous(&c, &p, &qq, rate, phi, &dg, RateFlavor::Jaumann).expect("nv");
        let tm = nematic_viscous(&c, &p, &qq, rate, phi, &dg, RateFlavor::Material).expect("nv");
        scale = scale.max(tj.sigma1.max_abs()).max(tj.sigma2.max_abs());
        for (a, b) in [(&tj.sigma1, &tm.sigma1), (&tj.sigma2, &tm.sigma2), (&tj.sigma, &tm.sigma)] {
            form_err = form_err.max(a.sub(b).max_abs());
        }
    }
    // The full second-order molecular field does not depend on the flavor.
    let pj = ModelParams { upsilon: 0.9, xi: 0.7, phi: RateFlavor::Jaumann, ..Default::default() };
    let pm = ModelParams { phi: RateFlavor::Material, ..pj };
    let hj = nematic_viscous(&c, &pj, &qq, &dj, RateFlavor::Jaumann, &dg, RateFlavor::Jaumann).expect("nv");
    let hm = nematic_viscous(&c, &pm, &qq, &dm, RateFlavor::Material, &dg, RateFlavor::Material).expect("nv");
    let full_j = hj.h2_tilde.axpy(-0.45, &dj);
    let full_m = hm.h2_tilde.axpy(-0.45, &dm);
    h2_err = h2_err.max(full_j.sub(&full_m).max_abs());

    // General vs conforming pipelines on the conforming state.
    let pe = ModelParams { l: 1.1, a: -1.0, b: 0.5, c: 1.5, ..Default::default() };
    let g = elastic(&c, &pe, &qq).expect("elastic").decompose(&c);
    let cp = elastic_conforming(&c, &pe, &q, &beta).expect("elastic").conforming.expect("parts");
    let gt = thermotropic(&c, &pe, &qq).expect("th").decompose(&c);
    let ct = thermotropic_conforming(&c, &pe, &q, &beta).expect("th").conforming.expect("parts");
    let h_scale = g.h.as_ref().expect("h").max_abs();
    let pipe = [
        g.h.expect("h").sub(cp.h.as_ref().expect("h")).max_abs(),
        g.zeta.expect("zeta").sub(cp.zeta.as_ref().expect("zeta")).max_abs(),
        g.omega.expect("omega").sub(cp.omega.as_ref().expect("omega")).max_abs(),
        gt.h.expect("h").sub(ct.h.as_ref().expect("h")).max_abs(),
        gt.omega.expect("omega").sub(ct.omega.as_ref().expect("omega")).max_abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / h_scale;

    let form_rel = form_err / scale;
    let h2_rel = h2_err / hj.h2_tilde.max_abs().max(1e-300);
    outcome(
        form_rel < 1e-11 && h2_rel < 1e-11 && pipe < 1e-10,
        format!("stress forms {form_rel:.1e}, second-order field {h2_rel:.1e}, pipelines {pipe:.1e}"),
    )
}

fn navier_stokes_reduction() -> Outcome {
    let c = flat(64);
    let p = ModelParams { upsilon: 0.1, ..Default::default() };
    let mut init = SimState::zeros(c.len());
    init.v = taylor_green(&c, 1.0);
    let opts = SolverOptions { dt: 1e-3, n_steps: 1000, sample_every: 10, ..Default::default() };
    match run_flat_be2d(&c, &p, &init, &opts) {
        Ok(rec) => {
            let e0 = rec.samples[0].e_k;
            let worst = rec
                .samples
                .iter()
                .map(|s| (s.e_k / (e0 * (-4.0 * p.upsilon * s.t / p.rho).exp()) - 1.0).abs())
                .fold(0.0, f64::max);
            let t_end = rec.samples.last().map_or(0.0, |s| s.t);
            outcome(
                worst < 1e-4 && (t_end - 1.0).abs() < 1e-9,
                format!("max relative error {worst:.1e} up to t = {t_end:.3}"),
            )
        }
        Err(e) => outcome(false, format!("solver error: {e}")),
    }
}

fn thermodynamic_consistency() -> Outcome {
    let c = flat(32);
    let mut details = Vec::new();
    let mut ok = true;
    for phi in [RateFlavor::Jaumann, RateFlavor::Material] {
        let p = ModelParams { xi: 0.5, a: -1.0, b: -1.0, c: 1.0, upsilon: 0.5, phi, ..Default::default() };
        let mut init = SimState::zeros(c.len());
        init.v = taylor_green(&c, 0.5);
        init.q = random_tangential_q(&c, 7, 0.3, 3);
        let mut residuals = Vec::new();
        let mut worst_rise = f64::NEG_INFINITY;
        for dt in [2e-3, 1e-3, 5e-4] {
            let opts =
                SolverOptions { dt, n_steps: (0.2 / dt).round() as usize, sample_every: 1, ..Default::default() };
            match run_flat_be2d(&c, &p, &init, &opts).map_err(|e| e.to_string()).and_then(|rec| {
                let a = dissipation_audit(&rec.samples).map_err(|e| e.to_string())?;
                Ok((rec, a))
            }) {
                Ok((rec, audit)) => {
                    for w in rec.samples.windows(2) {
                        worst_rise = worst_rise.max((w[1].e_tot - w[0].e_tot) / w[0].e_tot.abs());
                    }
                    residuals.push(audit.max_abs);
                }
                Err(e) => return outcome(false, format!("{phi:?}: {e}")),
            }
        }
        let o1 = observed_order(residuals[0], residuals[1]);
        let o2 = observed_order(residuals[1], residuals[2]);
        ok &= worst_rise <= 1e-6 && o1 > 0.8 && o2 > 0.8;
        details.push(format!(
            "{phi:?}: audit {:.2e} / {:.2e} / {:.2e}, orders {o1:.2} {o2:.2}, max step change {worst_rise:.1e}",
            residuals[0], residuals[1], residuals[2]
        ));
    }
    outcome(ok, details.join("; "))
}

fn gradient_flow_equilibrium() -> Outcome {
    let p = ModelParams { a: -5.0, b: -6.0, c: 3.0, ..Default::default() };
    let s = ThermotropicRoots::new(p.a, p.b, p.c).expect("nematic branch").s_star;
    let beta0 = -s / 3.0;

    let c = torus(64, DerivativeScheme::Spectral);
    let mut init = SimState::zeros(c.len());
    // Poloidal director at the bulk order, perturbed by a seeded smooth field.
    let (q0, _) = uniform_uniaxial(&c, s, std::f64::consts::FRAC_PI_2);
    init.q = q0.add(&random_tangential_q(&c, 3, 0.2, 2));
    let opts = SolverOptions { dt: 0.2, n_steps: 700, sample_every: 1, ..Default::default() };
    let (decreasing, residual, note) = match run_gradient_flow(&c, &p, &init, &opts, BetaMode::Fixed(beta0)) {
        Ok(rec) => {
            // A step counts as decreasing unless it rises above round-off of E.
            let rises = rec.samples.windows(2).filter(|w| w[1].e_tot - w[0].e_tot > 1e-12 * w[0].e_tot.abs()).count();
            let strict = rec.samples.windows(2).filter(|w| w[1].e_tot < w[0].e_tot).count();
            let fs = rec.final_state.expect("final state");
            let r = molecular_residual(&c, &p, &fs.q, &fs.beta).unwrap_or(f64::INFINITY);
            (rises == 0, r, format!("{strict}/{} strict decreases, others within round-off", rec.samples.len() - 1))
        }
        Err(e) => (false, f64::INFINITY, format!("solver error: {e}")),
    };

    let fc =
        build_chart(SurfaceKind::FlatTorus { p1: 5.0, p2: 5.0 }, 32, 32, DerivativeScheme::Spectral).expect("flat");
    let (qf, bf) = uniform_uniaxial(&fc, s, 0.4);
    let mut st = SimState::zeros(fc.len());
    st.q = qf.clone();
    st.beta = bf;
    let drift = run_gradient_flow(
        &fc,
        &p,
        &st,
        &SolverOptions { dt: 0.05, n_steps: 50, ..Default::default() },
        BetaMode::Fixed(beta0),
    )
    .ok()
    .and_then(|r| r.final_state)
    .map_or(f64::INFINITY, |f| f.q.sub(&qf).max_abs());
    outcome(
        decreasing && residual < 1e-6 && drift < 1e-10,
        format!("torus N=64 residual {residual:.2e} ({note}); flat uniaxial drift {drift:.1e}"),
    )
}

fn parodi_leslie() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_rel = 0.0_f64;
    let mut ineq_ok = true;
    for _ in 0..100 {
        let u = rng.gen_range(0.01..5.0);
        let s = rng.gen_range(-0.5..1.0);
        let xi = rng.gen_range(-1.4999..1.4999);
        let l = leslie_coefficients(u, s, xi, rng.gen_range(0.0..2.0));
        let a = l.alpha.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        worst_rel = worst_rel.max(l.parodi_residual.abs() / a).max(l.determinant_residual.abs() / l.scale());
        ineq_ok &= l.inequalities.iter().all(|&x| x >= 0.0);
    }
    let spot = leslie_coefficients(1.0, 1.0, 1.0, 0.0);
    let want = [1.0, -4.0 / 3.0, -1.0 / 3.0, 32.0 / 9.0, -4.0 / 3.0, -3.0];
    let spot_err = spot.alpha.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        worst_rel < 1e-12 && ineq_ok && spot_err < 1e-15,
        format!("relation residual {worst_rel:.1e}, inequalities hold: {ineq_ok}, spot error {spot_err:.1e}"),
    )
}

/// Bisection for the zero crossing of the least eigenvalue of `Id - xi Q`.
fn crossing(q: Mat3, mut lo: f64, mut hi: f64) -> f64 {
    let field = Field::constant(1, q);
    let least = |xi: f64| anisotropic_metric(&field, xi).1.data[0];
    let flo = least(lo);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if (least(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn metric_definiteness() -> Outcome {
    let d = Vec3::new(0.3, -0.5, 0.8).normalize();
    // Largest eigenvalue 2/3 crosses at +3/2, smallest eigenvalue -2/3 at -3/2.
    let pos = crossing(uniaxial_point(1.0, &d), 0.0, 3.0);
    let neg = crossing(uniaxial_point(-1.0, &d), -3.0, 0.0);
    let err = (pos - 1.5).abs().max((neg + 1.5).abs());
    outcome(err < 1e-10, format!("crossings at {pos:.12} and {neg:.12}"))
}

fn constraint_evaluators() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let c = torus(24, DerivativeScheme::Spectral);
    let n = c.len();
    let zero_v = Field::zeros(n);
    let beta0 = -0.3;
    let q_sc = random_tangential_q(&c, 5, 0.5, 2);
    let beta = Field::constant(n, beta0);
    let conforming = conforming_compose(&c, &q_sc, &beta).expect("compose");
    let generic = random_matrix_field(&c, &mut rng, 2).map(proj_q);
    let uni = Field::from_fn(n, |k| uniaxial_point(0.8, &(c.tangent[0][k] + c.normal[k] * 0.3).normalize()));

    let sc_lambda = ConstraintField::Vector(Field::from_fn(n, |k| c.tangent[1][k] * 0.7));
    let cb_lambda = ConstraintField::Scalar(Field::constant(n, 0.6));
    let un_lambda = ConstraintField::Tensor(random_matrix_field(&c, &mut rng, 2).map(proj_q));
    let eval = |g: Constraint, q: &MatrixField, l: &ConstraintField| {
        constraint_terms(g, &c, q, &zero_v, l).expect("constraint")
    };

    let sc_ok = eval(Constraint::SC, &conforming, &sc_lambda).c.max_abs();
    let sc_bad = eval(Constraint::SC, &generic, &sc_lambda).c.max_abs();
    let cb_ok = eval(Constraint::CB { beta0 }, &conforming, &cb_lambda).c.max_abs();
    let cb = eval(Constraint::CB { beta0 }, &generic, &cb_lambda);
    let cb_bad = cb.c.max_abs();
    let cb_trace = cb.h.expect("h").data.iter().map(|m| m.trace().abs()).fold(0.0, f64::max);
    let un_ok = eval(Constraint::UN, &uni, &un_lambda).c.max_abs();
    let un_bad = eval(Constraint::UN, &generic, &un_lambda).c.max_abs();

    // Gauge corrections are linear in H: molecular fields summing to zero cancel.
    let h1 = random_matrix_field(&c, &mut rng, 2).map(proj_q);
    let h2 = random_matrix_field(&c, &mut rng, 2).map(proj_q);
    let h3 = h1.add(&h2).scale(-1.0);
    let parts: Vec<_> =
        [&h1, &h2, &h3].iter().map(|h| jaumann_gauge_force_correction(&c, &generic, h).expect("correction")).collect();
    let total = parts[0].add(&parts[1]).add(&parts[2]);
    let gauge = total.max_abs() / parts[0].max_abs().max(parts[1].max_abs());

    let ok = sc_ok < 1e-12
        && cb_ok < 1e-12
        && un_ok < 1e-12
        && sc_bad > 1e-3
        && cb_bad > 1e-3
        && un_bad > 1e-3
        && cb_trace < 1e-14
        && gauge < 1e-12;
    outcome(
        ok,
        format!(
            "satisfied |C| SC {sc_ok:.1e} CB {cb_ok:.1e} UN {un_ok:.1e}; violated SC {sc_bad:.2} CB {cb_bad:.2} UN {un_bad:.2}; Tr H_CB {cb_trace:.1e}; gauge sum {gauge:.1e}"
        ),
    )
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("algebraic identities", 1, algebraic_identities),
        ("discrete calculus", 30, discrete_calculus),
        ("variational consistency", 60, variational_consistency),
        ("dual-formula equivalence", 10, dual_formulas),
        ("Navier-Stokes reduction", 120, navier_stokes_reduction),
        ("thermodynamic consistency", 300, thermodynamic_consistency),
        ("gradient-flow equilibrium", 120, gradient_flow_equilibrium),
        ("Parodi-Leslie relations", 1, parodi_leslie),
        ("anisotropic-metric definiteness", 1, metric_definiteness),
        ("constraint evaluators", 1, constraint_evaluators),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = run();
        let elapsed = t0.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let passed = out.passed && in_time;
        if !passed {
            failures += 1;
        }
        let timing = if in_time { String::new() } else { format!(" [over the {budget} s budget]") };
        println!(
            "{} {:>2} {name}: {} ({:.2} s){timing}",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
