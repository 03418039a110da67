//! Conforming nematodynamics on a stationary curved surface with constant
//! normal eigenvalue `beta0`, no normal flow and isotropic viscosity.
//!
//! Both the velocity and the Q-tensor step use the constant-coefficient
//! stabilizer of [`Stabilizer`] as their implicit part. Incompressibility is
//! restored by a pressure projection `v = v* - grad phi` with
//! `div grad phi = div v*`, solved by preconditioned conjugate gradients
//! in the area-weighted (symmetric) form.

use super::{componentwise, pcg, BlowUpGuard, SimState, SolverOptions, Stabilizer, TrajectoryRecord};
use crate::diagnostics::{energies, EnergyReport, Rates};
use crate::error::{Error, Result};
use crate::fields::{div_c_vector, nabla_c_scalar, proj_qs, Field, MatrixField, ScalarField, VectorField};
use crate::geometry::ChartGeometry;
use crate::kinematics::{
    deformation_gradients, directional_derivative_matrix, directional_derivative_vector, RateFlavor,
};
use crate::qtensor::conforming_point;
use crate::terms::{
    conforming_flow_forces, elastic_conforming, immobility_conforming, thermotropic_conforming_point,
    thermotropic_pressure_conforming, ModelParams,
};
use crate::Vec3;

const PROJECTION_TOL: f64 = 1e-10;
const PROJECTION_MAX_ITER: usize = 500;

/// Removes the gradient part of a tangential field. Returns `(v, phi)`.
fn pressure_projection(chart: &ChartGeometry, w: &VectorField) -> Result<(VectorField, ScalarField)> {
    let mu = &chart.area_form;
    let div = div_c_vector(chart, w);
    // K phi = -mu div grad phi is symmetric positive semidefinite.
    let b: Vec<f64> = div.data.iter().zip(mu).map(|(d, m)| -d * m).collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        let g = nabla_c_scalar(chart, &Field::new(x.to_vec()));
        let d = div_c_vector(chart, &g);
        d.data.iter().zip(mu).map(|(d, m)| -d * m).collect()
    };
    let n = chart.len() as f64;
    let mut ci = [0.0_f64; 2];
    for k in 0..chart.len() {
        for (i, c) in ci.iter_mut().enumerate() {
            *c += mu[k] * chart.g_inv[k][(i, i)] / n;
        }
    }
    let pre = |r: &[f64]| chart.diff.solve_const(r, 0.0, ci[0], ci[1]);
    let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = w.data.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt().max(1e-300);
    if bnorm <= 1e-14 * scale {
        return Ok((w.clone(), ScalarField::zeros(chart.len())));
    }
    let (phi, iterations, residual) = pcg(apply, pre, &b, vec![0.0; b.len()], PROJECTION_TOL, PROJECTION_MAX_ITER);
    if !(residual <= PROJECTION_TOL) {
        return Err(Error::ProjectionNonConvergence { residual, iterations });
    }
    let phi = Field::new(phi);
    let g = nabla_c_scalar(chart, &phi);
    Ok((Field::from_fn(chart.len(), |k| chart.proj[k] * (w.data[k] - g.data[k])), phi))
}

struct Explicit {
    /// Tangential momentum right side without the pressure.
    force: VectorField,
    /// `M d_t q` from the Q-tensor equation.
    m_dqdt: MatrixField,
    jq: MatrixField,
    dphi_q: MatrixField,
    p_th: ScalarField,
}

fn explicit(chart: &ChartGeometry, p: &ModelParams, q: &MatrixField, beta0: f64, v: &VectorField) -> Result<Explicit> {
    let n = chart.len();
    let beta = ScalarField::constant(n, beta0);
    let zero = ScalarField::zeros(n);
    let el = elastic_conforming(chart, p, q, &beta)?.conforming.expect("elastic rows are conforming");
    let (sigma_el, zeta_el, h_el) = (el.sigma.expect("sigma"), el.zeta.expect("zeta"), el.h.expect("h"));
    let dg = deformation_gradients(chart, v)?;
    let adv_q = directional_derivative_matrix(chart, q, v);
    let mut rate = MatrixField::zeros(n);
    let mut jq = MatrixField::zeros(n);
    let mut m_dqdt = MatrixField::zeros(n);
    let mut p_th = ScalarField::zeros(n);
    for k in 0..n {
        let (qq, a, pr) = (q.data[k], dg.a.data[k], chart.proj[k]);
        let (hth, _) = thermotropic_conforming_point(p, &qq, beta0);
        let d = (h_el.data[k] + hth) / p.m;
        let cr = a * qq - qq * a;
        let (j, qdot) = match p.phi {
            RateFlavor::Jaumann => (d, d + cr),
            RateFlavor::Material => (d - cr, d),
        };
        rate.data[k] = d;
        jq.data[k] = j;
        m_dqdt.data[k] = (qdot - pr * adv_q.data[k] * pr) * p.m;
        p_th.data[k] = thermotropic_pressure_conforming(p, (qq * qq).trace(), beta0);
    }
    let im = immobility_conforming(chart, p, q, &beta, &rate, &zero, p.phi, &dg)?
        .conforming
        .expect("immobility rows are conforming");
    let (sigma_im, zeta_im) = (im.sigma.expect("sigma"), im.zeta.expect("zeta"));
    let sigma = Field::from_fn(n, |k| sigma_el.data[k] + sigma_im.data[k] + dg.s.data[k] * (2.0 * p.upsilon));
    let zeta = zeta_el.add(&zeta_im);
    let (f, _) = conforming_flow_forces(chart, q, &beta, &sigma, &zeta)?;
    let inertia = directional_derivative_vector(chart, v, v);
    let gp = nabla_c_scalar(chart, &p_th);
    let force = Field::from_fn(n, |k| chart.proj[k] * (f.data[k] + gp.data[k] - inertia.data[k] * p.rho));
    // Embedded D_Phi Q: the material rate carries the mixed part (q - 3/2 beta Id_S) b.
    let dphi_q = Field::from_fn(n, |k| {
        let nu = chart.normal[k];
        let base = match p.phi {
            RateFlavor::Jaumann => jq.data[k],
            RateFlavor::Material => rate.data[k],
        };
        let mut m = conforming_point(&base, 0.0, &nu);
        if p.phi == RateFlavor::Material {
            let eta: Vec3 = (q.data[k] - chart.proj[k] * (1.5 * beta0)) * dg.b.data[k];
            m += eta * nu.transpose() + nu * eta.transpose();
        }
        m
    });
    let jq = jq.map_indexed(|k, m| conforming_point(m, 0.0, &chart.normal[k]));
    Ok(Explicit { force, m_dqdt, jq, dphi_q, p_th })
}

fn record(chart: &ChartGeometry, p: &ModelParams, st: &SimState, ex: &Explicit) -> Result<EnergyReport> {
    let qq = Field::from_fn(chart.len(), |k| conforming_point(&st.q.data[k], st.beta.data[k], &chart.normal[k]));
    energies(chart, p, st.t, &qq, &st.v, Rates { dj: &ex.jq, dphi: &ex.dphi_q })
}

/// Stationary-surface run with `beta = beta0`, `v_perp = 0`, `xi = 0`.
pub fn run_stationary_nemato(
    chart: &ChartGeometry,
    p: &ModelParams,
    init: &SimState,
    beta0: f64,
    opts: &SolverOptions,
) -> Result<TrajectoryRecord> {
    p.validate()?;
    if p.xi != 0.0 {
        return Err(Error::InvalidParameter {
            name: "xi".into(),
            reason: "the stationary-surface solver requires xi = 0".into(),
        });
    }
    if !(p.m > 0.0) {
        return Err(Error::InvalidParameter { name: "M".into(), reason: "must be positive".into() });
    }
    opts.validate()?;
    init.check(chart)?;
    let n = chart.len();
    let dt = opts.dt;
    let mut st = init.clone();
    st.beta = ScalarField::constant(n, beta0);
    st.q = st.q.map_indexed(|k, m| proj_qs(m, &chart.normal[k]));
    st.v = pressure_projection(chart, &st.v.map_indexed(|k, w| chart.proj[k] * w))?.0;
    let stab_v = Stabilizer::new(chart, p.rho / dt, p.upsilon);
    let stab_q = Stabilizer::new(chart, p.m / dt, p.l);
    let h = chart.grid.h1().min(chart.grid.h2())
        * chart.g.iter().map(|g| g[(0, 0)].min(g[(1, 1)]).sqrt()).fold(f64::INFINITY, f64::min);
    let guard = BlowUpGuard::new(opts.blowup_factor, &[("v", st.v.max_norm()), ("q", st.q.max_norm())]);
    let mut rec = TrajectoryRecord::default();
    let mut cfl_warned = false;
    for step in 0..=opts.n_steps {
        guard.check(st.t, &[st.v.max_norm(), st.q.max_norm()])?;
        let ex = explicit(chart, p, &st.q, beta0, &st.v)?;
        if opts.sample_due(step) {
            rec.samples.push(record(chart, p, &st, &ex)?);
        }
        if opts.snapshot_due(step) {
            rec.snapshots.push(st.clone());
        }
        if step == opts.n_steps {
            break;
        }
        let cfl = st.v.max_norm() * dt / h;
        if cfl > opts.cfl_limit && !cfl_warned {
            rec.warnings.push(format!("CFL number {cfl:.3} exceeds {} at t = {}", opts.cfl_limit, st.t));
            cfl_warned = true;
        }
        let dq = componentwise(&ex.m_dqdt, |c| stab_q.solve(c));
        let q_new = Field::from_fn(n, |k| proj_qs(&(st.q.data[k] + dq.data[k]), &chart.normal[k]));
        let dv = componentwise(&ex.force, |c| stab_v.solve(c));
        let w = Field::from_fn(n, |k| chart.proj[k] * (st.v.data[k] + dv.data[k]));
        let (v_new, phi) = pressure_projection(chart, &w)?;
        st.p = Field::from_fn(n, |k| ex.p_th.data[k] + phi.data[k] * (p.rho / dt));
        st.q = q_new;
        st.v = v_new;
        st.t += dt;
        if !st.v.is_finite() || !st.q.is_finite() {
            return Err(Error::BlowUp { t: st.t, field: "state".into(), value: f64::INFINITY, bound: 0.0 });
        }
    }
    Ok(rec.finish(st))
}
