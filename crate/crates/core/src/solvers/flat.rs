//! Flat 2D Beris-Edwards with `beta = 0` on a periodic rectangle.
//!
//! Step `n -> n+1`:
//! 1. the nematic rate `D q = (h_EL + h_TH + xi h1 + xi^2 h~2) / M~` at step `n`;
//! 2. `(M~/dt - L Lap) q^{n+1} = M~ q^n / dt + (M~ D q - L Lap q^n) - M~ N(q^n, v^n)`,
//!    where `N` is advection plus the Jaumann co-rotation when `Phi = J`;
//! 3. `v^{n+1} = P exp(nu Lap dt) (v^n + dt F^n / rho)` with `F` the explicit
//!    stress divergence minus inertia and `P` the Leray projection.

use rustfft::num_complex::Complex64;

use super::{componentwise, BlowUpGuard, SimState, SolverOptions, TrajectoryRecord};
use crate::diagnostics::{energies, Rates};
use crate::error::{Error, Result};
use crate::fields::{div_c_matrix, Field, MatrixField, ScalarField, VectorField};
use crate::geometry::ChartGeometry;
use crate::kinematics::{
    deformation_gradients, directional_derivative_matrix, directional_derivative_vector, RateFlavor,
};
use crate::terms::{
    elastic_conforming, nv_conforming_point, thermotropic_conforming_point, thermotropic_pressure_conforming,
    ModelParams,
};
use crate::{Mat3, Vec3};

/// Everything evaluated explicitly at one time level.
struct Explicit {
    /// `D_Phi q`.
    rate: MatrixField,
    jq: MatrixField,
    /// `h_TH + xi h1 + xi^2 h~2`, i.e. the nematic force without `L Lap q`.
    h_rest: MatrixField,
    /// `-rho nabla_v v + div(sigma_EL + sigma_IM + xi sigma1 + xi^2 sigma2)`.
    force: VectorField,
    /// `nabla_v q`, and the co-rotation `A q - q A`.
    adv_q: MatrixField,
    corot: MatrixField,
    p_th: ScalarField,
}

fn explicit(
    chart: &ChartGeometry,
    p: &ModelParams,
    q: &MatrixField,
    v: &VectorField,
    form: RateFlavor,
) -> Result<Explicit> {
    let n = chart.len();
    let zero = ScalarField::zeros(n);
    let el = elastic_conforming(chart, p, q, &zero)?;
    let parts = el.conforming.expect("elastic rows are conforming");
    let sigma_el = parts.sigma.expect("sigma_EL");
    let h_el = parts.h.expect("h_EL");
    let dg = deformation_gradients(chart, v)?;
    let mt = p.m_tilde();
    let (xi, u) = (p.xi, p.upsilon);
    let mut rate = MatrixField::zeros(n);
    let mut jq = MatrixField::zeros(n);
    let mut h_rest = MatrixField::zeros(n);
    let mut corot = MatrixField::zeros(n);
    let mut sigma = MatrixField::zeros(n);
    let mut p_th = ScalarField::zeros(n);
    for k in 0..n {
        let (qq, g, a, pr) = (q.data[k], dg.g.data[k], dg.a.data[k], chart.proj[k]);
        let (hth, _) = thermotropic_conforming_point(p, &qq, 0.0);
        // h1 and h~2 only depend on (q, G); the rate slots are unused for them.
        let z = Mat3::zeros();
        let (_, _, _, h1, _, h2, _) = nv_conforming_point(&qq, 0.0, &z, &z, 0.0, &g, &pr, u, form, p.phi);
        let rest = hth + h1 * xi + h2 * (xi * xi);
        let d = (h_el.data[k] + rest) / mt;
        let cr = a * qq - qq * a;
        let (j, qdot) = match p.phi {
            RateFlavor::Jaumann => (d, d + cr),
            RateFlavor::Material => (d - cr, d),
        };
        let (_, s1, s2, ..) = nv_conforming_point(&qq, 0.0, &j, &qdot, 0.0, &g, &pr, u, form, p.phi);
        let s_im = match p.phi {
            RateFlavor::Jaumann => (qq * j - j * qq) * p.m,
            RateFlavor::Material => Mat3::zeros(),
        };
        sigma.data[k] = sigma_el.data[k] + s_im + s1 * xi + s2 * (xi * xi);
        rate.data[k] = d;
        jq.data[k] = j;
        h_rest.data[k] = rest;
        corot.data[k] = cr;
        p_th.data[k] = thermotropic_pressure_conforming(p, (qq * qq).trace(), 0.0);
    }
    let inertia = directional_derivative_vector(chart, v, v);
    let div = div_c_matrix(chart, &sigma);
    let force = Field::from_fn(n, |k| div.data[k] - inertia.data[k] * p.rho);
    let adv_q = directional_derivative_matrix(chart, q, v);
    Ok(Explicit { rate, jq, h_rest, force, adv_q, corot, p_th })
}

/// Leray projection plus optional viscous integrating factor on the x/y
/// components of `w`. Returns the projected field and the scalar `psi`
/// whose gradient was removed. Nyquist modes are dropped.
fn project(chart: &ChartGeometry, w: &VectorField, decay: Option<f64>) -> (VectorField, ScalarField) {
    let d = &chart.diff;
    let g = chart.grid;
    let c0: Vec<f64> = w.data.iter().map(|v| v[0]).collect();
    let c1: Vec<f64> = w.data.iter().map(|v| v[1]).collect();
    let (mut a, mut b) = (d.fft2(&c0), d.fft2(&c1));
    let mut psi = vec![Complex64::new(0.0, 0.0); g.len()];
    let (s1, s2) = (d.symbol(0), d.symbol(1));
    for i1 in 0..g.n1 {
        for i2 in 0..g.n2 {
            let k = i1 * g.n2 + i2;
            if i1 == g.n1 / 2 || i2 == g.n2 / 2 {
                a[k] = Complex64::new(0.0, 0.0);
                b[k] = Complex64::new(0.0, 0.0);
                continue;
            }
            let ss = s1[i1] * s1[i1] + s2[i2] * s2[i2];
            if ss > 0.0 {
                // grad psi has symbol i S psi; S . w = S . (i S psi) => psi = -i (S . w) / |S|^2
                let sw = a[k] * s1[i1] + b[k] * s2[i2];
                psi[k] = Complex64::new(0.0, -1.0) * sw / ss;
                a[k] -= sw * (s1[i1] / ss);
                b[k] -= sw * (s2[i2] / ss);
            }
            if let Some(nu_dt) = decay {
                let f = (-nu_dt * ss).exp();
                a[k] *= f;
                b[k] *= f;
            }
        }
    }
    let (x, y) = (d.ifft2(a), d.ifft2(b));
    let v = Field::from_fn(g.len(), |k| Vec3::new(x[k], y[k], 0.0));
    (v, Field::new(d.ifft2(psi)))
}

fn record(
    chart: &ChartGeometry,
    p: &ModelParams,
    st: &SimState,
    ex: &Explicit,
) -> Result<crate::diagnostics::EnergyReport> {
    energies(chart, p, st.t, &st.q, &st.v, Rates { dj: &ex.jq, dphi: &ex.rate })
}

/// Flat Beris-Edwards run. `opts.nv_form` selects the Jaumann or material
/// representation of the nematic viscous stresses; both describe the same model.
pub fn run_flat_be2d(
    chart: &ChartGeometry,
    p: &ModelParams,
    init: &SimState,
    opts: &SolverOptions,
) -> Result<TrajectoryRecord> {
    if !chart.is_flat() {
        return Err(Error::IncompatibleChart {
            required: "FlatTorus".into(),
            got: chart.kind.map(|k| k.name()).unwrap_or("sampled embedding").into(),
        });
    }
    p.validate()?;
    if p.xi.abs() >= 1.5 {
        return Err(Error::InvalidParameter { name: "xi".into(), reason: format!("|xi| must be < 3/2, got {}", p.xi) });
    }
    if p.m_tilde() <= 0.0 && p.l > 0.0 {
        return Err(Error::InvalidParameter {
            name: "M".into(),
            reason: "M + upsilon xi^2 / 2 must be positive".into(),
        });
    }
    opts.validate()?;
    init.check(chart)?;
    let dt = opts.dt;
    let mt = p.m_tilde();
    let h = chart.grid.h1().min(chart.grid.h2());
    let mut st = init.clone();
    st.beta = ScalarField::zeros(chart.len());
    // Start from the divergence-free part of the initial velocity.
    st.v = project(chart, &st.v, None).0;
    let guard = BlowUpGuard::new(opts.blowup_factor, &[("v", st.v.max_norm()), ("q", st.q.max_norm())]);
    let mut rec = TrajectoryRecord::default();
    let mut cfl_warned = false;
    for step in 0..=opts.n_steps {
        guard.check(st.t, &[st.v.max_norm(), st.q.max_norm()])?;
        let ex = explicit(chart, p, &st.q, &st.v, opts.nv_form)?;
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
        // q-step: backward Euler on L Lap q, rest explicit.
        let rhs = Field::from_fn(chart.len(), |k| {
            let mut adv = ex.adv_q.data[k];
            if p.phi == RateFlavor::Jaumann {
                adv -= ex.corot.data[k];
            }
            st.q.data[k] * (mt / dt) + ex.h_rest.data[k] - adv * mt
        });
        let q_new = componentwise(&rhs, |c| chart.diff.solve_const(c, mt / dt, p.l, p.l));
        // keep exact tangential tracelessness
        let q_new = q_new.map(|m| {
            let a = 0.5 * (m[(0, 0)] - m[(1, 1)]);
            let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
            Mat3::new(a, b, 0.0, b, -a, 0.0, 0.0, 0.0, 0.0)
        });
        // v-step: explicit forcing, exact viscous decay, Leray projection.
        let w = Field::from_fn(chart.len(), |k| st.v.data[k] + ex.force.data[k] * (dt / p.rho));
        let (v_new, psi) = project(chart, &w, Some(p.upsilon / p.rho * dt));
        st.p = Field::from_fn(chart.len(), |k| ex.p_th.data[k] + psi.data[k] * (p.rho / dt));
        st.q = q_new;
        st.v = v_new;
        st.t += dt;
        if !st.v.is_finite() || !st.q.is_finite() {
            return Err(Error::BlowUp { t: st.t, field: "state".into(), value: f64::INFINITY, bound: 0.0 });
        }
    }
    Ok(rec.finish(st))
}
