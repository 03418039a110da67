//! L2 gradient flow of the surface Landau-de Gennes energy for conforming
//! Q-tensors on a materially stationary surface (`V = 0`).
//!
//! With frame coefficients `q_k = q : B_k / 2` the step is the linearly
//! stabilized scheme
//! `(M~ mu / dt + L Lc) (q_k^{n+1} - q_k^n) = mu h_k^n`,
//! where `Lc` is a constant-coefficient operator dominating the weighted
//! Laplacian and `mu` the area form. Every curvature and thermotropic term
//! stays explicit. The stabilizer makes the elastic part unconditionally
//! energy stable; a constant shift `S mu`, half a bound on the thermotropic
//! Hessian, does the same for the bulk potential. Nyquist modes are removed
//! after every step: the stabilizer has a null symbol there, and metric
//! products would otherwise feed them from the resolved band.

use super::{frame_coefficients, from_frame, BlowUpGuard, SimState, SolverOptions, Stabilizer, TrajectoryRecord};
use crate::diagnostics::{energies, Rates};
use crate::error::{Error, Result};
use crate::fields::{l2_inner, Field, MatrixField, ScalarField, VectorField};
use crate::geometry::ChartGeometry;
use crate::kinematics::orthonormal_frame;
use crate::qtensor::conforming_compose;
use crate::terms::{elastic_conforming, thermotropic_conforming_point, ModelParams};

/// Treatment of the normal eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    /// `beta` evolves with `M~ beta_dot = omega_EL + omega_TH`.
    Free,
    /// `beta = beta0` everywhere; the normal balance is dropped.
    Fixed(f64),
}

/// `(h_EL + h_TH, omega_EL + omega_TH)`.
fn molecular(
    chart: &ChartGeometry,
    p: &ModelParams,
    q: &MatrixField,
    beta: &ScalarField,
) -> Result<(MatrixField, ScalarField)> {
    let el = elastic_conforming(chart, p, q, beta)?;
    let parts = el.conforming.expect("elastic rows are conforming");
    let (h_el, w_el) = (parts.h.expect("h_EL"), parts.omega.expect("omega_EL"));
    let mut h = h_el;
    let mut w = w_el;
    for k in 0..chart.len() {
        let (ht, wt) = thermotropic_conforming_point(p, &q.data[k], beta.data[k]);
        h.data[k] += ht;
        w.data[k] += wt;
    }
    Ok((h, w))
}

/// Half of an upper bound on the thermotropic Hessian, taken over the range
/// of `beta` and of `Tr q^2` up to the larger of the initial maximum and the
/// pointwise minimizer. The `|b| sqrt(Tr q^2)` term covers the q-beta coupling.
fn thermotropic_shift(p: &ModelParams, q: &MatrixField, beta: &ScalarField) -> f64 {
    let t_init = q.data.iter().map(|m| (m * m).trace()).fold(0.0, f64::max);
    let (lo, hi) = beta.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &b| (l.min(b), h.max(b)));
    let mut bound = 0.0_f64;
    for b in [lo, hi] {
        let k0 = 2.0 * p.a - 2.0 * p.b * b + 3.0 * p.c * b * b;
        let t = t_init.max(-k0 / (2.0 * p.c));
        bound = bound.max(k0 + 6.0 * p.c * t + 2.0 * p.b.abs() * t.sqrt());
    }
    0.5 * bound
}

/// `||h_EL + h_TH||_{L2}` for a conforming state.
pub fn molecular_residual(chart: &ChartGeometry, p: &ModelParams, q: &MatrixField, beta: &ScalarField) -> Result<f64> {
    let (h, _) = molecular(chart, p, q, beta)?;
    Ok(l2_inner(chart, &h, &h).sqrt())
}

/// Runs the gradient flow from `init` (`v` and `p` are ignored and returned as zero).
pub fn run_gradient_flow(
    chart: &ChartGeometry,
    p: &ModelParams,
    init: &SimState,
    opts: &SolverOptions,
    mode: BetaMode,
) -> Result<TrajectoryRecord> {
    p.validate()?;
    opts.validate()?;
    init.check(chart)?;
    let mt = p.m_tilde();
    if mt <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "M".into(),
            reason: "M + upsilon xi^2 / 2 must be positive".into(),
        });
    }
    let n = chart.len();
    let dt = opts.dt;
    let (e1, e2) = orthonormal_frame(chart);
    let mut st = init.clone();
    st.v = VectorField::zeros(n);
    st.p = ScalarField::zeros(n);
    if let BetaMode::Fixed(b0) = mode {
        st.beta = Field::constant(n, b0);
    }
    // Project the initial q onto the tangential Q space via its frame coefficients.
    st.q = from_frame(&e1, &e2, &frame_coefficients(&e1, &e2, &st.q));
    let stab = Stabilizer::new(chart, mt / dt + thermotropic_shift(p, &st.q, &st.beta), p.l);
    let guard = BlowUpGuard::new(opts.blowup_factor, &[("q", st.q.max_norm()), ("beta", st.beta.max_abs())]);
    let zero_v = VectorField::zeros(n);
    let mut rec = TrajectoryRecord::default();
    for step in 0..=opts.n_steps {
        guard.check(st.t, &[st.q.max_norm(), st.beta.max_abs()])?;
        let (h, w) = molecular(chart, p, &st.q, &st.beta)?;
        let beta_dot = match mode {
            BetaMode::Free => w.scale(1.0 / mt),
            BetaMode::Fixed(_) => ScalarField::zeros(n),
        };
        if opts.sample_due(step) {
            let qq = conforming_compose(chart, &st.q, &st.beta)?;
            let rate = conforming_compose(chart, &h.scale(1.0 / mt), &beta_dot)?;
            rec.samples.push(energies(chart, p, st.t, &qq, &zero_v, Rates { dj: &rate, dphi: &rate })?);
        }
        if opts.snapshot_due(step) {
            rec.snapshots.push(st.clone());
        }
        if step == opts.n_steps {
            break;
        }
        let hc = frame_coefficients(&e1, &e2, &h);
        let mut c = frame_coefficients(&e1, &e2, &st.q);
        for (ck, hk) in c.iter_mut().zip(&hc) {
            let dk = stab.solve(hk);
            ck.iter_mut().zip(&dk).for_each(|(a, d)| *a += d);
            *ck = chart.diff.drop_nyquist(ck);
        }
        st.q = from_frame(&e1, &e2, &c);
        if mode == BetaMode::Free {
            let db = stab.solve(&w.data);
            st.beta = Field::new(chart.diff.drop_nyquist(&Field::from_fn(n, |k| st.beta.data[k] + db[k]).data));
        }
        st.t += dt;
        if !st.q.is_finite() || !st.beta.is_finite() {
            return Err(Error::BlowUp { t: st.t, field: "q".into(), value: f64::INFINITY, bound: 0.0 });
        }
    }
    Ok(rec.finish(st))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_chart, DerivativeScheme, SurfaceKind};
    use crate::qtensor::ThermotropicRoots;
    use crate::solvers::uniform_uniaxial;

    #[test]
    fn uniaxial_equilibrium_is_stationary_on_flat_chart() {
        let c = build_chart(SurfaceKind::FlatTorus { p1: 5.0, p2: 5.0 }, 16, 16, DerivativeScheme::Spectral).unwrap();
        let p = ModelParams { a: -5.0, b: -6.0, c: 3.0, ..Default::default() };
        let s = ThermotropicRoots::new(p.a, p.b, p.c).unwrap().s_star;
        let (q, beta) = uniform_uniaxial(&c, s, 0.3);
        let mut init = SimState::zeros(c.len());
        init.q = q.clone();
        init.beta = beta;
        assert!(molecular_residual(&c, &p, &init.q, &init.beta).unwrap() < 1e-10);
        let opts = SolverOptions { dt: 0.05, n_steps: 20, ..Default::default() };
        let rec = run_gradient_flow(&c, &p, &init, &opts, BetaMode::Fixed(-s / 3.0)).unwrap();
        let last = rec.final_state.unwrap();
        assert!(last.q.sub(&q).max_abs() < 1e-10);
    }
}
