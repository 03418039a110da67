//! Time integrators for the three closed special cases on fixed charts:
//! flat 2D Beris-Edwards ([`run_flat_be2d`]), the L2 gradient flow of the
//! surface Landau-de Gennes energy ([`run_gradient_flow`]) and nematodynamics
//! on a stationary curved surface ([`run_stationary_nemato`]).
//!
//! All schemes are first order: stiff linear diffusion is treated
//! implicitly (or by a stabilizing implicit operator on curved charts),
//! everything else explicitly.

mod flat;
mod gradient_flow;
mod stationary;

pub use flat::run_flat_be2d;
pub use gradient_flow::{molecular_residual, run_gradient_flow, BetaMode};
pub use stationary::run_stationary_nemato;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{fill_audit, EnergyReport};
use crate::error::{Error, Result};
use crate::fields::{smooth_random_scalar, Field, MatrixField, ScalarField, VectorField};
use crate::geometry::ChartGeometry;
use crate::kinematics::{orthonormal_frame, RateFlavor};
use crate::{Mat3, Vec3};

/// Solver state. `v` and `q` are embedded proxies of tangential fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub v: VectorField,
    pub p: ScalarField,
    pub q: MatrixField,
    pub beta: ScalarField,
}

impl SimState {
    pub fn zeros(n: usize) -> Self {
        Self { t: 0.0, v: Field::zeros(n), p: Field::zeros(n), q: Field::zeros(n), beta: Field::zeros(n) }
    }
    fn check(&self, chart: &ChartGeometry) -> Result<()> {
        for n in [self.v.len(), self.p.len(), self.q.len(), self.beta.len()] {
            chart.check_len(n)?;
        }
        Ok(())
    }
}

/// Samples and snapshots of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub samples: Vec<EnergyReport>,
    pub snapshots: Vec<SimState>,
    /// Non-fatal diagnostics such as CFL warnings.
    pub warnings: Vec<String>,
    /// State after the last step.
    pub final_state: Option<SimState>,
}

impl TrajectoryRecord {
    fn finish(mut self, last: SimState) -> Self {
        fill_audit(&mut self.samples);
        self.final_state = Some(last);
        self
    }
}

/// Step control shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub dt: f64,
    pub n_steps: usize,
    /// Energy sample cadence in steps (0 = first and last step only).
    pub sample_every: usize,
    /// Snapshot cadence in steps (0 = none).
    pub snapshot_every: usize,
    /// Abort when a field max-norm exceeds this factor times its initial value (at least 1).
    pub blowup_factor: f64,
    /// Courant number above which a warning is recorded.
    pub cfl_limit: f64,
    /// Representation of the nematic viscous stresses (flat solver).
    pub nv_form: RateFlavor,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            n_steps: 100,
            sample_every: 1,
            snapshot_every: 0,
            blowup_factor: 1e6,
            cfl_limit: 0.5,
            nv_form: RateFlavor::Jaumann,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt".into(),
                reason: format!("must be positive, got {}", self.dt),
            });
        }
        Ok(())
    }
    fn sample_due(&self, step: usize) -> bool {
        step == 0 || step == self.n_steps || (self.sample_every > 0 && step.is_multiple_of(self.sample_every))
    }
    fn snapshot_due(&self, step: usize) -> bool {
        self.snapshot_every > 0 && step.is_multiple_of(self.snapshot_every)
    }
}

/// Tracks the blow-up bounds fixed from the initial state.
struct BlowUpGuard {
    bounds: Vec<(&'static str, f64)>,
}

impl BlowUpGuard {
    fn new(factor: f64, fields: &[(&'static str, f64)]) -> Self {
        Self { bounds: fields.iter().map(|&(n, v)| (n, factor * v.max(1.0))).collect() }
    }
    fn check(&self, t: f64, values: &[f64]) -> Result<()> {
        for (&(field, bound), &value) in self.bounds.iter().zip(values) {
            if !(value <= bound) {
                return Err(Error::BlowUp { t, field: field.into(), value, bound });
            }
        }
        Ok(())
    }
}

/// Preconditioned conjugate gradients for a symmetric positive
/// (semi)definite operator. Returns `(x, iterations, relative residual)`.
pub(crate) fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, f64) {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return (vec![0.0; b.len()], 0, 0.0);
    }
    let mut x = x0;
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    if rel <= tol {
        return (x, 0, rel);
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return (x, it, rel);
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            return (x, it, rel);
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, max_iter, rel)
}

/// Solves `(alpha mu + c L_c) x = b` node-wise coupled, with `L_c` the
/// constant-coefficient operator `c1 S1^2 + c2 S2^2` and `c_i = max mu g^ii`.
/// This majorizes the weighted surface Laplacian, so it serves as the
/// implicit stabilizer on curved charts.
pub(crate) struct Stabilizer<'a> {
    chart: &'a ChartGeometry,
    alpha: f64,
    c: f64,
    ci: [f64; 2],
    mu_bar: f64,
}

impl<'a> Stabilizer<'a> {
    pub(crate) fn new(chart: &'a ChartGeometry, alpha: f64, c: f64) -> Self {
        let mut ci = [0.0_f64; 2];
        for k in 0..chart.len() {
            for (i, c) in ci.iter_mut().enumerate() {
                *c = c.max(chart.area_form[k] * chart.g_inv[k][(i, i)]);
            }
        }
        let mu_bar = chart.area_form.iter().sum::<f64>() / chart.len() as f64;
        Self { chart, alpha, c, ci, mu_bar }
    }

    /// Returns `x` with `(alpha mu + c L_c) x = mu f`.
    pub(crate) fn solve(&self, f: &[f64]) -> Vec<f64> {
        let d = &self.chart.diff;
        let mu = &self.chart.area_form;
        let (a, c, ci) = (self.alpha, self.c, self.ci);
        let b: Vec<f64> = f.iter().zip(mu).map(|(f, m)| f * m).collect();
        let apply = |x: &[f64]| -> Vec<f64> {
            let l = d.apply_const(x, 0.0, c * ci[0], c * ci[1]);
            l.iter().zip(x).zip(mu).map(|((l, x), m)| l + a * m * x).collect()
        };
        let pre = |r: &[f64]| d.solve_const(r, a * self.mu_bar, c * ci[0], c * ci[1]);
        let x0 = pre(&b);
        pcg(apply, pre, &b, x0, 1e-12, 200).0
    }
}

/// Applies `f` to each of the `m` scalar components of a field.
pub(crate) fn componentwise<T: crate::fields::Component>(
    x: &Field<T>,
    f: impl Fn(&[f64]) -> Vec<f64> + Sync,
) -> Field<T> {
    let comps = x.components();
    let out: Vec<Vec<f64>> = comps.iter().map(|c| f(c)).collect();
    Field::from_components(&out)
}

/// Taylor-Green vortex `amp (sin x cos y, -cos x sin y)` in chart
/// coordinates rescaled to `[0, 2 pi)` and pushed to the embedded frame.
pub fn taylor_green(chart: &ChartGeometry, amp: f64) -> VectorField {
    use std::f64::consts::TAU;
    let g = chart.grid;
    Field::from_fn(chart.len(), |k| {
        let (a, b) = g.coords(k);
        let (x, y) = (TAU * a / g.p1, TAU * b / g.p2);
        let (c1, c2) = (x.sin() * y.cos(), -x.cos() * y.sin());
        // chart components relative to the unit tangent directions
        chart.tangent[0][k].normalize() * (amp * c1) + chart.tangent[1][k].normalize() * (amp * c2)
    })
}

/// Random band-limited tangential Q-tensor field of max-norm about `amp`.
pub fn random_tangential_q(chart: &ChartGeometry, seed: u64, amp: f64, kmax: i32) -> MatrixField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f1 = smooth_random_scalar(&chart.grid, &mut rng, kmax);
    let f2 = smooth_random_scalar(&chart.grid, &mut rng, kmax);
    let (e1, e2) = orthonormal_frame(chart);
    Field::from_fn(chart.len(), |k| {
        let b1 = e1[k] * e1[k].transpose() - e2[k] * e2[k].transpose();
        let b2 = e1[k] * e2[k].transpose() + e2[k] * e1[k].transpose();
        (b1 * f1.data[k] + b2 * f2.data[k]) * amp
    })
}

/// Random band-limited tangential velocity with frame components of
/// max-norm about `amp`. Not divergence free; the solvers project it.
pub fn random_tangential_velocity(chart: &ChartGeometry, seed: u64, amp: f64, kmax: i32) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f1 = smooth_random_scalar(&chart.grid, &mut rng, kmax);
    let f2 = smooth_random_scalar(&chart.grid, &mut rng, kmax);
    let (e1, e2) = orthonormal_frame(chart);
    Field::from_fn(chart.len(), |k| (e1[k] * f1.data[k] + e2[k] * f2.data[k]) * amp)
}

/// Uniform uniaxial state `q = s (d d - Id_S / 2)`, `beta = -s / 3`, with
/// director `d = cos(angle) e1 + sin(angle) e2` in the orthonormal frame.
pub fn uniform_uniaxial(chart: &ChartGeometry, s: f64, angle: f64) -> (MatrixField, ScalarField) {
    let (e1, e2) = orthonormal_frame(chart);
    let q = Field::from_fn(chart.len(), |k| {
        let d: Vec3 = e1[k] * angle.cos() + e2[k] * angle.sin();
        (d * d.transpose() - chart.proj[k] * 0.5) * s
    });
    (q, Field::constant(chart.len(), -s / 3.0))
}

/// Frame coefficients `(q : B1 / 2, q : B2 / 2)` of a tangential Q-tensor field.
pub(crate) fn frame_coefficients(e1: &[Vec3], e2: &[Vec3], q: &MatrixField) -> [Vec<f64>; 2] {
    let c = |k: usize, m: &Mat3| -> (f64, f64) {
        let (a, b) = (e1[k], e2[k]);
        (0.5 * (a.dot(&(m * a)) - b.dot(&(m * b))), a.dot(&(m * b)))
    };
    let pairs: Vec<(f64, f64)> = q.data.iter().enumerate().map(|(k, m)| c(k, m)).collect();
    [pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect()]
}

pub(crate) fn from_frame(e1: &[Vec3], e2: &[Vec3], c: &[Vec<f64>; 2]) -> MatrixField {
    Field::from_fn(e1.len(), |k| {
        let (a, b) = (e1[k], e2[k]);
        (a * a.transpose() - b * b.transpose()) * c[0][k] + (a * b.transpose() + b * a.transpose()) * c[1][k]
    })
}
