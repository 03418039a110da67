//! Deformation gradients of a velocity field and observer-invariant rates.
//!
//! Velocities are stored as embedded proxies. Observer-frame time
//! derivatives (`dqdt` and friends) are supplied by the caller, never
//! estimated here.

use crate::error::Result;
use crate::fields::{nabla_c_scalar, nabla_c_vector, partial, skew, sym, Field, MatrixField, ScalarField, VectorField};
use crate::geometry::ChartGeometry;
use crate::{Mat3, Vec3};

/// Which objective rate drives the immobility term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFlavor {
    Material,
    Jaumann,
}

impl std::str::FromStr for RateFlavor {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "material" | "m" => Ok(RateFlavor::Material),
            "jaumann" | "j" => Ok(RateFlavor::Jaumann),
            _ => Err(format!("expected 'material' or 'jaumann', got '{s}'")),
        }
    }
}

/// Material velocity `V = v + v_perp nu` and observer velocity `v_o`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityState {
    /// Tangential part (embedded proxy).
    pub v: VectorField,
    pub v_perp: ScalarField,
    /// Tangential observer velocity (embedded proxy); zero for an Eulerian observer.
    pub observer_v: VectorField,
}

impl VelocityState {
    pub fn zero(n: usize) -> Self {
        Self { v: Field::zeros(n), v_perp: Field::zeros(n), observer_v: Field::zeros(n) }
    }
    /// Tangential flow seen by an Eulerian observer.
    pub fn tangential(v: VectorField) -> Self {
        let n = v.len();
        Self { v, v_perp: Field::zeros(n), observer_v: Field::zeros(n) }
    }
    pub fn full(&self, chart: &ChartGeometry) -> VectorField {
        Field::from_fn(chart.len(), |k| self.v.data[k] + chart.normal[k] * self.v_perp.data[k])
    }
    /// Relative velocity `u = v - v_o`.
    pub fn relative(&self) -> VectorField {
        self.v.sub(&self.observer_v)
    }
    fn check(&self, chart: &ChartGeometry) -> Result<()> {
        chart.check_len(self.v.len())?;
        chart.check_len(self.v_perp.len())?;
        chart.check_len(self.observer_v.len())
    }
}

/// All gradients of a velocity-like field `W = w + w_perp nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationGradients {
    /// `nabla_C W - b (x) nu` (embedded).
    pub gcal: MatrixField,
    /// Tangential part `nabla w - w_perp B`.
    pub g: MatrixField,
    pub s: MatrixField,
    /// Skew part of `gcal`.
    pub acal: MatrixField,
    pub a: MatrixField,
    /// `grad w_perp + B w`.
    pub b: VectorField,
}

/// Deformation gradients of the full embedded field `w`.
pub fn deformation_gradients(chart: &ChartGeometry, w: &VectorField) -> Result<DeformationGradients> {
    chart.check_len(w.len())?;
    let nw = nabla_c_vector(chart, w);
    let n = chart.len();
    let mut out = DeformationGradients {
        gcal: Field::zeros(n),
        g: Field::zeros(n),
        s: Field::zeros(n),
        acal: Field::zeros(n),
        a: Field::zeros(n),
        b: Field::zeros(n),
    };
    for k in 0..n {
        let nu = chart.normal[k];
        let m = nw.data[k];
        let b = m.transpose() * nu;
        let gcal = m - b * nu.transpose();
        let g = chart.proj[k] * m;
        out.b.data[k] = b;
        out.gcal.data[k] = gcal;
        out.acal.data[k] = skew(&gcal);
        out.s.data[k] = sym(&g);
        out.a.data[k] = skew(&g);
        out.g.data[k] = g;
    }
    Ok(out)
}

/// `(nabla_C R) u = sum_i d_i R (d^i X . u)`.
pub fn directional_derivative_matrix(chart: &ChartGeometry, r: &MatrixField, u: &VectorField) -> MatrixField {
    let d0 = partial(chart, r, 0);
    let d1 = partial(chart, r, 1);
    Field::from_fn(chart.len(), |k| {
        d0.data[k] * u.data[k].dot(&chart.dual[0][k]) + d1.data[k] * u.data[k].dot(&chart.dual[1][k])
    })
}

/// `(nabla_C W) u` for an embedded vector field.
pub fn directional_derivative_vector(chart: &ChartGeometry, w: &VectorField, u: &VectorField) -> VectorField {
    let d0 = partial(chart, w, 0);
    let d1 = partial(chart, w, 1);
    Field::from_fn(chart.len(), |k| {
        d0.data[k] * u.data[k].dot(&chart.dual[0][k]) + d1.data[k] * u.data[k].dot(&chart.dual[1][k])
    })
}

/// Material rate of a Q-tensor, `D_m Q = d_t Q + (nabla_C Q) u`.
pub fn material_rate_q(
    chart: &ChartGeometry,
    dqdt: &MatrixField,
    state: &VelocityState,
    q: &MatrixField,
) -> Result<MatrixField> {
    chart.check_len(dqdt.len())?;
    chart.check_len(q.len())?;
    state.check(chart)?;
    let adv = directional_derivative_matrix(chart, q, &state.relative());
    Ok(dqdt.add(&adv))
}

/// `D_J Q = D_m Q - A Q + Q A` with the co-rotation of `D_m Q`.
pub fn jaumann_from_material(dm: &Mat3, acal: &Mat3, q: &Mat3) -> Mat3 {
    dm - acal * q + q * acal
}

/// Jaumann rate of a Q-tensor.
pub fn jaumann_rate_q(
    chart: &ChartGeometry,
    dqdt: &MatrixField,
    state: &VelocityState,
    q: &MatrixField,
) -> Result<MatrixField> {
    let dm = material_rate_q(chart, dqdt, state, q)?;
    let dg = deformation_gradients(chart, &state.full(chart))?;
    Ok(Field::from_fn(chart.len(), |k| jaumann_from_material(&dm.data[k], &dg.acal.data[k], &q.data[k])))
}

/// Scalar material rate `f_dot = d_t f + grad f . u`.
pub fn material_rate_scalar(
    chart: &ChartGeometry,
    dfdt: &ScalarField,
    state: &VelocityState,
    f: &ScalarField,
) -> Result<ScalarField> {
    chart.check_len(dfdt.len())?;
    chart.check_len(f.len())?;
    state.check(chart)?;
    let g = nabla_c_scalar(chart, f);
    let u = state.relative();
    Ok(Field::from_fn(chart.len(), |k| dfdt.data[k] + g.data[k].dot(&u.data[k])))
}

/// Material rate of a tangential Q-tensor proxy:
/// `q_dot = d_t q + nabla_u q + (nabla v_o - v_perp B) q + q ((nabla v_o)^T - v_perp B)`.
pub fn material_rate_tangential_q(
    chart: &ChartGeometry,
    dqdt: &MatrixField,
    state: &VelocityState,
    q: &MatrixField,
) -> Result<MatrixField> {
    chart.check_len(dqdt.len())?;
    chart.check_len(q.len())?;
    state.check(chart)?;
    let adv = directional_derivative_matrix(chart, q, &state.relative());
    let gvo = nabla_c_vector(chart, &state.observer_v);
    Ok(Field::from_fn(chart.len(), |k| {
        let p = chart.proj[k];
        let m = p * gvo.data[k] - chart.shape_emb[k] * state.v_perp.data[k];
        let qq = q.data[k];
        dqdt.data[k] + p * adv.data[k] * p + m * qq + qq * m.transpose()
    }))
}

/// `Jq = q_dot - A q + q A` pointwise.
pub fn jaumann_tangential(qdot: &Mat3, a: &Mat3, q: &Mat3) -> Mat3 {
    qdot - a * q + q * a
}

/// Material acceleration on a fixed chart:
/// `D_m V = v_dot - v_perp b + (d_t v_perp + grad v_perp . u + grad v_perp . v + B(v, v)) nu`.
pub fn material_acceleration(
    chart: &ChartGeometry,
    dvdt: &VectorField,
    dvperp_dt: &ScalarField,
    state: &VelocityState,
) -> Result<VectorField> {
    chart.check_len(dvdt.len())?;
    chart.check_len(dvperp_dt.len())?;
    state.check(chart)?;
    let u = state.relative();
    let adv = directional_derivative_vector(chart, &state.v, &u);
    let gvo = directional_derivative_vector(chart, &state.observer_v, &state.v);
    let gperp = nabla_c_scalar(chart, &state.v_perp);
    Ok(Field::from_fn(chart.len(), |k| {
        let p = chart.proj[k];
        let nu = chart.normal[k];
        let bmat = chart.shape_emb[k];
        let v = state.v.data[k];
        let vp = state.v_perp.data[k];
        let vdot = p * dvdt.data[k] + p * adv.data[k] + p * gvo.data[k] - bmat * v * vp;
        let b = gperp.data[k] + bmat * v;
        let perp_dot = dvperp_dt.data[k] + gperp.data[k].dot(&u.data[k]);
        vdot - b * vp + nu * (perp_dot + gperp.data[k].dot(&v) + v.dot(&(bmat * v)))
    }))
}

/// Unit tangent frame `(e1, e2)` with `e1 = d_1 X / |d_1 X|` and `e2 = nu x e1`.
pub fn orthonormal_frame(chart: &ChartGeometry) -> (Vec<Vec3>, Vec<Vec3>) {
    let e1: Vec<Vec3> = chart.tangent[0].iter().map(|t| t.normalize()).collect();
    let e2 = e1.iter().zip(&chart.normal).map(|(e, n)| n.cross(e)).collect();
    (e1, e2)
}
