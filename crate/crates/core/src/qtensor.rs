//! Pointwise Q-tensor algebra.
//!
//! Every Q-tensor splits uniquely and orthogonally into a tangential
//! Q-tensor `q`, a tangential vector `eta` and the normal eigenvalue `beta`:
//! `Q = q + eta nu + nu eta + beta (nu nu - Id_S / 2)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fields::{frob, proj_qs, Field, MatrixField, ScalarField, VectorField};
use crate::geometry::ChartGeometry;
use crate::{Mat3, Vec3};

/// Tolerance for the symmetric/traceless check on inputs.
pub const Q_TOL: f64 = 1e-10;
/// Threshold on `|B(Q)| / (Tr Q^2)^2` below which a Q-tensor is called uniaxial.
pub const UNIAXIAL_TOL: f64 = 1e-8;

#[inline]
pub fn tr2(q: &Mat3) -> f64 {
    frob(q, q)
}
#[inline]
pub fn tr3(q: &Mat3) -> f64 {
    (q * q * q).trace()
}

/// `nu nu - Id_S / 2`, the normal part of a conforming Q-tensor per unit `beta`.
#[inline]
pub fn normal_mode(nu: &Vec3) -> Mat3 {
    let nn = nu * nu.transpose();
    nn * 1.5 - Mat3::identity() * 0.5
}

/// `Q_Cs(q, beta) = q + beta (nu nu - Id_S / 2)`.
#[inline]
pub fn conforming_point(q: &Mat3, beta: f64, nu: &Vec3) -> Mat3 {
    q + normal_mode(nu) * beta
}

/// Splits a Q-tensor at a node into `(q, eta, beta)`.
pub fn decompose_point(qq: &Mat3, nu: &Vec3) -> (Mat3, Vec3, f64) {
    let p = Mat3::identity() - nu * nu.transpose();
    let qn = qq * nu;
    let beta = nu.dot(&qn);
    let eta = p * qn;
    (proj_qs(qq, nu), eta, beta)
}

/// Inverse of [`decompose_point`].
pub fn recompose_point(q: &Mat3, eta: &Vec3, beta: f64, nu: &Vec3) -> Mat3 {
    conforming_point(q, beta, nu) + eta * nu.transpose() + nu * eta.transpose()
}

/// `B(Q) = Q^4 - (5/6) Tr(Q^2) Q^2 + (1/9) Tr(Q^2)^2 Id`.
pub fn biaxiality_poly(q: &Mat3) -> Mat3 {
    let q2 = q * q;
    let t2 = q2.trace();
    q2 * q2 - q2 * (5.0 / 6.0 * t2) + Mat3::identity() * (t2 * t2 / 9.0)
}

/// `b(Q) = Tr(Q^2)^3 - 6 Tr(Q^3)^2`, non-negative and zero iff uniaxial.
pub fn biaxiality_measure_point(q: &Mat3) -> f64 {
    let t2 = tr2(q);
    let t3 = tr3(q);
    t2 * t2 * t2 - 6.0 * t3 * t3
}

/// Conforming factorization `(1/36)(2 Tr q^2 - 9 beta^2) Q_Cs(-3 beta q, 2 Tr q^2)`.
pub fn biaxiality_poly_conforming(q: &Mat3, beta: f64, nu: &Vec3) -> Mat3 {
    let t = tr2(q);
    conforming_point(&(q * (-3.0 * beta)), 2.0 * t, nu) * ((2.0 * t - 9.0 * beta * beta) / 36.0)
}

pub fn is_uniaxial(q: &Mat3) -> bool {
    let t = tr2(q).max(1e-30);
    biaxiality_poly(q).norm() / (t * t) < UNIAXIAL_TOL
}

/// Relative residuals of the three trace-power identities of a traceless
/// symmetric 3x3 matrix:
/// `Tr Q^4 = (Tr Q^2)^2 / 2`, `Tr Q^6 = (Tr Q^2)^3 / 4 + (Tr Q^3)^2 / 3`,
/// `Tr Q^8 = (Tr Q^2)^4 / 8 + (4/9) Tr Q^2 (Tr Q^3)^2`.
pub fn trace_power_residuals(q: &Mat3) -> [f64; 3] {
    let q2 = q * q;
    let q4 = q2 * q2;
    let t2 = q2.trace();
    let t3 = tr3(q);
    let t4 = q4.trace();
    let t6 = (q4 * q2).trace();
    let t8 = (q4 * q4).trace();
    let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale.max(1e-300);
    [
        rel(t4, 0.5 * t2 * t2, t2 * t2),
        rel(t6, 0.25 * t2.powi(3) + t3 * t3 / 3.0, t2.powi(3)),
        rel(t8, 0.125 * t2.powi(4) + 4.0 / 9.0 * t2 * t3 * t3, t2.powi(4)),
    ]
}

/// `s (d d - Id / 3)`.
pub fn uniaxial_point(s: f64, d: &Vec3) -> Mat3 {
    (d * d.transpose() - Mat3::identity() / 3.0) * s
}

/// Checks symmetry and tracelessness.
pub fn check_q(node: usize, q: &Mat3) -> Result<()> {
    if (q - q.transpose()).amax() > Q_TOL {
        return Err(Error::NotAQTensor { node, reason: "not symmetric".into() });
    }
    if q.trace().abs() > Q_TOL {
        return Err(Error::NotAQTensor { node, reason: format!("trace {:e}", q.trace()) });
    }
    Ok(())
}

/// Random symmetric traceless matrix with entries of order one.
pub fn random_q<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let m = Mat3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    crate::fields::proj_q(&m)
}

/// Orthogonal split of a Q-tensor field.
#[derive(Debug, Clone, PartialEq)]
pub struct QDecomposition {
    /// Tangential Q part as embedded proxy.
    pub q: MatrixField,
    /// Tangential vector part as embedded proxy.
    pub eta: VectorField,
    pub beta: ScalarField,
}

/// Splits a Q-tensor field into `(q, eta, beta)`.
pub fn decompose(chart: &ChartGeometry, qq: &MatrixField) -> Result<QDecomposition> {
    chart.check_len(qq.len())?;
    let n = chart.len();
    let mut q = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for (k, m) in qq.data.iter().enumerate() {
        check_q(k, m)?;
        let (a, b, c) = decompose_point(m, &chart.normal[k]);
        q.push(a);
        eta.push(b);
        beta.push(c);
    }
    Ok(QDecomposition { q: Field::new(q), eta: Field::new(eta), beta: Field::new(beta) })
}

pub fn recompose(chart: &ChartGeometry, d: &QDecomposition) -> Result<MatrixField> {
    chart.check_len(d.q.len())?;
    chart.check_len(d.eta.len())?;
    chart.check_len(d.beta.len())?;
    Ok(Field::from_fn(chart.len(), |k| recompose_point(&d.q.data[k], &d.eta.data[k], d.beta.data[k], &chart.normal[k])))
}

/// `Q_Cs(q, beta)` on a whole field.
pub fn conforming_compose(chart: &ChartGeometry, q: &MatrixField, beta: &ScalarField) -> Result<MatrixField> {
    chart.check_len(q.len())?;
    chart.check_len(beta.len())?;
    Ok(Field::from_fn(chart.len(), |k| conforming_point(&q.data[k], beta.data[k], &chart.normal[k])))
}

/// `s (d d - Id/3)` on a field; `d` must be unit length.
pub fn uniaxial(s: &ScalarField, d: &VectorField) -> Result<MatrixField> {
    if s.len() != d.len() {
        return Err(Error::ShapeMismatch { expected: s.len(), got: d.len() });
    }
    for (k, v) in d.data.iter().enumerate() {
        let n = v.norm();
        if (n - 1.0).abs() > Q_TOL {
            return Err(Error::NonUnitDirector { node: k, norm: n });
        }
    }
    Ok(s.zip_map(d, |s, d| uniaxial_point(*s, d)))
}

pub fn biaxiality_polynomial(qq: &MatrixField) -> MatrixField {
    qq.map(biaxiality_poly)
}

pub fn biaxiality_measure(qq: &MatrixField) -> ScalarField {
    qq.map(biaxiality_measure_point)
}

/// Maximum relative trace-power residuals over a field.
pub fn trace_power_identities(qq: &MatrixField) -> [f64; 3] {
    qq.data.iter().map(trace_power_residuals).fold([0.0; 3], |a, r| [a[0].max(r[0]), a[1].max(r[1]), a[2].max(r[2])])
}

/// Thermotropic equilibrium of a tangentially uniaxial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermotropicRoots {
    /// `(sqrt(b^2 - 24 a c) - b) / (4 c)`.
    pub s_star: f64,
    /// `(b - sqrt(b^2 - 24 a c)) / (12 c) = -s_star / 3`.
    pub beta0_stable: f64,
}

impl ThermotropicRoots {
    /// `None` unless `c > 0` and `b^2 - 24 a c >= 0`.
    pub fn new(a: f64, b: f64, c: f64) -> Option<Self> {
        let disc = b * b - 24.0 * a * c;
        if !(c > 0.0) || disc < 0.0 {
            return None;
        }
        let r = disc.sqrt();
        Some(Self { s_star: (r - b) / (4.0 * c), beta0_stable: (b - r) / (12.0 * c) })
    }
}
