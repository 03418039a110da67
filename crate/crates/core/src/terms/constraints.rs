//! Constraint forces, molecular fields and constraint values.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fields::{div_trace_matrix, frob, proj_q, proj_qs, Field, MatrixField, ScalarField, VectorField};
use crate::geometry::ChartGeometry;
use crate::Mat3;

/// Admissible constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// Surface conformity.
    SC,
    /// Constant normal eigenvalue `beta0`.
    CB { beta0: f64 },
    /// Uniaxiality.
    UN,
    /// Isotropic state.
    IS,
    /// No normal flow.
    NN,
    /// No flow.
    NF,
}

impl Constraint {
    pub fn tag(&self) -> &'static str {
        match self {
            Constraint::SC => "SC",
            Constraint::CB { .. } => "CB",
            Constraint::UN => "UN",
            Constraint::IS => "IS",
            Constraint::NN => "NN",
            Constraint::NF => "NF",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Constraint {
    type Err = Error;
    /// Parses `SC`, `CB`, `CB:<beta0>`, `UN`, `IS`, `NN`, `NF`.
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        if let Some(rest) = up.strip_prefix("CB") {
            let beta0 = match rest.strip_prefix(':') {
                Some(v) => v.parse().map_err(|_| Error::UnknownConstraint(s.to_string()))?,
                None if rest.is_empty() => 0.0,
                None => return Err(Error::UnknownConstraint(s.to_string())),
            };
            return Ok(Constraint::CB { beta0 });
        }
        match up.as_str() {
            "SC" => Ok(Constraint::SC),
            "UN" => Ok(Constraint::UN),
            "IS" => Ok(Constraint::IS),
            "NN" => Ok(Constraint::NN),
            "NF" => Ok(Constraint::NF),
            _ => Err(Error::UnknownConstraint(s.to_string())),
        }
    }
}

/// Multiplier or constraint value; the variant encodes its codomain.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintField {
    Scalar(ScalarField),
    Vector(VectorField),
    Tensor(MatrixField),
    /// Tangential Q-tensor part plus a normal scalar.
    TensorScalar(MatrixField, ScalarField),
    /// Tangential vector plus a normal scalar.
    VectorScalar(VectorField, ScalarField),
}

impl ConstraintField {
    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        match self {
            ConstraintField::Scalar(a) => a.max_abs(),
            ConstraintField::Vector(a) => a.max_abs(),
            ConstraintField::Tensor(a) => a.max_abs(),
            ConstraintField::TensorScalar(a, b) => a.max_abs().max(b.max_abs()),
            ConstraintField::VectorScalar(a, b) => a.max_abs().max(b.max_abs()),
        }
    }
    fn len(&self) -> usize {
        match self {
            ConstraintField::Scalar(a) => a.len(),
            ConstraintField::Vector(a) => a.len(),
            ConstraintField::Tensor(a) => a.len(),
            ConstraintField::TensorScalar(a, _) => a.len(),
            ConstraintField::VectorScalar(a, _) => a.len(),
        }
    }
}

/// General-pipeline constraint bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintTerm {
    pub gamma: Constraint,
    pub lambda: ConstraintField,
    pub force: Option<VectorField>,
    pub h: Option<MatrixField>,
    pub c: ConstraintField,
}

/// Conforming-pipeline constraint bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformingConstraintTerm {
    pub gamma: Constraint,
    pub f: Option<VectorField>,
    pub f_perp: Option<ScalarField>,
    pub h: Option<MatrixField>,
    pub omega: Option<ScalarField>,
    pub c: ConstraintField,
}

const SHAPE_TOL: f64 = 1e-10;

fn shape_err(gamma: Constraint, reason: impl Into<String>) -> Error {
    Error::MultiplierShape { gamma: gamma.to_string(), reason: reason.into() }
}

fn expect_tangential(chart: &ChartGeometry, gamma: Constraint, w: &VectorField) -> Result<()> {
    for (k, v) in w.data.iter().enumerate() {
        if v.dot(&chart.normal[k]).abs() > SHAPE_TOL * v.norm().max(1.0) {
            return Err(shape_err(gamma, format!("vector multiplier has a normal component at node {k}")));
        }
    }
    Ok(())
}

fn expect_q(gamma: Constraint, m: &MatrixField) -> Result<()> {
    for (k, x) in m.data.iter().enumerate() {
        let scale = x.norm().max(1.0);
        if (x - x.transpose()).amax() > SHAPE_TOL * scale || x.trace().abs() > SHAPE_TOL * scale {
            return Err(shape_err(gamma, format!("tensor multiplier is not symmetric traceless at node {k}")));
        }
    }
    Ok(())
}

fn expect_tangential_q(chart: &ChartGeometry, gamma: Constraint, m: &MatrixField) -> Result<()> {
    for (k, x) in m.data.iter().enumerate() {
        if (proj_qs(x, &chart.normal[k]) - x).amax() > SHAPE_TOL * x.norm().max(1.0) {
            return Err(shape_err(gamma, format!("multiplier is not a tangential Q-tensor at node {k}")));
        }
    }
    Ok(())
}

/// Uniaxiality polynomial `Q^4 - (5/6) Tr(Q^2) Q^2 + (1/9) Tr(Q^2)^2 Id`.
pub fn uniaxiality_value(q: &Mat3) -> Mat3 {
    let q2 = q * q;
    let t = q2.trace();
    q2 * q2 - q2 * (5.0 / 6.0 * t) + Mat3::identity() * (t * t / 9.0)
}

/// `H_UN = 6 Pi_Q(L Q^3 + Q L Q^2) - 5 Tr(Q^2) Pi_Q(L Q) - 5 (L : Q^2) Q`.
pub fn uniaxiality_h(q: &Mat3, lam: &Mat3) -> Mat3 {
    let q2 = q * q;
    let q3 = q2 * q;
    proj_q(&(lam * q3 + q * lam * q2)) * 6.0 - proj_q(&(lam * q)) * (5.0 * q2.trace()) - q * (5.0 * frob(lam, &q2))
}

/// General-pipeline constraint evaluation per constraint tag.
pub fn constraint_terms(
    gamma: Constraint,
    chart: &ChartGeometry,
    q: &MatrixField,
    v: &VectorField,
    lambda: &ConstraintField,
) -> Result<ConstraintTerm> {
    chart.check_len(q.len())?;
    chart.check_len(v.len())?;
    chart.check_len(lambda.len())?;
    let n = chart.len();
    let wrong = |want: &str| Err(shape_err(gamma, format!("expected a {want} multiplier")));
    let (force, h, c) = match (gamma, lambda) {
        (Constraint::SC, ConstraintField::Vector(l)) => {
            expect_tangential(chart, gamma, l)?;
            let t = Field::from_fn(n, |k| {
                let nu = chart.normal[k];
                let qq = q.data[k];
                let qnn = nu.dot(&(qq * nu));
                nu * (l.data[k] * qnn - chart.proj[k] * qq * l.data[k]).transpose()
            });
            let h = Field::from_fn(n, |k| {
                let (a, nu) = (l.data[k], chart.normal[k]);
                (a * nu.transpose() + nu * a.transpose()) * -0.5
            });
            let c = Field::from_fn(n, |k| chart.proj[k] * q.data[k] * chart.normal[k]);
            (Some(div_trace_matrix(chart, &t)), Some(h), ConstraintField::Vector(c))
        }
        (Constraint::SC, _) => return wrong("tangential vector"),
        (Constraint::CB { beta0 }, ConstraintField::Scalar(l)) => {
            let h = Field::from_fn(n, |k| {
                let nu = chart.normal[k];
                (nu * nu.transpose() - Mat3::identity() / 3.0) * -l.data[k]
            });
            let c = Field::from_fn(n, |k| chart.normal[k].dot(&(q.data[k] * chart.normal[k])) - beta0);
            (None, Some(h), ConstraintField::Scalar(c))
        }
        (Constraint::CB { .. }, _) => return wrong("scalar"),
        (Constraint::UN, ConstraintField::Tensor(l)) => {
            expect_q(gamma, l)?;
            let h = Field::from_fn(n, |k| uniaxiality_h(&q.data[k], &l.data[k]));
            let c = q.map(uniaxiality_value);
            (None, Some(h), ConstraintField::Tensor(c))
        }
        (Constraint::UN, _) => return wrong("Q-tensor"),
        (Constraint::IS, ConstraintField::Tensor(l)) => {
            expect_q(gamma, l)?;
            (None, Some(l.clone()), ConstraintField::Tensor(q.clone()))
        }
        (Constraint::IS, _) => return wrong("Q-tensor"),
        (Constraint::NN, ConstraintField::Scalar(l)) => {
            let f = Field::from_fn(n, |k| chart.normal[k] * l.data[k]);
            let c = Field::from_fn(n, |k| v.data[k].dot(&chart.normal[k]));
            (Some(f), None, ConstraintField::Scalar(c))
        }
        (Constraint::NN, _) => return wrong("scalar"),
        (Constraint::NF, ConstraintField::Vector(l)) => (Some(l.clone()), None, ConstraintField::Vector(v.clone())),
        (Constraint::NF, _) => return wrong("vector"),
    };
    Ok(ConstraintTerm { gamma, lambda: lambda.clone(), force, h, c })
}

/// Conforming-pipeline constraint evaluation (SC is eliminated there; see
/// [`super::sc_stress_eliminated`]). `v`, `v_perp` describe the material velocity.
pub fn constraint_terms_conforming(
    gamma: Constraint,
    chart: &ChartGeometry,
    q: &MatrixField,
    beta: &ScalarField,
    v: &VectorField,
    v_perp: &ScalarField,
    lambda: &ConstraintField,
) -> Result<ConformingConstraintTerm> {
    chart.check_len(q.len())?;
    chart.check_len(beta.len())?;
    chart.check_len(v.len())?;
    chart.check_len(v_perp.len())?;
    chart.check_len(lambda.len())?;
    let n = chart.len();
    let wrong = |want: &str| Err(shape_err(gamma, format!("expected a {want} multiplier")));
    let mut out = ConformingConstraintTerm {
        gamma,
        f: None,
        f_perp: None,
        h: None,
        omega: None,
        c: ConstraintField::Scalar(Field::zeros(0)),
    };
    match (gamma, lambda) {
        (Constraint::SC, _) => {
            return Err(shape_err(gamma, "the conforming pipeline eliminates the SC multiplier"));
        }
        (Constraint::CB { beta0 }, ConstraintField::Scalar(l)) => {
            out.omega = Some(l.scale(-2.0 / 3.0));
            out.c = ConstraintField::Scalar(beta.map(|b| b - beta0));
        }
        (Constraint::CB { .. }, _) => return wrong("scalar"),
        (Constraint::UN, ConstraintField::TensorScalar(l, lp)) => {
            expect_tangential_q(chart, gamma, l)?;
            let mut h = Field::zeros(n);
            let mut w = Field::zeros(n);
            let mut cq = Field::zeros(n);
            let mut cb = Field::zeros(n);
            for k in 0..n {
                let (qq, b, lam, lperp) = (q.data[k], beta.data[k], l.data[k], lp.data[k]);
                let t = (qq * qq).trace();
                h.data[k] = qq * lam * qq * (-6.0 * b)
                    + proj_qs(&(lam * qq), &chart.normal[k]) * (4.0 / 3.0 * t)
                    + qq * (5.0 * b * frob(&lam, &qq) + lperp * t)
                    - lam * (0.25 * b * (14.0 * t - 9.0 * b * b));
                w.data[k] = t / 3.0 * (2.0 * frob(&lam, &qq) - 9.0 * lperp * b);
                cq.data[k] = qq * ((2.0 * t - 9.0 * b * b) * b);
                cb.data[k] = (2.0 * t - 9.0 * b * b) * t;
            }
            out.h = Some(h);
            out.omega = Some(w);
            out.c = ConstraintField::TensorScalar(cq, cb);
        }
        (Constraint::UN, _) => return wrong("(tangential Q-tensor, scalar)"),
        (Constraint::IS, _) => {
            return Err(shape_err(gamma, "the isotropic state is excluded from the conforming pipeline"));
        }
        (Constraint::NN, ConstraintField::Scalar(l)) => {
            out.f = Some(Field::zeros(n));
            out.f_perp = Some(l.clone());
            out.c = ConstraintField::Scalar(v_perp.clone());
        }
        (Constraint::NN, _) => return wrong("scalar"),
        (Constraint::NF, ConstraintField::VectorScalar(l, lp)) => {
            expect_tangential(chart, gamma, l)?;
            out.f = Some(l.clone());
            out.f_perp = Some(lp.clone());
            out.c = ConstraintField::VectorScalar(v.clone(), v_perp.clone());
        }
        (Constraint::NF, _) => return wrong("(tangential vector, scalar)"),
    }
    Ok(out)
}
