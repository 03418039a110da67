//! Conforming pipeline: tangential forms for `Q = Q_Cs(q, beta)`.
//!
//! `q` is the embedded proxy of a tangential Q-tensor field. The rows
//! coincide with the decomposed general pipeline for every velocity; the
//! `Tr G` contributions vanish for inextensible flows.

use super::{check_flavor, ConformingParts, ModelParams, TermBundle, TermTag};
use crate::error::Result;
use crate::fields::{
    bochner_tensor, cov_div_tangent_tensor, cov_grad_tangent_tensor, div_c_vector, frob, laplace_scalar,
    nabla_c_scalar, Field, MatrixField, ScalarField, VectorField,
};
use crate::geometry::ChartGeometry;
use crate::kinematics::{jaumann_tangential, DeformationGradients, RateFlavor};
use crate::Mat3;

fn check(chart: &ChartGeometry, q: &MatrixField, beta: &ScalarField) -> Result<()> {
    chart.check_len(q.len())?;
    chart.check_len(beta.len())
}

/// Elastic rows `sigma_EL`, `zeta_EL`, `h_EL`, `omega_EL`.
pub fn elastic_conforming(
    chart: &ChartGeometry,
    p: &ModelParams,
    q: &MatrixField,
    beta: &ScalarField,
) -> Result<TermBundle> {
    check(chart, q, beta)?;
    let l = p.l;
    let gq = cov_grad_tangent_tensor(chart, q);
    let gb = nabla_c_scalar(chart, beta);
    let lap_q = bochner_tensor(chart, q);
    let lap_b = laplace_scalar(chart, beta);
    let gh = nabla_c_scalar(chart, &Field::new(chart.mean_curv.clone()));
    let n = chart.len();
    let mut sigma = Field::zeros(n);
    let mut zeta = Field::zeros(n);
    let mut h = Field::zeros(n);
    let mut omega = Field::zeros(n);
    for k in 0..n {
        let (pr, bm) = (chart.proj[k], chart.shape_emb[k]);
        let (hh, kk) = (chart.mean_curv[k], chart.gauss_curv[k]);
        let (qq, b) = (q.data[k], beta.data[k]);
        let t = &gq.data[k];
        let db = gb.data[k];
        let trq2 = (qq * qq).trace();
        let nq2: f64 = t.0.iter().map(|m| m.norm_squared()).sum();
        let bdev = bm - pr * (0.5 * hh);
        let qb = frob(&qq, &bm);
        sigma.data[k] = (t.gram() + db * db.transpose() * 1.5
            - pr * (0.25 * (2.0 * nq2 + 3.0 * db.norm_squared()))
            - qq * (6.0 * kk * b)
            + bdev * (0.5 * (2.0 * hh * trq2 - 12.0 * b * qb + 9.0 * hh * b * b)))
            * -l;
        // (nabla q) : B contracts the second and derivative slots.
        let qdb = (0..3).fold(crate::Vec3::zeros(), |acc, c| acc + t.0[c] * bm.column(c));
        zeta.data[k] = (qdb * 2.0 + qq * gh.data[k] - bm * db * 3.0 - gh.data[k] * (1.5 * b)) * l;
        h.data[k] = (lap_q.data[k] - qq * (hh * hh - 2.0 * kk) + bdev * (3.0 * b * hh)) * l;
        omega.data[k] = l * (lap_b.data[k] + 2.0 * hh * qb - 3.0 * b * (hh * hh - 2.0 * kk));
    }
    Ok(TermBundle {
        conforming: Some(ConformingParts {
            sigma: Some(sigma),
            zeta: Some(zeta),
            h: Some(h),
            omega: Some(omega),
            ..Default::default()
        }),
        ..TermBundle::empty(TermTag::EL)
    })
}

/// Thermotropic pressure in conforming variables.
pub fn thermotropic_pressure_conforming(p: &ModelParams, trq2: f64, beta: f64) -> f64 {
    let (a, b, c) = (p.a, p.b, p.c);
    0.5 * (2.0 * a - 2.0 * b * beta + c * (trq2 + 3.0 * beta * beta)) * trq2
        + 0.125 * (12.0 * a + 4.0 * b * beta + 9.0 * c * beta * beta) * beta * beta
}

/// Pointwise `(h_TH, omega_TH)`.
pub fn thermotropic_conforming_point(p: &ModelParams, q: &Mat3, beta: f64) -> (Mat3, f64) {
    let (a, b, c) = (p.a, p.b, p.c);
    let t = (q * q).trace();
    let h = q * -(2.0 * a - 2.0 * b * beta + 3.0 * c * beta * beta + 2.0 * c * t);
    let w = -(2.0 * a + b * beta + 3.0 * c * beta * beta + 2.0 * c * t) * beta + 2.0 / 3.0 * b * t;
    (h, w)
}

/// Thermotropic rows: pressure `p_TH`, `h_TH`, `omega_TH`, tangential
/// stress `p_TH Id_S` and force `(grad p_TH, H p_TH)`.
pub fn thermotropic_conforming(
    chart: &ChartGeometry,
    p: &ModelParams,
    q: &MatrixField,
    beta: &ScalarField,
) -> Result<TermBundle> {
    check(chart, q, beta)?;
    let n = chart.len();
    let pth = Field::from_fn(n, |k| thermotropic_pressure_conforming(p, (q.data[k] * q.data[k]).trace(), beta.data[k]));
    let pts: Vec<(Mat3, f64)> = (0..n).map(|k| thermotropic_conforming_point(p, &q.data[k], beta.data[k])).collect();
    let gp = nabla_c_scalar(chart, &pth);
    let parts = ConformingParts {
        sigma: Some(Field::from_fn(n, |k| chart.proj[k] * pth.data[k])),
        f: Some(gp),
        f_perp: Some(Field::from_fn(n, |k| chart.mean_curv[k] * pth.data[k])),
        h: Some(Field::new(pts.iter().map(|x| x.0).collect())),
        omega: Some(Field::new(pts.iter().map(|x| x.1).collect())),
        ..Default::default()
    };
    Ok(TermBundle { pressure: Some(pth), conforming: Some(parts), ..TermBundle::empty(TermTag::TH) })
}

/// Immobility rows. `rate` is `J q` (Jaumann) or `q_dot` (material) and
/// must match `p.phi`.
#[allow(clippy::too_many_arguments)]
pub fn immobility_conforming(
    chart: &ChartGeometry,
    p: &ModelParams,
    q: &MatrixField,
    beta: &ScalarField,
    rate: &MatrixField,
    beta_dot: &ScalarField,
    flavor: RateFlavor,
    dg: &DeformationGradients,
) -> Result<TermBundle> {
    check_flavor(p.phi, flavor)?;
    check(chart, q, beta)?;
    chart.check_len(rate.len())?;
    chart.check_len(beta_dot.len())?;
    let n = chart.len();
    let m = p.m;
    let (sigma, zeta) = match flavor {
        RateFlavor::Jaumann => {
            let s = Field::from_fn(n, |k| {
                let (qq, j) = (q.data[k], rate.data[k]);
                (qq * j - j * qq) * m
            });
            (s, Field::zeros(n))
        }
        RateFlavor::Material => {
            let z = Field::from_fn(n, |k| {
                let w = q.data[k] - chart.proj[k] * (1.5 * beta.data[k]);
                (w * dg.b.data[k]) * -m
            });
            (Field::zeros(n), z)
        }
    };
    let parts = ConformingParts {
        sigma: Some(sigma),
        zeta: Some(zeta),
        h: Some(rate.scale(-m)),
        omega: Some(beta_dot.scale(-m)),
        ..Default::default()
    };
    Ok(TermBundle { conforming: Some(parts), ..TermBundle::empty(TermTag::IM) })
}

/// Conforming nematic viscous rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NvConforming {
    pub sigma0: MatrixField,
    pub sigma1: MatrixField,
    pub sigma2: MatrixField,
    pub h1: MatrixField,
    /// First-order normal part, `-(upsilon/3) Tr G`.
    pub omega1: ScalarField,
    pub h2_tilde: MatrixField,
    /// `(upsilon/3)(q : G - beta Tr G / 2)`; the `-upsilon/2 beta_dot` part is
    /// carried by `M_tilde`.
    pub omega2_tilde: ScalarField,
}

/// Pointwise conforming NV rows for the chosen stress `form`.
#[allow(clippy::too_many_arguments)]
pub fn nv_conforming_point(
    q: &Mat3,
    beta: f64,
    jq: &Mat3,
    qdot: &Mat3,
    beta_dot: f64,
    g: &Mat3,
    pr: &Mat3,
    upsilon: f64,
    form: RateFlavor,
    phi: RateFlavor,
) -> (Mat3, Mat3, Mat3, Mat3, f64, Mat3, f64) {
    let u = upsilon;
    let (q, jq, qdot, g, pr) = (*q, *jq, *qdot, *g, *pr);
    let s = (g + g.transpose()) * 0.5;
    let gt = g.transpose();
    let trg = g.trace();
    let trq2 = (q * q).trace();
    let qg = frob(&q, &g);
    let sigma0 = s * (2.0 * u);
    let (sigma1, sigma2) = match form {
        RateFlavor::Jaumann => {
            let s1 = (jq - pr * (0.5 * beta_dot) + q * s * 3.0 + s * q - s * (2.0 * beta)) * -u;
            let s2 = (q * jq - (jq * beta + q * beta_dot) * 0.5 + pr * (0.25 * beta * beta_dot) + q * s * q
                - (q * s * 3.0 + s * q) * (0.5 * beta)
                + s * (0.5 * (trq2 + beta * beta)))
                * u;
            (s1, s2)
        }
        RateFlavor::Material => {
            let s1 = (qdot - pr * (0.5 * beta_dot) + q * (g * 2.0 + gt) + gt * q - s * (2.0 * beta)) * -u;
            let s2 = (q * qdot - (qdot * beta + q * beta_dot) * 0.5 + pr * (0.25 * beta * beta_dot) + q * gt * q
                - (q * (g * 2.0 + gt) + gt * q) * (0.5 * beta)
                + g * (0.5 * trq2)
                + s * (0.5 * beta * beta))
                * u;
            (s1, s2)
        }
    };
    let h1 = (s - pr * (0.5 * trg)) * u;
    let omega1 = -u / 3.0 * trg;
    let core = match phi {
        RateFlavor::Jaumann => q * s + s * q,
        RateFlavor::Material => q * g + gt * q,
    };
    let h2 = (core - pr * qg - s * beta + pr * (0.5 * beta * trg)) * (-0.5 * u);
    let omega2 = u / 3.0 * (qg - 0.5 * beta * trg);
    (sigma0, sigma1, sigma2, h1, omega1, h2, omega2)
}

/// Conforming nematic viscous rows. `rate` is `J q` or `q_dot` according
/// to `flavor` (must equal `p.phi`); `form` picks the stress representation.
#[allow(clippy::too_many_arguments)]
pub fn nematic_viscous_conforming(
    chart: &ChartGeometry,
    p: &ModelParams,
    q: &MatrixField,
    beta: &ScalarField,
    rate: &MatrixField,
    beta_dot: &ScalarField,
    flavor: RateFlavor,
    dg: &DeformationGradients,
    form: RateFlavor,
) -> Result<NvConforming> {
    check_flavor(p.phi, flavor)?;
    check(chart, q, beta)?;
    chart.check_len(rate.len())?;
    chart.check_len(beta_dot.len())?;
    let n = chart.len();
    let mut out = NvConforming {
        sigma0: Field::zeros(n),
        sigma1: Field::zeros(n),
        sigma2: Field::zeros(n),
        h1: Field::zeros(n),
        omega1: Field::zeros(n),
        h2_tilde: Field::zeros(n),
        omega2_tilde: Field::zeros(n),
    };
    for k in 0..n {
        let (qq, a) = (q.data[k], dg.a.data[k]);
        let (jq, qdot) = match flavor {
            RateFlavor::Jaumann => (rate.data[k], rate.data[k] + a * qq - qq * a),
            RateFlavor::Material => (jaumann_tangential(&rate.data[k], &a, &qq), rate.data[k]),
        };
        let r = nv_conforming_point(
            &qq,
            beta.data[k],
            &jq,
            &qdot,
            beta_dot.data[k],
            &dg.g.data[k],
            &chart.proj[k],
            p.upsilon,
            form,
            p.phi,
        );
        out.sigma0.data[k] = r.0;
        out.sigma1.data[k] = r.1;
        out.sigma2.data[k] = r.2;
        out.h1.data[k] = r.3;
        out.omega1.data[k] = r.4;
        out.h2_tilde.data[k] = r.5;
        out.omega2_tilde.data[k] = r.6;
    }
    Ok(out)
}

impl NvConforming {
    /// Total `sigma_NV = sigma0 + xi sigma1 + xi^2 sigma2`.
    pub fn sigma(&self, xi: f64) -> MatrixField {
        self.sigma0.axpy(xi, &self.sigma1).axpy(xi * xi, &self.sigma2)
    }
}

/// SC constraint stress with eliminated multiplier: `Sigma_SC = nu (x) varsigma`,
/// `varsigma = -(2q - 3 beta Id_S) zeta` where `zeta = zeta_EL + zeta_IM`.
pub fn sc_stress_eliminated(
    chart: &ChartGeometry,
    q: &MatrixField,
    beta: &ScalarField,
    zeta: &VectorField,
) -> Result<MatrixField> {
    check(chart, q, beta)?;
    chart.check_len(zeta.len())?;
    Ok(Field::from_fn(chart.len(), |k| {
        let w = (q.data[k] * 2.0 - chart.proj[k] * (3.0 * beta.data[k])) * zeta.data[k];
        chart.normal[k] * (-w).transpose()
    }))
}

/// Tangential and normal flow forces of a tangential stress `sigma`
/// together with the eliminated SC constraint:
/// `f = div sigma + (2Bq - 3 beta B) zeta`,
/// `f_perp = B : sigma - div((2q - 3 beta Id_S) zeta)`.
pub fn conforming_flow_forces(
    chart: &ChartGeometry,
    q: &MatrixField,
    beta: &ScalarField,
    sigma: &MatrixField,
    zeta: &VectorField,
) -> Result<(VectorField, ScalarField)> {
    check(chart, q, beta)?;
    chart.check_len(sigma.len())?;
    chart.check_len(zeta.len())?;
    let n = chart.len();
    let ds = cov_div_tangent_tensor(chart, sigma);
    let w = Field::from_fn(n, |k| (q.data[k] * 2.0 - chart.proj[k] * (3.0 * beta.data[k])) * zeta.data[k]);
    let dw = div_c_vector(chart, &w);
    let f = Field::from_fn(n, |k| ds.data[k] + chart.shape_emb[k] * w.data[k]);
    let fp = Field::from_fn(n, |k| frob(&chart.shape_emb[k], &sigma.data[k]) - dw.data[k]);
    Ok((f, fp))
}
