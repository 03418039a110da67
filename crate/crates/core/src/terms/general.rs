//! General (embedded) pipeline for arbitrary surface Q-tensor fields.

use nalgebra::SymmetricEigen;

use super::{check_flavor, ModelParams, TermBundle, TermTag};
use crate::error::Result;
use crate::fields::{
    div_trace_matrix, frob, grad_c, laplace_c_matrix, laplace_scalar, nabla_c_matrix, proj_q, sym, Field, MatrixField,
    ScalarField,
};
use crate::geometry::{area_integral, ChartGeometry};
use crate::kinematics::{jaumann_from_material, DeformationGradients, RateFlavor};
use crate::qtensor::{tr2, tr3};
use crate::{Mat3, Vec3};

/// Elastic energy `(L/2) |nabla_C Q|^2`.
pub fn elastic_energy(chart: &ChartGeometry, p: &ModelParams, q: &MatrixField) -> Result<f64> {
    chart.check_len(q.len())?;
    let t = nabla_c_matrix(chart, q);
    let dens: Vec<f64> = t.data.iter().map(|t| t.0.iter().map(|m| m.norm_squared()).sum::<f64>()).collect();
    Ok(0.5 * p.l * area_integral(chart, &dens)?)
}

/// Elastic term: `H = L Delta_C Q`, `Sigma = -L Pi_QS((nabla_C Q)^T : nabla_C Q)`.
pub fn elastic(chart: &ChartGeometry, p: &ModelParams, q: &MatrixField) -> Result<TermBundle> {
    chart.check_len(q.len())?;
    let t = nabla_c_matrix(chart, q);
    let sigma = Field::from_fn(chart.len(), |k| {
        let g = t.data[k].gram();
        let pr = chart.proj[k];
        (g - pr * (0.5 * g.trace())) * (-p.l)
    });
    let force = div_trace_matrix(chart, &sigma);
    let h = laplace_c_matrix(chart, q).scale(p.l);
    let dens: Vec<f64> = t.data.iter().map(|t| t.0.iter().map(|m| m.norm_squared()).sum::<f64>()).collect();
    let energy = 0.5 * p.l * area_integral(chart, &dens)?;
    Ok(TermBundle {
        sigma: Some(sigma),
        force: Some(force),
        h: Some(h),
        energy: Some(energy),
        ..TermBundle::empty(TermTag::EL)
    })
}

/// Thermotropic density `a Tr Q^2 + (2b/3) Tr Q^3 + c Tr Q^4`, using
/// `Tr Q^4 = (Tr Q^2)^2 / 2`.
pub fn thermotropic_density(p: &ModelParams, q: &Mat3) -> f64 {
    let t2 = tr2(q);
    p.a * t2 + 2.0 * p.b / 3.0 * tr3(q) + 0.5 * p.c * t2 * t2
}

/// `H_TH = -2(a Q + b Pi_Q Q^2 + c Tr(Q^2) Q)`.
pub fn thermotropic_h_point(p: &ModelParams, q: &Mat3) -> Mat3 {
    let q2 = q * q;
    let t2 = q2.trace();
    (q * p.a + (q2 - Mat3::identity() * (t2 / 3.0)) * p.b + q * (p.c * t2)) * -2.0
}

/// Thermotropic term: pressure `p_TH`, `Sigma = p_TH Id_S`, `F = Grad_C p_TH`.
pub fn thermotropic(chart: &ChartGeometry, p: &ModelParams, q: &MatrixField) -> Result<TermBundle> {
    chart.check_len(q.len())?;
    let pth = q.map(|m| thermotropic_density(p, m));
    let sigma = Field::from_fn(chart.len(), |k| chart.proj[k] * pth.data[k]);
    let force = grad_c(chart, &pth);
    let h = q.map(|m| thermotropic_h_point(p, m));
    let energy = area_integral(chart, &pth.data)?;
    Ok(TermBundle {
        sigma: Some(sigma),
        force: Some(force),
        h: Some(h),
        pressure: Some(pth),
        energy: Some(energy),
        ..TermBundle::empty(TermTag::TH)
    })
}

/// Normal bending force `f_perp = -kappa (Delta H + (H - H0)(H(H + H0)/2 - 2K))`
/// from the local values of `Delta H`, `H` and `K`.
pub fn bending_normal_force_point(kappa: f64, h0: f64, lap_h: f64, h: f64, k: f64) -> f64 {
    -kappa * (lap_h + (h - h0) * (0.5 * h * (h + h0) - 2.0 * k))
}

/// Normal bending force field, see [`bending_normal_force_point`].
pub fn bending_normal_force(chart: &ChartGeometry, p: &ModelParams) -> ScalarField {
    let h = Field::new(chart.mean_curv.clone());
    let lap = laplace_scalar(chart, &h);
    Field::from_fn(chart.len(), |k| {
        bending_normal_force_point(p.kappa, p.h0, lap.data[k], chart.mean_curv[k], chart.gauss_curv[k])
    })
}

/// Bending energy `(kappa/2) |H - H0|^2`.
pub fn bending_energy(chart: &ChartGeometry, p: &ModelParams) -> f64 {
    let d: Vec<f64> = chart.mean_curv.iter().map(|h| (h - p.h0).powi(2)).collect();
    0.5 * p.kappa * area_integral(chart, &d).expect("chart-sized")
}

/// Bending term: a pure normal force.
pub fn bending(chart: &ChartGeometry, p: &ModelParams) -> TermBundle {
    let fp = bending_normal_force(chart, p);
    let force = Field::from_fn(chart.len(), |k| chart.normal[k] * fp.data[k]);
    TermBundle {
        force: Some(force),
        pressure: None,
        energy: Some(bending_energy(chart, p)),
        conforming: Some(super::ConformingParts { f_perp: Some(fp), ..Default::default() }),
        ..TermBundle::empty(TermTag::BE)
    }
}

/// Immobility term. `rate` is `D_Phi Q` with `Phi = flavor`, which must equal `p.phi`.
pub fn immobility(
    chart: &ChartGeometry,
    p: &ModelParams,
    q: &MatrixField,
    rate: &MatrixField,
    flavor: RateFlavor,
) -> Result<TermBundle> {
    check_flavor(p.phi, flavor)?;
    chart.check_len(q.len())?;
    chart.check_len(rate.len())?;
    let h = rate.scale(-p.m);
    let mut out = TermBundle { h: Some(h), ..TermBundle::empty(TermTag::IM) };
    if flavor == RateFlavor::Jaumann {
        let sigma = Field::from_fn(chart.len(), |k| {
            let nu = chart.normal[k];
            let (qq, d) = (q.data[k], rate.data[k]);
            (Mat3::identity() + nu * nu.transpose()) * (qq * d - d * qq) * chart.proj[k] * p.m
        });
        out.force = Some(div_trace_matrix(chart, &sigma));
        out.sigma = Some(sigma);
    } else {
        out.sigma = Some(Field::zeros(chart.len()));
        out.force = Some(Field::zeros(chart.len()));
    }
    Ok(out)
}

/// Pointwise kinematic inputs of the nematic viscous term.
#[derive(Debug, Clone, Copy)]
pub struct NvInput {
    pub q: Mat3,
    /// `D_J Q`.
    pub dj: Mat3,
    /// `D_m Q`.
    pub dm: Mat3,
    pub nu: Vec3,
    pub gcal: Mat3,
    pub s: Mat3,
    pub acal: Mat3,
    pub b: Vec3,
}

/// Orders 0, 1, 2 of the nematic viscous stress and the molecular-field parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvPoint {
    pub sigma0: Mat3,
    pub sigma1: Mat3,
    pub sigma2: Mat3,
    pub h1: Mat3,
    /// `H~^{2,Phi}`, i.e. the second-order field without the `-upsilon/2 D_Phi Q` part.
    pub h2_tilde: Mat3,
}

/// Pointwise nematic viscous rows. `form` chooses which representation of
/// the stresses is evaluated, `phi` which molecular-field split is used.
pub fn nv_point(inp: &NvInput, upsilon: f64, form: RateFlavor, phi: RateFlavor) -> NvPoint {
    let NvInput { q, dj, dm, nu, gcal, s, acal, b } = *inp;
    let id = Mat3::identity();
    let nn = nu * nu.transpose();
    let p = id - nn;
    let ncv = gcal + b * nu.transpose();
    let u = upsilon;
    let sigma0 = s * (2.0 * u);
    let (sigma1, sigma2) = match form {
        RateFlavor::Jaumann => {
            let s1 = (p * dj * p + (p * 3.0 + nn * 2.0) * q * s + s * q * p) * -u;
            let row = p * q * dj * nu;
            let s2 = (q * dj * p - nu * row.transpose() + p * q * s * q * p + q * q * s) * u;
            (s1, s2)
        }
        RateFlavor::Material => {
            let s1 = (p * dm * p + p * q * ncv + q * s * 2.0 + ncv.transpose() * q * p) * -u;
            let row = p * q * (dm * nu - acal * q * nu * 2.0 - q * ncv.transpose() * nu);
            let s2 = (q * dm * p - nu * row.transpose() + p * q * gcal.transpose() * q * p + q * q * ncv) * u;
            (s1, s2)
        }
    };
    let qs = frob(&q, &s);
    let h1 = proj_q(&s) * u;
    let h2_tilde = match phi {
        RateFlavor::Jaumann => (q * s + s * q - id * (2.0 / 3.0 * qs)) * (-0.5 * u),
        RateFlavor::Material => (q * gcal + gcal.transpose() * q - id * (2.0 / 3.0 * qs)) * (-0.5 * u),
    };
    NvPoint { sigma0, sigma1, sigma2, h1, h2_tilde }
}

/// Field output of the nematic viscous term.
#[derive(Debug, Clone, PartialEq)]
pub struct NvTerms {
    pub sigma0: MatrixField,
    pub sigma1: MatrixField,
    pub sigma2: MatrixField,
    pub h1: MatrixField,
    pub h2_tilde: MatrixField,
    /// `Sigma0 + xi Sigma1 + xi^2 Sigma2`.
    pub sigma: MatrixField,
    /// `xi H1 + xi^2 (H~2 - upsilon/2 D_Phi Q)`.
    pub h: MatrixField,
}

impl NvTerms {
    /// Bundles NV0, NV1, NV2 with forces `Div_C Sigma`. The molecular
    /// fields are attached with their `xi` weights.
    pub fn bundles(&self, chart: &ChartGeometry, p: &ModelParams, rate: &MatrixField) -> [TermBundle; 3] {
        let mk = |tag, s: &MatrixField, h: Option<MatrixField>| TermBundle {
            sigma: Some(s.clone()),
            force: Some(div_trace_matrix(chart, s)),
            h,
            ..TermBundle::empty(tag)
        };
        let xi = p.xi;
        let h2 = self.h2_tilde.axpy(-0.5 * p.upsilon, rate).scale(xi * xi);
        [
            mk(TermTag::NV0, &self.sigma0, None),
            mk(TermTag::NV1, &self.sigma1.scale(xi), Some(self.h1.scale(xi))),
            mk(TermTag::NV2, &self.sigma2.scale(xi * xi), Some(h2)),
        ]
    }
}

/// Nematic viscous term. `rate` is `D_Phi Q` with `Phi = flavor` (must equal
/// `p.phi`); `form` selects the stress representation.
pub fn nematic_viscous(
    chart: &ChartGeometry,
    p: &ModelParams,
    q: &MatrixField,
    rate: &MatrixField,
    flavor: RateFlavor,
    dg: &DeformationGradients,
    form: RateFlavor,
) -> Result<NvTerms> {
    check_flavor(p.phi, flavor)?;
    chart.check_len(q.len())?;
    chart.check_len(rate.len())?;
    chart.check_len(dg.s.len())?;
    let n = chart.len();
    let pts: Vec<NvPoint> = (0..n)
        .map(|k| {
            let (qq, acal) = (q.data[k], dg.acal.data[k]);
            let (dj, dm) = match flavor {
                RateFlavor::Jaumann => (rate.data[k], rate.data[k] + acal * qq - qq * acal),
                RateFlavor::Material => (jaumann_from_material(&rate.data[k], &acal, &qq), rate.data[k]),
            };
            let inp = NvInput {
                q: qq,
                dj,
                dm,
                nu: chart.normal[k],
                gcal: dg.gcal.data[k],
                s: dg.s.data[k],
                acal,
                b: dg.b.data[k],
            };
            nv_point(&inp, p.upsilon, form, p.phi)
        })
        .collect();
    let pick = |f: fn(&NvPoint) -> Mat3| Field::new(pts.iter().map(f).collect());
    let sigma0 = pick(|x| x.sigma0);
    let sigma1 = pick(|x| x.sigma1);
    let sigma2 = pick(|x| x.sigma2);
    let h1 = pick(|x| x.h1);
    let h2_tilde = pick(|x| x.h2_tilde);
    let xi = p.xi;
    let sigma = sigma0.axpy(xi, &sigma1).axpy(xi * xi, &sigma2);
    let h = h1.scale(xi).axpy(xi * xi, &h2_tilde.axpy(-0.5 * p.upsilon, rate));
    Ok(NvTerms { sigma0, sigma1, sigma2, h1, h2_tilde, sigma, h })
}

/// Anisotropic metric `I_xi[Q] = Id - xi Q` and its least eigenvalue per node.
pub fn anisotropic_metric(q: &MatrixField, xi: f64) -> (MatrixField, ScalarField) {
    let i = q.map(|m| Mat3::identity() - m * xi);
    let e = i.map(|m| SymmetricEigen::new(sym(m)).eigenvalues.min());
    (i, e)
}

/// Inextensibility pressure term: `Sigma = -p Id_S`, `F = -Grad_C p`.
pub fn inextensibility(chart: &ChartGeometry, pressure: &ScalarField) -> Result<TermBundle> {
    chart.check_len(pressure.len())?;
    let sigma = Field::from_fn(chart.len(), |k| chart.proj[k] * -pressure.data[k]);
    let force = grad_c(chart, pressure).scale(-1.0);
    Ok(TermBundle {
        sigma: Some(sigma),
        force: Some(force),
        pressure: Some(pressure.clone()),
        ..TermBundle::empty(TermTag::IC)
    })
}

/// Gauge-dependent part of the Jaumann force of a term with molecular field
/// `h`: `Div_C((Id + nu nu)(Q H - H Q) Id_S)`.
pub fn jaumann_gauge_force_correction(
    chart: &ChartGeometry,
    q: &MatrixField,
    h: &MatrixField,
) -> Result<crate::fields::VectorField> {
    chart.check_len(q.len())?;
    chart.check_len(h.len())?;
    let t = Field::from_fn(chart.len(), |k| {
        let nu = chart.normal[k];
        let (qq, hh) = (q.data[k], h.data[k]);
        (Mat3::identity() + nu * nu.transpose()) * (qq * hh - hh * qq) * chart.proj[k]
    });
    Ok(div_trace_matrix(chart, &t))
}
