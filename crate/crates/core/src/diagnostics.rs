//! Energies, flux potentials, the energy-rate audit, Leslie coefficients and
//! the identity checks behind the discrete calculus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{
    div_c_matrix, div_trace_matrix, frob, l2_inner, nabla_c_matrix, nabla_c_vector, proj_qs, skew,
    smooth_random_scalar, sym, Field, MatrixField, Rank3, ScalarField, VectorField,
};
use crate::geometry::{area_integral, build_chart, from_embedding, ChartGeometry, DerivativeScheme, SurfaceKind};
use crate::kinematics::deformation_gradients;
use crate::qtensor::{conforming_point, random_q, trace_power_residuals};
use crate::terms::{bending_energy, elastic_energy, thermotropic_density, ModelParams};
use crate::{Mat3, Vec3};

/// Energies and flux potentials at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub e_k: f64,
    pub e_el: f64,
    pub e_th: f64,
    pub e_be: f64,
    pub e_tot: f64,
    pub r_im: f64,
    pub r_nv: f64,
    /// `dE_tot/dt + 2(R_IM + R_NV)`; NaN until [`fill_audit`] has run.
    pub audit_residual: f64,
    /// `||Div_C V||_{L2}`.
    pub inext_residual: f64,
}

impl EnergyReport {
    /// Total dissipation rate `2(R_IM + R_NV)`.
    pub fn dissipation(&self) -> f64 {
        2.0 * (self.r_im + self.r_nv)
    }
}

/// Rates entering the flux potentials, both as embedded Q-tensor fields.
#[derive(Debug, Clone, Copy)]
pub struct Rates<'a> {
    /// `D_J Q`, used by the nematic viscous potential.
    pub dj: &'a MatrixField,
    /// `D_Phi Q` for the model's immobility flavor.
    pub dphi: &'a MatrixField,
}

/// Evaluates every energy and flux potential for the embedded state
/// `(Q, V)` at time `t`.
pub fn energies(
    chart: &ChartGeometry,
    p: &ModelParams,
    t: f64,
    q: &MatrixField,
    v: &VectorField,
    rates: Rates<'_>,
) -> Result<EnergyReport> {
    for n in [q.len(), v.len(), rates.dj.len(), rates.dphi.len()] {
        chart.check_len(n)?;
    }
    let e_k = 0.5 * p.rho * l2_inner(chart, v, v);
    let e_el = elastic_energy(chart, p, q)?;
    let dens: Vec<f64> = q.data.iter().map(|m| thermotropic_density(p, m)).collect();
    let e_th = area_integral(chart, &dens)?;
    let e_be = bending_energy(chart, p);
    let dg = deformation_gradients(chart, v)?;
    let r_im = 0.5 * p.m * l2_inner(chart, rates.dphi, rates.dphi);
    let nv: Vec<f64> = (0..chart.len())
        .map(|k| {
            let s = dg.s.data[k];
            let i = Mat3::identity() - q.data[k] * p.xi;
            (s * i + i * s - rates.dj.data[k] * p.xi).norm_squared()
        })
        .collect();
    let r_nv = 0.25 * p.upsilon * area_integral(chart, &nv)?;
    let div: Vec<f64> = dg.g.data.iter().map(|g| g.trace().powi(2)).collect();
    Ok(EnergyReport {
        t,
        e_k,
        e_el,
        e_th,
        e_be,
        e_tot: e_k + e_el + e_th + e_be,
        r_im,
        r_nv,
        audit_residual: f64::NAN,
        inext_residual: area_integral(chart, &div)?.sqrt(),
    })
}

/// Result of [`dissipation_audit`].
#[derive(Debug, Clone, PartialEq)]
pub struct AuditSummary {
    /// `(t_i, dE/dt + 2(R_IM + R_NV))` at each interior sample.
    pub residuals: Vec<(f64, f64)>,
    pub max_abs: f64,
    /// `max_abs` divided by the largest dissipation rate seen.
    pub max_rel: f64,
}

/// Compares a centered difference of `E_tot` with the weighted average
/// `(D_{i-1} + 2 D_i + D_{i+1}) / 4` of the dissipation rate `D = 2(R_IM + R_NV)`.
pub fn dissipation_audit(samples: &[EnergyReport]) -> Result<AuditSummary> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let mut residuals = Vec::with_capacity(samples.len() - 2);
    let mut scale = 0.0_f64;
    for w in samples.windows(3) {
        let dedt = (w[2].e_tot - w[0].e_tot) / (w[2].t - w[0].t);
        let d = 0.25 * (w[0].dissipation() + 2.0 * w[1].dissipation() + w[2].dissipation());
        residuals.push((w[1].t, dedt + d));
        scale = scale.max(d.abs());
    }
    let max_abs = residuals.iter().fold(0.0_f64, |m, r| m.max(r.1.abs()));
    let max_rel = if scale > 0.0 { max_abs / scale } else { max_abs };
    Ok(AuditSummary { residuals, max_abs, max_rel })
}

/// Writes the audit residual into each interior sample; the two end samples stay NaN.
pub fn fill_audit(samples: &mut [EnergyReport]) {
    if let Ok(a) = dissipation_audit(samples) {
        for (s, (_, r)) in samples[1..].iter_mut().zip(a.residuals) {
            s.audit_residual = r;
        }
    }
}

/// Leslie viscosities of the conforming uniaxial model with a tangential director.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeslieCoefficients {
    pub alpha: [f64; 6],
    /// `(alpha2 + alpha3) - (alpha6 - alpha5)`.
    pub parodi_residual: f64,
    /// `(a3 - a2)(2 a4 + a5 + a6) - (a6 - a5)^2`.
    pub determinant_residual: f64,
    /// The four inequality left sides: `a3 - a2`, `2 a4 + a5 + a6`, `a4`, `a1 + a4 + a5 + a6`.
    pub inequalities: [f64; 4],
    /// Final inequality with Jaumann immobility: `(a3 - a2 + 2 M s^2)(2 a4 + a5 + a6) - (a6 - a5)^2`.
    pub immobility_amended: f64,
}

impl LeslieCoefficients {
    pub fn inequalities_hold(&self) -> bool {
        self.inequalities.iter().all(|&x| x >= 0.0) && self.immobility_amended >= -1e-12 * self.scale()
    }
    /// Magnitude used to make residuals relative.
    pub fn scale(&self) -> f64 {
        self.alpha.iter().fold(0.0_f64, |m, a| m.max(a.abs())).powi(2).max(f64::MIN_POSITIVE)
    }
}

pub fn leslie_coefficients(upsilon: f64, s: f64, xi: f64, m: f64) -> LeslieCoefficients {
    let u = upsilon;
    let x = s * xi;
    let a1 = u * x * x;
    let a2 = -u * x * (1.0 + x / 3.0);
    let a3 = -u * x * (1.0 - 2.0 * x / 3.0);
    let a4 = 2.0 * u * (1.0 + x / 3.0).powi(2);
    let a5 = -u * x * (1.0 + x / 3.0);
    let a6 = -3.0 * u * x;
    let d = 2.0 * a4 + a5 + a6;
    LeslieCoefficients {
        alpha: [a1, a2, a3, a4, a5, a6],
        parodi_residual: (a2 + a3) - (a6 - a5),
        determinant_residual: (a3 - a2) * d - (a6 - a5).powi(2),
        inequalities: [a3 - a2, d, a4, a1 + a4 + a5 + a6],
        immobility_amended: (a3 - a2 + 2.0 * m * s * s) * d - (a6 - a5).powi(2),
    }
}

/// One identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
    fn push(&mut self, name: &'static str, max_residual: f64, tolerance: f64, note: impl Into<String>) {
        self.checks.push(LemmaCheck {
            name,
            max_residual,
            tolerance,
            passed: max_residual.is_finite() && max_residual <= tolerance,
            note: note.into(),
        });
    }
}

impl std::fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<28} max residual {:.3e} (tol {:.1e}) {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_residual,
                c.tolerance,
                c.note
            )?;
        }
        Ok(())
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_mat<R: Rng>(rng: &mut R) -> Mat3 {
    Mat3::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

/// Random smooth embedded vector field with band limit `kmax`.
pub fn random_vector_field<R: Rng>(chart: &ChartGeometry, rng: &mut R, kmax: i32) -> VectorField {
    let c: Vec<ScalarField> = (0..3).map(|_| smooth_random_scalar(&chart.grid, rng, kmax)).collect();
    Field::from_fn(chart.len(), |k| Vec3::new(c[0].data[k], c[1].data[k], c[2].data[k]))
}

/// Random smooth embedded 2-tensor field with band limit `kmax`.
pub fn random_matrix_field<R: Rng>(chart: &ChartGeometry, rng: &mut R, kmax: i32) -> MatrixField {
    let c: Vec<ScalarField> = (0..9).map(|_| smooth_random_scalar(&chart.grid, rng, kmax)).collect();
    Field::from_fn(chart.len(), |k| Mat3::from_fn(|a, b| c[3 * a + b].data[k]))
}

/// Relative defect of `<nabla_C Psi, R> = -<Psi, div_C R>` for random smooth fields.
pub fn adjointness_residual<R: Rng>(chart: &ChartGeometry, rng: &mut R) -> f64 {
    let psi = random_vector_field(chart, rng, 4);
    let r = random_matrix_field(chart, rng, 4);
    let lhs = l2_inner(chart, &nabla_c_vector(chart, &psi), &r);
    let rhs = -l2_inner(chart, &psi, &div_c_matrix(chart, &r));
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300)
}

/// `max |div_C R - Div_C R - H R nu| / max |div_C R|` for a fixed smooth
/// tensor field (analytic in the chart coordinates, so refinements compare
/// the same function).
pub fn divergence_relation_residual(chart: &ChartGeometry) -> f64 {
    let r = Field::from_fn(chart.len(), |k| {
        let (a, b) = chart.grid.coords(k);
        let (x, y) = (std::f64::consts::TAU * a / chart.grid.p1, std::f64::consts::TAU * b / chart.grid.p2);
        Mat3::from_fn(|i, j| {
            let (fi, fj) = (i as f64 + 1.0, j as f64 + 1.0);
            (fi * x + fj * y).sin() + 0.5 * (fj * x - 2.0 * y).cos() + 0.2 * (x + fi * fj * y).cos()
        })
    });
    let d1 = div_c_matrix(chart, &r);
    let d2 = div_trace_matrix(chart, &r);
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for k in 0..chart.len() {
        let res = d1.data[k] - d2.data[k] - r.data[k] * chart.normal[k] * chart.mean_curv[k];
        num = num.max(res.amax());
        den = den.max(d1.data[k].amax());
    }
    num / den.max(1e-300)
}

/// Observed convergence order from errors on grids `N` and `2N`.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

/// Embedded torus position at chart node `k`, displaced along `w`.
fn torus_positions(chart: &ChartGeometry, w: &VectorField, eps: f64) -> Vec<Vec3> {
    chart.x.iter().zip(&w.data).map(|(x, d)| x + d * eps).collect()
}

/// Runs every checkable identity on `n_samples` random inputs.
///
/// Pointwise algebraic identities are held to 1e-12 relative. The
/// divergence relation uses the spectral torus (round-off level) plus an
/// fd4 refinement pair for its order. The deformation commutator is checked
/// with a central difference in the embedding.
pub fn verify_lemmas(seed: u64, n_samples: usize) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LemmaReport::default();
    let n_samples = n_samples.max(1);

    // Trace powers of a Q-tensor.
    let mut worst = 0.0_f64;
    for _ in 0..n_samples {
        let q = random_q(&mut rng) * rng.gen_range(0.1..3.0);
        let r = trace_power_residuals(&q);
        worst = worst.max(r.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    }
    rep.push("trace-power identities", worst, 1e-12, "eigenvalue trace powers");

    // Q-part of a tangential 2-tensor is conforming.
    let mut worst = 0.0_f64;
    for _ in 0..n_samples {
        let nu = random_unit(&mut rng);
        let p = Mat3::identity() - nu * nu.transpose();
        let r = p * random_mat(&mut rng) * p;
        let lhs = crate::fields::proj_q(&r);
        let rhs = conforming_point(&proj_qs(&r, &nu), -r.trace() / 3.0, &nu);
        worst = worst.max((lhs - rhs).amax() / r.amax().max(1e-300));
    }
    rep.push("tangential Q-part", worst, 1e-12, "Pi_Q r = Q_Cs(Pi_QS r, -Tr r / 3)");

    // Weak deformation pairings, pointwise with random data.
    let (mut w_g, mut w_a) = (0.0_f64, 0.0_f64);
    for _ in 0..n_samples {
        let nu = random_unit(&mut rng);
        let p = Mat3::identity() - nu * nu.transpose();
        let r = random_mat(&mut rng);
        let m = random_mat(&mut rng) * p;
        let b = m.transpose() * nu;
        let gcal = m - b * nu.transpose();
        let lhs = frob(&r, &gcal);
        let rhs = frob(&(r * p - nu * (p * r * nu).transpose()), &m);
        w_g = w_g.max((lhs - rhs).abs() / (r.norm() * m.norm()));
        let lhs = frob(&r, &skew(&gcal));
        let rhs = frob(&((Mat3::identity() + nu * nu.transpose()) * skew(&r) * p), &m);
        w_a = w_a.max((lhs - rhs).abs() / (r.norm() * m.norm()));
    }
    rep.push("weak deformation pairing", w_g, 1e-12, "<R, G[W]> identity");
    rep.push("weak skew pairing", w_a, 1e-12, "<R, A[W]> identity");

    let torus = |n: usize, s: DerivativeScheme| {
        build_chart(SurfaceKind::EmbeddedTorus { r_major: 2.0, r_minor: 1.0 }, n, n, s).expect("valid torus")
    };
    let spectral = torus(48, DerivativeScheme::Spectral);

    // Adjointness of the componentwise divergence.
    let mut worst = 0.0_f64;
    for _ in 0..n_samples.min(8) {
        worst = worst.max(adjointness_residual(&spectral, &mut rng));
    }
    rep.push("divergence adjointness", worst, 1e-10, "EmbeddedTorus N=48");

    // Relation between the adjoint and trace divergences.
    let e_sp = divergence_relation_residual(&spectral);
    rep.push("divergence relation", e_sp, 1e-10, "spectral EmbeddedTorus N=48");
    let e32 = divergence_relation_residual(&torus(32, DerivativeScheme::Fd4));
    let e64 = divergence_relation_residual(&torus(64, DerivativeScheme::Fd4));
    let order = observed_order(e32, e64);
    rep.push(
        "divergence relation order",
        (3.5 - order).max(0.0),
        0.0,
        format!("fd4 errors {e32:.2e} -> {e64:.2e}, observed order {order:.2}"),
    );

    // Deformation commutator: perturb the embedding along W with R fixed.
    let base = torus(32, DerivativeScheme::Spectral);
    let w = random_vector_field(&base, &mut rng, 2).scale(0.3);
    let r = random_matrix_field(&base, &mut rng, 3);
    let eps = 1e-5;
    let grid = base.grid;
    let plus = from_embedding(grid, torus_positions(&base, &w, eps), DerivativeScheme::Spectral);
    let minus = from_embedding(grid, torus_positions(&base, &w, -eps), DerivativeScheme::Spectral);
    let resid = match (plus, minus) {
        (Ok(cp), Ok(cm)) => {
            let tp = nabla_c_matrix(&cp, &r);
            let tm = nabla_c_matrix(&cm, &r);
            let t0 = nabla_c_matrix(&base, &r);
            let dg = deformation_gradients(&base, &w).expect("sized");
            let mut num = 0.0_f64;
            let mut den = 0.0_f64;
            for k in 0..base.len() {
                let fd = (tp.data[k] - tm.data[k]) * (0.5 / eps);
                let exact: Rank3 = -t0.data[k].mul_last(&dg.gcal.data[k]);
                let diff = fd - exact;
                num = num.max(diff.0.iter().map(|m| m.amax()).fold(0.0, f64::max));
                den = den.max(exact.0.iter().map(|m| m.amax()).fold(0.0, f64::max));
            }
            num / den.max(1e-300)
        }
        _ => f64::INFINITY,
    };
    rep.push("deformation commutator", resid, 1e-6, "central difference, eps = 1e-5");

    // Symmetric rate sanity: S is the symmetric part of G.
    let v = random_vector_field(&spectral, &mut rng, 3);
    let dg = deformation_gradients(&spectral, &v).expect("sized");
    let worst = (0..spectral.len()).map(|k| (dg.s.data[k] - sym(&dg.g.data[k])).amax()).fold(0.0_f64, f64::max);
    rep.push("deformation split", worst, 1e-14, "S = sym G");
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leslie_spot_values() {
        let l = leslie_coefficients(1.0, 1.0, 1.0, 0.0);
        let want = [1.0, -4.0 / 3.0, -1.0 / 3.0, 32.0 / 9.0, -4.0 / 3.0, -3.0];
        for (a, b) in l.alpha.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
        assert!((l.alpha[1] + l.alpha[2] + 5.0 / 3.0).abs() < 1e-15);
        assert!(l.parodi_residual.abs() < 1e-15);
        assert!(l.determinant_residual.abs() < 1e-14);
    }

    #[test]
    fn leslie_isotropic_limit() {
        let l = leslie_coefficients(0.7, 0.4, 0.0, 1.0);
        assert_eq!(l.alpha, [0.0, 0.0, 0.0, 1.4, 0.0, 0.0]);
        assert!(l.inequalities_hold());
    }

    #[test]
    fn audit_needs_three_samples() {
        let r = EnergyReport {
            t: 0.0,
            e_k: 0.0,
            e_el: 0.0,
            e_th: 0.0,
            e_be: 0.0,
            e_tot: 0.0,
            r_im: 0.0,
            r_nv: 0.0,
            audit_residual: f64::NAN,
            inext_residual: 0.0,
        };
        assert_eq!(dissipation_audit(&[r, r]), Err(Error::TooFewSamples(2)));
    }

    #[test]
    fn audit_of_exact_exponential_decay() {
        // E = exp(-2t), dissipation rate 2 exp(-2t): residual O(dt^2).
        let dt = 1e-3;
        let s: Vec<EnergyReport> = (0..50)
            .map(|i| {
                let t = i as f64 * dt;
                let e = (-2.0 * t).exp();
                EnergyReport {
                    t,
                    e_k: e,
                    e_el: 0.0,
                    e_th: 0.0,
                    e_be: 0.0,
                    e_tot: e,
                    r_im: 0.5 * e,
                    r_nv: 0.5 * e,
                    audit_residual: f64::NAN,
                    inext_residual: 0.0,
                }
            })
            .collect();
        let a = dissipation_audit(&s).unwrap();
        assert!(a.max_abs < 1e-5, "{}", a.max_abs);
    }

    #[test]
    fn zero_state_energies() {
        let c =
            build_chart(SurfaceKind::EmbeddedTorus { r_major: 2.0, r_minor: 1.0 }, 32, 32, DerivativeScheme::Spectral)
                .unwrap();
        let p = ModelParams { kappa: 2.0, ..Default::default() };
        let z = MatrixField::zeros(c.len());
        let v = VectorField::zeros(c.len());
        let e = energies(&c, &p, 0.0, &z, &v, Rates { dj: &z, dphi: &z }).unwrap();
        assert_eq!((e.e_k, e.e_el, e.e_th, e.r_im, e.r_nv), (0.0, 0.0, 0.0, 0.0, 0.0));
        // int H^2 dS = 16 pi^2 / sqrt(3) for R = 2, r = 1; kappa / 2 = 1.
        let want = 16.0 * std::f64::consts::PI.powi(2) / 3f64.sqrt();
        assert!((e.e_be - want).abs() < 1e-9 * want, "{} vs {want}", e.e_be);
    }

    #[test]
    fn isotropic_viscous_potential() {
        let c = build_chart(SurfaceKind::FlatTorus { p1: 6.0, p2: 6.0 }, 32, 32, DerivativeScheme::Spectral).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_vector_field(&c, &mut rng, 3).map(|w| Vec3::new(w[0], w[1], 0.0));
        let z = MatrixField::zeros(c.len());
        let p = ModelParams { upsilon: 0.8, ..Default::default() };
        let e = energies(&c, &p, 0.0, &z, &v, Rates { dj: &z, dphi: &z }).unwrap();
        let g = nabla_c_vector(&c, &v);
        let gg = g.map(|m| m + m.transpose());
        let want = 0.25 * 0.8 * l2_inner(&c, &gg, &gg);
        assert!((e.r_nv - want).abs() < 1e-12 * want);
    }

    #[test]
    fn lemma_suite_passes() {
        let r = verify_lemmas(42, 200);
        assert!(r.all_passed(), "{r}");
    }
}
