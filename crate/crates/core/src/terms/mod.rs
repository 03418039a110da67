//! Model terms: energies, stresses, forces and molecular fields.
//!
//! [`general`] evaluates the embedded forms for arbitrary Q-tensor fields,
//! [`conforming`] the tangential forms for `Q = Q_Cs(q, beta)`, and
//! [`constraints`] the constraint-force evaluators.

pub mod conforming;
pub mod constraints;
pub mod general;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fields::{proj_qs, Field, MatrixField, ScalarField, VectorField};
use crate::geometry::ChartGeometry;
use crate::kinematics::RateFlavor;

pub use conforming::*;
pub use constraints::*;
pub use general::*;

/// Physical coefficients of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// One-constant elasticity `L`.
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub kappa: f64,
    /// Spontaneous curvature.
    pub h0: f64,
    /// Immobility coefficient.
    pub m: f64,
    /// Isotropic viscosity.
    pub upsilon: f64,
    /// Anisotropy coefficient.
    pub xi: f64,
    pub rho: f64,
    /// Rate used by the immobility term.
    pub phi: RateFlavor,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            l: 1.0,
            a: 1.0,
            b: 0.0,
            c: 1.0,
            kappa: 0.0,
            h0: 0.0,
            m: 1.0,
            upsilon: 1.0,
            xi: 0.0,
            rho: 1.0,
            phi: RateFlavor::Jaumann,
        }
    }
}

impl ModelParams {
    /// Immobility coefficient adapted to the nematic viscosity, `M + upsilon xi^2 / 2`.
    pub fn m_tilde(&self) -> f64 {
        self.m + self.upsilon * self.xi * self.xi / 2.0
    }

    /// Checks the coefficient ranges. Returns warnings for admissible but
    /// unphysical settings (an indefinite anisotropic metric).
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |name: &str, reason: &str| Err(Error::InvalidParameter { name: name.into(), reason: reason.into() });
        let all = [self.l, self.a, self.b, self.c, self.kappa, self.h0, self.m, self.upsilon, self.xi, self.rho];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("model", "all coefficients must be finite");
        }
        if self.l < 0.0 {
            return bad("L", "must be >= 0");
        }
        if self.c <= 0.0 {
            return bad("c", "must be > 0 for a bounded thermotropic energy");
        }
        if self.kappa < 0.0 {
            return bad("kappa", "must be >= 0");
        }
        if self.m < 0.0 {
            return bad("M", "must be >= 0");
        }
        if self.upsilon < 0.0 {
            return bad("upsilon", "must be >= 0");
        }
        if self.rho <= 0.0 {
            return bad("rho", "must be > 0");
        }
        let mut warnings = Vec::new();
        if self.xi.abs() >= 1.5 {
            warnings.push(format!(
                "xi = {} lies outside (-3/2, 3/2): the anisotropic metric is not positive definite for all physical Q",
                self.xi
            ));
        }
        Ok(warnings)
    }
}

/// Identifies which model term a bundle came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermTag {
    EL,
    TH,
    BE,
    IM,
    NV0,
    NV1,
    NV2,
    SC,
    CB,
    UN,
    IS,
    NN,
    NF,
    IC,
}

impl TermTag {
    pub const ALL: [TermTag; 14] = [
        TermTag::EL,
        TermTag::TH,
        TermTag::BE,
        TermTag::IM,
        TermTag::NV0,
        TermTag::NV1,
        TermTag::NV2,
        TermTag::SC,
        TermTag::CB,
        TermTag::UN,
        TermTag::IS,
        TermTag::NN,
        TermTag::NF,
        TermTag::IC,
    ];
}

impl fmt::Display for TermTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for TermTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TermTag::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownConstraint(s.to_string()))
    }
}

/// Tangential/normal parts of a term on a conforming state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConformingParts {
    /// Tangential stress `Id_S Sigma`.
    pub sigma: Option<MatrixField>,
    /// Normal stress row `nu Sigma`.
    pub varsigma: Option<VectorField>,
    pub f: Option<VectorField>,
    pub f_perp: Option<ScalarField>,
    /// Tangential Q part of the molecular field.
    pub h: Option<MatrixField>,
    /// Mixed part `Id_S H nu`.
    pub zeta: Option<VectorField>,
    /// Normal part `H(nu, nu)`.
    pub omega: Option<ScalarField>,
}

/// One evaluated model term.
#[derive(Debug, Clone, PartialEq)]
pub struct TermBundle {
    pub tag: TermTag,
    /// Embedded right-tangential stress.
    pub sigma: Option<MatrixField>,
    /// Embedded force.
    pub force: Option<VectorField>,
    /// Molecular field (Q-tensor valued).
    pub h: Option<MatrixField>,
    /// Scalar pressure-like field (thermotropic pressure, surface pressure).
    pub pressure: Option<ScalarField>,
    /// Potential energy of the term, when it has one.
    pub energy: Option<f64>,
    pub conforming: Option<ConformingParts>,
}

impl TermBundle {
    pub fn empty(tag: TermTag) -> Self {
        Self { tag, sigma: None, force: None, h: None, pressure: None, energy: None, conforming: None }
    }

    /// Decomposes the embedded outputs into tangential/normal parts.
    pub fn decompose(&self, chart: &ChartGeometry) -> ConformingParts {
        let mut out = ConformingParts::default();
        if let Some(s) = &self.sigma {
            let (a, b) = decompose_stress(chart, s);
            out.sigma = Some(a);
            out.varsigma = Some(b);
        }
        if let Some(f) = &self.force {
            let (a, b) = decompose_force(chart, f);
            out.f = Some(a);
            out.f_perp = Some(b);
        }
        if let Some(h) = &self.h {
            let (a, b, c) = decompose_molecular(chart, h);
            out.h = Some(a);
            out.zeta = Some(b);
            out.omega = Some(c);
        }
        out
    }
}

/// `(h, zeta, omega) = (Pi_QS H, Id_S H nu, H(nu, nu))`.
pub fn decompose_molecular(chart: &ChartGeometry, h: &MatrixField) -> (MatrixField, VectorField, ScalarField) {
    let n = chart.len();
    let hq = Field::from_fn(n, |k| proj_qs(&h.data[k], &chart.normal[k]));
    let z = Field::from_fn(n, |k| chart.proj[k] * h.data[k] * chart.normal[k]);
    let w = Field::from_fn(n, |k| chart.normal[k].dot(&(h.data[k] * chart.normal[k])));
    (hq, z, w)
}

/// `(sigma, varsigma) = (Id_S Sigma, Sigma^T nu)`.
pub fn decompose_stress(chart: &ChartGeometry, s: &MatrixField) -> (MatrixField, VectorField) {
    let n = chart.len();
    (Field::from_fn(n, |k| chart.proj[k] * s.data[k]), Field::from_fn(n, |k| s.data[k].transpose() * chart.normal[k]))
}

/// `(f, f_perp) = (Id_S F, F . nu)`.
pub fn decompose_force(chart: &ChartGeometry, f: &VectorField) -> (VectorField, ScalarField) {
    let n = chart.len();
    (Field::from_fn(n, |k| chart.proj[k] * f.data[k]), Field::from_fn(n, |k| f.data[k].dot(&chart.normal[k])))
}

pub(crate) fn check_flavor(expected: RateFlavor, got: RateFlavor) -> Result<()> {
    if expected != got {
        return Err(Error::RateFlavorMismatch { expected, got });
    }
    Ok(())
}
