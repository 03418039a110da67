//! Run configuration.
//!
//! Files are sections of `key = value` lines under `[section]` headers, in
//! TOML syntax: strings are quoted, numbers and booleans are bare, `#`
//! starts a comment. Every key is optional except `surface.kind`,
//! `solver.kind`, `solver.dt` and `solver.n_steps`. Unknown sections and
//! keys are errors. The full key list with defaults is in the README.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use surfnema::geometry::{DerivativeScheme, SurfaceKind};
use surfnema::qtensor::ThermotropicRoots;
use surfnema::solvers::SolverOptions;
use surfnema::{ModelParams, RateFlavor};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    surface: RawSurface,
    #[serde(default)]
    model: RawModel,
    solver: RawSolver,
    #[serde(default)]
    init: RawInit,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    kind: String,
    #[serde(default = "default_n")]
    n1: usize,
    #[serde(default = "default_n")]
    n2: usize,
    #[serde(default = "default_scheme")]
    scheme: String,
    p1: Option<f64>,
    p2: Option<f64>,
    r_major: Option<f64>,
    r_minor: Option<f64>,
}

fn default_n() -> usize {
    64
}
fn default_scheme() -> String {
    "spectral".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawModel {
    #[serde(rename = "L")]
    l: f64,
    a: f64,
    b: f64,
    c: f64,
    kappa: f64,
    h0: f64,
    #[serde(rename = "M")]
    m: f64,
    upsilon: f64,
    xi: f64,
    rho: f64,
    phi: String,
    strict_xi: bool,
    // Reserved for multi-constant elasticity; rejected when present.
    #[serde(rename = "L2")]
    l2: Option<f64>,
    #[serde(rename = "L3")]
    l3: Option<f64>,
    #[serde(rename = "L4")]
    l4: Option<f64>,
    #[serde(rename = "L5")]
    l5: Option<f64>,
    #[serde(rename = "L6")]
    l6: Option<f64>,
}

impl Default for RawModel {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            l: p.l,
            a: p.a,
            b: p.b,
            c: p.c,
            kappa: p.kappa,
            h0: p.h0,
            m: p.m,
            upsilon: p.upsilon,
            xi: p.xi,
            rho: p.rho,
            phi: "jaumann".into(),
            strict_xi: true,
            l2: None,
            l3: None,
            l4: None,
            l5: None,
            l6: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    kind: String,
    dt: f64,
    n_steps: usize,
    #[serde(default = "one")]
    sample_every: usize,
    #[serde(default)]
    snapshot_every: usize,
    #[serde(default = "default_blowup")]
    blowup_factor: f64,
    #[serde(default = "default_cfl")]
    cfl_limit: f64,
    #[serde(default = "default_flavor")]
    nv_form: String,
    #[serde(default = "default_beta_mode")]
    beta_mode: String,
    beta0: Option<f64>,
}

fn one() -> usize {
    1
}
fn default_blowup() -> f64 {
    1e6
}
fn default_cfl() -> f64 {
    0.5
}
fn default_flavor() -> String {
    "jaumann".into()
}
fn default_beta_mode() -> String {
    "fixed".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawInit {
    velocity: String,
    velocity_amplitude: f64,
    q: String,
    q_amplitude: f64,
    order: Option<f64>,
    angle: f64,
    perturbation: f64,
    kmax: i32,
    seed: u64,
}

impl Default for RawInit {
    fn default() -> Self {
        Self {
            velocity: "zero".into(),
            velocity_amplitude: 1.0,
            q: "zero".into(),
            q_amplitude: 0.3,
            order: None,
            angle: 0.0,
            perturbation: 0.0,
            kmax: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    directory: PathBuf,
    snapshot_format: String,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { directory: PathBuf::from("results"), snapshot_format: "vtk".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    FlatBe2d,
    GradientFlow,
    StationaryNemato,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaChoice {
    Fixed(f64),
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityInit {
    Zero,
    TaylorGreen,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QInit {
    Zero,
    Random,
    Uniaxial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitConfig {
    pub velocity: VelocityInit,
    pub velocity_amplitude: f64,
    pub q: QInit,
    pub q_amplitude: f64,
    /// Scalar order of the uniaxial generator (resolved to `S*` by default).
    pub order: f64,
    pub angle: f64,
    pub perturbation: f64,
    pub kmax: i32,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    Vtk,
    Binary,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub surface: SurfaceKind,
    pub n1: usize,
    pub n2: usize,
    pub scheme: DerivativeScheme,
    pub model: ModelParams,
    pub solver: SolverKind,
    pub options: SolverOptions,
    /// Normal eigenvalue for fixed-beta runs (all solvers but the flat one).
    pub beta: BetaChoice,
    pub init: InitConfig,
    pub output: PathBuf,
    pub snapshot_format: SnapshotFormat,
    /// Non-fatal findings, such as an out-of-range `xi` in lax mode.
    pub warnings: Vec<String>,
}

fn invalid(key: &str, constraint: impl Into<String>) -> CliError {
    CliError::Validation { key: key.into(), constraint: constraint.into() }
}

fn flavor(key: &str, s: &str) -> Result<RateFlavor, CliError> {
    match s {
        "jaumann" => Ok(RateFlavor::Jaumann),
        "material" => Ok(RateFlavor::Material),
        _ => Err(invalid(key, format!("must be \"jaumann\" or \"material\", got \"{s}\""))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    parse_config_str(&text)
}

/// Parses and validates configuration text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        CliError::Parse { line, message: e.message().to_string() }
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig, CliError> {
    let s = &raw.surface;
    let surface = match s.kind.as_str() {
        "flat_torus" => {
            if s.r_major.is_some() || s.r_minor.is_some() {
                return Err(invalid("surface.r_major", "only applies to embedded_torus"));
            }
            SurfaceKind::FlatTorus {
                p1: positive("surface.p1", s.p1.unwrap_or(TAU))?,
                p2: positive("surface.p2", s.p2.unwrap_or(TAU))?,
            }
        }
        "embedded_torus" => {
            if s.p1.is_some() || s.p2.is_some() {
                return Err(invalid("surface.p1", "only applies to flat_torus"));
            }
            let r_major = positive("surface.r_major", s.r_major.unwrap_or(2.0))?;
            let r_minor = positive("surface.r_minor", s.r_minor.unwrap_or(1.0))?;
            if r_minor >= r_major {
                return Err(invalid("surface.r_minor", "must be smaller than r_major"));
            }
            SurfaceKind::EmbeddedTorus { r_major, r_minor }
        }
        other => {
            return Err(invalid(
                "surface.kind",
                format!("must be \"flat_torus\" or \"embedded_torus\", got \"{other}\""),
            ))
        }
    };
    for (key, n) in [("surface.n1", s.n1), ("surface.n2", s.n2)] {
        if n < 8 || n % 2 != 0 {
            return Err(invalid(key, format!("must be even and at least 8, got {n}")));
        }
    }
    let scheme = match s.scheme.as_str() {
        "spectral" => DerivativeScheme::Spectral,
        "fd4" => DerivativeScheme::Fd4,
        other => return Err(invalid("surface.scheme", format!("must be \"spectral\" or \"fd4\", got \"{other}\""))),
    };

    let m = &raw.model;
    for (key, v) in [("model.L2", m.l2), ("model.L3", m.l3), ("model.L4", m.l4), ("model.L5", m.l5), ("model.L6", m.l6)]
    {
        if v.is_some() {
            return Err(invalid(key, "only one-constant elasticity is supported"));
        }
    }
    let model = ModelParams {
        l: m.l,
        a: m.a,
        b: m.b,
        c: m.c,
        kappa: m.kappa,
        h0: m.h0,
        m: m.m,
        upsilon: m.upsilon,
        xi: m.xi,
        rho: m.rho,
        phi: flavor("model.phi", &m.phi)?,
    };
    let mut warnings = model.validate().map_err(|e| match e {
        surfnema::Error::InvalidParameter { name, reason } => invalid(&format!("model.{name}"), reason),
        other => invalid("model", other.to_string()),
    })?;
    if model.xi.abs() >= 1.5 && m.strict_xi {
        return Err(invalid("model.xi", "|xi| must be below 3/2 (set strict_xi = false to only warn)"));
    }

    let sv = &raw.solver;
    let solver = match sv.kind.as_str() {
        "flat_be2d" => SolverKind::FlatBe2d,
        "gradient_flow" => SolverKind::GradientFlow,
        "stationary_nemato" => SolverKind::StationaryNemato,
        other => {
            return Err(invalid(
                "solver.kind",
                format!("must be \"flat_be2d\", \"gradient_flow\" or \"stationary_nemato\", got \"{other}\""),
            ))
        }
    };
    if solver == SolverKind::FlatBe2d && !matches!(surface, SurfaceKind::FlatTorus { .. }) {
        return Err(invalid("solver.kind", "flat_be2d requires surface.kind = \"flat_torus\""));
    }
    if solver == SolverKind::StationaryNemato {
        if model.xi != 0.0 {
            return Err(invalid("model.xi", "stationary_nemato requires xi = 0"));
        }
        if !(model.m > 0.0) {
            return Err(invalid("model.M", "stationary_nemato requires M > 0"));
        }
    }
    if solver == SolverKind::FlatBe2d && model.xi.abs() >= 1.5 {
        return Err(invalid("model.xi", "flat_be2d requires |xi| < 3/2"));
    }
    let options = SolverOptions {
        dt: positive("solver.dt", sv.dt)?,
        n_steps: sv.n_steps,
        sample_every: sv.sample_every,
        snapshot_every: sv.snapshot_every,
        blowup_factor: positive("solver.blowup_factor", sv.blowup_factor)?,
        cfl_limit: positive("solver.cfl_limit", sv.cfl_limit)?,
        nv_form: flavor("solver.nv_form", &sv.nv_form)?,
    };
    let roots = ThermotropicRoots::new(model.a, model.b, model.c);
    let beta0 = sv.beta0.unwrap_or_else(|| roots.map_or(0.0, |r| -r.s_star / 3.0));
    if !beta0.is_finite() {
        return Err(invalid("solver.beta0", "must be finite"));
    }
    let beta = match sv.beta_mode.as_str() {
        "fixed" => BetaChoice::Fixed(beta0),
        "free" if solver == SolverKind::GradientFlow => BetaChoice::Free,
        "free" => return Err(invalid("solver.beta_mode", "\"free\" is only available for gradient_flow")),
        other => return Err(invalid("solver.beta_mode", format!("must be \"fixed\" or \"free\", got \"{other}\""))),
    };

    let i = &raw.init;
    let velocity = match i.velocity.as_str() {
        "zero" => VelocityInit::Zero,
        "taylor_green" => VelocityInit::TaylorGreen,
        "random" => VelocityInit::Random,
        other => {
            return Err(invalid(
                "init.velocity",
                format!("must be \"zero\", \"taylor_green\" or \"random\", got \"{other}\""),
            ))
        }
    };
    if velocity != VelocityInit::Zero && solver == SolverKind::GradientFlow {
        warnings.push("gradient_flow ignores the initial velocity".into());
    }
    let q = match i.q.as_str() {
        "zero" => QInit::Zero,
        "random" => QInit::Random,
        "uniaxial" => QInit::Uniaxial,
        other => {
            return Err(invalid("init.q", format!("must be \"zero\", \"random\" or \"uniaxial\", got \"{other}\"")))
        }
    };
    let order = match (i.order, roots) {
        (Some(s), _) => s,
        (None, Some(r)) => r.s_star,
        (None, None) if q == QInit::Uniaxial => {
            return Err(invalid("init.order", "required: the thermotropic parameters have no nematic root"))
        }
        (None, None) => 0.0,
    };
    if !(i.kmax >= 1) {
        return Err(invalid("init.kmax", "must be at least 1"));
    }
    for (key, v) in [
        ("init.velocity_amplitude", i.velocity_amplitude),
        ("init.q_amplitude", i.q_amplitude),
        ("init.order", order),
        ("init.angle", i.angle),
        ("init.perturbation", i.perturbation),
    ] {
        if !v.is_finite() {
            return Err(invalid(key, "must be finite"));
        }
    }
    let init = InitConfig {
        velocity,
        velocity_amplitude: i.velocity_amplitude,
        q,
        q_amplitude: i.q_amplitude,
        order,
        angle: i.angle,
        perturbation: i.perturbation,
        kmax: i.kmax,
        seed: i.seed,
    };
    let snapshot_format = match raw.output.snapshot_format.as_str() {
        "vtk" => SnapshotFormat::Vtk,
        "binary" => SnapshotFormat::Binary,
        "both" => SnapshotFormat::Both,
        other => {
            return Err(invalid(
                "output.snapshot_format",
                format!("must be \"vtk\", \"binary\" or \"both\", got \"{other}\""),
            ))
        }
    };

    Ok(RunConfig {
        surface,
        n1: s.n1,
        n2: s.n2,
        scheme,
        model,
        solver,
        options,
        beta,
        init,
        output: raw.output.directory,
        snapshot_format,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[surface]
kind = "flat_torus"

[solver]
kind = "flat_be2d"
dt = 1e-3
n_steps = 10
"#;

    #[test]
    fn minimal_flat_run_gets_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.surface, SurfaceKind::FlatTorus { p1: TAU, p2: TAU });
        assert_eq!((c.n1, c.n2, c.scheme), (64, 64, DerivativeScheme::Spectral));
        assert_eq!(c.model, ModelParams::default());
        assert_eq!(c.options.sample_every, 1);
        assert_eq!(c.options.snapshot_every, 0);
        assert_eq!(c.output, PathBuf::from("results"));
        assert_eq!(c.init.velocity, VelocityInit::Zero);
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn unknown_keys_are_errors_with_a_line() {
        let text = MINIMAL.replace("n_steps = 10", "n_steps = 10\nn_stpes = 3");
        match parse_config_str(&text) {
            Err(CliError::Parse { line, message }) => {
                assert_eq!(line, 9, "{message}");
                assert!(message.contains("n_stpes"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config_str(&format!("{MINIMAL}\n[extra]\nx = 1\n")), Err(CliError::Parse { .. })));
    }

    #[test]
    fn xi_bound_is_strict_or_lax() {
        let strict = MINIMAL.replace("[solver]", "[model]\nxi = 2.0\n\n[solver]").replace("flat_be2d", "gradient_flow");
        assert!(matches!(parse_config_str(&strict), Err(CliError::Validation { key, .. }) if key == "model.xi"));
        let lax = strict.replace("xi = 2.0", "xi = 2.0\nstrict_xi = false");
        let c = parse_config_str(&lax).unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert!(c.warnings[0].contains("xi"));
    }

    #[test]
    fn flat_solver_needs_flat_torus() {
        let text = MINIMAL.replace("\"flat_torus\"", "\"embedded_torus\"");
        assert!(matches!(parse_config_str(&text), Err(CliError::Validation { key, .. }) if key == "solver.kind"));
    }

    #[test]
    fn reserved_elastic_constants_are_rejected() {
        let text = MINIMAL.replace("[solver]", "[model]\nL2 = 0.5\n\n[solver]");
        assert!(matches!(parse_config_str(&text), Err(CliError::Validation { key, .. }) if key == "model.L2"));
    }

    #[test]
    fn model_ranges_are_revalidated() {
        let text = MINIMAL.replace("[solver]", "[model]\nc = 0.0\n\n[solver]");
        assert!(matches!(parse_config_str(&text), Err(CliError::Validation { key, .. }) if key == "model.c"));
        let text = MINIMAL.replace("dt = 1e-3", "dt = -1.0");
        assert!(matches!(parse_config_str(&text), Err(CliError::Validation { key, .. }) if key == "solver.dt"));
    }

    #[test]
    fn beta_defaults_to_thermotropic_root() {
        let text = MINIMAL
            .replace("[solver]", "[model]\na = -5.0\nb = -6.0\nc = 3.0\n\n[solver]")
            .replace("\"flat_torus\"", "\"embedded_torus\"")
            .replace("flat_be2d", "gradient_flow");
        let c = parse_config_str(&text).unwrap();
        match c.beta {
            BetaChoice::Fixed(b) => assert!((b + 2.158_31 / 3.0).abs() < 1e-5),
            other => panic!("{other:?}"),
        }
        assert!((c.init.order - 2.158_31).abs() < 1e-5);
    }
}
