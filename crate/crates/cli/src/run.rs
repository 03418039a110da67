//! Run orchestration: builds the chart and initial state, dispatches to a
//! solver or term evaluator, and writes the output files.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use surfnema::diagnostics::{dissipation_audit, AuditSummary, EnergyReport};
use surfnema::geometry::{build_chart, ChartGeometry};
use surfnema::io::{
    read_energy_csv, state_fields, write_binary, write_energy_csv, write_vtk, NamedField, SnapshotData,
};
use surfnema::kinematics::{deformation_gradients, jaumann_rate_q, material_rate_q, VelocityState};
use surfnema::solvers::{
    random_tangential_q, random_tangential_velocity, run_flat_be2d, run_gradient_flow, run_stationary_nemato,
    taylor_green, uniform_uniaxial, BetaMode, SimState, TrajectoryRecord,
};
use surfnema::terms::{bending, elastic, immobility, inextensibility, nematic_viscous, thermotropic};
use surfnema::{Field, RateFlavor, TermBundle, TermTag};

use crate::config::{BetaChoice, QInit, RunConfig, SnapshotFormat, SolverKind, VelocityInit};
use crate::error::CliError;

pub fn chart(cfg: &RunConfig) -> Result<ChartGeometry, CliError> {
    Ok(build_chart(cfg.surface, cfg.n1, cfg.n2, cfg.scheme)?)
}

/// Initial state from the `[init]` generators.
pub fn initial_state(cfg: &RunConfig, chart: &ChartGeometry) -> SimState {
    let i = &cfg.init;
    let mut s = SimState::zeros(chart.len());
    s.v = match i.velocity {
        VelocityInit::Zero => Field::zeros(chart.len()),
        VelocityInit::TaylorGreen => taylor_green(chart, i.velocity_amplitude),
        VelocityInit::Random => random_tangential_velocity(chart, i.seed, i.velocity_amplitude, i.kmax),
    };
    match i.q {
        QInit::Zero => {}
        QInit::Random => s.q = random_tangential_q(chart, i.seed.wrapping_add(1), i.q_amplitude, i.kmax),
        QInit::Uniaxial => {
            let (q, beta) = uniform_uniaxial(chart, i.order, i.angle);
            s.q = q;
            s.beta = beta;
        }
    }
    if i.perturbation != 0.0 {
        s.q = s.q.add(&random_tangential_q(chart, i.seed.wrapping_add(2), i.perturbation, i.kmax));
    }
    if let BetaChoice::Fixed(b) = cfg.beta {
        if cfg.solver != SolverKind::FlatBe2d {
            s.beta = Field::constant(chart.len(), b);
        }
    }
    s
}

/// Runs the configured solver.
pub fn solve(cfg: &RunConfig, chart: &ChartGeometry, init: &SimState) -> Result<TrajectoryRecord, CliError> {
    let rec = match cfg.solver {
        SolverKind::FlatBe2d => run_flat_be2d(chart, &cfg.model, init, &cfg.options)?,
        SolverKind::GradientFlow => {
            let mode = match cfg.beta {
                BetaChoice::Fixed(b) => BetaMode::Fixed(b),
                BetaChoice::Free => BetaMode::Free,
            };
            run_gradient_flow(chart, &cfg.model, init, &cfg.options, mode)?
        }
        SolverKind::StationaryNemato => {
            let BetaChoice::Fixed(b) = cfg.beta else { unreachable!("validated: stationary runs fix beta") };
            run_stationary_nemato(chart, &cfg.model, init, b, &cfg.options)?
        }
    };
    Ok(rec)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes one snapshot in the configured format(s) as `<stem>.vtk` / `<stem>.bin`.
pub fn write_snapshot(
    cfg: &RunConfig,
    chart: &ChartGeometry,
    dir: &Path,
    stem: &str,
    title: &str,
    fields: &[NamedField],
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    if matches!(cfg.snapshot_format, SnapshotFormat::Vtk | SnapshotFormat::Both) {
        let path = dir.join(format!("{stem}.vtk"));
        let mut w = create(&path)?;
        write_vtk(&mut w, chart, title, fields).map_err(|e| CliError::io(&path, e))?;
        finish(w, &path)?;
        written.push(path);
    }
    if matches!(cfg.snapshot_format, SnapshotFormat::Binary | SnapshotFormat::Both) {
        let path = dir.join(format!("{stem}.bin"));
        let mut w = create(&path)?;
        write_binary(&mut w, cfg.n1, cfg.n2, fields).map_err(|e| CliError::io(&path, e))?;
        finish(w, &path)?;
        written.push(path);
    }
    Ok(written)
}

fn make_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Outcome of `simulate`.
pub struct SimulateReport {
    pub samples: usize,
    pub snapshots: usize,
    pub warnings: Vec<String>,
    pub final_energy: Option<f64>,
}

/// Runs a simulation and writes `energy.csv` plus `snapshot_NNNNNN.*` to `out`.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateReport, CliError> {
    let chart = chart(cfg)?;
    let init = initial_state(cfg, &chart);
    let rec = solve(cfg, &chart, &init)?;
    make_dir(out)?;
    let csv = out.join("energy.csv");
    let mut w = create(&csv)?;
    write_energy_csv(&mut w, &rec.samples).map_err(|e| CliError::io(&csv, e))?;
    finish(w, &csv)?;
    let step_of = |t: f64| (t / cfg.options.dt).round() as u64;
    for s in &rec.snapshots {
        let stem = format!("snapshot_{:06}", step_of(s.t));
        write_snapshot(cfg, &chart, out, &stem, &format!("t = {}", s.t), &state_fields(s))?;
    }
    Ok(SimulateReport {
        samples: rec.samples.len(),
        snapshots: rec.snapshots.len(),
        warnings: rec.warnings,
        final_energy: rec.samples.last().map(|s| s.e_tot),
    })
}

/// Term tags accepted by `terms-eval`.
pub const EVALUABLE: [TermTag; 8] =
    [TermTag::EL, TermTag::TH, TermTag::BE, TermTag::IM, TermTag::NV0, TermTag::NV1, TermTag::NV2, TermTag::IC];

/// Parses a comma-separated tag list.
pub fn parse_terms(list: &str) -> Result<Vec<TermTag>, CliError> {
    let mut tags = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let tag: TermTag = item.parse().map_err(|_| CliError::Validation {
            key: "--terms".into(),
            constraint: format!("unknown term '{item}'"),
        })?;
        if !EVALUABLE.contains(&tag) {
            return Err(CliError::Validation {
                key: "--terms".into(),
                constraint: format!("{tag} needs constraint multipliers and cannot be evaluated from a config state"),
            });
        }
        if !tags.contains(&tag) {
            tags.push(tag);
        }
    }
    if tags.is_empty() {
        return Err(CliError::Validation { key: "--terms".into(), constraint: "at least one term is required".into() });
    }
    Ok(tags)
}

/// Evaluates the requested terms on the configured initial state, with
/// `d_t Q = 0` so that the rates are purely advective/co-rotational.
pub fn evaluate_terms(
    cfg: &RunConfig,
    chart: &ChartGeometry,
    state: &SimState,
    tags: &[TermTag],
) -> Result<Vec<TermBundle>, CliError> {
    let p = &cfg.model;
    let vel = VelocityState::tangential(state.v.clone());
    let zero = Field::zeros(chart.len());
    let rate = || -> Result<_, CliError> {
        Ok(match p.phi {
            RateFlavor::Jaumann => jaumann_rate_q(chart, &zero, &vel, &state.q)?,
            RateFlavor::Material => material_rate_q(chart, &zero, &vel, &state.q)?,
        })
    };
    let mut nv: Option<[TermBundle; 3]> = None;
    let mut out = Vec::new();
    for &tag in tags {
        let b = match tag {
            TermTag::EL => elastic(chart, p, &state.q)?,
            TermTag::TH => thermotropic(chart, p, &state.q)?,
            TermTag::BE => bending(chart, p),
            TermTag::IM => immobility(chart, p, &state.q, &rate()?, p.phi)?,
            TermTag::IC => inextensibility(chart, &state.p)?,
            TermTag::NV0 | TermTag::NV1 | TermTag::NV2 => {
                if nv.is_none() {
                    let r = rate()?;
                    let dg = deformation_gradients(chart, &vel.full(chart))?;
                    let terms = nematic_viscous(chart, p, &state.q, &r, p.phi, &dg, cfg.options.nv_form)?;
                    nv = Some(terms.bundles(chart, p, &r));
                }
                let idx = match tag {
                    TermTag::NV0 => 0,
                    TermTag::NV1 => 1,
                    _ => 2,
                };
                nv.as_ref().expect("filled above")[idx].clone()
            }
            other => unreachable!("{other} rejected by parse_terms"),
        };
        out.push(b);
    }
    Ok(out)
}

/// Named outputs of one bundle.
pub fn bundle_fields(b: &TermBundle) -> Vec<NamedField> {
    let mut f = Vec::new();
    if let Some(s) = &b.sigma {
        f.push(NamedField::new("sigma", SnapshotData::Matrix(s.data.clone())));
    }
    if let Some(v) = &b.force {
        f.push(NamedField::new("force", SnapshotData::Vector(v.data.clone())));
    }
    if let Some(h) = &b.h {
        f.push(NamedField::new("h", SnapshotData::Matrix(h.data.clone())));
    }
    if let Some(p) = &b.pressure {
        f.push(NamedField::new("pressure", SnapshotData::Scalar(p.data.clone())));
    }
    if let Some(c) = &b.conforming {
        if let Some(fp) = &c.f_perp {
            f.push(NamedField::new("f_perp", SnapshotData::Scalar(fp.data.clone())));
        }
        if let Some(w) = &c.omega {
            f.push(NamedField::new("omega", SnapshotData::Scalar(w.data.clone())));
        }
    }
    f
}

/// Writes `term_<TAG>.*` for each requested term. Returns the paths written.
pub fn terms_eval(cfg: &RunConfig, tags: &[TermTag], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let chart = chart(cfg)?;
    let state = initial_state(cfg, &chart);
    let bundles = evaluate_terms(cfg, &chart, &state, tags)?;
    make_dir(out)?;
    let mut written = Vec::new();
    for b in &bundles {
        let title = match b.energy {
            Some(e) => format!("term {} energy {e:.16e}", b.tag),
            None => format!("term {}", b.tag),
        };
        written.extend(write_snapshot(cfg, &chart, out, &format!("term_{}", b.tag), &title, &bundle_fields(b))?);
    }
    Ok(written)
}

/// Reads an energy CSV and audits it.
pub fn energy_audit(path: &Path) -> Result<(Vec<EnergyReport>, AuditSummary), CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let samples = read_energy_csv(BufReader::new(f)).map_err(|e| CliError::io(path, e))?;
    let summary = dissipation_audit(&samples)?;
    Ok((samples, summary))
}

/// Largest per-sample energy increase relative to `|E_tot|`.
pub fn worst_energy_increase(samples: &[EnergyReport]) -> f64 {
    samples
        .windows(2)
        .map(|w| (w[1].e_tot - w[0].e_tot) / w[0].e_tot.abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Writes `t,residual` rows of an audit.
pub fn write_audit_csv(path: &Path, summary: &AuditSummary) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut body = String::from("t,audit_residual\n");
    for (t, r) in &summary.residuals {
        body.push_str(&format!("{t:.16e},{r:.16e}\n"));
    }
    w.write_all(body.as_bytes()).map_err(|e| CliError::io(path, e))?;
    finish(w, path)
}
