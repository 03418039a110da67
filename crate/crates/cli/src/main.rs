//! `surfnema`: simulate, verify and audit surface nematodynamics runs.
//!
//! Exit codes: 0 success, 1 invalid input, 2 runtime abort (blow-up,
//! projection failure, I/O), 3 failed verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surfnema::diagnostics::verify_lemmas;

use crate::config::parse_config;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "surfnema", version, about = "Surface Beris-Edwards nematodynamics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured solver; writes energy.csv and snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output.directory`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the algebraic and discrete-calculus identities on random inputs.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Dissipation audit of an energy CSV written by `simulate`.
    EnergyAudit {
        #[arg(long)]
        trajectory: PathBuf,
        /// Fail (exit 3) when the relative audit residual exceeds this.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Write the per-sample residuals to this CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate model terms on the configured initial state and dump them.
    TermsEval {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated tags: EL, TH, BE, IM, NV0, NV1, NV2, IC.
        #[arg(long, default_value = "EL,TH")]
        terms: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SURFNEMA_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| CliError::Validation {
        key: "SURFNEMA_THREADS".into(),
        constraint: format!("must be a non-negative integer, got '{raw}'"),
    })?;
    // 0 keeps rayon's automatic choice.
    if n > 0 {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn simulate(config: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = parse_config(config)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let out = out.unwrap_or_else(|| cfg.output.clone());
    let rep = run::simulate(&cfg, &out)?;
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} samples and {} snapshots to {}", rep.samples, rep.snapshots, out.display());
    if let Some(e) = rep.final_energy {
        println!("final E_tot = {e:.10e}");
    }
    Ok(())
}

fn verify(seed: u64, samples: usize) -> Result<(), CliError> {
    let rep = verify_lemmas(seed, samples);
    print!("{rep}");
    let failed = rep.checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} of {} checks failed", rep.checks.len())));
    }
    println!("all {} checks passed", rep.checks.len());
    Ok(())
}

fn energy_audit(trajectory: &Path, tolerance: Option<f64>, out: Option<PathBuf>) -> Result<(), CliError> {
    if let Some(t) = tolerance {
        if !(t >= 0.0) {
            return Err(CliError::Validation { key: "--tolerance".into(), constraint: "must be non-negative".into() });
        }
    }
    let (samples, summary) = run::energy_audit(trajectory)?;
    println!("samples              {}", samples.len());
    println!("t range              [{}, {}]", samples[0].t, samples[samples.len() - 1].t);
    println!("E_tot first/last     {:.10e} / {:.10e}", samples[0].e_tot, samples[samples.len() - 1].e_tot);
    println!("max energy increase  {:.3e} (relative, per sample)", run::worst_energy_increase(&samples));
    println!("max |audit residual| {:.3e}", summary.max_abs);
    println!("relative residual    {:.3e}", summary.max_rel);
    if let Some(path) = out {
        run::write_audit_csv(&path, &summary)?;
        println!("residuals written to {}", path.display());
    }
    match tolerance {
        Some(t) if !(summary.max_rel <= t) => {
            Err(CliError::Verification(format!("relative audit residual {:.3e} exceeds {t:e}", summary.max_rel)))
        }
        _ => Ok(()),
    }
}

fn terms_eval(config: &Path, terms: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = parse_config(config)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let tags = run::parse_terms(terms)?;
    let out = out.unwrap_or_else(|| cfg.output.clone());
    for p in run::terms_eval(&cfg, &tags, &out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Verify { seed, samples } => verify(seed, samples),
        Command::EnergyAudit { trajectory, tolerance, out } => energy_audit(&trajectory, tolerance, out),
        Command::TermsEval { config, terms, out } => terms_eval(&config, &terms, out),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
