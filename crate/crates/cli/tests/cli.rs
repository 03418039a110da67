//! Runs the `surfnema` binary end to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const FLAT: &str = r#"
[surface]
kind = "flat_torus"
n1 = 16
n2 = 16

[model]
a = -1.0
b = -1.0
c = 1.0
upsilon = 0.5
xi = 0.5

[solver]
kind = "flat_be2d"
dt = 1e-3
n_steps = 40
sample_every = 2
snapshot_every = 20

[init]
velocity = "taylor_green"
velocity_amplitude = 0.5
q = "random"
seed = 7

[output]
snapshot_format = "both"
"#;

fn surfnema(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfnema")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn simulate(dir: &Path, text: &str, out: &str) -> (Output, PathBuf) {
    let cfg = write_config(dir, &format!("{out}.toml"), text);
    let out = dir.join(out);
    let o = surfnema(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    (o, out)
}

#[test]
fn simulate_writes_energy_csv_and_snapshots() {
    let tmp = TempDir::new().unwrap();
    let (o, out) = simulate(tmp.path(), FLAT, "run");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("energy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,E_K,E_EL,E_TH,E_BE,E_tot,R_IM,R_NV,audit_residual,inext_residual");
    assert_eq!(lines.count(), 21);
    for step in ["000000", "000020", "000040"] {
        assert!(out.join(format!("snapshot_{step}.vtk")).exists(), "{step}");
        assert!(out.join(format!("snapshot_{step}.bin")).exists(), "{step}");
    }
    let vtk = fs::read_to_string(out.join("snapshot_000000.vtk")).unwrap();
    assert!(vtk.contains("DIMENSIONS 16 16 1"));
}

#[test]
fn reruns_give_bit_identical_csv() {
    let tmp = TempDir::new().unwrap();
    let (a, out_a) = simulate(tmp.path(), FLAT, "a");
    let (b, out_b) = simulate(tmp.path(), FLAT, "b");
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert_eq!(fs::read(out_a.join("energy.csv")).unwrap(), fs::read(out_b.join("energy.csv")).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", FLAT);
    let mut csv = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_surfnema"))
            .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .env("SURFNEMA_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        csv.push(fs::read(out.join("energy.csv")).unwrap());
    }
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn energy_audit_summarizes_a_trajectory() {
    let tmp = TempDir::new().unwrap();
    let (o, out) = simulate(tmp.path(), FLAT, "run");
    assert_eq!(code(&o), 0);
    let traj = out.join("energy.csv");
    let res = tmp.path().join("audit.csv");
    let o = surfnema(&["energy-audit", "--trajectory", traj.to_str().unwrap(), "--out", res.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("max |audit residual|"), "{text}");
    assert_eq!(fs::read_to_string(&res).unwrap().lines().count(), 1 + 19);
    // An impossible tolerance is a verification failure.
    let o = surfnema(&["energy-audit", "--trajectory", traj.to_str().unwrap(), "--tolerance", "1e-300"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_passes() {
    let o = surfnema(&["verify", "--seed", "42", "--samples", "50"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn terms_eval_dumps_requested_bundles() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "run.toml", FLAT);
    let out = tmp.path().join("terms");
    let o = surfnema(&[
        "terms-eval",
        "--config",
        cfg.to_str().unwrap(),
        "--terms",
        "EL,th,NV1,IC",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for tag in ["EL", "TH", "NV1", "IC"] {
        assert!(out.join(format!("term_{tag}.bin")).exists(), "{tag}");
    }
    let o = surfnema(&["terms-eval", "--config", cfg.to_str().unwrap(), "--terms", "XX"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unknown_key_is_a_parse_error() {
    let tmp = TempDir::new().unwrap();
    let (o, _) = simulate(tmp.path(), &FLAT.replace("n_steps = 40", "n_steps = 40\nn_stpes = 4"), "run");
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn flat_solver_on_embedded_torus_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let (o, _) = simulate(tmp.path(), &FLAT.replace("\"flat_torus\"", "\"embedded_torus\""), "run");
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("solver.kind"));
}

#[test]
fn xi_bound_errors_when_strict_and_warns_when_lax() {
    let tmp = TempDir::new().unwrap();
    let gf = FLAT
        .replace("xi = 0.5", "xi = 2.0")
        .replace("\"flat_be2d\"", "\"gradient_flow\"")
        .replace("velocity = \"taylor_green\"", "velocity = \"zero\"")
        .replace("n_steps = 40", "n_steps = 4");
    let (o, _) = simulate(tmp.path(), &gf, "strict");
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("model.xi"));
    let (o, out) = simulate(tmp.path(), &gf.replace("xi = 2.0", "xi = 2.0\nstrict_xi = false"), "lax");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    assert!(out.join("energy.csv").exists());
}

#[test]
fn blow_up_exits_with_runtime_code() {
    let tmp = TempDir::new().unwrap();
    let bad = FLAT
        .replace("a = -1.0", "a = -40.0")
        .replace("dt = 1e-3", "dt = 0.5")
        .replace("n_steps = 40", "n_steps = 200\nblowup_factor = 1e3");
    let (o, _) = simulate(tmp.path(), &bad, "run");
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("blow-up"));
}

#[test]
fn missing_config_and_bad_arguments() {
    let o = surfnema(&["simulate", "--config", "/nonexistent/run.toml", "--out", "/tmp/x"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&surfnema(&["frobnicate"])), 1);
    assert_eq!(code(&surfnema(&["--help"])), 0);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            // Zero steps: exercises parsing, validation and chart setup only.
            let text = fs::read_to_string(&path).unwrap();
            let text = text
                .lines()
                .map(|l| if l.starts_with("n_steps") { "n_steps = 0" } else { l })
                .collect::<Vec<_>>()
                .join("\n");
            let tmp = TempDir::new().unwrap();
            let (o, _) = simulate(tmp.path(), &text, "run");
            assert_eq!(code(&o), 0, "{}: {}", path.display(), stderr(&o));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
