//! End-to-end runs of every subcommand against committed golden reports.
//!
//! `FRACMHD_BLESS=1 cargo test -p fracmhd-cli` rewrites the goldens.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const REL_TOL: f64 = 1e-9;
const ABS_TOL: f64 = 1e-13;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn config(name: &str) -> PathBuf {
    manifest().join("tests/configs").join(format!("{name}.toml"))
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracmhd"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn close(a: &Value, b: &Value, at: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= ABS_TOL + REL_TOL * x.abs().max(y.abs()) {
                Ok(())
            } else {
                Err(format!("{at}: {x} vs golden {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            x.iter().zip(y).enumerate().try_for_each(|(i, (p, q))| close(p, q, &format!("{at}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => x.iter().try_for_each(|(k, v)| {
            let w = y.get(k).ok_or_else(|| format!("{at}.{k}: missing from golden"))?;
            close(v, w, &format!("{at}.{k}"))
        }),
        _ if a == b => Ok(()),
        _ => Err(format!("{at}: {a} vs golden {b}")),
    }
}

fn check_golden(report: &Path, golden: &str) {
    let path = manifest().join("tests/golden").join(golden);
    let got = read_json(report);
    if std::env::var_os("FRACMHD_BLESS").is_some() {
        fs::write(&path, fs::read(report).unwrap()).unwrap();
        return;
    }
    if let Err(e) = close(&got, &read_json(&path), "$") {
        panic!("{golden}: {e}");
    }
}

/// Runs `sub` on config `name`, expects `code`, and compares `report` with its golden.
fn golden_case(sub: &str, name: &str, report: &str, code: i32) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[sub, config(name).to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(code), "{}", String::from_utf8_lossy(&out.stderr));
    check_golden(&dir.path().join(report), &format!("{name}.json"));
    dir
}

#[test]
fn simulate_random() {
    let dir = golden_case("simulate", "simulate", "summary.json", 0);
    let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,b_l2_sq,b_hbeta_sq,u_halpha_sq,u_weak_lorentz,energy_residual,max_div_b,max_div_u"
    );
    assert_eq!(csv.lines().count(), 1 + 11);
    for name in ["snapshot_00000.fmhd", "snapshot_00001.fmhd", "snapshot_00002.fmhd"] {
        let b = fracmhd::snapshot::load(dir.path().join(name)).unwrap();
        assert_eq!(b.ncomp(), 2);
    }
}

#[test]
fn simulate_from_rest_gives_zero_records() {
    let dir = golden_case("simulate", "simulate_zero", "summary.json", 0);
    let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(vals[1..].iter().all(|&v| v == 0.0), "{row}");
    }
}

#[test]
fn simulate_modes() {
    golden_case("simulate", "simulate_modes", "summary.json", 0);
}

#[test]
fn stokes_random_load() {
    let dir = golden_case("stokes", "stokes", "stokes.json", 0);
    let u = fracmhd::snapshot::load(dir.path().join("stokes_velocity.fmhd")).unwrap();
    assert_eq!(u.ncomp(), 3);
}

#[test]
fn stokes_reads_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let grid = fracmhd::GridSpec::new(2, 16, 1.0).unwrap();
    let f = fracmhd::random::random_field(grid, 4, 1.0, 4, 9);
    fracmhd::snapshot::save(dir.path().join("load.fmhd"), &f).unwrap();
    let cfg = dir.path().join("stokes.toml");
    fs::write(&cfg, "[stokes]\nalpha = 1.5\ninput = \"load.fmhd\"\n").unwrap();
    let out = run(&["stokes", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("out/stokes.json"));
    assert!(r["plugback_residual"].as_f64().unwrap() < 1e-10);
    assert!(r["energy_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["alpha_in_kernel_range"], Value::Bool(false));
}

#[test]
fn kernel_check() {
    golden_case("kernel-check", "kernel", "kernel-check.json", 0);
}

#[test]
fn regime_three_one_one() {
    let dir = golden_case("regime", "regime", "regime.json", 0);
    let r = read_json(&dir.path().join("regime.json"));
    assert_eq!(r["existence"], Value::Bool(true));
    assert_eq!(r["uniqueness"], Value::Bool(false));
}

#[test]
fn estimate_product() {
    golden_case("estimate-check", "estimate_product", "estimate-check.json", 0);
}

#[test]
fn estimate_commutator() {
    golden_case("estimate-check", "estimate_commutator", "estimate-check.json", 0);
}

#[test]
fn convergence() {
    golden_case("convergence", "convergence", "convergence.json", 0);
}

#[test]
fn stability() {
    golden_case("stability", "stability", "stability.json", 0);
}

#[test]
fn bogovskii_check() {
    golden_case("bogovskii-check", "bogovskii", "bogovskii-check.json", 0);
}

#[test]
fn failed_assertion_exits_two() {
    golden_case("bogovskii-check", "bogovskii_strict", "bogovskii-check.json", 2);
}

#[test]
fn reports_are_bitwise_deterministic() {
    for (sub, name, report) in [
        ("estimate-check", "estimate_product", "estimate-check.json"),
        ("simulate", "simulate", "summary.json"),
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for dir in [&a, &b] {
            assert_eq!(run(&[sub, config(name).to_str().unwrap()], dir.path()).status.code(), Some(0));
        }
        assert_eq!(fs::read(a.path().join(report)).unwrap(), fs::read(b.path().join(report)).unwrap());
    }
}

#[test]
fn seed_flag_overrides_config() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("estimate_commutator");
    run(&["estimate-check", cfg.to_str().unwrap(), "--seed", "2"], a.path());
    run(&["estimate-check", cfg.to_str().unwrap(), "--seed", "5"], b.path());
    let (ra, rb) = (read_json(&a.path().join("estimate-check.json")), read_json(&b.path().join("estimate-check.json")));
    assert_eq!(ra["seed"], 2);
    assert_eq!(rb["seed"], 5);
    assert_ne!(ra["coarse"]["max_ratio"], rb["coarse"]["max_ratio"]);
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["regime", "/nonexistent/regime.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonexistent"));
}

#[test]
fn unknown_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[regime]\nd = 3\nalpha = 1.0\nbeta = 1.0\ngamma = 2.0\n").unwrap();
    let out = run(&["regime", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
}

#[test]
fn missing_section_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["stability", config("regime").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_error_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["no-such-command"], dir.path()).status.code(), Some(1));
}
