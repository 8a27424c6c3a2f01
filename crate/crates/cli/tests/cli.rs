use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(sub: &str, config: &str, dir: &Path) -> Output {
    let cfg = dir.join("run.conf");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_crackwave"))
        .args([sub, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(["--jobs", "2"])
        .output()
        .unwrap()
}

fn csv(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = run("err-sweep", "material.eta = 0\nmaterial.colour = 3\n", dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_grid_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = run("dispersion", "sweep.variable = \"k_ell\"\nsweep.grid = \"log(1, 0)\"\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn super_rayleigh_speed_is_a_regime_violation() {
    let dir = TempDir::new().unwrap();
    let conf = "material.eta = -0.9\nmaterial.h0 = 0.707\ncrack.m = 0.6\nload.L_over_ell = 10\n";
    let out = run("err-sweep", conf, dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("out/err-sweep.csv").exists());
}

#[test]
fn dispersion_at_zero_eta_is_the_shear_wave() {
    let dir = TempDir::new().unwrap();
    let conf = "material.eta = 0\nmaterial.h0 = [0.3, 0.8]\nsweep.variable = \"k_ell\"\nsweep.grid = \"log(1e-2, 1e2, 40)\"\n";
    let out = run("dispersion", conf, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(dir.path().join("out/dispersion.csv"));
    assert_eq!(rows.len(), 80);
    let (h, k, m) = (column(&header, "h0"), column(&header, "k_ell"), column(&header, "m_R_vR_over_cs"));
    for r in &rows {
        let h0: f64 = r[h].parse().unwrap();
        let k2 = r[k].parse::<f64>().unwrap().powi(2);
        let exact = ((1.0 + k2 / 2.0) / (1.0 + h0 * h0 * k2)).sqrt();
        assert!((r[m].parse::<f64>().unwrap() - exact).abs() < 1e-8);
    }
}

#[test]
fn err_sweep_grows_with_speed_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let conf = "material.eta = 0\nmaterial.h0 = 0.01\nload.p = 0\nload.L_over_ell = 10\n\
                crack.m_relative = true\nsweep.variable = \"m\"\nsweep.grid = \"lin(0, 0.9, 10)\"\n";
    assert!(run("err-sweep", conf, dir.path()).status.success());
    let path = dir.path().join("out/err-sweep.csv");
    let first = fs::read(&path).unwrap();
    assert!(run("err-sweep", conf, dir.path()).status.success());
    assert_eq!(first, fs::read(&path).unwrap());

    let (header, rows) = csv(path);
    for name in ["G", "rho", "ell", "eta", "h0", "T0", "L_over_ell", "p", "m_v_over_cs"] {
        column(&header, name);
    }
    let e = column(&header, "E_G_ell_over_T0sq");
    let es: Vec<f64> = rows.iter().map(|r| r[e].parse().unwrap()).collect();
    assert_eq!(es.len(), 10);
    assert!(es.windows(2).all(|w| w[1] > w[0]), "{es:?}");
}

#[test]
fn validate_writes_report_and_passes() {
    let dir = TempDir::new().unwrap();
    let conf = "material.eta = 0\nmaterial.h0 = 0.707\nload.p = 1\nload.L_over_ell = 10\ncrack.m = 0.3\n";
    let out = run("validate", conf, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let (header, rows) = csv(dir.path().join("out/validate_report.csv"));
    assert_eq!(header, ["check_id", "target", "computed", "tolerance", "pass"]);
    assert!(rows.iter().any(|r| r[0].starts_with("balance")));
    assert!(rows.iter().all(|r| r.last().unwrap() == "true"));
    assert!(dir.path().join("out/validate.csv").exists());
}
