use std::path::Path;
use std::process::{Command, Output};

use awgauss::fsde::FsdeSpec;
use awgauss::func::ScalarFn;
use awgauss::kernels::{GaussianProcessSpec, VolterraKernel};

fn awgauss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_awgauss"))
        .args(args)
        .env_remove("AWGAUSS_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn fbm_distance_json_is_reproducible() {
    let args = ["aw-fbm", "--h1", "0.5", "--h2", "0.75", "--grid", "128"];
    let (a, b) = (awgauss(&args), awgauss(&args));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let d = v["distance_squared"].as_f64().unwrap();
    assert!((d - 0.05515).abs() < 2e-4, "{d}");
    assert_eq!(v["grid"]["method"], "fbm");
}

#[test]
fn sweep_csv() {
    let o = awgauss(&["aw-fbm", "--sweep", "--sweep-min", "0.3", "--sweep-max", "0.7", "--sweep-steps", "3", "--grid", "32", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "H1,H2,aw_squared");
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[1], "0.3,0.3,0");
    for l in &lines[1..] {
        let v: f64 = l.split(',').nth(2).unwrap().parse().unwrap();
        assert!(v >= 0.0);
    }
}

#[test]
fn discrete_from_csv_files_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let c1 = write(dir.path(), "c1.csv", "1,1\n1,2\n");
    let c2 = write(dir.path(), "c2.csv", "1,0\n0,1\n");
    let out = dir.path().join("out.csv");
    let o = awgauss(&["aw-discrete", "--cov1", &c1, "--cov2", &c2, "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text, "distance_squared,trace_term,cross_term\n1,5,2\n");
}

#[test]
fn validation_errors_exit_2() {
    let o = awgauss(&["aw-fbm", "--h1", "1.5", "--h2", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Hurst"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "1,2\n2,1\n");
    let good = write(dir.path(), "good.csv", "1,0\n0,1\n");
    let o = awgauss(&["aw-discrete", "--cov1", &bad, "--cov2", &good]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(awgauss(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(awgauss(&["aw-unit", "--h1", "0.5"]).status.code(), Some(2));
    assert_eq!(awgauss(&[]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // exp drift explodes within the horizon
    let sc = write(
        dir.path(),
        "blowup.json",
        r#"{"h1": 0.5, "h2": 0.5, "drift1": {"kind": "linear", "slope": 200.0}, "x0": [1.0, 1.0], "T": 1.0, "M": 16, "n_paths": 4, "seed": 1}"#,
    );
    let o = awgauss(&["simulate", "--scenario", &sc]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exploded"));
}

#[test]
fn run_config_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"command": "mart-approx", "parameters": {"H": 0.7, "T": 1.0}, "grid": 64, "format": "json"}"#,
    );
    let a = awgauss(&["--config", &cfg]);
    let b = awgauss(&["mart-approx", "--H", "0.7", "--T", "1", "--grid", "64"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["r"].as_array().unwrap().len(), 64);
}

#[test]
fn unit_and_multi_from_spec_files() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = write(dir.path(), "s1.json", &serde_json::to_string(&GaussianProcessSpec::fbm(0.6, 1.0).unwrap()).unwrap());
    let s2 = write(dir.path(), "s2.json", &serde_json::to_string(&GaussianProcessSpec::fbm(0.8, 1.0).unwrap()).unwrap());
    let unit = awgauss(&["aw-unit", "--spec1", &s1, "--spec2", &s2, "--grid", "64", "--format", "csv"]);
    let multi = awgauss(&["aw-multi", "--spec1", &s1, "--spec2", &s2, "--grid", "64", "--format", "csv"]);
    let fbm = awgauss(&["aw-fbm", "--h1", "0.6", "--h2", "0.8", "--grid", "64", "--format", "csv"]);
    assert!(unit.status.success() && multi.status.success());
    let row = |o: &Output| -> Vec<f64> { stdout(o).lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect() };
    let u = row(&unit);
    for other in [row(&multi), row(&fbm)] {
        for (a, b) in u.iter().zip(&other) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    let ou = awgauss(&["aw-unit", "--h1", "0.6", "--h2", "0.6", "--lambda", "1", "--grid", "64", "--crosscheck-tol", "1e-2"]);
    assert!(ou.status.success(), "{}", String::from_utf8_lossy(&ou.stderr));
}

#[test]
fn simulate_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "sc.json",
        r#"{"h1": 0.6, "h2": 0.8, "drift1": {"kind": "tanh"}, "drift2": {"kind": "tanh"}, "T": 1.0, "M": 32,
            "n_paths": 200, "seed": 5, "controls": [{"kind": "synchronous"}, {"kind": "antithetic"}]}"#,
    );
    let p1 = dir.path().join("p1.csv");
    let p4 = dir.path().join("p4.csv");
    let one = awgauss(&["simulate", "--scenario", &sc, "--threads", "1", "--paths-csv", p1.to_str().unwrap()]);
    let four = awgauss(&["simulate", "--scenario", &sc, "--threads", "4", "--paths-csv", p4.to_str().unwrap()]);
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let (c1, c4) = (std::fs::read(&p1).unwrap(), std::fs::read(&p4).unwrap());
    assert_eq!(c1, c4);
    let text = String::from_utf8(c1).unwrap();
    assert!(text.starts_with("path_id,t,x1,x2\n0,0,0,0\n"));
    assert_eq!(text.lines().count(), 1 + 10 * 33);

    let est: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert!(est[0]["mean"].as_f64().unwrap() < est[1]["mean"].as_f64().unwrap());
}

#[test]
fn check_assumptions_report() {
    let dir = tempfile::tempdir().unwrap();
    let fsde = FsdeSpec::new(ScalarFn::Tanh, ScalarFn::constant(1.0), 0.0, VolterraKernel::molchan_golosov(0.7, 1.0).unwrap()).unwrap();
    let spec = write(dir.path(), "spec.json", &serde_json::to_string(&fsde).unwrap());
    let o = awgauss(&["check-assumptions", "--spec", &spec, "--format", "csv", "--points", "21"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("name,pass,worst,witness\n"));
    assert!(text.contains("diffusion_bounded_away_from_zero,true"));

    let o = awgauss(&["check-assumptions", "--spec", &spec, "--state-lo", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn regen_goldens_rejects_csv() {
    assert_eq!(awgauss(&["regen-goldens", "--format", "csv"]).status.code(), Some(2));
}
