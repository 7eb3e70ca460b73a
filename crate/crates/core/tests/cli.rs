use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nsstab"))
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("case.toml");
    fs::write(&p, text).unwrap();
    p
}

const SHORT: &str = r#"
name = "short"
[eos]
builtin = "NUC-1"
[domain]
mass = 1.0
cells = 8
p_gamma = 0.5
theta_gamma = 0.1
[initial]
eta = "0.4833"
v = "0.01*sin(pi*x/M)"
theta = "0.1"
[solver]
t_end = 0.0
"#;

#[test]
fn zero_length_simulation_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    let lines: Vec<&str> = series.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("t,step,dt,E,D,V"));
    for f in ["profile_final.csv", "steady.csv", "summary.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn invalid_boundary_temperature_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SHORT.replace("theta_gamma = 0.1", "theta_gamma = -1.0"));
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta_gamma"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = run(&["validate-eos", "--config", "/nonexistent/case.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_builtin_laws() {
    let o = run(&["validate-eos", "--config", preset("s1").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("-1.0531"), "{text}");
    assert!(text.contains("result: pass"));
    let o = run(&["validate-eos", "--config", preset("s5").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn pressure_plateau_fails_validation() {
    // p(η, θ) is flat at 1 on [1, 2] because p1 ≡ 0
    let text = r#"
name = "plateau"
[eos]
family = "nuclear"
big_p0 = "(1-step(eta-1))*(1.5-0.5*eta^-2) + step(eta-1)*(1-step(eta-2))*eta + step(eta-2)*(3-4*eta^-2)"
big_p1 = "0"
p0 = "max(eta^-3, min(1, 8*eta^-3))"
p1 = "0"
kappa = "1"
[domain]
mass = 1.0
cells = 8
p_gamma = 1.0
theta_gamma = 0.1
[initial]
eta = "1.5"
v = "0"
theta = "0.1"
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), text);
    let o = run(&["validate-eos", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("plateau"));
}

#[test]
fn stationary_analysis_lists_three_roots() {
    let o = run(&["analyze-stationary", "--config", preset("s2").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).collect();
    assert_eq!(rows.len(), 100);
    for r in rows {
        assert_eq!(r.split(',').nth(3), Some("3"), "{r}");
    }
}

#[test]
fn sweep_rejects_empty_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = dir.path().join("sweep");
    let o = run(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--axis", "domain.p_gamma", "--values", "", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SHORT.replace("t_end = 0.0", "t_end = 0.05"));
    let out = dir.path().join("sweep");
    let o = bin()
        .args([
            "sweep", "--config", cfg.to_str().unwrap(), "--axis", "domain.p_gamma", "--values", "0.5,0.2,0.05",
            "--out", out.to_str().unwrap(),
        ])
        .env("NSSTAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..3 {
        assert!(out.join(format!("run_{i}")).join("series.csv").exists());
    }
    let index = fs::read_to_string(out.join("sweep_index.csv")).unwrap();
    let values: Vec<f64> = index.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values, vec![0.5, 0.2, 0.05]);
}

#[test]
fn tension_scenario_reports_volume_growth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s3");
    let o = run(&["simulate", "--config", preset("s3").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let code = o.status.code().unwrap();
    assert!(code == 0 || code == 2, "{code}");
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    let ratio: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("volume_ratio: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio > 2.0, "{ratio}");
    assert!(summary.contains("classification: unavailable"));
}
