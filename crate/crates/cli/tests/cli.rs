//! End-to-end runs of the `bardina` binary.

use std::path::Path;
use std::process::Command;

use bardina_cli::RunConfig;

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

const SHEAR: &str = r#"
[grid]
n = 8
box_len = 6.283185307179586

[params]
alpha = 1.0
beta = 1.0
nu = 0.5

[initial]
kind = "shear"
amplitude = 1.0

[force]
kind = "shear"
amplitude = 0.0

[run]
dt = 0.001
t_end = 0.5
sample_every = 1

[bound]
f_norm = 0.0
"#;

fn bardina(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bardina")).args(args).output().unwrap()
}

#[test]
fn simulate_shear_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHEAR);
    let out = dir.path().join("out");
    let o = bardina(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("trajectory.csv")).unwrap();
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    let e0 = rows[0][4];
    for r in &rows {
        let exact = e0 * (-2.0 * 1.5 * r[0]).exp();
        assert!((r[4] - exact).abs() <= 1e-10 * e0);
    }
    assert_eq!(rows.len(), 501);
}

#[test]
fn declared_outputs_exist() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHEAR);
    for cmd in ["simulate", "stationary", "bound", "lyapunov", "gap", "decay"] {
        let out = dir.path().join(cmd);
        let o = bardina(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
        assert_eq!(meta["subcommand"], cmd);
        for f in meta["outputs"].as_array().unwrap() {
            let len = std::fs::metadata(out.join(f.as_str().unwrap())).unwrap().len();
            assert!(len > 0, "{cmd}: {f} is empty");
        }
    }
}

#[test]
fn bound_with_zero_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHEAR);
    let out = dir.path().join("b");
    let o = bardina(&["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("bound.json")).unwrap()).unwrap();
    assert_eq!(v["dimension"]["bound"], 0.0);
    assert_eq!(v["eta"]["regime"], "negative");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();

    let bad = write_config(dir.path(), "[grid]\nn = 7\n");
    assert_eq!(bardina(&["simulate", "--config", bad.to_str().unwrap(), "--out", o]).status.code(), Some(2));

    let cfl = write_config(dir.path(), &SHEAR.replace("dt = 0.001", "dt = 5.0"));
    assert_eq!(bardina(&["simulate", "--config", cfl.to_str().unwrap(), "--out", o]).status.code(), Some(2));

    let hard = SHEAR
        .replace("kind = \"shear\"\namplitude = 0.0", "kind = \"random_band\"\namplitude = 60.0\nseed = 3")
        .replace("nu = 0.5", "nu = 0.01")
        .replace("beta = 1.0", "beta = 0.05")
        + "\n[stationary]\ntol = 1e-10\nrelaxation = 1.0\nmax_iter = 5\n";
    let hard = write_config(dir.path(), &hard);
    let r = bardina(&["stationary", "--config", hard.to_str().unwrap(), "--out", o]);
    assert_eq!(r.status.code(), Some(4), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.join("residual_history.csv").exists());

    let strict = write_config(
        dir.path(),
        &SHEAR.replace("sample_every = 1", "sample_every = 25\nenergy_tol = 1e-14")
            .replace("kind = \"shear\"\namplitude = 1.0", "kind = \"abc\"\namplitude = 0.5"),
    );
    assert_eq!(bardina(&["simulate", "--config", strict.to_str().unwrap(), "--out", o]).status.code(), Some(5));
}

#[test]
fn effective_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHEAR);
    let out = dir.path().join("o");
    bardina(&["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("config.toml")).unwrap();
    let parsed = RunConfig::parse(&text).unwrap();
    assert_eq!(parsed, RunConfig::parse(SHEAR).unwrap());
    assert_eq!(parsed.to_toml(), text);
}

#[test]
fn thread_override_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHEAR);
    let out = dir.path().join("o");
    let o = Command::new(env!("CARGO_BIN_EXE_bardina"))
        .args(["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("BARDINA_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["threads"], 3);
}
