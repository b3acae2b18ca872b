use std::path::PathBuf;
use std::process::{Command, Output};

fn qbatt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbatt"))
        .args(args)
        .env_remove("QBATT_THREADS")
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("seq.csv");
    let o = qbatt(&[
        "sequential",
        "--config",
        &config("sequential.toml"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("window,g_tau,mean[hw]"));
    let text = std::fs::read_to_string(dir.path().join("seq.csv.manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_clock_seconds"].is_number());
    assert_eq!(manifest["scenario"], "sequential");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = qbatt(&[
            "jc-single",
            "--config",
            &config("jc-single.toml"),
            "--out",
            out.to_str().unwrap(),
            "--format",
            "json",
        ]);
        assert!(o.status.success());
        bodies.push(std::fs::read(&out).unwrap());
    }
    // the embedded copy of the manifest records the output path
    let a = String::from_utf8(bodies[0].clone())
        .unwrap()
        .replace("a.json", "X");
    let b = String::from_utf8(bodies[1].clone())
        .unwrap()
        .replace("b.json", "X");
    assert_eq!(a, b);
}

#[test]
fn stdout_when_no_path() {
    let o = qbatt(&["jc-single", "--config", &config("jc-single.toml")]);
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("g_tau,mean[hw],variance[hw^2],snr,fidelity\n"));
    // the manifest goes to stderr so the table can be piped
    assert!(String::from_utf8_lossy(&o.stderr).contains("config_sha256"));
}

#[test]
fn thread_flag_and_environment() {
    let o = qbatt(&[
        "jc-single",
        "--config",
        &config("jc-single.toml"),
        "--threads",
        "2",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"threads\": 2"));
    let o = Command::new(env!("CARGO_BIN_EXE_qbatt"))
        .args([
            "jc-single",
            "--config",
            &config("jc-single.toml"),
            "--format",
            "json",
        ])
        .env("QBATT_THREADS", "3")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"threads\": 3"));
}

#[test]
fn scenario_flag_overrides_file() {
    // the file says sequential; the command line asks for parallel
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "scenario = \"sequential\"\n[protocol]\nnum_qubits = 2\n[cavity]\nkind = \"fock\"\nn = 2\n",
    )
    .unwrap();
    let o = qbatt(&["parallel", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout)
        .starts_with("window,g_tau,mean[hw],variance[hw^2],snr,fidelity,collective_mean[hw]"));
}

#[test]
fn invalid_config_lists_every_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "[qubit]\nq = 2\n[model]\ng = 0\n[cavity]\nkind = \"fock\"\n",
    )
    .unwrap();
    let o = qbatt(&["sequential", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["qubit.q", "model.g", "cavity.n", "protocol.num_qubits"] {
        assert!(err.contains(key), "{key} missing from {err}");
    }
}

#[test]
fn rejects_unknown_scenario_and_missing_file() {
    let o = qbatt(&["warp-drive", "--config", &config("jc-single.toml")]);
    assert!(!o.status.success());
    let o = qbatt(&["jc-single", "--config", "/nonexistent/q.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dimension_guard_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    std::fs::write(
        &cfg,
        "[protocol]\nnum_qubits = 6\ncavity_dim = 70\n[cavity]\nkind = \"fock\"\nn = 6\n",
    )
    .unwrap();
    let o = qbatt(&["parallel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds 4096"));
}
