use std::path::Path;
use std::process::Command;

const RESOLVE: &str = r#"
seed = 3
[process]
intensity = 1.0
window = { xmin = 0.0, xmax = 6.0, ymin = 0.0, ymax = 6.0 }
marks = { model = "unilateral", velocity = { law = "uniform", low = 0.5, high = 1.5 } }
"#;

fn sim(args: &[&str], env_out: Option<&Path>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sim"));
    cmd.args(args).env_remove("SIM_OUT_DIR");
    if let Some(d) = env_out {
        cmd.env("SIM_OUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn resolve_writes_artifacts_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "r.toml", RESOLVE);
    let out = tmp.path().join("out");
    let o = sim(&["resolve", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap(), "--replicas", "2"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.json", "r0/exploration.csv", "r1/segments.csv", "r1/geometry.svg"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "ok");
    assert_eq!(m["spec"]["seed"], 9);
}

#[test]
fn flag_beats_environment_for_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "r.toml", RESOLVE);
    let env_dir = tmp.path().join("env");
    let o = sim(&["resolve", "--config", &cfg, "--seed", "1"], Some(&env_dir));
    assert!(o.status.success());
    assert!(env_dir.join("manifest.json").is_file());
    let flag_dir = tmp.path().join("flag");
    let o = sim(&["resolve", "--config", &cfg, "--seed", "1", "--out", flag_dir.to_str().unwrap()], Some(&env_dir.join("unused")));
    assert!(o.status.success());
    assert!(flag_dir.join("manifest.json").is_file());
    assert!(!env_dir.join("unused").exists());
}

#[test]
fn invalid_config_exits_two_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad = write(tmp.path(), "bad.toml", &RESOLVE.replace("intensity = 1.0", "intensity = -2.0"));
    let o = sim(&["resolve", "--config", &bad, "--seed", "1", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let mismatch = write(tmp.path(), "kind.toml", &format!("kind = \"generic\"\n{RESOLVE}"));
    let o = sim(&["resolve", "--config", &mismatch, "--seed", "1", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let o = sim(&["resolve", "--config", &write(tmp.path(), "ok.toml", RESOLVE), "--seed", "1", "--threads", "0"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_refuses_large_instances() {
    let tmp = tempfile::tempdir().unwrap();
    let big = RESOLVE.replace("xmax = 6.0", "xmax = 40.0").replace("ymax = 6.0", "ymax = 40.0");
    let cfg = write(tmp.path(), "o.toml", &format!("{big}\n[oracle]\ndt = 0.001\n"));
    let out = tmp.path().join("out");
    let o = sim(&["oracle-compare", "--config", &cfg, "--seed", "1", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
