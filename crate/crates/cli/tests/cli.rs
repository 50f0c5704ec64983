use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn ifdyn(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifdyn"))
        .args(args)
        .env("IFDYN_ARTIFACT_ROOT", root)
        .output()
        .expect("spawn ifdyn")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_key_is_a_config_error_with_line_number() {
    let root = scratch("unknown_key");
    let cfg = root.join("bad.toml");
    std::fs::write(&cfg, "kind = \"full-sim\"\n\nbogus = 1\n").unwrap();
    let out = ifdyn(&root, &["full-sim", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("bogus"), "{err}");
}

#[test]
fn kind_mismatch_is_a_config_error() {
    let root = scratch("kind_mismatch");
    let cfg = root.join("c.toml");
    std::fs::write(&cfg, "kind = \"full-sim\"\n").unwrap();
    let out = ifdyn(&root, &["effective-run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_values_are_config_errors() {
    let root = scratch("invalid_values");
    let out = ifdyn(&root, &["full-sim", "--override", "dr_over_eps=0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ifdyn(&root, &["effective-run", "--override", "spec.epsilon=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ifdyn(&root, &["effective-run", "--override", "spec..x=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn effective_run_writes_artifacts_and_honors_overrides() {
    let root = scratch("effective_run");
    let out = ifdyn(&root, &["effective-run", "--override", "t_max=0.5", "--seed", "7", "--threads", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = root.join("effective-run");
    for f in ["table.csv", "trajectory.csv", "effective.json", "config.toml", "summary.json", "manifest.json"] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    let cfg = std::fs::read_to_string(dir.join("config.toml")).unwrap();
    assert!(cfg.contains("t_max = 0.5"), "{cfg}");
    let manifest = json(&dir.join("manifest.json"));
    assert_eq!(manifest["status"], "passed");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["threads"], 1);
    assert_eq!(json(&dir.join("summary.json"))["passed"], true);
    let last = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let t: f64 = last.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((t - 0.5).abs() < 1e-9, "trajectory ends at {t}");
}

#[test]
fn reruns_are_bit_identical() {
    let root = scratch("rerun");
    let args = ["quench-study", "--override", "t_max=1.0"];
    let mut outs = Vec::new();
    for sub in ["a", "b"] {
        let mut a = args.to_vec();
        a.extend(["--out", sub]);
        let out = ifdyn(&root, &a);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outs.push(root.join(sub));
    }
    for f in ["trajectory.csv", "envelopes.txt", "quench.json"] {
        let a = std::fs::read(outs[0].join(f)).unwrap();
        let b = std::fs::read(outs[1].join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn failed_check_exits_3_and_is_recorded() {
    let root = scratch("failed_check");
    let out = ifdyn(&root, &["profile-sweep", "--override", "n_points=129", "--override", "knots=4"]);
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL equipartition"), "{stdout}");
    let dir = root.join("profile-sweep");
    assert_eq!(json(&dir.join("summary.json"))["passed"], false);
    assert_eq!(json(&dir.join("manifest.json"))["status"], "checks-failed");
}

#[test]
fn absolute_out_bypasses_the_artifact_root() {
    let root = scratch("absolute_out");
    let target = root.join("elsewhere");
    let out = ifdyn(&root.join("unused"), &["effective-run", "--override", "t_max=0.2", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("manifest.json").exists());
    assert!(!root.join("unused").exists());
}
