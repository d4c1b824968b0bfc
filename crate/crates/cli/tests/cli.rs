use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cdsp() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cdsp"));
    c.env_remove("CDSP_DATA_DIR").env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    cdsp().args(args).output().expect("spawn cdsp")
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/bench")
}

fn write_pair(dir: &Path, name: &str, n: usize, f: impl Fn(f64, f64) -> f64) -> PathBuf {
    // deterministic pseudo-uniform design and noise
    let mut s = String::from("x,y\n");
    for i in 0..n {
        let x = -2.0 + 4.0 * (((i * 7919) % n) as f64 + 0.5) / n as f64;
        let u = ((i * 104_729 + 13) % 997) as f64 / 997.0 - 0.5;
        s.push_str(&format!("{x},{}\n", f(x, u)));
    }
    let p = dir.join(name);
    std::fs::write(&p, s).unwrap();
    p
}

const FAST: [&str; 4] = ["--boot-outer", "50", "--boot-inner", "50"];

#[test]
fn infer_reports_x_to_y_for_linear_with_uniform_noise() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_pair(dir.path(), "d.csv", 200, |x, u| 2.0 * x + 2.0 * u);
    let out = run(&[&["infer", p.to_str().unwrap()][..], &FAST, &["--seed", "3"]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["direction"], "x_to_y");
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["n_boot_outer"], 50);
    let p_cdsp = v["p_cdsp"].as_f64().unwrap();
    assert_eq!(p_cdsp, v["favorable"].as_f64().unwrap() / 50.0);
    assert!(v["i_hat_x"].as_f64().unwrap() > v["i_hat_y"].as_f64().unwrap());
}

#[test]
fn infer_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_pair(dir.path(), "d.csv", 120, |x, u| x.tanh() + 0.3 * u);
    let args = [&["infer", p.to_str().unwrap(), "--lingam"][..], &FAST].concat();
    let a = cdsp().arg("--threads").arg("1").args(&args).output().unwrap();
    let b = cdsp().args(&args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = cdsp().args(&args).args(["--format", "csv"]).output().unwrap();
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("alpha,boot_outer,boot_inner,seed,n,direction"));
}

#[test]
fn lingam_subcommand_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_pair(dir.path(), "d.csv", 100, |x, u| 0.5 * x + u);
    let args = ["lingam", p.to_str().unwrap(), "--boot-outer", "60"];
    let a = run(&args);
    let b = cdsp().arg("--threads").arg("1").args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["n_boot"], 60);
    let rate = v["bootstrap_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2\n3 4\nfoo 5\n").unwrap();
    let out = run(&["infer", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3: "));

    assert_eq!(run(&["infer", "/nonexistent/file.txt"]).status.code(), Some(2));

    let tiny = write_pair(dir.path(), "tiny.csv", 10, |x, u| x + u);
    assert_eq!(run(&["infer", tiny.to_str().unwrap()]).status.code(), Some(2));

    let ok = write_pair(dir.path(), "ok.csv", 50, |x, u| x + u);
    assert_eq!(run(&["infer", ok.to_str().unwrap(), "--alpha", "2"]).status.code(), Some(2));
    assert_eq!(run(&["infer", ok.to_str().unwrap(), "--boot-outer", "5"]).status.code(), Some(2));
}

#[test]
fn degenerate_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_pair(dir.path(), "const.csv", 40, |_, _| 1.0);
    let out = run(&[&["infer", p.to_str().unwrap()][..], &FAST].concat());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_preset_lists_presets() {
    let out = run(&["simulate", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("paper-d1") && err.contains("paper-d3"), "{err}");
}

#[test]
fn bench_without_data_explains_download() {
    let out = run(&["bench"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CDSP_DATA_DIR"));
    let out = run(&["bench", "--data-dir", "/nonexistent/pairs"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_reports_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = [
        &["simulate", "paper-d1", "--n", "60", "--reps", "4", "--n-mc", "2000"][..],
        &FAST,
    ]
    .concat();
    let ra = cdsp().args(&base).arg("--out").arg(a.path()).output().unwrap();
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    let rb = cdsp()
        .arg("--threads")
        .arg("1")
        .args(&base)
        .arg("--out")
        .arg(b.path())
        .output()
        .unwrap();
    assert!(rb.status.success());
    for f in ["per_rep.csv", "summary.json", "index_histogram.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"]["n"], 60);
    assert_eq!(summary["scenario"]["m_reps"], 4);
    assert_eq!(std::fs::read_to_string(a.path().join("per_rep.csv")).unwrap().lines().count(), 5);
}

#[test]
fn simulate_reads_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.toml");
    std::fs::write(&p, "degree_d = 1.3\nn = 50\nm_reps = 2\n").unwrap();
    let out = run(&[&["simulate", p.to_str().unwrap(), "--n-mc", "1000"][..], &FAST].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scenario"]["degree_d"], 1.3);
}

#[test]
fn bench_fixture_end_to_end() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fixtures = fixture_dir();
    let base = [&["bench", "--data-dir", fixtures.to_str().unwrap()][..], &FAST].concat();
    let ra = cdsp().args(&base).arg("--out").arg(a.path()).output().unwrap();
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    let rb = cdsp()
        .env("CDSP_DATA_DIR", fixture_dir())
        .args(["--threads", "1", "bench"])
        .args(FAST)
        .arg("--out")
        .arg(b.path())
        .output()
        .unwrap();
    assert!(rb.status.success(), "{}", String::from_utf8_lossy(&rb.stderr));
    for f in ["per_pair.csv", "summary.json", "tables.txt", "index_histogram.csv", "skipped.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let tables = std::fs::read_to_string(a.path().join("tables.txt")).unwrap();
    assert!(tables.contains("/5 = "), "{tables}");
    assert!(tables.contains("mode: capped"));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["overall"]["cdsp"]["decisions"], 5);
    let skipped = std::fs::read_to_string(a.path().join("skipped.json")).unwrap();
    assert!(skipped.contains("0006") && skipped.contains("multivariate"));
}
