use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ngmres-flow"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).arg("--out").arg(dir).env_remove("NGMRES_FLOW_THREADS").output().unwrap()
}

const HEADER: &str = "k,g_vprime,g_l2,picard_resid_h1,theta,gamma,kappa_hat,max_abs_alpha,alpha_json,wall_ms";

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "--re", "1", "--nx", "16", "--mode", "picard", "--tol", "1e-10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    assert!(csv.lines().count() <= 1 + 6);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "converged");
    assert_eq!(json["config"]["mode"], "picard");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["run", "--re", "100", "--nx", "16", "--m", "3"];
    assert_eq!(run_in(a.path(), &args).status.code(), Some(0));
    assert_eq!(run_in(b.path(), &args).status.code(), Some(0));
    let ca = std::fs::read(a.path().join("run.csv")).unwrap();
    let cb = std::fs::read(b.path().join("run.csv")).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn config_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "--nx", "4"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nx"));
    let out = run_in(dir.path(), &["run", "--norm", "h1"]);
    assert_eq!(out.status.code(), Some(64));
    let out = run_in(dir.path(), &["run", "--tol", "-1"]);
    assert_eq!(out.status.code(), Some(64));
    let out = bin()
        .args(["sweep-mesh", "--sizes", "16"])
        .arg("--out")
        .arg(dir.path())
        .env("NGMRES_FLOW_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn hitting_max_iters_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "--re", "1000", "--nx", "16", "--max-iters", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "max_iters");
    assert_eq!(json["totals"]["iterations"], 2);
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep-mesh", "--re", "100", "--m", "2", "--sizes", "8,16"];
    let one = bin().args(args).arg("--out").arg(a.path()).env("NGMRES_FLOW_THREADS", "1").output().unwrap();
    let two = bin().args(args).arg("--out").arg(b.path()).env("NGMRES_FLOW_THREADS", "2").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(two.status.code(), Some(0));
    let ca = std::fs::read_to_string(a.path().join("sweep.csv")).unwrap();
    assert_eq!(ca, std::fs::read_to_string(b.path().join("sweep.csv")).unwrap());
    assert_eq!(ca.lines().next().unwrap(), format!("nx,{HEADER}"));
    assert!(ca.lines().any(|l| l.starts_with("8,0,")));
    assert!(ca.lines().any(|l| l.starts_with("16,0,")));
}

#[test]
fn picard_comparison_differs_only_in_norm_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["compare-norms", "--re", "10", "--nx", "8", "--mode", "picard"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let strip = |prefix: &str| -> Vec<String> {
        csv.lines()
            .filter_map(|l| l.strip_prefix(prefix).map(str::to_string))
            .collect()
    };
    let vp = strip("vprime,");
    let l2 = strip("l2,");
    assert!(!vp.is_empty());
    assert_eq!(vp, l2);
}

#[test]
fn plot_reads_run_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["run", "--re", "100", "--nx", "16", "--m", "1"]).status.code(), Some(0));
    let svg = dir.path().join("plot.svg");
    let out = bin()
        .arg("plot")
        .arg(dir.path().join("run.csv"))
        .arg("--out")
        .arg(&svg)
        .arg("--theta")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("ngmres m=1 vprime nx=16 Re=100"));
    assert_eq!(text.matches("<polyline").count(), 3);
}

#[test]
fn dump_fields_writes_components() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["run", "--re", "10", "--nx", "8", "--dump-fields"]);
    assert_eq!(out.status.code(), Some(0));
    let u = std::fs::read_to_string(dir.path().join("fields/u.csv")).unwrap();
    assert_eq!(u.lines().count(), 1 + 9 * 8);
    assert!(dir.path().join("fields/p.csv").exists());
}
