use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn dmtsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmtsim")).args(args).current_dir(root()).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ints(path: &Path) -> Vec<i64> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.parse().unwrap()).collect()
}

#[test]
fn run_bundled_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dmtsim(&["run", "manifests/prefix_sum.toml", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("64 threads"), "{}", stdout(&o));
    let input = ints(&dir.path().join("inputs/in.txt"));
    let result = ints(&dir.path().join("arrays/out.txt"));
    let expect: Vec<i64> = input.iter().scan(0, |acc, v| {
        *acc += v;
        Some(*acc)
    }).collect();
    assert_eq!(result, expect);
    assert!(dir.path().join("stats.toml").exists() && dir.path().join("stats.csv").exists());
    assert!(!dir.path().join("trace.txt").exists());
}

#[test]
fn run_outputs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let o = dmtsim(&["run", "manifests/window_scan.toml", "--out", out.to_str().unwrap(), "--seed", "3", "--issue-limit", "4"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let files: Vec<Vec<u8>> = ["arrays/out.txt", "stats.toml", "stats.csv", "trace.txt"]
            .iter()
            .map(|f| fs::read(out.join(f)).unwrap())
            .collect();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1]);
    assert!(String::from_utf8_lossy(&snapshots[0][3]).starts_with("c=0 "));
}

#[test]
fn run_errors_exit_two_with_stage_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("m1.toml");
    fs::write(&missing, "kernel = \"nowhere.dsl\"\nextents = [8]\n").unwrap();
    let o = dmtsim(&["run", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frontend: file not found"), "{}", stderr(&o));

    let win0 = dir.path().join("m2.toml");
    let kernel = root().join("kernels/window_scan.dsl");
    fs::write(&win0, format!("kernel = {:?}\nextents = [12]\n[defines]\nWIN = 0\n", kernel.to_str().unwrap())).unwrap();
    let o = dmtsim(&["run", win0.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mapper: parameter error"), "{}", stderr(&o));
}

#[test]
fn extents_flag_overrides_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = dmtsim(&["run", "manifests/prefix_sum.toml", "--extents", "16", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("16 threads"), "{}", stdout(&o));
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = dmtsim(&["verify", "prefix_sum_64", "window_scan_12_w4", "--seeds", "1,2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("verify.txt")).unwrap();
    assert_eq!(report.lines().count(), 4);
    assert!(report.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn unknown_case_is_a_pipeline_error() {
    let o = dmtsim(&["verify", "no_such_case"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown case"));
}

#[test]
fn expected_output_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("in.txt"), "1\n".repeat(12)).unwrap();
    fs::write(dir.path().join("good.txt"), "1 2 3 4 1 2 3 4 1 2 3 4").unwrap();
    fs::write(dir.path().join("bad.txt"), "1 2 3 4 5 6 7 8 9 10 11 12").unwrap();
    let kernel = root().join("kernels/window_scan.dsl");
    for (want, code) in [("good.txt", 0), ("bad.txt", 1)] {
        let m = dir.path().join(format!("{want}.toml"));
        fs::write(
            &m,
            format!("kernel = {:?}\nextents = [12]\n[inputs]\nin = \"in.txt\"\n[expect]\nout = {want:?}\n", kernel.to_str().unwrap()),
        )
        .unwrap();
        let o = dmtsim(&["run", m.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(code), "{}", stderr(&o));
        if code == 1 {
            assert!(stderr(&o).contains("`out`[4]: got 1, expected 5"), "{}", stderr(&o));
        }
    }
}

#[test]
fn sweep_writes_csv_and_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let o = dmtsim(&[
        "sweep",
        "prefix_sum_64",
        "window_scan_12_w4",
        "--grid",
        "grids/default.toml",
        "--grid",
        "grids/buffer8.toml",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.contains(",buffer8,"));
    let cdf = fs::read_to_string(dir.path().join("delta_cdf.csv")).unwrap();
    assert_eq!(cdf, "delta,cumulative_fraction\n1,1.000000\n");
    assert!(stdout(&o).contains("delta <= 16: 1.000"));
}

#[test]
fn dumps() {
    let o = dmtsim(&["dump-graph", "kernels/prefix_sum.dsl", "--extents", "8", "-D", "N=8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("elev"));
    let o = dmtsim(&["dump-graph", "kernels/prefix_sum.dsl", "--extents", "8", "-D", "N=8", "--dot"]);
    assert!(stdout(&o).starts_with("digraph"), "{}", stdout(&o));
    let dir = tempfile::tempdir().unwrap();
    let o = dmtsim(&["dump-mapping", "kernels/matmul.dsl", "--extents", "4,4", "-D", "N=4", "-D", "K=4", "-D", "M=4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("mapping.txt")).unwrap();
    assert!(text.starts_with("grid 14x10 units=140"), "{text}");
    let o = dmtsim(&["dump-graph", "kernels/prefix_sum.dsl", "--extents", "8", "-D", "BAD"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn list_names_every_case() {
    let o = dmtsim(&["list"]);
    let names = stdout(&o);
    assert!(names.lines().any(|l| l == "matmul_16x16x16"));
    assert!(names.lines().any(|l| l == "shift_256_d16"));
}
