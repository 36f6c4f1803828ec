use std::path::Path;
use std::process::{Command, Output};

use metadesign::presets;
use metadesign::serial::to_json;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metadesign"))
        .args(args)
        .env("METADESIGN_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

const SMALL_DESIGN: &[&str] = &[
    "design", "--problem", "onemax", "--dim", "20", "--train", "2", "--test", "2", "--n-iterations", "3",
    "--n-candidates", "2", "--reps", "1", "--pop-size", "10", "--max-fe", "200", "--seed", "7",
];

#[test]
fn design_writes_manifest_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = run(SMALL_DESIGN, &a);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("iteration")).count(), 4);
    for f in ["best.json", "best.txt", "convergence.csv", "evaluation_log.csv", "summary.csv", "finalist_1.json"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let text = read(a.join("best.txt"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "S = initialize()");
    assert_eq!(lines[1], "while stopping criterion not met");
    assert_eq!(*lines.last().unwrap(), "end while");
    assert!(read(a.join("convergence.csv")).starts_with("iteration,best_aggregate\n"));

    assert!(run(SMALL_DESIGN, &b).status.success());
    for f in ["best.json", "convergence.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn solve_baseline_on_beamforming() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve", "--baseline", "GA", "--problem", "beamforming", "--n", "32", "--reps", "5", "--max-fe", "500"];
    let out = run(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csvs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("trajectory_"))
        .count();
    assert_eq!(csvs, 5);
    let summary = read(dir.path().join("summary.csv"));
    let row = summary.lines().nth(1).unwrap();
    let cell = row.rsplit(',').next().unwrap();
    let (m, s) = cell.split_once('±').unwrap();
    assert!(m.parse::<f64>().unwrap() > 0.0);
    assert!(s.contains('E') && s.parse::<f64>().unwrap() > 0.0, "{cell}");
}

#[test]
fn solve_algorithm_file_echoes_pseudocode() {
    let dir = tempfile::tempdir().unwrap();
    let alg = dir.path().join("alg1.json");
    std::fs::write(&alg, to_json(&presets::ris_designed())).unwrap();
    let out_dir = dir.path().join("out");
    let args = ["solve", "--algorithm", alg.to_str().unwrap(), "--problem", "beamforming", "--n", "8", "--reps", "1", "--max-fe", "200"];
    let out = run(&args, &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("S = choose_nich(S)"), "{stdout}");
    assert!(stdout.contains("update_round_robin"));
    // one rep: zero spread
    assert!(read(out_dir.join("summary.csv")).contains("±0.00E+00"));
}

#[test]
fn usage_errors_exit_two_with_fix() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--problem", "onemax", "--algorithm", "a.json", "--baseline", "GA"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mutually exclusive") && err.contains("fix:"));
    let out = run(&["design"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing problem name"));
}

#[test]
fn failed_solve_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let alg = dir.path().join("bad.json");
    std::fs::write(&alg, r#"{"encoding": "discrete", "entry": 0, "vertices": [], "edges": []}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["solve", "--algorithm", alg.to_str().unwrap(), "--problem", "onemax"], &out_dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists() || std::fs::read_dir(&out_dir).unwrap().next().is_none());

    // encoding mismatch fails during the runs
    let alg = dir.path().join("cont.json");
    std::fs::write(&alg, to_json(&presets::make_baseline("GA", metadesign::catalog::Encoding::Continuous).unwrap())).unwrap();
    let out = run(&["solve", "--algorithm", alg.to_str().unwrap(), "--problem", "onemax"], &out_dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists() || std::fs::read_dir(&out_dir).unwrap().next().is_none());
}
