use std::path::Path;
use std::process::{Command, Output};

fn curvkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvkit"))
        .args(args)
        .env("CURVKIT_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = curvkit(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn sample_distances_estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = d.join("s");
    ok(&["sample", "sphere", "--count", "500", "--seed", "7", "--out", s.to_str().unwrap()]);
    for f in ["cloud.csv", "labels.csv", "distances.bin"] {
        assert!(s.join(f).exists(), "missing {f}");
    }
    assert_eq!(rows(&s.join("labels.csv"))[0], "index,true_S,true_density,in_evaluation_mask");

    let graph = d.join("graph.bin");
    ok(&[
        "distances",
        "--cloud",
        s.join("cloud.csv").to_str().unwrap(),
        "--k",
        "12",
        "--out",
        graph.to_str().unwrap(),
    ]);

    for (matrix, out) in [(s.join("distances.bin"), d.join("exact.csv")), (graph, d.join("graph.csv"))] {
        ok(&[
            "estimate",
            "--distances",
            matrix.to_str().unwrap(),
            "--labels",
            s.join("labels.csv").to_str().unwrap(),
            "--r-max",
            "1.5707963267948966",
            "--out",
            out.to_str().unwrap(),
        ]);
        let lines = rows(&out);
        assert_eq!(lines[0], "point_index,n_hat,C_hat,S_hat,true_S");
        assert_eq!(lines.len(), 501);
        let s_hat: Vec<f64> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
            .collect();
        let positive = s_hat.iter().filter(|v| **v > 0.0).count();
        assert!(positive > 400, "{positive} of 500 positive");
        assert!(lines[1].ends_with(",2"));
    }
}

#[test]
fn source_subset_writes_partial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["sample", "torus", "--count", "300", "--out", d.to_str().unwrap()]);
    assert!(!d.join("distances.bin").exists());
    std::fs::write(d.join("src.txt"), "0\n5\n").unwrap();
    let out = d.join("rows.bin");
    ok(&[
        "distances",
        "--cloud",
        d.join("cloud.csv").to_str().unwrap(),
        "--sources",
        d.join("src.txt").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let mut f = std::fs::File::open(&out).unwrap();
    let rows = curvkit::graph::SourceRows::read_binary(&mut f).unwrap();
    assert_eq!(rows.sources(), [0, 5]);
    assert_eq!(rows.source_row(5).unwrap()[5], 0.0);
}

#[test]
fn experiment_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let stdout = ok(&[
        "experiment",
        "run",
        "euclidean-disk-exact",
        "--count",
        "400",
        "--bins",
        "12",
        "--dump-ratios",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("median"), "{stdout}");
    for f in ["reports.csv", "ratios.csv", "config.json", "histogram.svg", "summary.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let cfg = out.join("config.json");
    let again = dir.path().join("again");
    ok(&["experiment", "run", cfg.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(
        std::fs::read(out.join("reports.csv")).unwrap(),
        std::fs::read(again.join("reports.csv")).unwrap()
    );
}

#[test]
fn experiment_list_and_accept() {
    let list = ok(&["experiment", "list"]);
    assert!(list.lines().any(|l| l.contains("poincare-disk")));
    let accept = ok(&["experiment", "accept", "--criteria", "8"]);
    assert!(accept.contains("PASS"), "{accept}");
}

#[test]
fn bad_input_exits_with_error() {
    let out = curvkit(&["estimate", "--distances", "/nonexistent.bin", "--r-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = curvkit(&["experiment", "run", "no-such-preset"]);
    assert!(!out.status.success());
}
