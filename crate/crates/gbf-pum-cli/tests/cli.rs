//! End-to-end checks of the command-line interface: flag handling, file
//! round-trips, exit codes, and run-to-run determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gbf_pum::datasets::KARATE_EDGES;
use gbf_pum::io::RunReport;

fn gbfpum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbfpum"))
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .expect("binary runs")
}

fn write_karate(dir: &Path) -> PathBuf {
    let path = dir.join("karate.edges");
    let mut text = String::from("# social network, 34 vertices\n");
    for (u, v) in KARATE_EDGES {
        text.push_str(&format!("{u} {v}\n"));
    }
    fs::write(&path, text).unwrap();
    path
}

fn write_grid(dir: &Path, rows: usize, cols: usize) -> PathBuf {
    let path = dir.join(format!("grid{rows}x{cols}.edges"));
    let mut text = String::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            if j + 1 < cols {
                text.push_str(&format!("{v} {}\n", v + 1));
            }
            if i + 1 < rows {
                text.push_str(&format!("{v} {}\n", v + cols));
            }
        }
    }
    fs::write(&path, text).unwrap();
    path
}

fn write_lines(dir: &Path, name: &str, lines: &[&str]) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

#[test]
fn communities_on_known_split() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_karate(dir.path());
    let ids = write_lines(dir.path(), "w.txt", &["0", "33"]);
    let out = dir.path().join("part.json");

    let run = gbfpum(&[
        "communities",
        "--graph",
        graph.to_str().unwrap(),
        "--sample-ids",
        ids.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["communities"].as_array().unwrap().len(), 2);
    // The plot CSV lands next to the JSON by default.
    let csv = fs::read_to_string(dir.path().join("part.csv")).unwrap();
    assert!(csv.starts_with("node,community,expanded_memberships\n"));
    assert_eq!(csv.lines().count(), 35);
}

#[test]
fn communities_single_sample_is_one_community() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_karate(dir.path());
    let ids = write_lines(dir.path(), "w.txt", &["7"]);
    let out = dir.path().join("part.json");

    let run = gbfpum(&[
        "communities",
        "--graph",
        graph.to_str().unwrap(),
        "--sample-ids",
        ids.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let communities = json["communities"].as_array().unwrap();
    assert_eq!(communities.len(), 1);
    assert_eq!(communities[0].as_array().unwrap().len(), 34);
}

#[test]
fn interpolate_writes_report_and_approximation() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path(), 8, 8);
    let out = dir.path().join("report.json");
    let approx = dir.path().join("approx.csv");

    let run = gbfpum(&[
        "interpolate",
        "--graph",
        graph.to_str().unwrap(),
        "--samples",
        "20",
        "--seed",
        "5",
        "--synth-seed",
        "9",
        "--cutoff",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--approx-out",
        approx.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    let report: RunReport = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.approx.len(), 64);
    assert!(report.rmae >= 0.0 && report.rrmse >= 0.0);
    assert!(report.communities >= 1);
    assert!(report.time_s.total >= report.time_s.detect);

    let pairs = gbf_pum::io::load_signal(&approx).unwrap();
    assert_eq!(pairs.len(), 64);
    for (v, value) in pairs {
        assert_eq!(value, report.approx[v]);
    }
}

#[test]
fn interpolate_reads_signal_files_and_respects_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path(), 4, 4);
    let signal = write_lines(
        dir.path(),
        "x.csv",
        &["node,value", "0,1.0", "1,0.5", "2,0.25", "3,2.0", "5,1.25", "10,0.75"],
    );
    let ids = write_lines(dir.path(), "w.txt", &["0", "3", "10"]);
    let out = dir.path().join("report.json");

    let run = gbfpum(&[
        "interpolate",
        "--graph",
        graph.to_str().unwrap(),
        "--sample-ids",
        ids.to_str().unwrap(),
        "--signal",
        signal.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    // Vertex 15 is not covered by the signal file; sampling it must fail.
    let bad_ids = write_lines(dir.path(), "bad.txt", &["0", "15"]);
    let run = gbfpum(&[
        "interpolate",
        "--graph",
        graph.to_str().unwrap(),
        "--sample-ids",
        bad_ids.to_str().unwrap(),
        "--signal",
        signal.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("no signal value"));
}

#[test]
fn synth_signal_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path(), 6, 6);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let run = gbfpum(&[
            "synth-signal",
            "--graph",
            graph.to_str().unwrap(),
            "--seed",
            "42",
            "--cutoff",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(run.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let pairs = gbf_pum::io::load_signal(&a).unwrap();
    assert_eq!(pairs.len(), 36);
    let max = pairs.iter().fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
    assert!((max - 1.0).abs() < 1e-12);
}

#[test]
fn flow_ingest_keeps_largest_measured_component() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path(), 3, 3);
    let csv = write_lines(
        dir.path(),
        "flow.csv",
        &[
            "node,timestamp,flow",
            "0,08:15,1.5",
            "1,08:15,2.5",
            "2,08:15,3.5",
            "8,08:15,9.0",
            "0,08:30,7.0",
        ],
    );
    let out = dir.path().join("slice.csv");
    let nodes = dir.path().join("kept.txt");

    let run = gbfpum(&[
        "flow-ingest",
        "--graph",
        graph.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--timestamp",
        "08:15",
        "--out",
        out.to_str().unwrap(),
        "--nodes-out",
        nodes.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    // Vertices {0,1,2} form a measured path; vertex 8 is measured but
    // isolated within the measured set, so it is dropped.
    assert_eq!(
        gbf_pum::io::load_signal(&out).unwrap(),
        vec![(0, 1.5), (1, 2.5), (2, 3.5)]
    );
    assert_eq!(gbf_pum::io::load_node_list(&nodes).unwrap(), vec![0, 1, 2]);
    assert!(String::from_utf8_lossy(&run.stderr).contains("3 of 4 measured"));

    let run = gbfpum(&[
        "flow-ingest",
        "--graph",
        graph.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--timestamp",
        "09:00",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn validation_failures_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path(), 3, 3);
    let out = dir.path().join("out.json");

    // More samples than vertices.
    let run = gbfpum(&[
        "communities",
        "--graph",
        graph.to_str().unwrap(),
        "--samples",
        "50",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));

    // Missing graph file.
    let run = gbfpum(&[
        "communities",
        "--graph",
        dir.path().join("nope.edges").to_str().unwrap(),
        "--samples",
        "2",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));

    // Both signal sources at once is a usage error.
    let run = gbfpum(&[
        "interpolate",
        "--graph",
        graph.to_str().unwrap(),
        "--samples",
        "2",
        "--seed",
        "1",
        "--signal",
        "x.csv",
        "--synth-seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));

    // Sampling without a seed is a usage error.
    let run = gbfpum(&[
        "communities",
        "--graph",
        graph.to_str().unwrap(),
        "--samples",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path(), 4, 4);
    let out = dir.path().join("report.json");

    // A huge fractional exponent underflows every kernel entry to zero;
    // with no regularization the Gram block is singular at solve time.
    let run = gbfpum(&[
        "interpolate",
        "--graph",
        graph.to_str().unwrap(),
        "--samples",
        "4",
        "--seed",
        "2",
        "--synth-seed",
        "3",
        "--epsilon",
        "1e6",
        "--s",
        "60.5",
        "--gamma",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(3), "{}", String::from_utf8_lossy(&run.stderr));
}
