use std::process::{Command, Output};

use serde_json::Value;
use sleeping_cli::{cmd_sweep, Algorithm, ExperimentSpec, GraphSource, SpecError, SweepSpec};
use sleeping_core::graph::GraphKind;

fn sleepsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sleepsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn ring_dlt_row_is_within_bound() {
    let out = sleepsim(&[
        "run", "--gen", "ring", "--n", "16", "--algo", "dlt", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let row = &rows[0];
    assert_eq!(row["valid"], true);
    assert!(row["worstAwake"].as_u64().unwrap() <= 14 * 4);
    assert_eq!(row["n"], 16);
    assert_eq!(row["mode"], "local");
}

#[test]
fn path_of_two_has_mis_of_one() {
    let out = sleepsim(&[
        "run",
        "--gen",
        "path",
        "--n",
        "2",
        "--algo",
        "olocal:mis",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let row = &json(&out)[0];
    assert_eq!(row["valid"], true);
    assert!(row["detail"].as_str().unwrap().contains("misSize=1"));
}

#[test]
fn ccongest_in_local_mode_is_a_spec_error() {
    let out = sleepsim(&[
        "run",
        "--gen",
        "ring",
        "--n",
        "16",
        "--algo",
        "ccongest:edge-count",
        "--mode",
        "local",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mode mismatch"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_names_and_missing_files_exit_two() {
    assert_eq!(
        sleepsim(&["run", "--gen", "ring", "--n", "8", "--algo", "olocal:nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sleepsim(&["run", "--gen", "torus", "--n", "8", "--algo", "dlt"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sleepsim(&["run", "--graph", "/nonexistent/graph.txt", "--algo", "dlt"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sleepsim(&[
            "run",
            "--gen",
            "ring",
            "--n",
            "8",
            "--algo",
            "dlt",
            "--bit-budget",
            "64"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        sleepsim(&["sweep", "--gen", "ring", "--ns", "16,8", "--algo", "dlt"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failed_validation_exits_one_with_witness() {
    let out = sleepsim(&[
        "run",
        "--gen",
        "ring",
        "--n",
        "7",
        "--algo",
        "universal:two-coloring",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let row = &json(&out)[0];
    assert_eq!(row["valid"], false);
    assert_eq!(row["witness"], "two-coloring:not-bipartite");
    // A budget too small for the construction's messages aborts the run.
    let out = sleepsim(&[
        "run",
        "--gen",
        "ring",
        "--n",
        "8",
        "--algo",
        "dlt",
        "--mode",
        "congest",
        "--bit-budget",
        "8",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)[0]["witness"]
        .as_str()
        .unwrap()
        .starts_with("run-aborted"));
}

#[test]
fn graph_file_input_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("star.txt");
    std::fs::write(&graph, "# star on five vertices\n0 1\n0 2\n0 3\n0 4\n").unwrap();
    let report = dir.path().join("out.csv");
    let out = sleepsim(&[
        "run",
        "--graph",
        graph.to_str().unwrap(),
        "--algo",
        "ccongest:average-degree",
        "--format",
        "csv",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&report).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    let col = |name: &str| {
        row.get(header.iter().position(|h| h == name).unwrap())
            .unwrap()
            .to_string()
    };
    assert_eq!(col("detail"), "answer=8/5");
    assert_eq!(col("valid"), "true");
    assert_eq!(col("mode"), "congest");
}

#[test]
fn every_algorithm_runs_clean() {
    for algo in [
        "dlt",
        "dlt-fast",
        "dlt-congest",
        "olocal:mis",
        "olocal:coloring",
        "ccongest:leader-election",
        "ccongest:edge-count",
        "ccongest:average-degree",
        "universal:leader-election",
        "universal:edge-count",
        "universal:max-degree",
    ] {
        let out = sleepsim(&[
            "run",
            "--gen",
            "random-gnp",
            "--n",
            "24",
            "--p",
            "0.2",
            "--seed",
            "4",
            "--trials",
            "3",
            "--algo",
            algo,
            "--format",
            "json",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{algo}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        let rows = json(&out);
        assert_eq!(rows.as_array().unwrap().len(), 3);
        for (i, r) in rows.as_array().unwrap().iter().enumerate() {
            assert_eq!(r["trial"], i as u64);
            assert_eq!(r["seed"], 4 + i as u64);
        }
    }
}

#[test]
fn reports_are_byte_identical() {
    for format in ["json", "csv", "text"] {
        let args = [
            "sweep",
            "--gen",
            "random-tree",
            "--ns",
            "8,16,32",
            "--trials",
            "3",
            "--algo",
            "dlt-fast",
            "--format",
            format,
        ];
        let a = sleepsim(&args);
        let b = sleepsim(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{format}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn dlt_sweep_growth_columns() {
    let out = sleepsim(&[
        "sweep",
        "--gen",
        "ring",
        "--ns",
        "8,16,32,64",
        "--algo",
        "dlt",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    let sizes = rep["sizes"].as_array().unwrap();
    let awake: Vec<u64> = sizes
        .iter()
        .map(|s| s["worstAwakeMax"].as_u64().unwrap())
        .collect();
    assert!(awake.windows(2).all(|w| w[0] <= w[1]), "{awake:?}");
    assert!(sizes
        .iter()
        .all(|s| s["awakeRatio"].as_f64().unwrap() <= 14.0));
}

#[test]
fn mis_sweep_post_coloring_awake_is_exact() {
    let out = sleepsim(&[
        "sweep",
        "--gen",
        "ring",
        "--ns",
        "4,8,16,32",
        "--algo",
        "olocal:mis",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for row in json(&out)["trials"].as_array().unwrap() {
        let detail = row["detail"].as_str().unwrap();
        let q: u64 = detail
            .split_whitespace()
            .find_map(|t| t.strip_prefix("q="))
            .unwrap()
            .parse()
            .unwrap();
        let expect = format!("postColoringAwake={}", q.trailing_zeros() + 1);
        assert!(detail.contains(&expect), "{detail}");
        assert_eq!(row["valid"], true);
    }
}

#[test]
fn sweep_spec_rejects_empty_and_file_sources() {
    let base = ExperimentSpec::new(
        GraphSource::Generated {
            kind: GraphKind::Ring,
            n: 8,
            p: None,
            seed: 0,
        },
        Algorithm::Dlt,
        None,
        None,
        1,
    )
    .unwrap();
    assert!(matches!(
        SweepSpec::new(base.clone(), vec![]),
        Err(SpecError::EmptyRange)
    ));
    let file = ExperimentSpec {
        source: GraphSource::File("g.txt".into()),
        ..base.clone()
    };
    assert!(matches!(
        SweepSpec::new(file, vec![8]),
        Err(SpecError::SweepNeedsGenerator)
    ));
    let rep = cmd_sweep(&SweepSpec::new(base, vec![4, 8]).unwrap()).unwrap();
    assert_eq!(
        rep.sizes.iter().map(|s| s.n).collect::<Vec<_>>(),
        vec![4, 8]
    );
}
