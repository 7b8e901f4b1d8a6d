// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvegraph"))
        .args(args)
        .env_remove("CURVEGRAPH_WORKERS")
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON record per line"))
        .collect()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn curv_k2_dim_2_is_one_everywhere() {
    let out = run(&["curv", path(&data("k2.json")), "--dim", "2"]);
    assert!(out.status.success());
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    for r in &recs {
        assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(r["dim"], 2.0);
    }
}

#[test]
fn curv_infinite_dimension_serializes_as_inf() {
    let out = run(&["curv", path(&data("k2.json")), "--vertex", "b"]);
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["dim"], "inf");
    assert_eq!(recs[0]["vertex"], "b");
    assert!((recs[0]["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn report_warped_c4_sandwich_at_xq() {
    let out = run(&["report", path(&data("warped_c4.json")), "--dims", "2,2"]);
    assert!(out.status.success());
    let recs = records(&out);
    let xq = recs.iter().find(|r| r["vertex"] == "(x,q)").expect("(x,q) present");
    let entry = |name: &str| {
        xq["entries"].as_array().unwrap().iter().find(|e| e["name"] == name).unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    assert!((entry("sandwich_lower") - 0.25).abs() < 1e-9);
    assert!((entry("sandwich_upper") - 1.0).abs() < 1e-9);
    assert_eq!(recs.last().unwrap()["record"], "dilation");
}

#[test]
fn output_is_sorted_by_vertex_id() {
    let out = run(&["report", path(&data("warped_c4.json")), "--dims", "inf,1"]);
    let ids: Vec<String> = records(&out)
        .iter()
        .filter(|r| r["record"] == "vertex")
        .map(|r| r["vertex"].as_str().unwrap().to_string())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(ids.len(), 4);
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = run(&["--workers", "3", "verify", "5", "6"]);
    let b = run(&["--workers", "1", "verify", "5", "6"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_exits_zero_and_summarizes() {
    let out = run(&["verify", "--seed", "11", "--trials", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let summary = recs.last().unwrap();
    assert_eq!(summary["record"], "summary");
    assert_eq!(summary["passed"], true);
    assert!(recs.iter().any(|r| r["class"] == "experiment"));
}

#[test]
fn metric_resistance_on_p3() {
    let out = run(&["metric", path(&data("p3.json")), "--kind", "resistance", "--pairs", "x,z;x,y"]);
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["to"], "y");
    assert!((recs[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((recs[1]["value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-10);
}

#[test]
fn metric_csv_output() {
    let out = run(&["metric", path(&data("p3.json")), "--kind", "degree-path", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,from,to,value"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn bounds_reports_both_upper_variants() {
    let out = run(&["bounds", path(&data("k2.json"))]);
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    for r in &recs {
        assert!((r["upper_as_stated"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((r["upper_corrected"].as_f64().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r["upper_as_stated_holds"], false);
        assert_eq!(r["upper_corrected_holds"], true);
        assert_eq!(r["lower_holds"], true);
    }
}

#[test]
fn rigidity_single_record() {
    let out = run(&["rigidity", path(&data("warped_c4.json")), "--dim", "inf"]);
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["contradiction"], false);
    assert_eq!(recs[0]["alpha_constant"], false);
}

#[test]
fn product_round_trips_through_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("prod.json");
    let out = run(&["product", path(&data("by_path.json")), "-o", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curv = run(&["curv", out_path.to_str().unwrap(), "--vertex", "(a,y)"]);
    assert!(curv.status.success());
    assert_eq!(records(&curv).len(), 1);
    let g: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(g["vertices"].as_array().unwrap().len(), 6);
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(run(&["curv", "/nonexistent/graph.json"]).status.code(), Some(2));
    assert_eq!(run(&["curv", path(&data("k2.json")), "--dim", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["curv", path(&data("k2.json")), "--vertex", "zz"]).status.code(), Some(2));
    assert_eq!(run(&["report", path(&data("warped_c4.json")), "--dims", "2"]).status.code(), Some(2));
    assert_eq!(run(&["metric", path(&data("p3.json")), "--pairs", "x,w"]).status.code(), Some(2));
}

#[test]
fn malformed_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(
        &p,
        "{\n  \"vertices\": [\n    {\"id\": \"a\", \"measure\": 0.0}\n  ],\n  \"edges\": [],\n  \"symmetric\": true\n}\n",
    )
    .unwrap();
    let out = run(&["curv", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("measure"), "{err}");
}

#[test]
fn isolated_vertex_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("iso.json");
    std::fs::write(
        &p,
        r#"{"vertices": [{"id": "a", "measure": 1.0}], "edges": [], "symmetric": true}"#,
    )
    .unwrap();
    assert_eq!(run(&["curv", p.to_str().unwrap()]).status.code(), Some(2));
}
