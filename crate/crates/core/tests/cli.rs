use std::fs;

use polyflex::cli::main_with;
use polyflex::io::{mesh_from_json, mesh_to_json};
use polyflex::mesh::{solids, validate};

fn run(args: &[&str]) -> i32 {
    main_with(std::iter::once("polyflex").chain(args.iter().copied()))
}

#[test]
fn build_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    assert_eq!(run(&["build", "-o", out.to_str().unwrap()]), 0);
    let (m, _) = mesh_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let r = validate(&m);
    assert_eq!((r.vertices, r.edges, r.faces), (8, 18, 12));
    assert_eq!(run(&["check", out.to_str().unwrap()]), 0);
}

#[test]
fn check_cube_and_quads() {
    let dir = tempfile::tempdir().unwrap();
    let (m, c) = solids::cube();
    let tri = dir.path().join("cube.json");
    fs::write(&tri, mesh_to_json(&m, &c).unwrap()).unwrap();
    let report = polyflex::cli::check_mesh(&m, &c).unwrap();
    assert_eq!(report.verdict, "rigid (flex dimension 0)");
    assert_eq!(run(&["check", tri.to_str().unwrap()]), 0);
    let quads = dir.path().join("quads.json");
    fs::write(&quads, r#"{"vertices":[{"id":"a","xyz":[0,0,0]},{"id":"b","xyz":[1,0,0]},{"id":"c","xyz":[1,1,0]},{"id":"d","xyz":[0,1,0]}],"faces":[["a","b","c","d"]]}"#).unwrap();
    assert_ne!(run(&["check", quads.to_str().unwrap()]), 0);
    // an open surface is not a sphere
    let open = dir.path().join("open.json");
    fs::write(&open, r#"{"vertices":[{"id":"a","xyz":[0,0,0]},{"id":"b","xyz":[1,0,0]},{"id":"c","xyz":[0,1,0]}],"faces":[["a","b","c"]]}"#).unwrap();
    assert_ne!(run(&["check", open.to_str().unwrap()]), 0);
}

#[test]
fn enumerate_flex_net_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    assert_eq!(run(&["enumerate", "--max", "7", "--json", &p("enum.json")]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p("enum.json")).unwrap()).unwrap();
    assert_eq!(v["candidates"].as_array().unwrap().len(), 3);
    assert_ne!(run(&["enumerate", "--max", "12"]), 0);

    assert_eq!(run(&["flex", "--max-samples", "50", "-o", &p("t.json")]), 0);
    assert_eq!(run(&["build", "-o", &p("d.json")]), 0);
    assert_eq!(run(&["net", "--mesh", &p("d.json"), "--trajectory", &p("t.json"), "-o", &p("net.svg")]), 0);
    let svg = fs::read_to_string(p("net.svg")).unwrap();
    assert_eq!(svg.matches("<polygon").count(), 12);
    assert!(svg.contains("class=\"dotted\""));

    assert_eq!(run(&["optimize", "--budget", "2", "--seed", "3", "--log", &p("log.jsonl"), "-o", &p("best.json")]), 0);
    let log = fs::read_to_string(p("log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
    for line in log.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(rec.get("trial").is_some() && rec.get("result").is_some());
    }
    assert!(polyflex::io::params_from_json(&fs::read_to_string(p("best.json")).unwrap()).is_ok());
    assert_ne!(run(&["optimize", "--budget", "0"]), 0);
}

#[test]
fn bad_params_file_fails_with_stage() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.json");
    fs::write(&f, r#"{"l":[1,9,1,3.9,2.9],"h":[6.5,6.5,6.1]}"#).unwrap();
    assert_eq!(run(&["build", "--params", f.to_str().unwrap()]), 1);
    assert_eq!(run(&["no-such-command"]), 2);
}
