use polyflex::constructions::{build_dodecahedron, DodecParams};
use polyflex::flex::{continue_flex, FlexOptions};
use polyflex::geom::Tolerance;
use polyflex::io::*;
use polyflex::mesh::validate;

#[test]
fn dodecahedron_mesh_round_trip() {
    let d = build_dodecahedron(&DodecParams::standard(), &Tolerance::default()).unwrap();
    let json = mesh_to_json(&d.mesh, &d.config).unwrap();
    let (m, c) = mesh_from_json(&json).unwrap();
    assert_eq!(m, d.mesh);
    assert_eq!(c, d.config);
    assert_eq!(mesh_to_json(&m, &c).unwrap(), json);
    let r = validate(&m);
    assert_eq!((r.vertices, r.edges, r.faces), (8, 18, 12));
}

#[test]
fn two_sample_trajectory_document() {
    let d = build_dodecahedron(&DodecParams::standard(), &Tolerance::default()).unwrap();
    let mut t = continue_flex(&d.mesh, &d.config, &FlexOptions { max_samples: 5, ..Default::default() }).unwrap();
    t.samples.truncate(2);
    let json = trajectory_to_json(&t);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["format"], "polyflex/1");
    assert_eq!(v["driving"], "dihedral:B-A'");
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 2);
    for s in samples {
        for key in ["s", "config", "volume", "max_residual", "intersections", "folds"] {
            assert!(s.get(key).is_some(), "missing {key}");
        }
        assert_eq!(s["config"].as_object().unwrap().len(), 8);
        assert!(s["folds"].as_object().unwrap().values().all(|f| ["mountain", "valley", "flat"].contains(&f.as_str().unwrap())));
    }
    let back = trajectory_from_json(&json).unwrap();
    assert_eq!(back, TrajectoryDoc::from(&t));
}

#[test]
fn malformed_input_reports_location() {
    let err = mesh_from_json("{\"vertices\": [\n{\"id\": \"a\", \"xyz\": [0, 0]}\n], \"faces\": []}").unwrap_err();
    match err {
        IoError::Parse { line, .. } => assert_eq!(line, 2),
        e => panic!("{e}"),
    }
    let quad = r#"{"vertices":[{"id":"a","xyz":[0,0,0]}],"faces":[["a","b","c","d"]]}"#;
    assert!(matches!(mesh_from_json(quad), Err(IoError::Parse { .. })));
}
