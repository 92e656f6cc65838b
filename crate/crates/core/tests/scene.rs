use std::path::Path;

use plateau_core::scene::{build_initial_surface, export_mesh, import_mesh, parse_obj, Scene, SceneError};
use plateau_core::sliding::total_area;
use serde_json::json;

fn build(surface: serde_json::Value) -> plateau_core::sliding::SlidingMesh {
    let scene = json!({
        "boundary": [
            {"kind": "circle", "center": [0, 0, 0.1], "normal": [0, 0, 1], "radius": 1.0},
            {"kind": "circle", "center": [0, 0, -0.1], "normal": [0, 0, 1], "radius": 1.0}
        ],
        "surface": surface
    });
    build_initial_surface(&Scene::from_json_str(&scene.to_string()).unwrap()).unwrap()
}

#[test]
fn disk_fan_with_one_ring_is_a_fan() {
    let m = build(json!({"kind": "disk-fan", "piece": 0, "segments": 24}));
    assert_eq!(m.triangles.len(), 24);
    assert_eq!(m.vertices.len(), 25);
    assert_eq!(m.labels.iter().filter(|l| **l == Some(0)).count(), 24);
    assert!(m.check_constraints(1e-12).is_ok());
    let polygon = 12.0 * (std::f64::consts::TAU / 24.0).sin();
    assert!((total_area(&m) - polygon).abs() < 1e-12);
}

#[test]
fn cylinder_triangle_count() {
    let m = build(json!({"kind": "cylinder", "pieces": [0, 1], "segments": 24, "rings": 8}));
    assert_eq!(m.triangles.len(), 384);
    assert_eq!(m.labels.iter().filter(|l| l.is_some()).count(), 48);
}

#[test]
fn y_seed_has_one_triple_circle() {
    let m = build(json!({"kind": "y-seed", "pieces": [0, 1], "segments": 24, "band_rings": 2, "disk_rings": 3}));
    let edges = m.edge_faces();
    let triple: Vec<_> = edges.iter().filter(|(_, f)| f.len() == 3).map(|(e, _)| *e).collect();
    assert_eq!(triple.len(), 24);
    assert!(edges.values().all(|f| f.len() <= 3));
    // the triple edges form one closed loop through 24 distinct vertices
    let mut degree = std::collections::BTreeMap::new();
    for [a, b] in &triple {
        *degree.entry(*a).or_insert(0) += 1;
        *degree.entry(*b).or_insert(0) += 1;
    }
    assert_eq!(degree.len(), 24);
    assert!(degree.values().all(|&d| d == 2));
    assert!(degree.keys().all(|&v| m.vertices[v].z.abs() < 1e-15 && m.labels[v].is_none()));
}

#[test]
fn obj_round_trip_keeps_mesh_and_labels() {
    let m = build(json!({"kind": "y-seed", "pieces": [0, 1], "segments": 12, "band_rings": 2, "disk_rings": 2}));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.obj");
    export_mesh(&path, &m).unwrap();
    let back = import_mesh(&path, m.pieces.clone()).unwrap();
    assert_eq!(back.triangles, m.triangles);
    assert_eq!(back.labels, m.labels);
    for (a, b) in back.vertices.iter().zip(&m.vertices) {
        assert!((a - b).norm() <= 1e-8 * (1.0 + b.norm()));
    }
}

#[test]
fn obj_errors_carry_line_numbers() {
    match parse_obj("v 0 0 0\nv 1 0 0\nf 1 2 3\n", "bad.obj").unwrap_err() {
        SceneError::Obj { line, .. } => assert_eq!(line, 3),
        other => panic!("{other}"),
    }
    match parse_obj("v 0 0\n", "bad.obj").unwrap_err() {
        SceneError::Obj { line, .. } => assert_eq!(line, 1),
        other => panic!("{other}"),
    }
}

#[test]
fn schema_errors_name_the_field() {
    let e = Scene::from_json_str(r#"{"surface": {"kind": "disk-fan", "piece": 0, "segmnets": 8}}"#).unwrap_err();
    match e {
        SceneError::Schema { path, .. } => assert!(path.starts_with("surface"), "{path}"),
        other => panic!("{other}"),
    }
    let e = Scene::from_json_str(r#"{"boundary": [], "surface": {"kind": "disk-fan", "piece": 2, "segments": 8}}"#).unwrap_err();
    assert!(matches!(e, SceneError::BadPiece { index: 2, count: 0 }));
}

#[test]
fn plane_piece_cannot_seed_a_disk() {
    let scene = Scene::from_json_str(
        &json!({
            "boundary": [{"kind": "plane", "point": [0, 0, 0], "normal": [0, 0, 1]}],
            "surface": {"kind": "disk-fan", "piece": 0, "segments": 8}
        })
        .to_string(),
    )
    .unwrap();
    assert!(matches!(build_initial_surface(&scene), Err(SceneError::NotALoop(0))));
}

#[test]
fn shipped_scenes_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let scene = Scene::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            if scene.surface.is_some() {
                build_initial_surface(&scene).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            }
            n += 1;
        }
    }
    assert!(n >= 8);
}
