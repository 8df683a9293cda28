use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use frontal_core::germ::GermKind;
use frontal_forge::{parse_scene, resolve_germ};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frontal-forge"))
}

fn demo_scene() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes/demo.json")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn scene_references_resolve() {
    let scene = parse_scene(r#"{ "germs": { "st": { "type": "catalog", "name": "swallowtail" } } }"#).unwrap();
    let g = resolve_germ(&scene, "st").unwrap();
    assert_eq!((g.name(), g.kind()), ("st", GermKind::Swallowtail));
    assert!(resolve_germ(&scene, "sw_example(1, 2)").is_ok());
    let e = resolve_germ(&scene, "nonexistent").unwrap_err().to_string();
    assert!(e.contains("unresolved reference"), "{e}");
}

#[test]
fn custom_map_germ_compiles() {
    let scene = parse_scene(
        r#"{ "germs": { "g": { "type": "map", "components": ["u", "v^2", "v^3 + k*u^2"], "params": { "k": 0.5 } } } }"#,
    )
    .unwrap();
    let g = resolve_germ(&scene, "g").unwrap();
    let p = g.point(1.0, 1.0).unwrap();
    assert_eq!(p.0, [1.0, 1.0, 1.5]);
}

#[test]
fn malformed_scenes_are_rejected() {
    let dup = r#"{ "germs": { "a": { "type": "catalog", "name": "f_C" }, "a": { "type": "catalog", "name": "f_S" } } }"#;
    assert!(parse_scene(dup).unwrap_err().to_string().contains("duplicate"));
    let clash = r#"{ "curves": { "x": { "type": "builtin", "name": "circle", "args": [1.0], "domain": [-1, 1] } },
                     "germs": { "x": { "type": "catalog", "name": "f_C" } } }"#;
    assert!(parse_scene(clash).is_err());
    let cycle = r#"{ "germs": { "a": { "type": "normal_form", "name": "n" } },
                     "normal_forms": { "n": { "type": "from_germ", "germ": "a", "halfwidth": 0.1 } } }"#;
    let msg = match parse_scene(cycle) {
        Err(e) => e.to_string(),
        Ok(s) => resolve_germ(&s, "a").unwrap_err().to_string(),
    };
    assert!(msg.contains("circular"), "{msg}");
    let e = parse_scene("{ \"germs\": { \n \"a\": 3 } }").unwrap_err().to_string();
    assert!(e.contains("line 2"), "{e}");
}

#[test]
fn demo_scene_loads() {
    let text = std::fs::read_to_string(demo_scene()).unwrap();
    let scene = parse_scene(&text).unwrap();
    for g in ["ccr", "ms_symmetric", "circle_germ"] {
        resolve_germ(&scene, g).unwrap();
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(run(&["analyze", "--germ", "nonexistent"], d).status.code(), Some(1));
    // straight crease: no Frenet frame, so the computation fails
    assert_eq!(run(&["normalform", "--from-germ", "f_C"], d).status.code(), Some(2));
    let o = run(&["symmetry", "--germ", "f_S", "--expect", "ii"], d);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["status"], "validation_failed");
    let o = run(&["symmetry", "--germ", "f_S", "--expect", "iii"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(d.join("symmetry_report.json").exists());
    assert!(d.join("psi_iii.csv").exists());
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["isomers", "--crease", "helix(1,1)", "--crease-domain=-1,1", "--theta", "0.5 + 0.1*sin(u)"];
    let a = run(&args, dir.path());
    let b = run(&args, dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["subcommand"], "isomers");
    assert_eq!(r["tol"], 1e-8);
}

#[test]
fn scene_tolerance_applies() {
    let dir = tempfile::tempdir().unwrap();
    let scene = demo_scene();
    let o = run(&["analyze", "--scene", scene.to_str().unwrap(), "--germ", "ms_symmetric"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["tol"], 1e-10);
    let o = run(&["analyze", "--scene", scene.to_str().unwrap(), "--germ", "ms_symmetric", "--tol", "1e-7"], dir.path());
    assert_eq!(json(&o)["tol"], 1e-7);
}

#[test]
fn strip_and_fold_write_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let scene = demo_scene();
    let s = scene.to_str().unwrap();
    let o = run(&["strip", "--scene", s, "--nf", "helix_edge", "--nu", "9", "--nv", "3"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let obj = std::fs::read_to_string(d.join("strip.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 27);
    let o = run(&["fold", "--scene", s, "--nf", "helix_edge", "--nu", "9", "--nv", "3"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(d.join("fold.obj")).unwrap().contains("F_dual"));
}
