use std::path::Path;
use std::process::Command;

fn run(dir: &Path, config: &str, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_xnyfem"))
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn rows(dir: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(dir.join("out/result.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n_dof,error,p_x,p_y,level"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn meta(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/meta.json")).unwrap()).unwrap()
}

#[test]
fn linear_patch_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "study": "patch-linear", "mesh": "bathe-patch", "p_x": 3, "p_y": 3,
                  "pairing": "LaLe", "distribution": "gll", "n_y": 2, "n_s": 1}"#;
    let (code, err) = run(dir.path(), cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let r = rows(dir.path());
    assert_eq!(r.len(), 1);
    assert!(r[0][1].parse::<f64>().unwrap() < 1e-10);
    assert_eq!(&r[0][2..], ["3", "3", "1"]);
    let m = meta(dir.path());
    assert_eq!(m["config"]["version"], "B");
    assert_eq!(m["config"]["material"]["E"], 70e9);
    assert!(m["version"].is_string() && m["elapsed_seconds"].is_number());
}

#[test]
fn hole_study_rows_and_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "study": "conv-hole", "p_x": 8, "p_y": {"from": 1, "to": 4}, "levels": 5}"#;
    let (code, err) = run(dir.path(), cfg, &["--jobs", "2"]);
    assert_eq!(code, 0, "{err}");
    let r = rows(dir.path());
    assert_eq!(r.len(), 20);
    let slopes = meta(dir.path())["slopes"].as_array().unwrap().clone();
    assert_eq!(slopes.len(), 4);
    for s in &slopes[..3] {
        let (got, want) = (s["slope"].as_f64().unwrap(), s["theoretical"].as_f64().unwrap());
        assert!((got - want).abs() <= 0.2, "{s}");
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "study": "conv-poly", "p_y": [1, 2], "levels": 3}"#;
    assert_eq!(run(dir.path(), cfg, &[]).0, 0);
    let first = std::fs::read(dir.path().join("out/result.csv")).unwrap();
    assert_eq!(run(dir.path(), cfg, &["--jobs", "1"]).0, 0);
    assert_eq!(first, std::fs::read(dir.path().join("out/result.csv")).unwrap());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = r#"{"schema": 1, "study": "patch-linear", "mesh": "no/such/mesh.json"}"#;
    let (code, err) = run(dir.path(), missing, &[]);
    assert_eq!(code, 2);
    assert!(err.contains("mesh"), "{err}");
    assert_eq!(run(dir.path(), r#"{"schema": 7, "study": "patch-linear"}"#, &[]).0, 2);
    assert_eq!(run(dir.path(), "not json", &[]).0, 2);
    assert_eq!(run(dir.path(), r#"{"schema": 1, "study": "conv-poly", "p_y": 0}"#, &[]).0, 2);
    let out = Command::new(env!("CARGO_BIN_EXE_xnyfem")).args(["run", "/nonexistent.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inadmissible_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    // the cubic beam loads are only in equilibrium for ν = 0.3
    let cfg = r#"{"schema": 1, "study": "patch-cubic", "material": {"E": 1000.0, "nu": 0.2, "state": "plane-stress"}}"#;
    assert_eq!(run(dir.path(), cfg, &[]).0, 2);
}

#[test]
fn custom_mesh_file() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = r#"{"vertices": [[0,0],[1,0],[2,0],[0,1],[1,1],[2,1]],
                   "quads": [[0,1,4,3],[1,2,5,4]], "region": ["x","y"]}"#;
    std::fs::write(dir.path().join("mesh.json"), mesh).unwrap();
    let cfg = r#"{"schema": 1, "study": "patch-linear", "mesh": "mesh.json", "p_x": [2, 3], "p_y": 2, "n_s": [1, 2]}"#;
    let (code, err) = run(dir.path(), cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let r = rows(dir.path());
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|row| row[1].parse::<f64>().unwrap() < 1e-10));
}

#[test]
fn dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "study": "patch-quadratic", "p_x": 2, "p_y": 2, "field_grid": 5}"#;
    let (code, err) = run(dir.path(), cfg, &["--dump-matrix", "--dump-shapes", "4"]);
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out");
    let mtx = std::fs::read_to_string(out.join("matrix.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket"));
    let sol = std::fs::read_to_string(out.join("field_solution.csv")).unwrap();
    assert!(sol.starts_with("x,y,ux,uy,sx,sy,txy\n"));
    // the beam mesh after one split pass has 5 elements, 25 samples each
    assert_eq!(sol.lines().count(), 1 + 5 * 25);
    let exact = std::fs::read_to_string(out.join("field_exact.csv")).unwrap();
    assert_eq!(exact.lines().count(), 1 + 25);
    let shapes = std::fs::read_to_string(out.join("shapes_0.csv")).unwrap();
    assert!(shapes.starts_with("function,xi,eta,value\n"));
    assert!(!std::fs::read_dir(&out).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn basis_dump_reproduces_constants() {
    let dir = tempfile::tempdir().unwrap();
    for pairing in ["LaLa", "LaLe", "LeLa", "LeLe"] {
        let cfg = format!(r#"{{"schema": 1, "study": "basis-dump", "pairing": "{pairing}", "p_x": 3, "p_y": [1, 2, 4], "n_y": 3}}"#);
        let (code, err) = run(dir.path(), &cfg, &["--dump-shapes", "3"]);
        assert_eq!(code, 0, "{err}");
        for row in rows(dir.path()) {
            assert!(row[1].parse::<f64>().unwrap() < 1e-13, "{pairing}: {row:?}");
        }
        assert!(dir.path().join("out/shapes_2.csv").exists());
    }
}

#[test]
fn singular_study_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "study": "singular-cantilever", "p_y": [1, 2], "levels": 0, "n_s": [1],
                  "reference": {"uniform": 1, "n_y": 2, "n_s": 2, "p": 4}}"#;
    let (code, err) = run(dir.path(), cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let r = rows(dir.path());
    assert_eq!(r.len(), 4);
    for row in &r {
        let e: f64 = row[1].parse().unwrap();
        assert!(e > 0.0 && e < 1.0);
    }
    assert!(meta(dir.path())["summary"]["reference_energy"].as_f64().unwrap() > 0.0);
    let bad = r#"{"schema": 1, "study": "singular-L", "mesh": "beam"}"#;
    assert_eq!(run(dir.path(), bad, &[]).0, 2);
}
