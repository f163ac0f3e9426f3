//! Output files. Every file is written to a temporary sibling and renamed.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use xnyfem::analytic::AnalyticField;
use xnyfem::blending::{ShapeValue, TransitionShapeSet};
use xnyfem::elasticity::{element_stress, FeSpace, Material};
use xnyfem::verify::StudyRow;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn result_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from("n_dof,error,p_x,p_y,level\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.n_dof, num(r.error), r.p_x, r.p_y, r.level);
    }
    s
}

const FIELD_HEADER: &str = "x,y,ux,uy,sx,sy,txy\n";

fn field_line(s: &mut String, p: [f64; 2], u: [f64; 2], sig: Option<[f64; 3]>) {
    let sig = match sig {
        Some(v) => format!("{},{},{}", num(v[0]), num(v[1]), num(v[2])),
        None => ",,".to_string(),
    };
    let _ = writeln!(s, "{},{},{},{},{sig}", num(p[0]), num(p[1]), num(u[0]), num(u[1]));
}

/// Exact field on an `n × n` grid over the mesh bounding box; points outside
/// the mesh are skipped.
pub fn exact_field_csv(space: &FeSpace, field: &dyn AnalyticField, n: usize) -> String {
    let [x0, y0, x1, y1] = space.mesh().bbox();
    let mut s = String::from(FIELD_HEADER);
    for j in 0..n {
        for i in 0..n {
            let p = [
                x0 + (x1 - x0) * i as f64 / (n - 1) as f64,
                y0 + (y1 - y0) * j as f64 / (n - 1) as f64,
            ];
            if contains(space, p) {
                field_line(&mut s, p, field.displacement(p), field.stress(p));
            }
        }
    }
    s
}

fn contains(space: &FeSpace, p: [f64; 2]) -> bool {
    let mesh = space.mesh();
    (0..mesh.len()).any(|e| {
        let x = mesh.element_coords(e);
        // convex quads: inside when left of (or on) every edge
        (0..4).all(|k| {
            let (a, b) = (x[k], x[(k + 1) % 4]);
            (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-12
        })
    })
}

/// Finite-element solution on an `n × n` reference grid of every element.
pub fn solution_csv(space: &FeSpace, u: &[f64], m: &Material, n: usize) -> xnyfem::Result<String> {
    let line: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let pts: Vec<(f64, f64)> = line.iter().flat_map(|&eta| line.iter().map(move |&xi| (xi, eta))).collect();
    let mut s = String::from(FIELD_HEADER);
    for e in 0..space.mesh().len() {
        let x = space.mesh().element_coords(e);
        let sig = element_stress(&x, space.shape_set(e), &space.element_coefficients(e, u), m, &pts)?;
        for (&(xi, eta), sg) in pts.iter().zip(sig) {
            field_line(&mut s, space.map_point(e, xi, eta), space.displacement(e, xi, eta, u), Some(sg));
        }
    }
    Ok(s)
}

/// Values of every function of `set` on an `n × n` grid.
pub fn shapes_csv(set: &TransitionShapeSet<f64>, n: usize) -> String {
    let mut s = String::from("function,xi,eta,value\n");
    let mut buf = vec![ShapeValue::zero(); set.len()];
    let t = |i: usize| -1.0 + 2.0 * i as f64 / (n - 1) as f64;
    let mut grid = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            set.eval_all(t(i), t(j), &mut buf);
            grid.push((t(i), t(j), buf.clone()));
        }
    }
    for k in 0..set.len() {
        for (xi, eta, vals) in &grid {
            let _ = writeln!(s, "{k},{},{},{}", num(*xi), num(*eta), num(vals[k].value));
        }
    }
    s
}
