//! Meshes of the benchmark geometries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mesh, Region};
use crate::error::{Error, Result};

/// Seed of the cantilever's vertex perturbation.
pub const CANTILEVER_SEED: u64 = 20;

/// Names accepted by [`builtin_geometry`].
pub const GEOMETRY_IDS: [&str; 7] = [
    "two-quad",
    "bathe-patch",
    "beam",
    "high-order",
    "hole-quadrant",
    "l-domain",
    "cantilever",
];

/// Built-in mesh by name.
pub fn builtin_geometry(id: &str) -> Result<Mesh> {
    match id {
        "two-quad" => Ok(two_quad()),
        "bathe-patch" => Ok(bathe_patch()),
        "beam" => Ok(beam(10.0, 2.0)),
        "high-order" => Ok(rect_pair(2.0, 1.0)),
        "hole-quadrant" => Ok(hole_quadrant(1.0)),
        "l-domain" => Ok(l_domain()),
        "cantilever" => Ok(cantilever(CANTILEVER_SEED)),
        _ => Err(Error::Config(format!(
            "unknown geometry '{id}', expected one of {}",
            GEOMETRY_IDS.join(", ")
        ))),
    }
}

fn build(vertices: Vec<[f64; 2]>, quads: Vec<[usize; 4]>, region: Vec<Region>) -> Mesh {
    Mesh::new(vertices, quads, region).expect("built-in mesh is valid")
}

/// `[0, w] × [0, h]` split at `x = w/2`; x-element left, y-element right.
pub fn rect_pair(w: f64, h: f64) -> Mesh {
    build(
        vec![[0.0, 0.0], [0.5 * w, 0.0], [w, 0.0], [w, h], [0.5 * w, h], [0.0, h]],
        vec![[0, 1, 4, 5], [1, 2, 3, 4]],
        vec![Region::X, Region::Y],
    )
}

/// Two unit squares side by side, left x, right y.
pub fn two_quad() -> Mesh {
    rect_pair(2.0, 1.0)
}

/// Five-quad distorted patch on the square `[0, 10]²`; the inner quad is y.
pub fn bathe_patch() -> Mesh {
    build(
        vec![
            [0.0, 0.0],
            [10.0, 0.0],
            [2.0, 2.0],
            [8.0, 3.0],
            [4.0, 7.0],
            [8.0, 7.0],
            [0.0, 10.0],
            [10.0, 10.0],
        ],
        vec![[0, 1, 3, 2], [1, 7, 5, 3], [4, 5, 7, 6], [0, 2, 4, 6], [2, 3, 5, 4]],
        vec![Region::X, Region::X, Region::X, Region::X, Region::Y],
    )
}

/// Beam `[0, l] × [0, c]` cut by the skew line from `(0.4 l, 0)` to `(0.6 l, c)`.
pub fn beam(l: f64, c: f64) -> Mesh {
    build(
        vec![[0.0, 0.0], [0.4 * l, 0.0], [l, 0.0], [l, c], [0.6 * l, c], [0.0, c]],
        vec![[0, 1, 4, 5], [1, 2, 3, 4]],
        vec![Region::X, Region::Y],
    )
}

/// `[a, 3a] × [0, 4a]` as two squares beside a hole of radius `a` at the
/// origin; lower square x, upper y.
pub fn hole_quadrant(a: f64) -> Mesh {
    build(
        vec![
            [a, 0.0],
            [3.0 * a, 0.0],
            [3.0 * a, 2.0 * a],
            [a, 2.0 * a],
            [3.0 * a, 4.0 * a],
            [a, 4.0 * a],
        ],
        vec![[0, 1, 2, 3], [3, 2, 4, 5]],
        vec![Region::X, Region::Y],
    )
}

/// Corner of the L-domain `[0, 20]² \ (10, 20]²`.
pub const L_CORNER: [f64; 2] = [10.0, 10.0];

/// L-shaped domain of twelve 5×5 squares; the three squares touching the
/// re-entrant corner are y.
pub fn l_domain() -> Mesh {
    let h = 5.0;
    let mut vertices = Vec::new();
    let mut index = std::collections::HashMap::new();
    for j in 0..=4 {
        for i in 0..=4 {
            if i > 2 && j > 2 {
                continue;
            }
            index.insert((i, j), vertices.len());
            vertices.push([h * i as f64, h * j as f64]);
        }
    }
    let mut quads = Vec::new();
    let mut region = Vec::new();
    for j in 0..4 {
        for i in 0..4 {
            if i >= 2 && j >= 2 {
                continue;
            }
            quads.push([index[&(i, j)], index[&(i + 1, j)], index[&(i + 1, j + 1)], index[&(i, j + 1)]]);
            let touches = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)].contains(&(2, 2));
            region.push(if touches { Region::Y } else { Region::X });
        }
    }
    build(vertices, quads, region)
}

/// Clamped corners of the cantilever.
pub const CANTILEVER_CORNERS: [[f64; 2]; 2] = [[0.0, 0.0], [0.0, 2.0]];

/// 10×2 grid of unit squares on `[0, 10] × [0, 2]` with interior vertices
/// moved by up to ±10% of the cell size; the two elements at the clamped
/// corners are y.
pub fn cantilever(seed: u64) -> Mesh {
    let (nx, ny) = (10usize, 2usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let mut p = [i as f64, j as f64];
            if i > 0 && i < nx && j > 0 && j < ny {
                p[0] += rng.random_range(-0.1..0.1);
                p[1] += rng.random_range(-0.1..0.1);
            }
            vertices.push(p);
        }
    }
    let at = |i: usize, j: usize| j * (nx + 1) + i;
    let mut quads = Vec::new();
    let mut region = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            quads.push([at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
            region.push(if i == 0 { Region::Y } else { Region::X });
        }
    }
    build(vertices, quads, region)
}
