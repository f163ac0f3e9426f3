//! Quadrilateral meshes with x/y region tags, banded refinement of the
//! y-region, coupling discovery along non-conforming edges and the global
//! numbering of shape functions.

pub mod builtin;
mod dofs;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dofs::{build_dof_map, DofMap, Discretization, ElementDofs, SegmentDofs, SegmentKey, ShapeKey, Space};

/// Local edges as (start corner, end corner) in the direction of the edge
/// parameter: E1 and E3 run along xi, E2 and E4 along eta.
pub const EDGE_ENDS: [(usize, usize); 4] = [(0, 1), (1, 2), (3, 2), (0, 3)];

const ON_EDGE_TOL: f64 = 1e-10;
const NEAR_MISS_TOL: f64 = 1e-6;
const PARAM_SNAP: f64 = 1e12;

/// Which of the two element families a quad belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    X,
    Y,
}

/// Element class after refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementClass {
    X,
    Y,
    /// x-element coupled to a different trace space on at least one edge.
    Xny,
    /// y-element coupled to finer y-elements.
    Yny,
}

impl fmt::Display for ElementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementClass::X => "x",
            ElementClass::Y => "y",
            ElementClass::Xny => "xNy",
            ElementClass::Yny => "yNy",
        })
    }
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    quads: Vec<[usize; 4]>,
    region: Vec<Region>,
}

/// A validated quadrilateral mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    quads: Vec<[usize; 4]>,
    region: Vec<Region>,
    classes: Vec<ElementClass>,
}

/// Bilinear map of the reference square onto `x`.
pub fn bilinear_point(x: &[[f64; 2]; 4], xi: f64, eta: f64) -> [f64; 2] {
    let n = bilinear_weights(xi, eta);
    let mut p = [0.0; 2];
    for a in 0..4 {
        p[0] += n[a] * x[a][0];
        p[1] += n[a] * x[a][1];
    }
    p
}

fn bilinear_weights(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

/// Jacobian `[[x_xi, x_eta], [y_xi, y_eta]]` of the bilinear map.
pub fn bilinear_jacobian(x: &[[f64; 2]; 4], xi: f64, eta: f64) -> [[f64; 2]; 2] {
    let dxi = [-(1.0 - eta), 1.0 - eta, 1.0 + eta, -(1.0 + eta)];
    let deta = [-(1.0 - xi), -(1.0 + xi), 1.0 + xi, 1.0 - xi];
    let mut j = [[0.0; 2]; 2];
    for a in 0..4 {
        for d in 0..2 {
            j[d][0] += 0.25 * dxi[a] * x[a][d];
            j[d][1] += 0.25 * deta[a] * x[a][d];
        }
    }
    j
}

impl Mesh {
    /// Validates and classifies a mesh.
    pub fn new(vertices: Vec<[f64; 2]>, quads: Vec<[usize; 4]>, region: Vec<Region>) -> Result<Self> {
        if quads.is_empty() {
            return Err(Error::MeshConsistency("mesh has no quads".into()));
        }
        if region.len() != quads.len() {
            return Err(Error::MeshConsistency(format!(
                "{} region tags for {} quads",
                region.len(),
                quads.len()
            )));
        }
        if let Some(v) = vertices.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::MeshConsistency(format!("vertex {v} has a non-finite coordinate")));
        }
        for (e, q) in quads.iter().enumerate() {
            if let Some(&v) = q.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::MeshConsistency(format!("quad {e} references missing vertex {v}")));
            }
            for i in 0..4 {
                if q[(i + 1)..].contains(&q[i]) {
                    return Err(Error::MeshConsistency(format!("quad {e} repeats vertex {}", q[i])));
                }
            }
        }
        let mut mesh = Self { vertices, quads, region, classes: Vec::new() };
        mesh.check_duplicates()?;
        mesh.check_orientation()?;
        let couplings = discover_couplings(&mesh)?;
        mesh.classes = classify(&mesh, &couplings);
        Ok(mesh)
    }

    fn check_duplicates(&self) -> Result<()> {
        let tol = ON_EDGE_TOL * self.diameter();
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a][0].total_cmp(&self.vertices[b][0]));
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[k + 1..] {
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                if pb[0] - pa[0] > tol {
                    break;
                }
                if (pb[1] - pa[1]).abs() <= tol {
                    return Err(Error::DuplicateVertex(a.min(b), a.max(b)));
                }
            }
        }
        Ok(())
    }

    fn check_orientation(&self) -> Result<()> {
        let g = 1.0 / 3f64.sqrt();
        for e in 0..self.quads.len() {
            let x = self.element_coords(e);
            for (xi, eta) in [(-g, -g), (g, -g), (g, g), (-g, g)] {
                let j = bilinear_jacobian(&x, xi, eta);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                if det <= 0.0 {
                    return Err(Error::Orientation { quad: e, jacobian: det, xi, eta });
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn quads(&self) -> &[[usize; 4]] {
        &self.quads
    }

    pub fn regions(&self) -> &[Region] {
        &self.region
    }

    pub fn region(&self, e: usize) -> Region {
        self.region[e]
    }

    pub fn classes(&self) -> &[ElementClass] {
        &self.classes
    }

    pub fn class(&self, e: usize) -> ElementClass {
        self.classes[e]
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    /// Corner coordinates of element `e`.
    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 4] {
        self.quads[e].map(|v| self.vertices[v])
    }

    /// Bounding box `[xmin, ymin, xmax, ymax]` of the used vertices.
    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for q in &self.quads {
            for &v in q {
                let p = self.vertices[v];
                b[0] = b[0].min(p[0]);
                b[1] = b[1].min(p[1]);
                b[2] = b[2].max(p[0]);
                b[3] = b[3].max(p[1]);
            }
        }
        b
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        let b = self.bbox();
        (b[2] - b[0]).hypot(b[3] - b[1])
    }

    /// Number of elements per class.
    pub fn census(&self) -> BTreeMap<ElementClass, usize> {
        let mut m = BTreeMap::new();
        for &c in &self.classes {
            *m.entry(c).or_insert(0) += 1;
        }
        m
    }

    /// Index of the vertex within `tol·diameter` of `p`.
    pub fn find_vertex(&self, p: [f64; 2]) -> Option<usize> {
        let tol = ON_EDGE_TOL * self.diameter();
        self.vertices
            .iter()
            .position(|v| (v[0] - p[0]).hypot(v[1] - p[1]) <= tol)
    }

    /// Serializes to the JSON mesh format; floats round-trip exactly.
    pub fn to_json(&self) -> String {
        let file = MeshFile {
            vertices: self.vertices.clone(),
            quads: self.quads.clone(),
            region: self.region.clone(),
        };
        serde_json::to_string(&file).expect("mesh serialization cannot fail")
    }

    /// Same geometry with a different tag per element.
    pub fn with_regions(&self, region: Vec<Region>) -> Result<Self> {
        Mesh::new(self.vertices.clone(), self.quads.clone(), region)
    }
}

/// Parses and validates a JSON mesh.
pub fn load_mesh(text: &str) -> Result<Mesh> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    Mesh::new(file.vertices, file.quads, file.region)
}

/// Vertices along one element edge, in the edge's parameter direction.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLayout {
    /// Vertex ids from the start corner to the end corner.
    pub vertices: Vec<usize>,
    /// Their positions in the edge parameter, from -1 to 1.
    pub params: Vec<f64>,
}

impl EdgeLayout {
    pub fn segment_count(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// One element edge piece lying on an atomic segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentUse {
    pub element: usize,
    pub edge: usize,
    /// Position of the piece along the element edge.
    pub index: usize,
    /// True when the edge parameter runs from the lower to the higher vertex id.
    pub aligned: bool,
}

/// Straight piece between two consecutive vertices on element edges; the
/// canonical direction is from `a` to `b` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicSegment {
    pub a: usize,
    pub b: usize,
    pub uses: Vec<SegmentUse>,
}

impl AtomicSegment {
    pub fn is_boundary(&self) -> bool {
        self.uses.len() == 1
    }
}

/// Edge layouts of all elements and the atomic segments they share.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    layouts: Vec<[EdgeLayout; 4]>,
    segments: Vec<AtomicSegment>,
    lookup: HashMap<(usize, usize), usize>,
}

impl Couplings {
    pub fn layout(&self, e: usize, edge: usize) -> &EdgeLayout {
        &self.layouts[e][edge]
    }

    pub fn segments(&self) -> &[AtomicSegment] {
        &self.segments
    }

    /// Atomic segment between `a` and `b`, in either order.
    pub fn segment_id(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// True when the edge is subdivided by vertices of finer neighbors.
    pub fn is_coupling_edge(&self, e: usize, edge: usize) -> bool {
        self.layouts[e][edge].segment_count() > 1
    }

    pub fn boundary_segments(&self) -> impl Iterator<Item = (usize, &AtomicSegment)> {
        self.segments.iter().enumerate().filter(|(_, s)| s.is_boundary())
    }

    /// Elements sharing at least one atomic segment with `e`.
    pub fn neighbors(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for layout in &self.layouts[e] {
            for w in layout.vertices.windows(2) {
                let s = &self.segments[self.lookup[&(w[0].min(w[1]), w[0].max(w[1]))]];
                out.extend(s.uses.iter().map(|u| u.element).filter(|&f| f != e));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Finds hanging vertices on every element edge and builds the atomic segments.
pub fn discover_couplings(mesh: &Mesh) -> Result<Couplings> {
    let verts = &mesh.vertices;
    let mut used: Vec<usize> = mesh.quads.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    used.sort_by(|&a, &b| verts[a][0].total_cmp(&verts[b][0]));
    let xs: Vec<f64> = used.iter().map(|&v| verts[v][0]).collect();

    let mut layouts = Vec::with_capacity(mesh.quads.len());
    for (e, q) in mesh.quads.iter().enumerate() {
        let mut edges: [EdgeLayout; 4] = std::array::from_fn(|_| EdgeLayout { vertices: vec![], params: vec![] });
        for (k, &(s, t)) in EDGE_ENDS.iter().enumerate() {
            let (va, vb) = (q[s], q[t]);
            let (pa, pb) = (verts[va], verts[vb]);
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = d[0].hypot(d[1]);
            let slack = NEAR_MISS_TOL * len;
            let lo = xs.partition_point(|&x| x < pa[0].min(pb[0]) - slack);
            let hi = xs.partition_point(|&x| x <= pa[0].max(pb[0]) + slack);
            let mut inner: Vec<(f64, usize)> = Vec::new();
            for &v in &used[lo..hi] {
                if v == va || v == vb {
                    continue;
                }
                let r = [verts[v][0] - pa[0], verts[v][1] - pa[1]];
                let s = (r[0] * d[0] + r[1] * d[1]) / (len * len);
                if s <= ON_EDGE_TOL || s >= 1.0 - ON_EDGE_TOL {
                    continue;
                }
                let dist = (r[0] * d[1] - r[1] * d[0]).abs() / len;
                if dist <= ON_EDGE_TOL * len {
                    inner.push((s, v));
                } else if dist <= slack {
                    return Err(Error::MeshConsistency(format!(
                        "vertex {v} lies {dist:e} off edge {} of quad {e}",
                        k + 1
                    )));
                }
            }
            inner.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut vertices = vec![va];
            let mut params = vec![-1.0];
            for (s, v) in inner {
                vertices.push(v);
                params.push(((2.0 * s - 1.0) * PARAM_SNAP).round() / PARAM_SNAP);
            }
            vertices.push(vb);
            params.push(1.0);
            edges[k] = EdgeLayout { vertices, params };
        }
        layouts.push(edges);
    }

    let mut by_key: BTreeMap<(usize, usize), Vec<SegmentUse>> = BTreeMap::new();
    for (e, edges) in layouts.iter().enumerate() {
        for (k, layout) in edges.iter().enumerate() {
            for (index, w) in layout.vertices.windows(2).enumerate() {
                by_key.entry((w[0].min(w[1]), w[0].max(w[1]))).or_default().push(SegmentUse {
                    element: e,
                    edge: k,
                    index,
                    aligned: w[0] < w[1],
                });
            }
        }
    }
    let mut segments = Vec::with_capacity(by_key.len());
    let mut lookup = HashMap::with_capacity(by_key.len());
    for ((a, b), uses) in by_key {
        if uses.len() > 2 {
            return Err(Error::MeshConsistency(format!(
                "segment {a}-{b} is shared by {} elements",
                uses.len()
            )));
        }
        lookup.insert((a, b), segments.len());
        segments.push(AtomicSegment { a, b, uses });
    }
    Ok(Couplings { layouts, segments, lookup })
}

fn classify(mesh: &Mesh, c: &Couplings) -> Vec<ElementClass> {
    (0..mesh.quads.len())
        .map(|e| {
            let multi = (0..4).any(|k| c.is_coupling_edge(e, k));
            match mesh.region[e] {
                Region::X => {
                    let y_neighbor = c.neighbors(e).iter().any(|&f| mesh.region[f] == Region::Y);
                    if multi || y_neighbor {
                        ElementClass::Xny
                    } else {
                        ElementClass::X
                    }
                }
                Region::Y if multi => ElementClass::Yny,
                Region::Y => ElementClass::Y,
            }
        })
        .collect()
}

/// Parameters of the y-region refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineParams {
    /// Children per direction in each split.
    pub n_y: usize,
    /// Number of successive passes.
    pub n_s: usize,
    /// When non-empty, each pass splits the y-elements touching one of these
    /// points instead of those on the x/y interface.
    #[serde(default)]
    pub focus: Vec<[f64; 2]>,
}

impl RefineParams {
    pub fn new(n_y: usize, n_s: usize) -> Result<Self> {
        let p = Self { n_y, n_s, focus: Vec::new() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_focus(mut self, focus: Vec<[f64; 2]>) -> Self {
        self.focus = focus;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.n_y) || !(1..=8).contains(&self.n_s) {
            return Err(Error::Argument(format!(
                "refinement n_y={} n_s={} outside 1..=4 / 1..=8",
                self.n_y, self.n_s
            )));
        }
        Ok(())
    }
}

struct VertexPool {
    vertices: Vec<[f64; 2]>,
    cells: HashMap<(i64, i64), Vec<usize>>,
    h: f64,
    tol: f64,
}

impl VertexPool {
    fn new(vertices: Vec<[f64; 2]>, diameter: f64) -> Self {
        let mut pool = Self {
            vertices: Vec::new(),
            cells: HashMap::new(),
            h: 1e-6 * diameter,
            tol: ON_EDGE_TOL * diameter,
        };
        for p in vertices {
            pool.push(p);
        }
        pool
    }

    fn cell(&self, p: [f64; 2]) -> (i64, i64) {
        ((p[0] / self.h).floor() as i64, (p[1] / self.h).floor() as i64)
    }

    fn push(&mut self, p: [f64; 2]) -> usize {
        let id = self.vertices.len();
        self.vertices.push(p);
        let c = self.cell(p);
        self.cells.entry(c).or_default().push(id);
        id
    }

    fn find_or_insert(&mut self, p: [f64; 2]) -> usize {
        let (cx, cy) = self.cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &id in ids {
                        let q = self.vertices[id];
                        if (q[0] - p[0]).hypot(q[1] - p[1]) <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        self.push(p)
    }
}

/// Splits each flagged element into `n × n` children by bilinear subdivision.
pub fn split_elements(mesh: &Mesh, flagged: &[bool], n: usize) -> Result<Mesh> {
    if n == 0 || flagged.len() != mesh.len() {
        return Err(Error::Argument("split needs n ≥ 1 and one flag per element".into()));
    }
    let mut pool = VertexPool::new(mesh.vertices.clone(), mesh.diameter());
    let mut quads = Vec::with_capacity(mesh.len());
    let mut region = Vec::with_capacity(mesh.len());
    for e in 0..mesh.len() {
        if !flagged[e] || n == 1 {
            quads.push(mesh.quads[e]);
            region.push(mesh.region[e]);
            continue;
        }
        let x = mesh.element_coords(e);
        let q = mesh.quads[e];
        let mut ids = vec![0usize; (n + 1) * (n + 1)];
        for j in 0..=n {
            for i in 0..=n {
                let corner = match (i, j) {
                    (0, 0) => Some(q[0]),
                    (i, 0) if i == n => Some(q[1]),
                    (i, j) if i == n && j == n => Some(q[2]),
                    (0, j) if j == n => Some(q[3]),
                    _ => None,
                };
                ids[j * (n + 1) + i] = match corner {
                    Some(v) => v,
                    None => {
                        let xi = -1.0 + 2.0 * i as f64 / n as f64;
                        let eta = -1.0 + 2.0 * j as f64 / n as f64;
                        pool.find_or_insert(bilinear_point(&x, xi, eta))
                    }
                };
            }
        }
        for j in 0..n {
            for i in 0..n {
                let at = |i: usize, j: usize| ids[j * (n + 1) + i];
                quads.push([at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
                region.push(mesh.region[e]);
            }
        }
    }
    Mesh::new(pool.vertices, quads, region)
}

/// Splits every quad into four.
pub fn uniform_refine(mesh: &Mesh) -> Result<Mesh> {
    split_elements(mesh, &vec![true; mesh.len()], 2)
}

fn interface_band(mesh: &Mesh, c: &Couplings) -> Vec<bool> {
    (0..mesh.len())
        .map(|e| {
            mesh.region[e] == Region::Y
                && c.neighbors(e).iter().any(|&f| mesh.region[f] == Region::X)
        })
        .collect()
}

fn focus_band(mesh: &Mesh, focus: &[[f64; 2]]) -> Vec<bool> {
    let tol = ON_EDGE_TOL * mesh.diameter();
    (0..mesh.len())
        .map(|e| {
            mesh.region[e] == Region::Y
                && mesh.quads[e].iter().any(|&v| {
                    let p = mesh.vertices[v];
                    focus.iter().any(|f| (p[0] - f[0]).hypot(p[1] - f[1]) <= tol)
                })
        })
        .collect()
}

/// Runs `n_s` passes, each splitting the current band of y-elements into
/// `n_y × n_y` children.
pub fn refine_y_region(mesh: &Mesh, params: &RefineParams) -> Result<Mesh> {
    params.validate()?;
    let band = |m: &Mesh| -> Result<Vec<bool>> {
        if params.focus.is_empty() {
            Ok(interface_band(m, &discover_couplings(m)?))
        } else {
            Ok(focus_band(m, &params.focus))
        }
    };
    if !band(mesh)?.iter().any(|&b| b) {
        return Err(Error::Argument(if params.focus.is_empty() {
            "no y-element is adjacent to an x-element".into()
        } else {
            "no y-element touches a focus point".into()
        }));
    }
    let mut current = mesh.clone();
    for _ in 0..params.n_s {
        let flags = band(&current)?;
        current = split_elements(&current, &flags, params.n_y)?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_quad() -> Mesh {
        builtin::two_quad()
    }

    #[test]
    fn classify_after_single_split() {
        let m = refine_y_region(&two_quad(), &RefineParams::new(2, 1).unwrap()).unwrap();
        assert_eq!(m.len(), 5);
        let census = m.census();
        assert_eq!(census.get(&ElementClass::Xny), Some(&1));
        assert_eq!(census.get(&ElementClass::Y), Some(&4));
        let c = discover_couplings(&m).unwrap();
        let x = m.classes().iter().position(|&k| k == ElementClass::Xny).unwrap();
        assert_eq!(c.layout(x, 1).params, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn thirds() {
        let m = refine_y_region(&two_quad(), &RefineParams::new(3, 1).unwrap()).unwrap();
        let c = discover_couplings(&m).unwrap();
        let p = &c.layout(0, 1).params;
        assert_eq!(p.len(), 4);
        assert!((p[1] + 1.0 / 3.0).abs() < 1e-12 && (p[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn conforming_mesh_is_single_segment() {
        let m = builtin::bathe_patch();
        let c = discover_couplings(&m).unwrap();
        for e in 0..m.len() {
            for k in 0..4 {
                assert!(!c.is_coupling_edge(e, k));
            }
        }
        assert_eq!(c.boundary_segments().count(), 4);
    }

    #[test]
    fn near_miss_is_rejected() {
        let v = vec![
            [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0],
            [2.0, 0.0], [2.0, 1.0], [1.0 + 1e-8, 0.5], [2.0, 0.5],
        ];
        let q = vec![[0, 1, 2, 3], [1, 4, 5, 2]];
        assert!(Mesh::new(v.clone(), q, vec![Region::X, Region::Y]).is_ok());
        let q = vec![[0, 1, 2, 3], [1, 4, 7, 6], [6, 7, 5, 2]];
        let r = Mesh::new(v, q, vec![Region::X, Region::Y, Region::Y]);
        assert!(matches!(r, Err(Error::MeshConsistency(_))), "{r:?}");
    }
}
