use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Couplings, Mesh, Region};
use crate::blending::{EdgeSegment, EdgeSpec, TransitionShapeSet};
use crate::error::{Error, Result};
use crate::polybasis::{Basis1D, BasisFamily, MAX_ORDER};

/// A one-dimensional family with its order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Space {
    pub family: BasisFamily,
    pub order: usize,
}

impl Space {
    pub fn new(family: BasisFamily, order: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::Argument(format!("order {order} outside 1..={MAX_ORDER}")));
        }
        Ok(Self { family, order })
    }

    pub fn basis(&self) -> Result<Basis1D<f64>> {
        Basis1D::new(self.family, self.order)
    }
}

/// Spaces used by the x- and y-regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Discretization {
    pub x: Space,
    pub y: Space,
}

impl Discretization {
    pub fn new(x: Space, y: Space) -> Self {
        Self { x, y }
    }

    /// Same space on both regions.
    pub fn uniform(s: Space) -> Self {
        Self { x: s, y: s }
    }

    pub fn space(&self, r: Region) -> Space {
        match r {
            Region::X => self.x,
            Region::Y => self.y,
        }
    }

    pub fn max_order(&self) -> usize {
        self.x.order.max(self.y.order)
    }
}

/// One trace segment of an element edge, as used for shape-set caching.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentKey {
    lo: u64,
    hi: u64,
    pub space: Space,
}

impl SegmentKey {
    pub fn lo(&self) -> f64 {
        f64::from_bits(self.lo)
    }

    pub fn hi(&self) -> f64 {
        f64::from_bits(self.hi)
    }
}

/// Everything that determines an element's local basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShapeKey {
    pub edges: [Vec<SegmentKey>; 4],
    pub interior: Space,
}

impl ShapeKey {
    pub fn build(&self) -> Result<TransitionShapeSet<f64>> {
        let mut specs = Vec::with_capacity(4);
        for segs in &self.edges {
            let pieces = segs
                .iter()
                .map(|k| EdgeSegment::new(k.lo(), k.hi(), k.space.basis()?))
                .collect::<Result<Vec<_>>>()?;
            specs.push(EdgeSpec::new(pieces)?);
        }
        let edges: [EdgeSpec<f64>; 4] = specs.try_into().expect("four edges");
        TransitionShapeSet::new(edges, self.interior.family, self.interior.order)
    }

    /// True unless every edge carries the interior space on a single segment.
    pub fn is_transition(&self) -> bool {
        self.edges
            .iter()
            .any(|s| s.len() != 1 || s[0].space != self.interior)
    }

    pub fn max_order(&self) -> usize {
        self.edges
            .iter()
            .flatten()
            .map(|k| k.space.order)
            .chain([self.interior.order])
            .max()
            .unwrap_or(1)
    }
}

/// Global scalar ids and orientation signs of one element's local functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementDofs {
    /// Index into [`DofMap::shape_keys`].
    pub shape: usize,
    pub ids: Vec<usize>,
    pub signs: Vec<f64>,
}

impl ElementDofs {
    /// Global displacement DOF of local function `k`, component `c`.
    pub fn dof(&self, k: usize, c: usize) -> usize {
        2 * self.ids[k] + c
    }
}

/// Functions owned by an atomic segment, ordered in its canonical direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDofs {
    pub space: Space,
    pub interior: Vec<usize>,
}

/// Global numbering: vertex functions first, then segment interiors, then bubbles.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    elements: Vec<ElementDofs>,
    shape_keys: Vec<ShapeKey>,
    vertex_ids: Vec<Option<usize>>,
    segments: Vec<SegmentDofs>,
    interior_ids: Vec<Vec<usize>>,
    disc: Discretization,
    n_scalar: usize,
}

impl DofMap {
    pub fn element(&self, e: usize) -> &ElementDofs {
        &self.elements[e]
    }

    pub fn elements(&self) -> &[ElementDofs] {
        &self.elements
    }

    pub fn shape_keys(&self) -> &[ShapeKey] {
        &self.shape_keys
    }

    pub fn shape_key(&self, e: usize) -> &ShapeKey {
        &self.shape_keys[self.elements[e].shape]
    }

    pub fn vertex_id(&self, v: usize) -> Option<usize> {
        self.vertex_ids.get(v).copied().flatten()
    }

    /// Dofs of atomic segment `s` (same indexing as [`Couplings::segments`]).
    pub fn segment(&self, s: usize) -> &SegmentDofs {
        &self.segments[s]
    }

    /// Bubble ids of element `e`.
    pub fn interior(&self, e: usize) -> &[usize] {
        &self.interior_ids[e]
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    pub fn n_scalar(&self) -> usize {
        self.n_scalar
    }

    /// Total displacement DOFs, two per scalar function.
    pub fn n_dof(&self) -> usize {
        2 * self.n_scalar
    }
}

/// Numbers all shape functions of `mesh` and records each element's basis.
pub fn build_dof_map(mesh: &Mesh, couplings: &Couplings, disc: Discretization) -> Result<DofMap> {
    Space::new(disc.x.family, disc.x.order)?;
    Space::new(disc.y.family, disc.y.order)?;
    let mut next = 0usize;

    let mut vertex_ids = vec![None; mesh.vertices().len()];
    let mut used = vec![false; mesh.vertices().len()];
    for q in mesh.quads() {
        for &v in q {
            used[v] = true;
        }
    }
    for (v, u) in used.iter().enumerate() {
        if *u {
            vertex_ids[v] = Some(next);
            next += 1;
        }
    }

    let mut segments = Vec::with_capacity(couplings.segments().len());
    for seg in couplings.segments() {
        let space = if seg.uses.iter().any(|u| mesh.region(u.element) == Region::Y) {
            disc.y
        } else {
            disc.x
        };
        let interior: Vec<usize> = (next..next + space.order - 1).collect();
        next += space.order - 1;
        segments.push(SegmentDofs { space, interior });
    }

    let mut interior_ids = Vec::with_capacity(mesh.len());
    for e in 0..mesh.len() {
        let p = disc.space(mesh.region(e)).order;
        let n = (p - 1) * (p - 1);
        interior_ids.push((next..next + n).collect::<Vec<_>>());
        next += n;
    }

    let mut bases: HashMap<Space, Basis1D<f64>> = HashMap::new();
    let mut key_index: HashMap<ShapeKey, usize> = HashMap::new();
    let mut shape_keys = Vec::new();
    let mut elements = Vec::with_capacity(mesh.len());
    for e in 0..mesh.len() {
        let q = mesh.quads()[e];
        let mut ids: Vec<usize> = q.iter().map(|&v| vertex_ids[v].expect("used vertex")).collect();
        let mut signs = vec![1.0; 4];
        let mut edge_keys: [Vec<SegmentKey>; 4] = Default::default();
        for (k, keys) in edge_keys.iter_mut().enumerate() {
            let layout = couplings.layout(e, k);
            for s in 0..layout.segment_count() {
                let (wa, wb) = (layout.vertices[s], layout.vertices[s + 1]);
                let sid = couplings
                    .segment_id(wa, wb)
                    .ok_or_else(|| Error::MeshConsistency(format!("segment {wa}-{wb} not registered")))?;
                let sd = &segments[sid];
                keys.push(SegmentKey {
                    lo: layout.params[s].to_bits(),
                    hi: layout.params[s + 1].to_bits(),
                    space: sd.space,
                });
                if s > 0 {
                    // junction vertex between two pieces
                    ids.push(vertex_ids[wa].expect("used vertex"));
                    signs.push(1.0);
                }
                let basis = match bases.get(&sd.space) {
                    Some(b) => b,
                    None => {
                        let b = sd.space.basis()?;
                        bases.entry(sd.space).or_insert(b)
                    }
                };
                for i in 1..sd.space.order {
                    if wa < wb {
                        ids.push(sd.interior[i - 1]);
                        signs.push(1.0);
                    } else {
                        ids.push(sd.interior[basis.reversed_index(i) - 1]);
                        signs.push(basis.reversal_sign(i));
                    }
                }
            }
        }
        ids.extend_from_slice(&interior_ids[e]);
        signs.extend(std::iter::repeat_n(1.0, interior_ids[e].len()));
        let key = ShapeKey { edges: edge_keys, interior: disc.space(mesh.region(e)) };
        let shape = match key_index.get(&key) {
            Some(&i) => i,
            None => {
                let i = shape_keys.len();
                key_index.insert(key.clone(), i);
                shape_keys.push(key);
                i
            }
        };
        elements.push(ElementDofs { shape, ids, signs });
    }

    Ok(DofMap {
        elements,
        shape_keys,
        vertex_ids,
        segments,
        interior_ids,
        disc,
        n_scalar: next,
    })
}
