//! Transition shape functions built by linear-blending transfinite interpolation.
//!
//! Each of the four reference edges carries a piecewise one-dimensional trace
//! space ([`EdgeSpec`]). Corner functions are Boolean sums of the two incident
//! edge traces, edge functions are traces multiplied by a linear blend, and the
//! interior is spanned by tensor products of one-dimensional interior functions.
//!
//! Reference edges and their parameters:
//!
//! | edge | location | parameter | from corner | to corner |
//! |------|----------|-----------|-------------|-----------|
//! | E1   | eta = -1 | xi        | 1           | 2         |
//! | E2   | xi = +1  | eta       | 2           | 3         |
//! | E3   | eta = +1 | xi        | 4           | 3         |
//! | E4   | xi = -1  | eta       | 1           | 4         |

pub mod fixture;

use std::ops::Range;

use crate::error::{Error, Result};
use crate::polybasis::{Basis1D, BasisFamily, MAX_ORDER};
use crate::quadrature::SubdomainGrid;
use crate::scalar::Real;

/// A sub-interval `[lo, hi]` of an edge with its own one-dimensional basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSegment<T> {
    pub lo: T,
    pub hi: T,
    pub basis: Basis1D<T>,
}

impl<T: Real> EdgeSegment<T> {
    pub fn new(lo: T, hi: T, basis: Basis1D<T>) -> Result<Self> {
        if !(lo >= -T::one() && hi <= T::one() && lo < hi) {
            return Err(Error::Construction(format!("bad segment [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, basis })
    }

    /// Maps an edge parameter into the segment's reference coordinate.
    fn local(&self, t: T) -> T {
        (T::lit(2.0) * t - self.lo - self.hi) / (self.hi - self.lo)
    }
}

/// Piecewise trace space on one reference edge.
///
/// Functions are numbered along the edge: the vertex function at `t = -1`,
/// interior functions of the first segment, the junction function shared by
/// segments one and two, and so on up to the vertex function at `t = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec<T> {
    segments: Vec<EdgeSegment<T>>,
    offsets: Vec<usize>,
    count: usize,
}

impl<T: Real> EdgeSpec<T> {
    pub fn new(segments: Vec<EdgeSegment<T>>) -> Result<Self> {
        let tol = T::lit(1e-12);
        let first = segments
            .first()
            .ok_or_else(|| Error::Construction("edge needs at least one segment".into()))?;
        if (first.lo + T::one()).abs() > tol {
            return Err(Error::Construction("first segment must start at -1".into()));
        }
        if (segments[segments.len() - 1].hi - T::one()).abs() > tol {
            return Err(Error::Construction("last segment must end at +1".into()));
        }
        for w in segments.windows(2) {
            if (w[0].hi - w[1].lo).abs() > tol {
                return Err(Error::Construction(format!(
                    "segments [{}, {}] and [{}, {}] leave a gap or overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        let mut offsets = Vec::with_capacity(segments.len());
        let mut off = 0;
        for s in &segments {
            offsets.push(off);
            off += s.basis.order();
        }
        Ok(Self { segments, offsets, count: off + 1 })
    }

    /// A single segment covering the whole edge.
    pub fn single(basis: Basis1D<T>) -> Self {
        Self::new(vec![EdgeSegment { lo: -T::one(), hi: T::one(), basis }])
            .expect("full-edge segment is valid")
    }

    /// Segments of equal family and order between the given breakpoints.
    pub fn uniform(breaks: &[T], family: BasisFamily, p: usize) -> Result<Self> {
        let basis = Basis1D::new(family, p)?;
        let segs = breaks
            .windows(2)
            .map(|w| EdgeSegment::new(w[0], w[1], basis.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(segs)
    }

    pub fn segments(&self) -> &[EdgeSegment<T>] {
        &self.segments
    }

    /// Number of trace functions `n_E`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the first trace function belonging to segment `k`.
    pub fn segment_offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// Interior breakpoints.
    pub fn breakpoints(&self) -> Vec<T> {
        self.segments[1..].iter().map(|s| s.lo).collect()
    }

    pub fn max_order(&self) -> usize {
        self.segments.iter().map(|s| s.basis.order()).max().unwrap_or(1)
    }

    fn locate(&self, t: T) -> usize {
        self.segments
            .iter()
            .position(|s| t <= s.hi)
            .unwrap_or(self.segments.len() - 1)
    }

    /// Value and derivative (with respect to the edge parameter) of trace function `i`.
    pub fn eval(&self, i: usize, t: T) -> Result<(T, T)> {
        if i >= self.count {
            return Err(Error::Argument(format!(
                "trace index {i} out of range (edge has {} functions)",
                self.count
            )));
        }
        if t.abs() > T::one() + T::lit(1e-12) {
            return Err(Error::Argument(format!("edge parameter {t} outside [-1, 1]")));
        }
        let mut v = [T::zero(); 4 * (MAX_ORDER + 1)];
        let mut d = [T::zero(); 4 * (MAX_ORDER + 1)];
        if self.count > v.len() {
            let mut v = vec![T::zero(); self.count];
            let mut d = vec![T::zero(); self.count];
            self.eval_all(t, &mut v, &mut d);
            return Ok((v[i], d[i]));
        }
        self.eval_all(t, &mut v, &mut d);
        Ok((v[i], d[i]))
    }

    /// Evaluates every trace function at `t`; entries outside the active
    /// segment are set to zero.
    pub fn eval_all(&self, t: T, vals: &mut [T], ders: &mut [T]) {
        for x in vals[..self.count].iter_mut() {
            *x = T::zero();
        }
        for x in ders[..self.count].iter_mut() {
            *x = T::zero();
        }
        let k = self.locate(t);
        let seg = &self.segments[k];
        let off = self.offsets[k];
        let n = seg.basis.len();
        let scale = T::lit(2.0) / (seg.hi - seg.lo);
        let s = seg.local(t).max(-T::one()).min(T::one());
        seg.basis.eval_all(s, &mut vals[off..off + n], &mut ders[off..off + n]);
        for d in ders[off..off + n].iter_mut() {
            *d = *d * scale;
        }
    }
}

/// Trace function `i` of `spec` at `t`.
pub fn edge_trace<T: Real>(spec: &EdgeSpec<T>, i: usize, t: T) -> Result<(T, T)> {
    spec.eval(i, t)
}

/// Value and reference gradient of one 2D shape function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShapeValue<T> {
    pub value: T,
    pub dxi: T,
    pub deta: T,
}

impl<T: Real> ShapeValue<T> {
    pub fn zero() -> Self {
        Self { value: T::zero(), dxi: T::zero(), deta: T::zero() }
    }
}

/// The complete local basis of a (transition) quadrilateral.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionShapeSet<T> {
    edges: [EdgeSpec<T>; 4],
    interior: Basis1D<T>,
    edge_offsets: [usize; 5],
}

/// Builds the blended basis from four edge specs and an interior family/order.
pub fn build_transition<T: Real>(
    edges: [EdgeSpec<T>; 4],
    interior_family: BasisFamily,
    interior_order: usize,
) -> Result<TransitionShapeSet<T>> {
    TransitionShapeSet::new(edges, interior_family, interior_order)
}

impl<T: Real> TransitionShapeSet<T> {
    pub fn new(
        edges: [EdgeSpec<T>; 4],
        interior_family: BasisFamily,
        interior_order: usize,
    ) -> Result<Self> {
        let interior = Basis1D::new(interior_family, interior_order)
            .map_err(|e| Error::Construction(format!("interior basis: {e}")))?;
        let mut edge_offsets = [0usize; 5];
        edge_offsets[0] = 4;
        for e in 0..4 {
            edge_offsets[e + 1] = edge_offsets[e] + edges[e].len() - 2;
        }
        Ok(Self { edges, interior, edge_offsets })
    }

    pub fn edges(&self) -> &[EdgeSpec<T>; 4] {
        &self.edges
    }

    pub fn interior(&self) -> &Basis1D<T> {
        &self.interior
    }

    /// Total number of shape functions.
    pub fn len(&self) -> usize {
        let q = self.interior.order() - 1;
        self.edge_offsets[4] + q * q
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Local indices of the functions owned by edge `e` (excluding corners).
    pub fn edge_range(&self, e: usize) -> Range<usize> {
        self.edge_offsets[e]..self.edge_offsets[e + 1]
    }

    /// Local indices of the interior (bubble) functions.
    pub fn bubble_range(&self) -> Range<usize> {
        self.edge_offsets[4]..self.len()
    }

    /// Local index of the 2D function whose trace on edge `e` is trace function `j`.
    pub fn edge_function_index(&self, e: usize, j: usize) -> usize {
        let n = self.edges[e].len();
        const ENDS: [(usize, usize); 4] = [(0, 1), (1, 2), (3, 2), (0, 3)];
        if j == 0 {
            ENDS[e].0
        } else if j == n - 1 {
            ENDS[e].1
        } else {
            self.edge_offsets[e] + j - 1
        }
    }

    /// Integration grid whose cells avoid every kink of the piecewise traces.
    pub fn subdomain_grid(&self) -> SubdomainGrid<T> {
        let mut xi = self.edges[0].breakpoints();
        xi.extend(self.edges[2].breakpoints());
        let mut eta = self.edges[1].breakpoints();
        eta.extend(self.edges[3].breakpoints());
        SubdomainGrid::from_interior(&xi, &eta).expect("edge breakpoints lie inside (-1, 1)")
    }

    /// Highest polynomial order found on any edge or in the interior.
    pub fn max_order(&self) -> usize {
        self.edges
            .iter()
            .map(|e| e.max_order())
            .max()
            .unwrap_or(1)
            .max(self.interior.order())
    }

    /// Value and gradient of function `k` at `(xi, eta)`.
    pub fn eval(&self, k: usize, xi: T, eta: T) -> Result<ShapeValue<T>> {
        if k >= self.len() {
            return Err(Error::Argument(format!(
                "shape index {k} out of range ({} functions)",
                self.len()
            )));
        }
        let lim = T::one() + T::lit(1e-12);
        if xi.abs() > lim || eta.abs() > lim {
            return Err(Error::Argument(format!("point ({xi}, {eta}) outside the reference square")));
        }
        let mut out = vec![ShapeValue::zero(); self.len()];
        self.eval_all(xi, eta, &mut out);
        Ok(out[k])
    }

    /// Evaluates every function at `(xi, eta)` into `out` (length [`Self::len`]).
    pub fn eval_all(&self, xi: T, eta: T, out: &mut [ShapeValue<T>]) {
        let half = T::lit(0.5);
        let a0 = half * (T::one() - xi);
        let a1 = half * (T::one() + xi);
        let b0 = half * (T::one() - eta);
        let b1 = half * (T::one() + eta);
        let (da0, da1, db0, db1) = (-half, half, -half, half);

        let params = [xi, eta, xi, eta];
        let mut tv: [Vec<T>; 4] = Default::default();
        let mut td: [Vec<T>; 4] = Default::default();
        for e in 0..4 {
            let n = self.edges[e].len();
            tv[e] = vec![T::zero(); n];
            td[e] = vec![T::zero(); n];
            self.edges[e].eval_all(params[e], &mut tv[e], &mut td[e]);
        }
        let last = |e: usize| self.edges[e].len() - 1;

        // corner functions: Boolean sum of the two incident edge traces
        // (blend_xi, trace_on_eta_edge, blend_eta, trace_on_xi_edge)
        let corners = [
            (a0, da0, tv[3][0], td[3][0], b0, db0, tv[0][0], td[0][0]),
            (a1, da1, tv[1][0], td[1][0], b0, db0, tv[0][last(0)], td[0][last(0)]),
            (a1, da1, tv[1][last(1)], td[1][last(1)], b1, db1, tv[2][last(2)], td[2][last(2)]),
            (a0, da0, tv[3][last(3)], td[3][last(3)], b1, db1, tv[2][0], td[2][0]),
        ];
        for (c, &(ax, dax, fe, dfe, by, dby, fx, dfx)) in corners.iter().enumerate() {
            out[c] = ShapeValue {
                value: ax * fe + by * fx - ax * by,
                dxi: dax * fe + by * dfx - dax * by,
                deta: ax * dfe + dby * fx - ax * dby,
            };
        }

        // edge functions: trace times the linear blend towards the edge
        for e in 0..4 {
            let off = self.edge_offsets[e];
            for j in 1..self.edges[e].len() - 1 {
                let (v, d) = (tv[e][j], td[e][j]);
                out[off + j - 1] = match e {
                    0 => ShapeValue { value: b0 * v, dxi: b0 * d, deta: db0 * v },
                    1 => ShapeValue { value: a1 * v, dxi: da1 * v, deta: a1 * d },
                    2 => ShapeValue { value: b1 * v, dxi: b1 * d, deta: db1 * v },
                    _ => ShapeValue { value: a0 * v, dxi: da0 * v, deta: a0 * d },
                };
            }
        }

        // tensor bubbles, xi index fastest
        let p = self.interior.order();
        if p >= 2 {
            let mut xv = [T::zero(); MAX_ORDER + 1];
            let mut xd = [T::zero(); MAX_ORDER + 1];
            let mut yv = [T::zero(); MAX_ORDER + 1];
            let mut yd = [T::zero(); MAX_ORDER + 1];
            self.interior.eval_all(xi, &mut xv, &mut xd);
            self.interior.eval_all(eta, &mut yv, &mut yd);
            let mut k = self.edge_offsets[4];
            for j in 1..p {
                for i in 1..p {
                    out[k] = ShapeValue {
                        value: xv[i] * yv[j],
                        dxi: xd[i] * yv[j],
                        deta: xv[i] * yd[j],
                    };
                    k += 1;
                }
            }
        }
    }
}

/// Evaluates shape function `k` of `set` at `(xi, eta)`.
pub fn eval_shape<T: Real>(set: &TransitionShapeSet<T>, k: usize, xi: T, eta: T) -> Result<ShapeValue<T>> {
    set.eval(k, xi, eta)
}
