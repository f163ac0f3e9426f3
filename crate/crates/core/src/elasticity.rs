//! Plane linear elasticity on transition meshes: constitutive law, element
//! stiffness with subdomain quadrature, assembly, Dirichlet elimination,
//! sparse Cholesky solve and stress recovery.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blending::{ShapeValue, TransitionShapeSet};
use crate::error::{Error, Result};
use crate::mesh::{
    bilinear_jacobian, bilinear_point, build_dof_map, discover_couplings, Couplings, Discretization, DofMap, Mesh,
    EDGE_ENDS,
};
use crate::polybasis::BasisFamily;
use crate::quadrature::{composite_rule_2d, gauss_rule, MappedRule2D, QuadPoint, MAX_POINTS};

/// Plane idealization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneState {
    PlaneStress,
    PlaneStrain,
}

/// Isotropic linear elastic material, unit thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    #[serde(rename = "E")]
    pub e: f64,
    pub nu: f64,
    pub state: PlaneState,
}

impl Material {
    pub fn new(e: f64, nu: f64, state: PlaneState) -> Result<Self> {
        let m = Self { e, nu, state };
        m.validate()?;
        Ok(m)
    }

    /// E = 70 GPa, ν = 0.3, plane stress.
    pub fn aluminum() -> Self {
        Self { e: 70e9, nu: 0.3, state: PlaneState::PlaneStress }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0) || !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(Error::Argument(format!(
                "material needs E > 0 and -1 < nu < 0.5, got E={} nu={}",
                self.e, self.nu
            )));
        }
        Ok(())
    }

    pub fn shear_modulus(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    /// Kolosov's constant.
    pub fn kolosov(&self) -> f64 {
        match self.state {
            PlaneState::PlaneStress => (3.0 - self.nu) / (1.0 + self.nu),
            PlaneState::PlaneStrain => 3.0 - 4.0 * self.nu,
        }
    }
}

/// Voigt constitutive matrix mapping (εx, εy, γxy) to (σx, σy, τxy).
pub fn material_matrix(m: &Material) -> [[f64; 3]; 3] {
    let (e, nu) = (m.e, m.nu);
    match m.state {
        PlaneState::PlaneStress => {
            let c = e / (1.0 - nu * nu);
            [[c, c * nu, 0.0], [c * nu, c, 0.0], [0.0, 0.0, c * (1.0 - nu) / 2.0]]
        }
        PlaneState::PlaneStrain => {
            let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
            [
                [c * (1.0 - nu), c * nu, 0.0],
                [c * nu, c * (1.0 - nu), 0.0],
                [0.0, 0.0, c * (1.0 - 2.0 * nu) / 2.0],
            ]
        }
    }
}

/// Shape values and reference gradients tabulated on a fixed rule.
#[derive(Debug, Clone)]
pub struct ShapeTable {
    pub points: Vec<QuadPoint<f64>>,
    n: usize,
    val: Vec<f64>,
    dxi: Vec<f64>,
    deta: Vec<f64>,
}

impl ShapeTable {
    pub fn new(set: &TransitionShapeSet<f64>, rule: &MappedRule2D<f64>) -> Self {
        let n = set.len();
        let np = rule.points.len();
        let mut val = Vec::with_capacity(n * np);
        let mut dxi = Vec::with_capacity(n * np);
        let mut deta = Vec::with_capacity(n * np);
        let mut buf = vec![ShapeValue::zero(); n];
        for q in &rule.points {
            set.eval_all(q.xi, q.eta, &mut buf);
            for s in &buf {
                val.push(s.value);
                dxi.push(s.dxi);
                deta.push(s.deta);
            }
        }
        Self { points: rule.points.clone(), n, val, dxi, deta }
    }

    /// Number of shape functions.
    pub fn functions(&self) -> usize {
        self.n
    }

    pub fn values(&self, q: usize) -> &[f64] {
        &self.val[q * self.n..(q + 1) * self.n]
    }
}

fn det2(j: &[[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// Physical gradients from reference gradients through the bilinear map.
fn push_forward(j: &[[f64; 2]; 2], det: f64, dxi: f64, deta: f64) -> (f64, f64) {
    ((j[1][1] * dxi - j[1][0] * deta) / det, (-j[0][1] * dxi + j[0][0] * deta) / det)
}

fn checked_jacobian(x: &[[f64; 2]; 4], xi: f64, eta: f64) -> Result<([[f64; 2]; 2], f64)> {
    let j = bilinear_jacobian(x, xi, eta);
    let det = det2(&j);
    if !(det > 0.0) {
        let p = bilinear_point(x, xi, eta);
        return Err(Error::Geometry(format!(
            "jacobian {det:e} at reference ({xi}, {eta}), physical ({}, {})",
            p[0], p[1]
        )));
    }
    Ok((j, det))
}

/// Element stiffness from a tabulated basis; DOFs interleaved `[u0x, u0y, u1x, ...]`.
pub fn stiffness_from_table(x: &[[f64; 2]; 4], table: &ShapeTable, d: &[[f64; 3]; 3]) -> Result<DMatrix<f64>> {
    let n = table.n;
    let np = table.points.len();
    let mut gx = DMatrix::<f64>::zeros(np, n);
    let mut gy = DMatrix::<f64>::zeros(np, n);
    let mut wgx = DMatrix::<f64>::zeros(np, n);
    let mut wgy = DMatrix::<f64>::zeros(np, n);
    for (q, p) in table.points.iter().enumerate() {
        let (j, det) = checked_jacobian(x, p.xi, p.eta)?;
        let w = p.w * det;
        for k in 0..n {
            let (a, b) = push_forward(&j, det, table.dxi[q * n + k], table.deta[q * n + k]);
            gx[(q, k)] = a;
            gy[(q, k)] = b;
            wgx[(q, k)] = w * a;
            wgy[(q, k)] = w * b;
        }
    }
    let pxx = gx.tr_mul(&wgx);
    let pxy = gx.tr_mul(&wgy);
    let pyy = gy.tr_mul(&wgy);
    let mut k = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let (xx, xy, yx, yy) = (pxx[(a, b)], pxy[(a, b)], pxy[(b, a)], pyy[(a, b)]);
            k[(2 * a, 2 * b)] = d[0][0] * xx + d[0][2] * xy + d[2][0] * yx + d[2][2] * yy;
            k[(2 * a, 2 * b + 1)] = d[0][1] * xy + d[0][2] * xx + d[2][1] * yy + d[2][2] * yx;
            k[(2 * a + 1, 2 * b)] = d[1][0] * yx + d[2][0] * xx + d[1][2] * yy + d[2][2] * xy;
            k[(2 * a + 1, 2 * b + 1)] = d[1][1] * yy + d[1][2] * yx + d[2][1] * xy + d[2][2] * xx;
        }
    }
    Ok(k)
}

/// `K_e = Σ w Bᵀ D B |J|` over `rule`.
pub fn element_stiffness(
    x: &[[f64; 2]; 4],
    set: &TransitionShapeSet<f64>,
    rule: &MappedRule2D<f64>,
    m: &Material,
) -> Result<DMatrix<f64>> {
    stiffness_from_table(x, &ShapeTable::new(set, rule), &material_matrix(m))
}

/// Composite rule over the element's integration grid, `n` points per direction and cell.
pub fn element_rule(set: &TransitionShapeSet<f64>, n: usize) -> Result<MappedRule2D<f64>> {
    composite_rule_2d(&set.subdomain_grid(), n)
}

/// A discretized mesh: couplings, numbering and tabulated element bases.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Mesh,
    couplings: Couplings,
    dofs: DofMap,
    sets: Vec<TransitionShapeSet<f64>>,
    tables: Vec<ShapeTable>,
    points: usize,
}

impl FeSpace {
    /// Uses `max(p_x, p_y) + 1` Gauss points per direction in every cell.
    pub fn new(mesh: Mesh, disc: Discretization) -> Result<Self> {
        let n = disc.max_order() + 1;
        Self::with_quadrature(mesh, disc, n)
    }

    pub fn with_quadrature(mesh: Mesh, disc: Discretization, points: usize) -> Result<Self> {
        let couplings = discover_couplings(&mesh)?;
        let dofs = build_dof_map(&mesh, &couplings, disc)?;
        let sets = dofs
            .shape_keys()
            .iter()
            .map(|k| k.build())
            .collect::<Result<Vec<_>>>()?;
        let tables = sets
            .par_iter()
            .map(|s| Ok(ShapeTable::new(s, &element_rule(s, points)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, couplings, dofs, sets, tables, points })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn n_dof(&self) -> usize {
        self.dofs.n_dof()
    }

    pub fn quadrature_points(&self) -> usize {
        self.points
    }

    pub fn shape_set(&self, e: usize) -> &TransitionShapeSet<f64> {
        &self.sets[self.dofs.element(e).shape]
    }

    pub fn table(&self, e: usize) -> &ShapeTable {
        &self.tables[self.dofs.element(e).shape]
    }

    pub fn map_point(&self, e: usize, xi: f64, eta: f64) -> [f64; 2] {
        bilinear_point(&self.mesh.element_coords(e), xi, eta)
    }

    /// Local coefficients `(ux, uy)` per shape function, orientation signs applied.
    pub fn element_coefficients(&self, e: usize, u: &[f64]) -> Vec<[f64; 2]> {
        let ed = self.dofs.element(e);
        ed.ids
            .iter()
            .zip(&ed.signs)
            .map(|(&g, &s)| [s * u[2 * g], s * u[2 * g + 1]])
            .collect()
    }

    /// Displacement of element `e` at a reference point.
    pub fn displacement(&self, e: usize, xi: f64, eta: f64, u: &[f64]) -> [f64; 2] {
        let set = self.shape_set(e);
        let mut buf = vec![ShapeValue::zero(); set.len()];
        set.eval_all(xi, eta, &mut buf);
        let c = self.element_coefficients(e, u);
        let mut out = [0.0; 2];
        for (s, ck) in buf.iter().zip(&c) {
            out[0] += s.value * ck[0];
            out[1] += s.value * ck[1];
        }
        out
    }

    /// Default stress recovery points: the nodes of Lagrange elements, an
    /// equidistant `(p+1)²` grid for hierarchic ones.
    pub fn stress_points(&self, e: usize) -> Vec<(f64, f64)> {
        let interior = self.shape_set(e).interior();
        let p = interior.order();
        let line: Vec<f64> = match interior.family() {
            BasisFamily::Lagrange(_) => interior.nodes().to_vec(),
            BasisFamily::Hierarchic => (0..=p).map(|i| -1.0 + 2.0 * i as f64 / p as f64).collect(),
        };
        let mut pts = Vec::with_capacity(line.len() * line.len());
        for &eta in &line {
            for &xi in &line {
                pts.push((xi, eta));
            }
        }
        pts
    }
}

/// `σ = D B u_e` at each reference point.
pub fn element_stress(
    x: &[[f64; 2]; 4],
    set: &TransitionShapeSet<f64>,
    coeffs: &[[f64; 2]],
    m: &Material,
    points: &[(f64, f64)],
) -> Result<Vec<[f64; 3]>> {
    let d = material_matrix(m);
    let mut buf = vec![ShapeValue::zero(); set.len()];
    points
        .iter()
        .map(|&(xi, eta)| {
            let (j, det) = checked_jacobian(x, xi, eta)?;
            set.eval_all(xi, eta, &mut buf);
            let mut eps = [0.0; 3];
            for (s, c) in buf.iter().zip(coeffs) {
                let (gx, gy) = push_forward(&j, det, s.dxi, s.deta);
                eps[0] += gx * c[0];
                eps[1] += gy * c[1];
                eps[2] += gy * c[0] + gx * c[1];
            }
            Ok(std::array::from_fn(|r| d[r][0] * eps[0] + d[r][1] * eps[1] + d[r][2] * eps[2]))
        })
        .collect()
}

/// Stresses of element `e` at its default recovery points.
pub fn element_stress_default(space: &FeSpace, e: usize, u: &[f64], m: &Material) -> Result<Vec<([f64; 2], [f64; 3])>> {
    let pts = space.stress_points(e);
    let x = space.mesh().element_coords(e);
    let s = element_stress(&x, space.shape_set(e), &space.element_coefficients(e, u), m, &pts)?;
    Ok(pts.iter().map(|&(xi, eta)| bilinear_point(&x, xi, eta)).zip(s).collect())
}

/// Square sparse matrix in compressed-column form with sorted row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl CscMatrix {
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut val = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if a[(i, j)] != 0.0 {
                    row_idx.push(i);
                    val.push(a[(i, j)]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self { n, col_ptr, row_idx, val }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                a[(self.row_idx[p], j)] += self.val[p];
            }
        }
        a
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let rows = &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]];
        rows.binary_search(&i)
            .map(|p| self.val[self.col_ptr[j] + p])
            .unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.val[p] * xj;
            }
        }
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut r = vec![0.0f64; self.n];
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                r[self.row_idx[p]] += self.val[p].abs();
            }
        }
        r.into_iter().fold(0.0, f64::max)
    }

    /// Writes a Matrix Market coordinate file.
    pub fn write_matrix_market(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                writeln!(w, "{} {} {:e}", self.row_idx[p] + 1, j + 1, self.val[p])?;
            }
        }
        Ok(())
    }
}

/// Assembled stiffness, load vector and Dirichlet constraints.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub k: CscMatrix,
    pub f: Vec<f64>,
    pub constraints: Vec<(usize, f64)>,
}

const CHUNK: usize = 64;

/// Assembles the global stiffness (full symmetric storage, zero loads).
pub fn assemble(space: &FeSpace, m: &Material) -> Result<LinearSystem> {
    let d = material_matrix(m);
    let mesh = space.mesh();
    let dofs = space.dofs();
    let ns = dofs.n_scalar();

    // scalar sparsity pattern, then 2×2 blocks
    let mut pattern: Vec<Vec<usize>> = vec![Vec::new(); ns];
    for ed in dofs.elements() {
        for &j in &ed.ids {
            pattern[j].extend_from_slice(&ed.ids);
        }
    }
    for p in pattern.iter_mut() {
        p.sort_unstable();
        p.dedup();
    }
    let n = 2 * ns;
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0);
    let mut row_idx = Vec::new();
    for p in &pattern {
        for _ in 0..2 {
            for &i in p {
                row_idx.push(2 * i);
                row_idx.push(2 * i + 1);
            }
            col_ptr.push(row_idx.len());
        }
    }
    drop(pattern);
    let mut val = vec![0.0; row_idx.len()];

    for start in (0..mesh.len()).step_by(CHUNK) {
        let end = (start + CHUNK).min(mesh.len());
        let mats = (start..end)
            .into_par_iter()
            .map(|e| stiffness_from_table(&mesh.element_coords(e), space.table(e), &d))
            .collect::<Result<Vec<_>>>()?;
        for (e, ke) in (start..end).zip(mats) {
            let ed = dofs.element(e);
            for (b, (&gb, &sb)) in ed.ids.iter().zip(&ed.signs).enumerate() {
                for cb in 0..2 {
                    let col = 2 * gb + cb;
                    let (c0, c1) = (col_ptr[col], col_ptr[col + 1]);
                    let rows = &row_idx[c0..c1];
                    for (a, (&ga, &sa)) in ed.ids.iter().zip(&ed.signs).enumerate() {
                        let pos = c0 + rows.binary_search(&(2 * ga)).expect("pattern covers element");
                        let s = sa * sb;
                        val[pos] += s * ke[(2 * a, 2 * b + cb)];
                        val[pos + 1] += s * ke[(2 * a + 1, 2 * b + cb)];
                    }
                }
            }
        }
    }
    Ok(LinearSystem {
        k: CscMatrix { n, col_ptr, row_idx, val },
        f: vec![0.0; n],
        constraints: Vec::new(),
    })
}

/// System restricted to the free DOFs.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub k: CscMatrix,
    pub f: Vec<f64>,
    /// Global id of each free DOF.
    pub free: Vec<usize>,
    /// Prescribed values at constrained DOFs, zero elsewhere.
    pub u_pre: Vec<f64>,
    pub prescribed: Vec<bool>,
    /// `K u_pre − f` over all DOFs; meaningful when every DOF is prescribed.
    pub residual: Vec<f64>,
}

impl ReducedSystem {
    /// Full-length vector from free values.
    pub fn recover(&self, u_free: &[f64]) -> Vec<f64> {
        let mut u = self.u_pre.clone();
        for (&g, &v) in self.free.iter().zip(u_free) {
            u[g] = v;
        }
        u
    }
}

/// Eliminates the constrained DOFs: `K̃ u = f̃ − K̄ u_pre`.
pub fn apply_dirichlet(sys: &LinearSystem) -> Result<ReducedSystem> {
    let n = sys.k.n;
    let mut prescribed = vec![false; n];
    let mut u_pre = vec![0.0; n];
    for &(g, v) in &sys.constraints {
        if g >= n {
            return Err(Error::Constraint(format!("dof {g} out of range ({n} dofs)")));
        }
        if prescribed[g] {
            if (u_pre[g] - v).abs() > 1e-12 * v.abs().max(u_pre[g].abs()).max(1.0) {
                return Err(Error::Constraint(format!(
                    "dof {g} prescribed twice with {} and {v}",
                    u_pre[g]
                )));
            }
            continue;
        }
        prescribed[g] = true;
        u_pre[g] = v;
    }
    let ku = sys.k.mul_vec(&u_pre);
    let residual: Vec<f64> = ku.iter().zip(&sys.f).map(|(a, b)| a - b).collect();

    let mut map = vec![usize::MAX; n];
    let mut free = Vec::new();
    for g in 0..n {
        if !prescribed[g] {
            map[g] = free.len();
            free.push(g);
        }
    }
    let f: Vec<f64> = free.iter().map(|&g| sys.f[g] - ku[g]).collect();
    let mut col_ptr = vec![0];
    let mut row_idx = Vec::new();
    let mut val = Vec::new();
    for &g in &free {
        for p in sys.k.col_ptr[g]..sys.k.col_ptr[g + 1] {
            let r = map[sys.k.row_idx[p]];
            if r != usize::MAX {
                row_idx.push(r);
                val.push(sys.k.val[p]);
            }
        }
        col_ptr.push(row_idx.len());
    }
    Ok(ReducedSystem {
        k: CscMatrix { n: free.len(), col_ptr, row_idx, val },
        f,
        free,
        u_pre,
        prescribed,
        residual,
    })
}

/// Solution of the reduced system with diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Vec<f64>,
    /// Normwise backward error `‖K u − f‖∞ / (‖K‖∞ ‖u‖∞ + ‖f‖∞)`.
    pub residual: f64,
    /// Ratio of the largest to the smallest diagonal entry.
    pub condition_estimate: f64,
}

const RESIDUAL_LIMIT: f64 = 1e-10;
const GROWTH_LIMIT: f64 = 1e14;

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Sparse Cholesky solve of an SPD system, with one step of iterative refinement.
pub fn solve(k: &CscMatrix, f: &[f64]) -> Result<Solution> {
    let n = k.n;
    if f.len() != n {
        return Err(Error::Argument(format!("rhs length {} for {n} unknowns", f.len())));
    }
    if n == 0 {
        return Ok(Solution { u: Vec::new(), residual: 0.0, condition_estimate: 1.0 });
    }
    let diag = k.diagonal();
    let (dmin, dmax) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if !(dmin > 0.0) {
        return Err(Error::Solver(format!("non-positive diagonal entry {dmin:e}")));
    }
    let symbolic = SymbolicSparseColMatRef::new_checked(n, n, &k.col_ptr, None, &k.row_idx);
    let mat = SparseColMatRef::<'_, usize, f64>::new(symbolic, &k.val);
    let llt = mat
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Solver(format!("Cholesky factorization failed: {e}")))?;
    let solve_once = |rhs: &[f64]| -> Vec<f64> {
        let mut b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        llt.solve_in_place(b.as_mut());
        (0..n).map(|i| b[(i, 0)]).collect()
    };
    let mut u = solve_once(f);
    let (knorm, fnorm) = (k.norm_inf(), norm_inf(f));
    let residual_of = |u: &[f64]| -> (Vec<f64>, f64) {
        let r: Vec<f64> = k.mul_vec(u).iter().zip(f).map(|(a, b)| b - a).collect();
        let scale = knorm * norm_inf(u) + fnorm;
        let rel = if scale > 0.0 { norm_inf(&r) / scale } else { 0.0 };
        (r, rel)
    };
    let (r, mut rel) = residual_of(&u);
    if !rel.is_finite() || u.iter().any(|x| !x.is_finite()) {
        return Err(Error::Solver("factorization produced non-finite values".into()));
    }
    // ‖K‖‖u‖/‖f‖ bounds the condition number from below
    if fnorm > 0.0 && knorm * norm_inf(&u) > GROWTH_LIMIT * fnorm {
        return Err(Error::Solver("matrix is numerically singular (missing supports?)".into()));
    }
    if rel >= RESIDUAL_LIMIT {
        let du = solve_once(&r);
        for (a, b) in u.iter_mut().zip(&du) {
            *a += b;
        }
        rel = residual_of(&u).1;
        if rel >= RESIDUAL_LIMIT {
            return Err(Error::Solver(format!("relative residual {rel:e} after refinement")));
        }
    }
    Ok(Solution { u, residual: rel, condition_estimate: dmax / dmin })
}

/// Eliminates the constraints of `sys`, solves, and returns the full
/// displacement vector.
pub fn solve_constrained(sys: &LinearSystem) -> Result<(Vec<f64>, Solution)> {
    let red = apply_dirichlet(sys)?;
    let sol = solve(&red.k, &red.f)?;
    Ok((red.recover(&sol.u), sol))
}

/// Sampler used for boundary data and interpolation.
pub type VectorField<'a> = dyn Fn([f64; 2]) -> [f64; 2] + Sync + 'a;

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    let s = 0.5 * (t + 1.0);
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// Coefficients of the canonical functions of atomic segment `s` that
/// reproduce `field` along it: end values, then interior coefficients.
pub fn segment_coefficients(space: &FeSpace, s: usize, field: &VectorField) -> Result<([[f64; 2]; 2], Vec<[f64; 2]>)> {
    let seg = &space.couplings().segments()[s];
    let sd = space.dofs().segment(s);
    let verts = space.mesh().vertices();
    let (pa, pb) = (verts[seg.a], verts[seg.b]);
    let (fa, fb) = (field(pa), field(pb));
    let p = sd.space.order;
    let basis = sd.space.basis()?;
    let interior = match sd.space.family {
        BasisFamily::Lagrange(_) => (1..p).map(|i| field(lerp(pa, pb, basis.nodes()[i]))).collect(),
        BasisFamily::Hierarchic => {
            if p < 2 {
                Vec::new()
            } else {
                let rule = gauss_rule::<f64>((p + 4).min(MAX_POINTS))?;
                let m = p - 1;
                let mut mass = DMatrix::<f64>::zeros(m, m);
                let mut rhs = DMatrix::<f64>::zeros(m, 2);
                let mut vals = vec![0.0; p + 1];
                let mut ders = vec![0.0; p + 1];
                for (&t, &w) in rule.points.iter().zip(&rule.weights) {
                    basis.eval_all(t, &mut vals, &mut ders);
                    let f = field(lerp(pa, pb, t));
                    let (l0, l1) = (0.5 * (1.0 - t), 0.5 * (1.0 + t));
                    let r = [f[0] - l0 * fa[0] - l1 * fb[0], f[1] - l0 * fa[1] - l1 * fb[1]];
                    for i in 0..m {
                        for j in 0..m {
                            mass[(i, j)] += w * vals[i + 1] * vals[j + 1];
                        }
                        rhs[(i, 0)] += w * r[0] * vals[i + 1];
                        rhs[(i, 1)] += w * r[1] * vals[i + 1];
                    }
                }
                let chol = mass
                    .cholesky()
                    .ok_or_else(|| Error::Numerical("edge mode mass matrix not SPD".into()))?;
                let c = chol.solve(&rhs);
                (0..m).map(|i| [c[(i, 0)], c[(i, 1)]]).collect()
            }
        }
    };
    Ok(([fa, fb], interior))
}

/// Dirichlet constraints reproducing `field` on the boundary segments for
/// which `select(a, b)` holds, for the components flagged in `comps`.
pub fn impose_field_on_boundary(
    space: &FeSpace,
    field: &VectorField,
    select: &dyn Fn([f64; 2], [f64; 2]) -> bool,
    comps: [bool; 2],
) -> Result<Vec<(usize, f64)>> {
    let dofs = space.dofs();
    let verts = space.mesh().vertices();
    let mut out = std::collections::BTreeMap::new();
    for (s, seg) in space.couplings().boundary_segments() {
        if !select(verts[seg.a], verts[seg.b]) {
            continue;
        }
        let (ends, interior) = segment_coefficients(space, s, field)?;
        let sd = dofs.segment(s);
        let mut put = |id: usize, v: [f64; 2]| {
            for c in 0..2 {
                if comps[c] {
                    out.insert(2 * id + c, v[c]);
                }
            }
        };
        put(dofs.vertex_id(seg.a).expect("boundary vertex"), ends[0]);
        put(dofs.vertex_id(seg.b).expect("boundary vertex"), ends[1]);
        for (&id, &v) in sd.interior.iter().zip(&interior) {
            put(id, v);
        }
    }
    Ok(out.into_iter().collect())
}

/// Constraint fixing the vertex at `p` to `value` in the flagged components.
pub fn constrain_vertex(space: &FeSpace, p: [f64; 2], value: [f64; 2], comps: [bool; 2]) -> Result<Vec<(usize, f64)>> {
    let v = space
        .mesh()
        .find_vertex(p)
        .ok_or_else(|| Error::Config(format!("no mesh vertex at ({}, {})", p[0], p[1])))?;
    let id = space
        .dofs()
        .vertex_id(v)
        .ok_or_else(|| Error::Config(format!("vertex {v} is not used by any element")))?;
    Ok((0..2).filter(|&c| comps[c]).map(|c| (2 * id + c, value[c])).collect())
}

/// Consistent nodal loads of a boundary traction `t(x, n)` on the segments
/// accepted by `select(a, b)`; `n` is the outward unit normal.
pub fn traction_load(
    space: &FeSpace,
    select: &dyn Fn([f64; 2], [f64; 2]) -> bool,
    traction: &dyn Fn([f64; 2], [f64; 2]) -> [f64; 2],
) -> Result<Vec<f64>> {
    let mut f = vec![0.0; space.n_dof()];
    let verts = space.mesh().vertices();
    for (_, seg) in space.couplings().boundary_segments() {
        if !select(verts[seg.a], verts[seg.b]) {
            continue;
        }
        let u = seg.uses[0];
        let e = u.element;
        let layout = space.couplings().layout(e, u.edge);
        let (t0, t1) = (layout.params[u.index], layout.params[u.index + 1]);
        let set = space.shape_set(e);
        let x = space.mesh().element_coords(e);
        let rule = gauss_rule::<f64>((set.max_order() + 4).min(MAX_POINTS))?.mapped(t0, t1);
        let (c0, c1) = EDGE_ENDS[u.edge];
        let (pa, pb) = (x[c0], x[c1]);
        let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
        // E1 and E2 follow the counter-clockwise boundary direction
        let sgn = if u.edge < 2 { 1.0 } else { -1.0 };
        let normal = [sgn * (pb[1] - pa[1]) / len, -sgn * (pb[0] - pa[0]) / len];
        let ed = space.dofs().element(e);
        let mut buf = vec![ShapeValue::zero(); set.len()];
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let (xi, eta) = match u.edge {
                0 => (t, -1.0),
                1 => (1.0, t),
                2 => (t, 1.0),
                _ => (-1.0, t),
            };
            set.eval_all(xi, eta, &mut buf);
            let pt = bilinear_point(&x, xi, eta);
            let tr = traction(pt, normal);
            let ds = 0.5 * len;
            for (k, s) in buf.iter().enumerate() {
                if s.value == 0.0 {
                    continue;
                }
                let g = ed.ids[k];
                let c = w * ds * s.value * ed.signs[k];
                f[2 * g] += c * tr[0];
                f[2 * g + 1] += c * tr[1];
            }
        }
    }
    Ok(f)
}

/// Interpolant of `field` in the whole space: segment-wise traces as in
/// [`impose_field_on_boundary`], bubbles by nodal interpolation (Lagrange) or
/// local L2 projection (hierarchic) of the remainder.
pub fn interpolate_field(space: &FeSpace, field: &VectorField) -> Result<Vec<f64>> {
    let dofs = space.dofs();
    let mut u = vec![0.0; space.n_dof()];
    let verts = space.mesh().vertices();
    for (v, p) in verts.iter().enumerate() {
        if let Some(id) = dofs.vertex_id(v) {
            let f = field(*p);
            u[2 * id] = f[0];
            u[2 * id + 1] = f[1];
        }
    }
    for s in 0..space.couplings().segments().len() {
        let (_, interior) = segment_coefficients(space, s, field)?;
        for (&id, v) in dofs.segment(s).interior.iter().zip(interior) {
            u[2 * id] = v[0];
            u[2 * id + 1] = v[1];
        }
    }
    let bubbles: Vec<Vec<[f64; 2]>> = (0..space.mesh().len())
        .into_par_iter()
        .map(|e| bubble_coefficients(space, e, &u, field))
        .collect::<Result<_>>()?;
    for (e, c) in bubbles.into_iter().enumerate() {
        for (&id, v) in dofs.interior(e).iter().zip(c) {
            u[2 * id] = v[0];
            u[2 * id + 1] = v[1];
        }
    }
    Ok(u)
}

fn bubble_coefficients(space: &FeSpace, e: usize, u: &[f64], field: &VectorField) -> Result<Vec<[f64; 2]>> {
    let set = space.shape_set(e);
    let range = set.bubble_range();
    if range.is_empty() {
        return Ok(Vec::new());
    }
    let x = space.mesh().element_coords(e);
    // boundary part only: bubbles of `u` are still zero here
    let coeffs = space.element_coefficients(e, u);
    let mut buf = vec![ShapeValue::zero(); set.len()];
    let remainder = |xi: f64, eta: f64, buf: &mut [ShapeValue<f64>]| {
        set.eval_all(xi, eta, buf);
        let f = field(bilinear_point(&x, xi, eta));
        let mut r = f;
        for (s, c) in buf[..range.start].iter().zip(&coeffs) {
            r[0] -= s.value * c[0];
            r[1] -= s.value * c[1];
        }
        r
    };
    let interior = set.interior();
    match interior.family() {
        BasisFamily::Lagrange(_) => {
            let nodes = interior.nodes();
            let p = interior.order();
            let mut out = Vec::with_capacity(range.len());
            for j in 1..p {
                for i in 1..p {
                    out.push(remainder(nodes[i], nodes[j], &mut buf));
                }
            }
            Ok(out)
        }
        BasisFamily::Hierarchic => {
            let m = range.len();
            let rule = composite_rule_2d(
                &crate::quadrature::SubdomainGrid::trivial(),
                (interior.order() + 3).min(MAX_POINTS),
            )?;
            let mut mass = DMatrix::<f64>::zeros(m, m);
            let mut rhs = DMatrix::<f64>::zeros(m, 2);
            for q in &rule.points {
                let r = remainder(q.xi, q.eta, &mut buf);
                let b: DVector<f64> = DVector::from_iterator(m, buf[range.clone()].iter().map(|s| s.value));
                mass.ger(q.w, &b, &b, 1.0);
                for i in 0..m {
                    rhs[(i, 0)] += q.w * r[0] * b[i];
                    rhs[(i, 1)] += q.w * r[1] * b[i];
                }
            }
            let chol = mass
                .cholesky()
                .ok_or_else(|| Error::Numerical("bubble mass matrix not SPD".into()))?;
            let c = chol.solve(&rhs);
            Ok((0..m).map(|i| [c[(i, 0)], c[(i, 1)]]).collect())
        }
    }
}

/// `½ uᵀ K u`.
pub fn strain_energy(k: &CscMatrix, u: &[f64]) -> f64 {
    0.5 * k.mul_vec(u).iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
}
