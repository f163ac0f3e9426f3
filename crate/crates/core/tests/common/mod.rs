#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xnyfem::blending::{EdgeSpec, ShapeValue};
use xnyfem::elasticity::{assemble, interpolate_field, FeSpace, Material};
use xnyfem::mesh::{bilinear_point, builtin, refine_y_region, Discretization, Mesh, RefineParams, Space, EDGE_ENDS};
use xnyfem::verify::Pairing;
use xnyfem::{Basis1D, BasisFamily, NodeDistribution, TransitionShapeSet};

pub const GLL: BasisFamily = BasisFamily::Lagrange(NodeDistribution::Gll);

/// Transition meshes used by the property checks.
pub fn transition_meshes() -> Vec<Mesh> {
    vec![
        refine_y_region(&builtin::two_quad(), &RefineParams::new(2, 2).unwrap()).unwrap(),
        refine_y_region(&builtin::bathe_patch(), &RefineParams::new(3, 1).unwrap()).unwrap(),
        refine_y_region(&builtin::beam(10.0, 2.0), &RefineParams::new(2, 1).unwrap()).unwrap(),
    ]
}

pub fn spaces() -> Vec<FeSpace> {
    let mut out = Vec::new();
    for (i, mesh) in transition_meshes().into_iter().enumerate() {
        for pairing in Pairing::ALL {
            let (px, py) = [(2, 3), (4, 2), (3, 3)][i];
            let d = pairing.discretization(NodeDistribution::Gll, px, py).unwrap();
            out.push(FeSpace::new(mesh.clone(), d).unwrap());
        }
    }
    out
}

fn grid(n: usize) -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for j in 0..n {
        for i in 0..n {
            g.push((-1.0 + 2.0 * i as f64 / (n - 1) as f64, -1.0 + 2.0 * j as f64 / (n - 1) as f64));
        }
    }
    g
}

/// Interpolating the constant field reproduces it everywhere.
pub fn partition_of_unity() -> f64 {
    let mut worst: f64 = 0.0;
    for space in spaces() {
        let u = interpolate_field(&space, &|_| [1.0, -2.0]).unwrap();
        for e in 0..space.mesh().len() {
            for (xi, eta) in grid(9) {
                let v = space.displacement(e, xi, eta, &u);
                worst = worst.max((v[0] - 1.0).abs()).max((v[1] + 2.0).abs());
            }
        }
    }
    worst
}

/// Reference-space nodes of the boundary functions of an all-Lagrange set.
pub fn boundary_nodes(set: &TransitionShapeSet) -> Vec<(f64, f64)> {
    let mut nodes = vec![(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    for (e, spec) in set.edges().iter().enumerate() {
        let mut ts = Vec::new();
        for (k, seg) in spec.segments().iter().enumerate() {
            if k > 0 {
                ts.push(seg.lo);
            }
            let b = seg.basis.nodes();
            for &x in &b[1..b.len() - 1] {
                ts.push(seg.lo + 0.5 * (x + 1.0) * (seg.hi - seg.lo));
            }
        }
        nodes.extend(ts.into_iter().map(|t| on_edge(e, t)));
    }
    nodes
}

/// `N_i(η_j) = δ_ij` for every spectral basis up to order 8.
pub fn kronecker_1d() -> f64 {
    let mut worst: f64 = 0.0;
    for dist in [NodeDistribution::Gll, NodeDistribution::Glc] {
        for p in 1..=8 {
            let b = Basis1D::new(BasisFamily::Lagrange(dist), p).unwrap();
            let (mut v, mut d) = (vec![0.0; b.len()], vec![0.0; b.len()]);
            for (j, &x) in b.nodes().iter().enumerate() {
                b.eval_all(x, &mut v, &mut d);
                for (i, vi) in v.iter().enumerate() {
                    worst = worst.max((vi - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
    }
    worst
}

fn lagrange_sets() -> Vec<TransitionShapeSet> {
    let mut out = Vec::new();
    for (breaks, p) in [(vec![-1.0, 0.0, 1.0], 2), (vec![-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0], 4), (vec![-1.0, -0.5, 0.0, 1.0], 3)] {
        for q in [2, 3, 5] {
            let split = EdgeSpec::uniform(&breaks, BasisFamily::Lagrange(NodeDistribution::Glc), p).unwrap();
            let whole = EdgeSpec::uniform(&[-1.0, 1.0], GLL, q).unwrap();
            out.push(TransitionShapeSet::new([split.clone(), whole.clone(), whole, split], GLL, q).unwrap());
        }
    }
    out
}

/// `N_k(x_m) = δ_km` at the boundary nodes of all-Lagrange transition sets;
/// bubbles vanish there.
pub fn kronecker_delta() -> f64 {
    let mut worst: f64 = 0.0;
    for set in lagrange_sets() {
        let nodes = boundary_nodes(&set);
        assert_eq!(nodes.len(), set.bubble_range().start);
        let mut buf = vec![ShapeValue::zero(); set.len()];
        for (m, &(x, y)) in nodes.iter().enumerate() {
            set.eval_all(x, y, &mut buf);
            for (k, s) in buf.iter().enumerate() {
                let want = if k == m { 1.0 } else { 0.0 };
                worst = worst.max((s.value - want).abs());
            }
        }
    }
    worst
}

/// Largest relative gap between analytic and central-difference gradients,
/// sampled away from the kinks of the piecewise traces.
pub fn gradient_vs_fd() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for space in spaces().iter().step_by(3) {
        for e in 0..space.mesh().len() {
            let set = space.shape_set(e);
            let g = set.subdomain_grid();
            let kinks: Vec<f64> = g.xi_breaks().iter().chain(g.eta_breaks()).copied().collect();
            let n = set.len();
            let (mut b0, mut b1) = (vec![ShapeValue::zero(); n], vec![ShapeValue::zero(); n]);
            let mut c = vec![ShapeValue::zero(); n];
            for _ in 0..6 {
                let (x, y): (f64, f64) = (rng.random_range(-0.99..0.99), rng.random_range(-0.99..0.99));
                if kinks.iter().any(|k| (k - x).abs() < 1e-3 || (k - y).abs() < 1e-3) {
                    continue;
                }
                set.eval_all(x, y, &mut c);
                set.eval_all(x + h, y, &mut b0);
                set.eval_all(x - h, y, &mut b1);
                for k in 0..n {
                    let fd = (b0[k].value - b1[k].value) / (2.0 * h);
                    worst = worst.max((fd - c[k].dxi).abs() / c[k].dxi.abs().max(1.0));
                }
                set.eval_all(x, y + h, &mut b0);
                set.eval_all(x, y - h, &mut b1);
                for k in 0..n {
                    let fd = (b0[k].value - b1[k].value) / (2.0 * h);
                    worst = worst.max((fd - c[k].deta).abs() / c[k].deta.abs().max(1.0));
                }
            }
        }
    }
    worst
}

/// Number of (numerically) zero eigenvalues of each unconstrained stiffness.
pub fn null_space_dimensions() -> Vec<usize> {
    let m = Material::new(1.0, 0.3, xnyfem::elasticity::PlaneState::PlaneStress).unwrap();
    spaces()
        .iter()
        .step_by(2)
        .map(|space| {
            let k = assemble(space, &m).unwrap().k.to_dense();
            let eig = SymmetricEigen::new(k);
            let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            eig.eigenvalues.iter().filter(|v| v.abs() < 1e-10 * max).count()
        })
        .collect()
}

/// `max |K − Kᵀ| / max |K|`.
pub fn stiffness_asymmetry() -> f64 {
    let m = Material::aluminum();
    let mut worst: f64 = 0.0;
    for space in spaces().iter().step_by(2) {
        let k: DMatrix<f64> = assemble(space, &m).unwrap().k.to_dense();
        let kmax = k.amax();
        worst = worst.max((&k - k.transpose()).amax() / kmax);
    }
    worst
}

/// Restriction of each 2D function to each edge against the edge trace.
pub fn boundary_trace_gap() -> f64 {
    let mut worst: f64 = 0.0;
    for space in spaces() {
        for key in space.dofs().shape_keys() {
            let set = key.build().unwrap();
            let mut buf = vec![ShapeValue::zero(); set.len()];
            for (e, spec) in set.edges().iter().enumerate() {
                let mut tv = vec![0.0; spec.len()];
                let mut td = vec![0.0; spec.len()];
                for i in 0..=40 {
                    let t = -1.0 + i as f64 / 20.0;
                    let (x, y) = on_edge(e, t);
                    set.eval_all(x, y, &mut buf);
                    spec.eval_all(t, &mut tv, &mut td);
                    let mut want = vec![0.0; set.len()];
                    for (j, v) in tv.iter().enumerate() {
                        want[set.edge_function_index(e, j)] = *v;
                    }
                    for (s, w) in buf.iter().zip(&want) {
                        worst = worst.max((s.value - w).abs());
                    }
                }
            }
        }
    }
    worst
}

/// Reference parameter of `p` along edge `edge` of element `e`.
fn edge_param(space: &FeSpace, e: usize, edge: usize, p: [f64; 2]) -> f64 {
    let x = space.mesh().element_coords(e);
    let (c0, c1) = EDGE_ENDS[edge];
    let (a, b) = (x[c0], x[c1]);
    let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
    -1.0 + 2.0 * ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2
}

fn on_edge(edge: usize, t: f64) -> (f64, f64) {
    match edge {
        0 => (t, -1.0),
        1 => (1.0, t),
        2 => (t, 1.0),
        _ => (-1.0, t),
    }
}

/// Largest displacement jump across interior segments for random DOF vectors.
pub fn continuity_jump() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for space in spaces() {
        let u: Vec<f64> = (0..space.n_dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let verts = space.mesh().vertices();
        for seg in space.couplings().segments() {
            if seg.is_boundary() {
                continue;
            }
            let (pa, pb) = (verts[seg.a], verts[seg.b]);
            for i in 0..=10 {
                let s = i as f64 / 10.0;
                let p = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let vals: Vec<[f64; 2]> = seg
                    .uses
                    .iter()
                    .map(|us| {
                        let t = edge_param(&space, us.element, us.edge, p).clamp(-1.0, 1.0);
                        let (xi, eta) = on_edge(us.edge, t);
                        let q = bilinear_point(&space.mesh().element_coords(us.element), xi, eta);
                        assert!((q[0] - p[0]).abs() + (q[1] - p[1]).abs() < 1e-9);
                        space.displacement(us.element, xi, eta, &u)
                    })
                    .collect();
                for v in &vals[1..] {
                    worst = worst.max((v[0] - vals[0][0]).abs()).max((v[1] - vals[0][1]).abs());
                }
            }
        }
    }
    worst
}

/// Discretization with the same order and GLL nodes on both regions.
pub fn uniform_gll(p: usize) -> Discretization {
    Discretization::uniform(Space::new(GLL, p).unwrap())
}
