use nalgebra::{DMatrix, DVector};
use xnyfem::blending::fixture::{twelve_node_fixture, TwelveNodeVariant};
use xnyfem::blending::ShapeValue;
use xnyfem::quadrature::composite_rule_2d;
use xnyfem::{BasisFamily, EdgeSpec, NodeDistribution, TransitionShapeSet};

const LAG: BasisFamily = BasisFamily::Lagrange(NodeDistribution::Gll);

fn grid7() -> impl Iterator<Item = (f64, f64)> {
    (0..7).flat_map(|j| (0..7).map(move |i| (-1.0 + i as f64 / 3.0, -1.0 + j as f64 / 3.0)))
}

#[test]
fn lala_corner_four() {
    let set = twelve_node_fixture(TwelveNodeVariant::LaLa).build::<f64>().unwrap();
    for (x, y) in grid7() {
        let want = -0.25 * (1.0 - x) * (1.0 + y) * (1.0 + x - y);
        assert!((set.eval(3, x, y).unwrap().value - want).abs() < 1e-13);
    }
    // junction of E1 at its midpoint
    assert!((set.eval(5, 0.0, -1.0).unwrap().value - 1.0).abs() < 1e-15);
}

#[test]
fn lele_edge_four_mode() {
    let set = twelve_node_fixture(TwelveNodeVariant::LeLe).build::<f64>().unwrap();
    // E3 mode at the top midpoint, E4 mode at the left midpoint
    for (k, x, y) in [(10, 0.0, 1.0), (11, -1.0, 0.0)] {
        let v = set.eval(k, x, y).unwrap().value;
        assert!((v + 6f64.sqrt() / 4.0).abs() < 1e-14);
    }
    for (x, y) in grid7() {
        let want = 0.5 * (1.0 - x) * 0.25 * 6f64.sqrt() * (y * y - 1.0);
        assert!((set.eval(11, x, y).unwrap().value - want).abs() < 1e-14);
    }
}

#[test]
fn lale_edge_function() {
    // the split edges carry hierarchic segments, the whole edges Lagrange ones
    let fx = twelve_node_fixture(TwelveNodeVariant::LaLe);
    let set = fx.build::<f64>().unwrap();
    for (x, y) in grid7() {
        let want = 0.5 * (1.0 - x) * (1.0 - y * y);
        assert!((set.eval(11, x, y).unwrap().value - want).abs() < 1e-14);
        for k in 0..12 {
            assert!((set.eval(k, x, y).unwrap().value - fx.eval(k, x, y)).abs() < 1e-13);
        }
    }
}

#[test]
fn nine_node_span() {
    // blended quadratic Lagrange set spans the tensor Q2 space
    let e = EdgeSpec::uniform(&[-1.0, 1.0], LAG, 2).unwrap();
    let set = TransitionShapeSet::new([e.clone(), e.clone(), e.clone(), e], LAG, 2).unwrap();
    let l = |i: usize, t: f64| [0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)][i];
    let nodes = [-1.0, 0.0, 1.0];
    let tensor = |x: f64, y: f64| DVector::from_iterator(9, (0..9).map(|k| l(k % 3, x) * l(k / 3, y)));
    let blended = |x: f64, y: f64| {
        let mut buf = vec![ShapeValue::zero(); 9];
        set.eval_all(x, y, &mut buf);
        DVector::from_iterator(9, buf.iter().map(|s| s.value))
    };
    // A[m, k] = blended_k(node_m)
    let a = DMatrix::from_fn(9, 9, |m, k| blended(nodes[m % 3], nodes[m / 3])[k]);
    let inv = a.try_inverse().unwrap();
    for (x, y) in [(0.3, -0.2), (-0.9, 0.77), (0.5, 0.5)] {
        let t = tensor(x, y);
        let b = blended(x, y);
        // tensor nodal basis is the blended basis expressed in nodal coordinates
        let via = inv.transpose() * &b;
        assert!((via - t).amax() < 1e-13);
    }
    // the corner-1 function matches on the boundary
    for t in [-1.0, -0.4, 0.3, 1.0] {
        assert!((blended(t, -1.0)[0] - l(0, t)).abs() < 1e-15);
        assert!((blended(-1.0, t)[0] - l(0, t)).abs() < 1e-15);
    }
}

#[test]
fn untouched_edges_keep_base_functions() {
    let split = EdgeSpec::uniform(&[-1.0, -0.5, 0.5, 1.0], BasisFamily::Hierarchic, 3).unwrap();
    for fam in [LAG, BasisFamily::Hierarchic] {
        let whole = EdgeSpec::uniform(&[-1.0, 1.0], fam, 4).unwrap();
        let base = TransitionShapeSet::new([whole.clone(), whole.clone(), whole.clone(), whole.clone()], fam, 4).unwrap();
        let tr = TransitionShapeSet::new([split.clone(), whole.clone(), whole.clone(), whole], fam, 4).unwrap();
        let (mut b, mut t) = (vec![ShapeValue::zero(); base.len()], vec![ShapeValue::zero(); tr.len()]);
        for j in 0..9 {
            for i in 0..9 {
                let (x, y) = (-1.0 + i as f64 / 4.0, -1.0 + j as f64 / 4.0);
                base.eval_all(x, y, &mut b);
                tr.eval_all(x, y, &mut t);
                for e in 1..4 {
                    for (kb, kt) in base.edge_range(e).zip(tr.edge_range(e)) {
                        assert!((b[kb].value - t[kt].value).abs() < 1e-13);
                    }
                }
                for (kb, kt) in base.bubble_range().zip(tr.bubble_range()) {
                    assert!((b[kb].value - t[kt].value).abs() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn composite_rule_integrates_piecewise_products() {
    let split = EdgeSpec::uniform(&[-1.0, 0.0, 1.0], BasisFamily::Hierarchic, 2).unwrap();
    let whole = EdgeSpec::uniform(&[-1.0, 1.0], BasisFamily::Hierarchic, 2).unwrap();
    let set = TransitionShapeSet::new([split, whole.clone(), whole.clone(), whole], BasisFamily::Hierarchic, 2).unwrap();
    let grid = set.subdomain_grid();
    let f = |x: f64, y: f64| {
        let mut buf = vec![ShapeValue::zero(); set.len()];
        set.eval_all(x, y, &mut buf);
        // two modes of the split edge
        buf[4].value * buf[6].value + buf[4].dxi * buf[5].dxi
    };
    let r3 = composite_rule_2d(&grid, 3).unwrap().integrate(f);
    let r20 = composite_rule_2d(&grid, 20).unwrap().integrate(f);
    assert!((r3 - r20).abs() < 1e-13);
}
