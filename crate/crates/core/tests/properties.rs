mod common;

use proptest::prelude::*;
use xnyfem::blending::ShapeValue;
use xnyfem::mesh::{builtin, refine_y_region, RefineParams};
use xnyfem::verify::Pairing;
use xnyfem::{BasisFamily, EdgeSpec, NodeDistribution, TransitionShapeSet};

#[test]
fn partition_of_unity() {
    assert!(common::partition_of_unity() < 1e-12);
}

#[test]
fn kronecker_delta() {
    assert!(common::kronecker_1d() < 1e-12);
    assert!(common::kronecker_delta() < 1e-12);
}

#[test]
fn gradients_match_finite_differences() {
    let g = common::gradient_vs_fd();
    assert!(g < 1e-6, "{g:e}");
}

#[test]
fn rigid_body_null_space() {
    for d in common::null_space_dimensions() {
        assert_eq!(d, 3);
    }
}

#[test]
fn stiffness_is_symmetric() {
    assert!(common::stiffness_asymmetry() < 1e-13);
}

#[test]
fn boundary_traces_agree() {
    assert!(common::boundary_trace_gap() < 1e-12);
}

#[test]
fn displacement_is_continuous() {
    let j = common::continuity_jump();
    assert!(j < 1e-11, "{j:e}");
}

fn family() -> impl Strategy<Value = BasisFamily> {
    prop_oneof![
        Just(BasisFamily::Lagrange(NodeDistribution::Gll)),
        Just(BasisFamily::Lagrange(NodeDistribution::Glc)),
        Just(BasisFamily::Hierarchic),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // The four corners plus edge functions always sum to one: every trace set
    // interpolates constants and the bubbles vanish on the boundary.
    #[test]
    fn blended_sets_sum_to_one_on_lagrange(
        n in 1usize..4, p in 1usize..6, q in 1usize..6, x in -1.0f64..1.0, y in -1.0f64..1.0,
    ) {
        let lag = BasisFamily::Lagrange(NodeDistribution::Gll);
        let breaks: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        let split = EdgeSpec::uniform(&breaks, lag, p).unwrap();
        let whole = EdgeSpec::uniform(&[-1.0, 1.0], lag, q).unwrap();
        let set = TransitionShapeSet::new([split, whole.clone(), whole.clone(), whole], lag, q).unwrap();
        let mut buf = vec![ShapeValue::zero(); set.len()];
        set.eval_all(x, y, &mut buf);
        let s: f64 = buf[..set.bubble_range().start].iter().map(|v| v.value).sum();
        let gx: f64 = buf.iter().map(|v| v.dxi).take(set.bubble_range().start).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!(gx.abs() < 1e-10);
    }

    #[test]
    fn bubbles_vanish_on_boundary(fam in family(), q in 2usize..8, t in -1.0f64..1.0, e in 0usize..4) {
        let whole = EdgeSpec::uniform(&[-1.0, 1.0], fam, q).unwrap();
        let set = TransitionShapeSet::new([whole.clone(), whole.clone(), whole.clone(), whole], fam, q).unwrap();
        let (x, y) = [(t, -1.0), (1.0, t), (t, 1.0), (-1.0, t)][e];
        let mut buf = vec![ShapeValue::zero(); set.len()];
        set.eval_all(x, y, &mut buf);
        for k in set.bubble_range() {
            prop_assert!(buf[k].value.abs() < 1e-13);
        }
    }

    #[test]
    fn refined_meshes_stay_continuous(n_y in 2usize..4, n_s in 1usize..3, pi in 0usize..4, px in 1usize..4, py in 1usize..4) {
        let mesh = refine_y_region(&builtin::two_quad(), &RefineParams::new(n_y, n_s).unwrap()).unwrap();
        let disc = Pairing::ALL[pi].discretization(NodeDistribution::Glc, px, py).unwrap();
        let space = xnyfem::elasticity::FeSpace::new(mesh, disc).unwrap();
        let u = xnyfem::elasticity::interpolate_field(&space, &|p| [1.0 + 0.5 * p[0] - p[1], 2.0 * p[0]]).unwrap();
        // a linear field is reproduced exactly, hence continuously
        for e in 0..space.mesh().len() {
            for &(xi, eta) in &[(-1.0, -1.0), (0.3, -1.0), (1.0, 0.7), (-0.2, 0.4)] {
                let p = space.map_point(e, xi, eta);
                let v = space.displacement(e, xi, eta, &u);
                prop_assert!((v[0] - (1.0 + 0.5 * p[0] - p[1])).abs() < 1e-11);
                prop_assert!((v[1] - 2.0 * p[0]).abs() < 1e-11);
            }
        }
    }
}
