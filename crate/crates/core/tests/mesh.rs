mod common;

use proptest::prelude::*;
use xnyfem::mesh::*;
use xnyfem::Error;

const TWO_QUAD: &str = r#"{
    "vertices": [[0, 0], [1, 0], [2, 0], [0, 1], [1, 1], [2, 1]],
    "quads": [[0, 1, 4, 3], [1, 2, 5, 4]],
    "region": ["x", "y"]
}"#;

#[test]
fn load_and_round_trip() {
    let m = load_mesh(TWO_QUAD).unwrap();
    assert_eq!((m.vertices().len(), m.len()), (6, 2));
    assert_eq!(m.regions(), &[Region::X, Region::Y]);
    let again = load_mesh(&m.to_json()).unwrap();
    assert_eq!(again, m);
}

#[test]
fn clockwise_quad_is_rejected() {
    let cw = TWO_QUAD.replace("[0, 1, 4, 3]", "[0, 3, 4, 1]");
    assert!(matches!(load_mesh(&cw), Err(Error::Orientation { .. })));
    assert!(matches!(load_mesh("{\"vertices\": ["), Err(Error::Parse { .. })));
}

#[test]
fn builtin_geometries() {
    let b = builtin::bathe_patch();
    assert_eq!((b.vertices().len(), b.len()), (8, 5));
    assert_eq!(b.regions().iter().filter(|r| **r == Region::Y).count(), 1);
    for e in 0..b.len() {
        let x = b.element_coords(e);
        for (xi, eta) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (0.0, 0.0)] {
            let j = bilinear_jacobian(&x, xi, eta);
            assert!(j[0][0] * j[1][1] - j[0][1] * j[1][0] > 0.0);
        }
    }
    let h = builtin::hole_quadrant(1.0);
    assert_eq!(h.len(), 2);
    // 2a × 4a strip next to the hole
    assert_eq!(h.bbox(), [1.0, 0.0, 3.0, 4.0]);
    let l = builtin::l_domain();
    assert_eq!(l.len(), 12);
    assert_eq!(l.bbox(), [0.0, 0.0, 20.0, 20.0]);
    assert!(matches!(builtin::builtin_geometry("moon"), Err(Error::Config(_))));
}

#[test]
fn uniform_refinement_counts() {
    let single = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2, 3]], vec![Region::X]).unwrap();
    assert_eq!(uniform_refine(&single).unwrap().vertices().len(), 9);
    let two = uniform_refine(&builtin::two_quad()).unwrap();
    assert_eq!(two.len(), 8);
    assert_eq!(two.regions().iter().filter(|r| **r == Region::X).count(), 4);
    let b = uniform_refine(&uniform_refine(&builtin::bathe_patch()).unwrap()).unwrap();
    assert_eq!(b.len(), 80);
}

#[test]
fn y_refinement_census() {
    let m = refine_y_region(&builtin::two_quad(), &RefineParams::new(2, 1).unwrap()).unwrap();
    let c = m.census();
    assert_eq!((c.get(&ElementClass::Xny), c.get(&ElementClass::Y)), (Some(&1), Some(&4)));
    let m = refine_y_region(&builtin::two_quad(), &RefineParams::new(1, 3).unwrap()).unwrap();
    assert_eq!(m.len(), 2);
    // the interface still couples two trace spaces
    assert_eq!(m.classes(), &[ElementClass::Xny, ElementClass::Y]);
    let m = refine_y_region(&builtin::two_quad(), &RefineParams::new(2, 2).unwrap()).unwrap();
    let c = m.census();
    assert_eq!(c.get(&ElementClass::Xny), Some(&1));
    assert_eq!(c.get(&ElementClass::Yny), Some(&2));
    assert_eq!(c.get(&ElementClass::Y), Some(&8));
}

#[test]
fn coupling_breakpoints() {
    let m = refine_y_region(&builtin::two_quad(), &RefineParams::new(3, 1).unwrap()).unwrap();
    let c = discover_couplings(&m).unwrap();
    let xe = (0..m.len()).find(|&e| m.class(e) == ElementClass::Xny).unwrap();
    let coupled: Vec<&EdgeLayout> = (0..4).map(|k| c.layout(xe, k)).filter(|l| l.segment_count() > 1).collect();
    assert_eq!(coupled.len(), 1);
    let p = &coupled[0].params;
    assert_eq!(p.len(), 4);
    assert!((p[1] + 1.0 / 3.0).abs() < 1e-12 && (p[2] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn dof_counts() {
    let single = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2, 3]], vec![Region::X]).unwrap();
    let c = discover_couplings(&single).unwrap();
    assert_eq!(build_dof_map(&single, &c, common::uniform_gll(3)).unwrap().n_dof(), 32);
    let two = builtin::two_quad();
    let c = discover_couplings(&two).unwrap();
    assert_eq!(build_dof_map(&two, &c, common::uniform_gll(2)).unwrap().n_dof(), 30);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn refinement_preserves_area(n_y in 1usize..4, n_s in 1usize..4, which in 0usize..3) {
        let base = [builtin::two_quad(), builtin::bathe_patch(), builtin::hole_quadrant(1.0)][which].clone();
        let area = |m: &Mesh| -> f64 {
            (0..m.len()).map(|e| {
                let x = m.element_coords(e);
                0.5 * (0..4).map(|k| x[k][0] * x[(k + 1) % 4][1] - x[(k + 1) % 4][0] * x[k][1]).sum::<f64>()
            }).sum()
        };
        let r = refine_y_region(&base, &RefineParams::new(n_y, n_s).unwrap()).unwrap();
        prop_assert!((area(&r) - area(&base)).abs() < 1e-9 * area(&base));
        // an atomic segment lies on at most two element edges
        let c = discover_couplings(&r).unwrap();
        for seg in c.segments() {
            prop_assert!(seg.uses.len() <= 2);
        }
    }
}
