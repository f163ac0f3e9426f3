mod common;

use proptest::prelude::*;
use xnyfem::elasticity::{interpolate_field, FeSpace, Material, PlaneState};
use xnyfem::mesh::{builtin, RefineParams};
use xnyfem::verify::*;
use xnyfem::{Error, NodeDistribution};

fn cfg(field: PatchField, version: PatchVersion, pairing: Pairing, p: (usize, usize)) -> PatchConfig {
    let mesh = match field {
        PatchField::Linear => builtin::bathe_patch(),
        PatchField::HighOrder { .. } => builtin::rect_pair(2.0, 1.0),
        _ => builtin::beam(10.0, 2.0),
    };
    PatchConfig {
        mesh,
        refine: RefineParams::new(2, 1).unwrap(),
        p_x: p.0,
        p_y: p.1,
        pairing,
        distribution: NodeDistribution::Gll,
        version,
        field,
        material: Material::aluminum(),
    }
}

#[test]
fn l2_error_examples() {
    let space = FeSpace::new(builtin::two_quad(), common::uniform_gll(2)).unwrap();
    let exact = |p: [f64; 2]| [p[0], 0.0];
    let u = interpolate_field(&space, &exact).unwrap();
    assert!(l2_error(&space, &u, &exact).unwrap() < 1e-14);
    let zero = vec![0.0; space.n_dof()];
    assert!((l2_error(&space, &zero, &exact).unwrap() - 1.0).abs() < 1e-14);
    // offset δ on [0, 2] × [0, 1]: ‖δ‖ = |δ|√2 and ‖x‖ = √(8/3)
    let d = 0.01;
    let shifted = interpolate_field(&space, &|p| [p[0] + d, 0.0]).unwrap();
    let want = d * 2f64.sqrt() / (8.0f64 / 3.0).sqrt();
    assert!((l2_error(&space, &shifted, &exact).unwrap() - want).abs() < 1e-14);
    assert!(l2_error(&space, &zero, &|_| [0.0, 0.0]).is_err());
}

#[test]
fn version_a_linear_field() {
    for pairing in Pairing::ALL {
        let r = run_patch_test(&cfg(PatchField::Linear, PatchVersion::A, pairing, (3, 2))).unwrap();
        assert!(r.residual.unwrap() < 1e-13, "{pairing:?}: {:?}", r.residual);
    }
    // outside the ansatz the consistent-load residual does not vanish
    let r = run_patch_test(&cfg(PatchField::HighOrder { order: 4 }, PatchVersion::A, Pairing::LaLa, (2, 2))).unwrap();
    assert!(r.residual.unwrap() > 1e-8);
}

#[test]
fn version_c_rejects_polynomial_fields() {
    let r = run_patch_test(&cfg(PatchField::Linear, PatchVersion::C, Pairing::LaLa, (2, 2)));
    assert!(matches!(r, Err(Error::Config(_))));
}

#[test]
fn stress_error_ignores_load_scale() {
    let base = cfg(PatchField::QuadraticBeam, PatchVersion::C, Pairing::LeLa, (1, 1));
    let mut stiff = base.clone();
    stiff.material = Material::new(7e12, 0.3, PlaneState::PlaneStress).unwrap();
    let (a, b) = (run_patch_test(&base).unwrap(), run_patch_test(&stiff).unwrap());
    assert!((a.e_rel - b.e_rel).abs() < 1e-8 * a.e_rel);
}

#[test]
fn inadmissible_field_is_refused() {
    let mut c = cfg(PatchField::CubicBeam, PatchVersion::C, Pairing::LaLa, (3, 3));
    c.material = Material::new(70e9, 0.25, PlaneState::PlaneStress).unwrap();
    assert!(matches!(run_patch_test(&c), Err(Error::Config(_))));
}

#[test]
fn cantilever_energy_error_falls_with_p() {
    let reference = ReferenceSpec { uniform: 1, n_y: 2, n_s: 2, p: 5 };
    let (u_ref, rows) = singular_p_study(
        SingularProblem::Cantilever,
        &[1, 2, 3],
        0,
        2,
        &[],
        reference,
        &Material::aluminum(),
    )
    .unwrap();
    assert!(u_ref > 0.0);
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1].error < w[0].error && w[1].n_dof > w[0].n_dof));
}

#[test]
fn rate_fit_errors() {
    let row = |n, e| StudyRow { n_dof: n, error: e, p_x: 1, p_y: 1, level: 0 };
    assert!(matches!(convergence_rate(&[row(10, 0.1)], 3), Err(Error::Study(_))));
    // rows below the round-off floor are not fitted
    let rows = [row(10, 1e-3), row(100, 1e-12), row(1000, 1e-13)];
    assert!(convergence_rate(&rows, 3).is_err());
    let rows = [row(100, 1e-2), row(1000, 1e-3), row(10000, 1e-4), row(100000, 1e-12)];
    let fit = convergence_rate(&rows, 3).unwrap();
    assert_eq!(fit.used, 3);
    assert!((fit.slope + 1.0).abs() < 1e-12);
    assert!((theoretical_rate(8) + 4.5).abs() < 1e-15);
}

#[test]
fn combination_sets() {
    let all = exhaustive_combinations();
    assert_eq!(all.len(), 6272);
    let s = stratified_sample();
    assert!(s.iter().all(|c| all.contains(c)));
    let mut pairs = std::collections::HashMap::new();
    for c in &s {
        *pairs.entry((c.p_x, c.p_y)).or_insert(0) += 1;
    }
    assert_eq!(pairs.len(), 16);
    assert!(pairs.values().all(|&n| n == 4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linear_patch_any_combination(pi in 0usize..4, glc in any::<bool>(), n_y in 1usize..4, n_s in 1usize..3, p_x in 1usize..6, p_y in 1usize..6) {
        let c = Combination {
            pairing: Pairing::ALL[pi],
            distribution: if glc { NodeDistribution::Glc } else { NodeDistribution::Gll },
            n_y, n_s, p_x, p_y,
        };
        let cfg = c.patch_config(builtin::bathe_patch(), PatchField::Linear, PatchVersion::B, Material::aluminum()).unwrap();
        let r = run_patch_test(&cfg).unwrap();
        prop_assert!(r.e_rel < 1e-10, "{:?}: {}", c, r.e_rel);
    }

    #[test]
    fn two_point_rate_of_power_law(k in -4.0f64..-0.5, n0 in 10usize..1000) {
        let rows: Vec<StudyRow> = (0..4).map(|i| {
            let n = n0 * 4usize.pow(i);
            StudyRow { n_dof: n, error: (n as f64).powf(k), p_x: 1, p_y: 1, level: i as usize }
        }).filter(|r| r.error >= ROUND_OFF_FLOOR).collect();
        prop_assume!(rows.len() >= 2);
        let fit = convergence_rate(&rows, 3).unwrap();
        prop_assert!((fit.slope - k).abs() < 1e-9);
        for c in fit.two_point {
            prop_assert!((c - k).abs() < 1e-9);
        }
    }
}
