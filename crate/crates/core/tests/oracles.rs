use tractorforms::coeff::{int, rat};
use tractorforms::factory::{build_l_definition, closed_factors};
use tractorforms::spectral::{kernel_dim, sphere_data_path, sphere_preset, torus_preset, SphereData};
use tractorforms::torus::{operator_mode_matrix, pipeline_l_numeric, random_modes};
use tractorforms::verify::{synthetic_model, verify_kernel_decomposition, Status};
use tractorforms::{Error, Proportionality, RatJ};

#[test]
fn pipeline_matches_the_symbolic_operator() {
    for (n, k, ell) in [(3, 1, 2), (4, 2, 3), (5, 2, 1), (5, 1, 3)] {
        let def = build_l_definition(n, k, ell).unwrap();
        for xi in random_modes(n, 5, 3, 99) {
            assert_eq!(pipeline_l_numeric(n, k, ell, &xi).unwrap(), operator_mode_matrix(&def, &xi).unwrap());
        }
    }
}

#[test]
fn closed_product_is_proportional() {
    let def = build_l_definition(8, 2, 1).unwrap();
    let fac = closed_factors(8, 2, 1).unwrap();
    assert_eq!(fac.to_text(), "[-2E - 6F - 3J]");
    assert_eq!(fac.product().unwrap().proportionality(&def).unwrap(), Proportionality::Scalar(RatJ::from_int(-4)));
    assert!(matches!(closed_factors(3, 2, 1), Err(Error::InvalidParameters(_))));
}

#[test]
fn kernel_decomposition_on_models() {
    let model = synthetic_model(5, 2, 2, &rat(3, 2)).unwrap();
    assert_eq!(verify_kernel_decomposition(5, 2, 2, &model).unwrap().status, Status::Pass);
    let flat = torus_preset(4, 1, 6).unwrap();
    let h = kernel_dim(&build_l_definition(4, 1, 1).unwrap(), &flat).unwrap();
    assert!(h >= 4, "harmonic 1-forms on T^4 lie in the kernel");
    // the decomposition is a statement about J != 0
    assert!(matches!(verify_kernel_decomposition(4, 1, 1, &flat), Err(Error::InvalidParameters(_))));
}

#[test]
fn bundled_sphere_table_needs_validation() {
    let d = SphereData::read(&sphere_data_path(3)).unwrap();
    assert_eq!(d.j_value, rat(3, 2));
    assert!(!d.trusted);
    assert!(matches!(sphere_preset(3, 1, 2), Err(Error::Untrusted(_))));
    let first = d.entries_of(1, tractorforms::PointKind::Coexact)[0];
    assert_eq!((first.l, first.eigenvalue.clone(), first.multiplicity), (1, int(4), 6));
}
