use tractorforms_dec::*;

fn lowest_function_eigenvalue(m: usize) -> (f64, usize) {
    let mesh = build_mesh(MeshPreset::Torus3Grid { m }).unwrap();
    let dec = Dec::new(&mesh).unwrap();
    let s = spectrum(&dec, 0, 6, &EigenConfig::default()).unwrap();
    let c = spectrum::clusters(&s.coexact, 1e-6);
    (c[0].0, c[0].1)
}

#[test]
fn torus_betti_numbers() {
    for m in [3, 4] {
        let mesh = build_mesh(MeshPreset::Torus3Grid { m }).unwrap();
        let dec = Dec::new(&mesh).unwrap();
        assert_eq!(dec.betti, [1, 3, 3, 1]);
        assert_eq!(mesh.euler_characteristic(), 0);
    }
}

#[test]
fn harmonic_forms_on_the_torus() {
    let mesh = build_mesh(MeshPreset::Torus3Grid { m: 4 }).unwrap();
    let dec = Dec::new(&mesh).unwrap();
    for k in 0..4 {
        let s = spectrum(&dec, k, 3, &EigenConfig::default()).unwrap();
        assert_eq!(s.harmonic, [1, 3, 3, 1][k]);
        assert!(s.exact.iter().chain(&s.coexact).all(|&v| v > 1e-6));
    }
}

#[test]
fn lowest_fourier_mode_converges() {
    let mut last = f64::INFINITY;
    for m in [4, 6, 8, 12] {
        let (v, mult) = lowest_function_eigenvalue(m);
        eprintln!("m={m}: {v} x{mult}");
        let err = (v - 1.0).abs();
        assert!(err < last, "m={m}: error {err} did not shrink");
        last = err;
    }
    assert!(last < 0.05, "m=12 still {last} away from 1");
}
