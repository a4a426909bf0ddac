mod common;

use std::f64::consts::PI;

use kwlab::io::{read_field, read_kwf, write_field, write_kwf};
use kwlab::prelude::*;
use proptest::prelude::*;

const OCTAHEDRON: &str = "OFF
6 8 0
1 0 0
-1 0 0
0 1 0
0 -1 0
0 0 1
0 0 -1
3 0 2 4
3 2 1 4
3 1 3 4
3 3 0 4
3 2 0 5
3 1 2 5
3 3 1 5
3 0 3 5
";

fn octahedron() -> DiscreteDomain {
    DiscreteDomain::from_off(OCTAHEDRON.as_bytes()).unwrap()
}

#[test]
fn octahedron_is_a_sphere() {
    let d = octahedron();
    assert_eq!(d.euler_characteristic(), 2);
    // eight equilateral faces of side sqrt(2)
    let area = 8.0 * 3f64.sqrt() / 4.0 * 2.0;
    assert!((d.volume() - area).abs() < 1e-12);
    assert!(d.weights().iter().all(|w| (w - area / 6.0).abs() < 1e-12));
}

#[test]
fn open_surface_is_rejected() {
    let text = OCTAHEDRON.replace("6 8 0", "6 7 0").replace("3 0 3 5\n", "");
    assert!(matches!(DiscreteDomain::from_off(text.as_bytes()), Err(Error::MeshInvalid(_))));
}

#[test]
fn inconsistent_orientation_is_rejected() {
    let text = OCTAHEDRON.replace("3 0 3 5", "3 3 0 5");
    assert!(matches!(DiscreteDomain::from_off(text.as_bytes()), Err(Error::MeshInvalid(_))));
}

#[test]
fn malformed_off_reports_a_line() {
    let text = OCTAHEDRON.replace("0 0 -1", "0 zero -1");
    match DiscreteDomain::from_off(text.as_bytes()) {
        Err(Error::MeshInvalid(m)) => assert!(m.contains("line"), "{m}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn shipped_genus2_surface() {
    let d = common::genus2();
    let m = d.as_mesh().unwrap();
    assert_eq!((m.vertex_count(), m.face_count()), (798, 1600));
    assert_eq!(m.vertex_count() as i64 - m.edge_count() as i64 + m.face_count() as i64, -2);
    assert!((d.volume() - 50.0).abs() < 1e-9);
}

#[test]
fn mesh_laplacian_annihilates_constants_and_is_symmetric() {
    let d = common::genus2();
    let lc = d.apply_laplacian(&d.constant(3.0)).unwrap();
    assert!(lc.norm_inf() < 1e-11);
    let x = d.field_from_fn(|p| p[0] * p[1]);
    let y = d.field_from_fn(|p| (p[2] + p[0]).sin());
    let a = d.l2_inner(&d.apply_laplacian(&x).unwrap(), &y).unwrap();
    let b = d.l2_inner(&x, &d.apply_laplacian(&y).unwrap()).unwrap();
    assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
}

#[test]
fn torus_fourier_modes_are_eigenfunctions() {
    let l = 2.0;
    let n = 32;
    for (kx, ky) in [(1.0, 0.0), (2.0, 3.0), (5.0, 1.0)] {
        let phase = |p: [f64; 3]| 2.0 * PI * (kx * p[0] + ky * p[1]) / l;
        let spectral = DiscreteDomain::torus(l, n).unwrap();
        let u = spectral.field_from_fn(|p| phase(p).cos());
        let lu = spectral.apply_laplacian(&u).unwrap();
        let lambda = -(2.0 * PI / l).powi(2) * (kx * kx + ky * ky);
        assert!(lu.sup_distance(&u.scale(lambda)).unwrap() < 1e-9 * lambda.abs());

        let fd = DiscreteDomain::torus_with_stencil(l, n, Stencil::FivePoint).unwrap();
        let u = fd.field_from_fn(|p| phase(p).cos());
        let lu = fd.apply_laplacian(&u).unwrap();
        let h = l / n as f64;
        let symbol = |k: f64| (2.0 * (2.0 * PI * k / n as f64).cos() - 2.0) / (h * h);
        let lambda = symbol(kx) + symbol(ky);
        assert!(lu.sup_distance(&u.scale(lambda)).unwrap() < 1e-9 * lambda.abs());
    }
}

#[test]
fn poisson_solve_inverts_the_laplacian() {
    for d in [
        DiscreteDomain::torus(1.0, 32).unwrap(),
        DiscreteDomain::torus_with_stencil(1.0, 32, Stencil::FivePoint).unwrap(),
        common::genus2(),
    ] {
        let f = d.field_from_fn(|p| (2.0 * PI * p[0]).sin() + (2.0 * PI * p[1]).cos() + p[2]);
        let f = f.shift(-d.mean(&f).unwrap());
        let w = d.poisson_solve(&f).unwrap();
        assert!(d.mean(&w).unwrap().abs() < 1e-10);
        let back = d.apply_laplacian(&w).unwrap().scale(-1.0);
        assert!(back.sup_distance(&f).unwrap() < 1e-8, "{}", d.kind_name());
    }
}

#[test]
fn incompatible_poisson_data_is_rejected() {
    let d = DiscreteDomain::torus(1.0, 16).unwrap();
    assert!(matches!(d.poisson_solve(&d.constant(1.0)), Err(Error::NotSolvable { .. })));
}

#[test]
fn fields_from_other_domains_are_rejected() {
    let a = DiscreteDomain::torus(1.0, 16).unwrap();
    let b = DiscreteDomain::torus(1.0, 16).unwrap();
    assert!(a.integrate(&b.constant(1.0)).is_err());
    assert!(a.field(vec![0.0; 3]).is_err());
    assert!(a.field(vec![f64::NAN; 256]).is_err());
}

#[test]
fn kwf_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for d in [DiscreteDomain::torus(1.0, 8).unwrap(), octahedron()] {
        let u = d.field_from_fn(|p| p[0] - 2.0 * p[1] + 1e-300);
        let path = dir.path().join("u.kwf");
        write_field(&path, &d, &u).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"KWF1");
        assert_eq!(bytes.len(), 16 + 8 * d.len());
        let back = read_field(&path, &d).unwrap();
        assert_eq!(back.values(), u.values());
    }
}

#[test]
fn kwf_rejects_corrupt_input() {
    let mut buf = Vec::new();
    write_kwf(&mut buf, 2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!(read_kwf(&buf[..buf.len() - 1]).is_err());
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(read_kwf(&bad[..]).is_err());
    assert!(write_kwf(Vec::new(), 3, 2, &[0.0; 4]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integration_is_linear_and_exact_on_constants(c in -5.0f64..5.0, a in -2.0f64..2.0) {
        let d = DiscreteDomain::torus(1.5, 16).unwrap();
        prop_assert!((d.integrate(&d.constant(c)).unwrap() - c * 2.25).abs() < 1e-12);
        let f = d.field_from_fn(|p| (2.0 * PI * p[0] / 1.5).cos());
        let g = f.scale(a).shift(c);
        let lhs = d.integrate(&g).unwrap();
        let rhs = a * d.integrate(&f).unwrap() + c * d.volume();
        prop_assert!((lhs - rhs).abs() < 1e-11);
    }

    #[test]
    fn dirichlet_form_is_nonnegative(seed in 0u64..1000) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for d in [DiscreteDomain::torus(1.0, 16).unwrap(), octahedron()] {
            let u = common::smooth_field(&d, &mut rng, 1.0);
            let lu = d.apply_laplacian(&u).unwrap();
            prop_assert!(-d.l2_inner(&lu, &u).unwrap() >= -1e-12);
            let h1 = d.h1_norm(&u).unwrap();
            prop_assert!(h1 + 1e-12 >= d.l2_norm(&u).unwrap());
        }
    }

    #[test]
    fn kwf_bytes_round_trip(values in prop::collection::vec(any::<f64>(), 1..40)) {
        let mut buf = Vec::new();
        write_kwf(&mut buf, values.len(), 1, &values).unwrap();
        let (r, c, back) = read_kwf(&buf[..]).unwrap();
        prop_assert_eq!((r, c), (values.len(), 1));
        prop_assert!(back.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
