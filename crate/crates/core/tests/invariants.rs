use nalgebra::DMatrix;
use proptest::prelude::*;

use gldef::cutoff::{mu_solve, DefLemma1};
use gldef::io::{profile_from_samples, read_profile_csv, write_profile_csv};
use gldef::isometry::{spd_sqrt, InnerProduct};
use gldef::warped::{make_torpedo, min_scalar_curvature, TorpedoSpec};

fn spd(n: usize, entries: &[f64]) -> InnerProduct {
    let a = DMatrix::from_column_slice(n, n, &entries[..n * n]);
    InnerProduct::new(&a * a.transpose() + DMatrix::identity(n, n) * 0.05).unwrap()
}

fn spd_pair() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(-2.0..2.0f64, n * n), prop::collection::vec(-2.0..2.0f64, n * n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sqrt_is_an_isometry((n, a, b) in spd_pair()) {
        let (g1, g2) = (spd(n, &a), spd(n, &b));
        let m = spd_sqrt(&g1, &g2).unwrap();
        // Bᵀ G2 B = G1, relative to the size of the forms.
        let scale = g1.matrix().amax().max(g2.matrix().amax());
        let pulled = m.transpose() * g2.matrix() * &m;
        prop_assert!((pulled - g1.matrix()).amax() < 1e-9 * scale.max(1.0));
        // Self-adjoint for g2: G2 B is symmetric.
        let gb = g2.matrix() * &m;
        prop_assert!((&gb - gb.transpose()).amax() < 1e-9 * scale.max(1.0));
    }

    #[test]
    fn mu_is_monotone_in_the_target(c1 in 0.05..0.9f64, dc in 0.01..0.09f64, p in 1.0..4.0f64) {
        let phi0 = move |x: f64| (1.0 - x).powf(p);
        let f = |t: f64| 1.0 + t;
        let m1 = mu_solve(&phi0, &f, 0.0, 1.0, c1).unwrap();
        let m2 = mu_solve(&phi0, &f, 0.0, 1.0, c1 + dc).unwrap();
        prop_assert!(m1 > 0.0 && m2 > m1);
    }

    #[test]
    fn torpedo_is_at_least_its_cylinder(eps in 0.2..3.0f64, n in 3usize..8) {
        let h = make_torpedo(&TorpedoSpec::with_eps(eps), n).unwrap();
        let rep = min_scalar_curvature(&h, 1024, 0.0).unwrap();
        let cyl = ((n - 1) * (n - 2)) as f64 / (eps * eps);
        prop_assert!(rep.min_kappa >= cyl * (1.0 - 1e-9));
    }

    #[test]
    fn psi_family_properties(c1 in 0.05..1.0f64, t_star in 0.02..0.5f64, frac in 0.05..0.45f64, lambda in 0.0..=1.0f64) {
        let l = DefLemma1::new(c1, t_star, frac * t_star).unwrap();
        for p in l.properties(lambda, 512).unwrap() {
            prop_assert!(p.holds, "property {} fails: {:?}", p.property, p);
        }
    }

    #[test]
    fn profile_csv_round_trip(coeffs in prop::collection::vec(-0.3..0.3f64, 3), n in 3usize..7) {
        let t: Vec<f64> = (0..=200).map(|i| 0.5 + i as f64 / 200.0).collect();
        let f: Vec<f64> = t.iter().map(|&x| 1.0 + coeffs[0] * x + coeffs[1] * x * x + coeffs[2] * x.powi(3)).collect();
        let g = vec![1.0; t.len()];
        let h = profile_from_samples(&t, &g, &f, n).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &h, 201).unwrap();
        let back = read_profile_csv(buf.as_slice(), n).unwrap();
        for &x in &t {
            prop_assert!((back.f.eval(x, 0) - h.f.eval(x, 0)).abs() < 1e-12);
        }
    }
}

#[test]
fn load_profile_from_files() {
    use gldef::io::{create, load_profile};
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("torpedo.json");
    std::fs::write(&json, r#"{"kind": "torpedo", "eps": 0.5, "dim": 4}"#).unwrap();
    let h = load_profile(&json, None).unwrap();
    assert_eq!(h.dim, 4);
    let csv = dir.path().join("sub/torpedo.csv");
    write_profile_csv(create(&csv).unwrap(), &h, 513).unwrap();
    let back = load_profile(&csv, Some(4)).unwrap();
    assert!(back.unit_speed && (back.f.eval(0.3, 0) - h.f.eval(0.3, 0)).abs() < 1e-6);
    assert!(load_profile(&dir.path().join("absent.csv"), Some(4)).is_err());
}
