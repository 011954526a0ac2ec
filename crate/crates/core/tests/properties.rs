use nhaah::model::{build_hamiltonian, build_single_particle, Boundary, ModelParams};
use nhaah::observables::{
    entanglement_entropy, fractal_dimension, ks_statistic, nearest_spacings, ReferenceDistribution,
};
use nhaah::spectral::{complex_fraction, eig, eigenvalues, winding_number, ModelFamily, WindingAxis};
use nhaah::model::build_fock_basis;
use num_complex::Complex64 as c64;
use proptest::prelude::*;

fn nearest_match(a: &[c64], b: &[c64]) -> f64 {
    let mut used = vec![false; b.len()];
    a.iter().fold(0.0, |worst: f64, x| {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst.max(d)
    })
}

prop_compose! {
    fn chain()(l in 8usize..40, g in -1.0f64..1.0, h in -1.0f64..1.0, v1 in 0.0f64..5.0,
               v2 in 0.0f64..2.0, phi in 0.0f64..6.28) -> ModelParams {
        ModelParams { g, h, v1, v2, phi, ..ModelParams::new(l) }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenpairs_have_small_residual(p in chain()) {
        let h = build_single_particle(&p).unwrap().matrix;
        let s = eig(&h).unwrap();
        prop_assert!(!s.degraded, "residual {}", s.residual);
        for c in s.right_vectors.columns() {
            let n: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0].re <= w[1].re));
    }

    #[test]
    fn open_chain_ignores_nonreciprocity(p in chain()) {
        let open = ModelParams { h: 0.0, boundary: Boundary::Open, ..p };
        let a = eigenvalues(&build_single_particle(&open).unwrap().matrix).unwrap();
        let b = eigenvalues(&build_single_particle(&ModelParams { g: 0.0, ..open }).unwrap().matrix).unwrap();
        prop_assert!(nearest_match(&a, &b) < 1e-8);
    }

    #[test]
    fn hermitian_chain_is_real(p in chain()) {
        let p = ModelParams { g: 0.0, h: 0.0, ..p };
        let e = eigenvalues(&build_single_particle(&p).unwrap().matrix).unwrap();
        prop_assert_eq!(complex_fraction(&e, 1e-10), 0.0);
    }

    #[test]
    fn one_particle_sector_matches_chain(p in chain(), theta in 0.0f64..6.28) {
        let p = ModelParams { theta_g: theta, sites: p.sites.min(16), ..p };
        let single = eigenvalues(&build_single_particle(&p).unwrap().matrix).unwrap();
        let many = eigenvalues(&build_hamiltonian(&ModelParams { particles: Some(1), ..p }).unwrap()).unwrap();
        prop_assert!(nearest_match(&single, &many) < 1e-10);
    }

    #[test]
    fn fractal_dimension_is_bounded(p in chain()) {
        let s = eig(&build_single_particle(&p).unwrap().matrix).unwrap();
        for n in 0..s.dim() {
            let d = fractal_dimension(s.vector(n)).unwrap();
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&d));
        }
    }

    #[test]
    fn spacings_have_unit_mean_and_bounded_ks(p in chain()) {
        let e = eigenvalues(&build_single_particle(&p).unwrap().matrix).unwrap();
        let s = nearest_spacings(&e).unwrap();
        let mean = s.normalized.iter().sum::<f64>() / s.normalized.len() as f64;
        prop_assert!((mean - 1.0).abs() < 1e-12);
        let r = ReferenceDistribution::poisson_real();
        let d = ks_statistic(&s.normalized, |x| r.cdf(x));
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn winding_is_an_integer_or_refused(p in chain(), re in -3.0f64..3.0, im in -1.0f64..1.0) {
        let p = ModelParams { sites: p.sites.min(24), ..p };
        let fam = ModelFamily::new(&p, WindingAxis::G).unwrap();
        if let Ok(r) = winding_number(&fam, WindingAxis::G, c64::new(re, im), 64) {
            prop_assert!((r.raw_phase - r.w as f64).abs() < 1e-3);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn entropy_is_between_zero_and_page_bound(
        g in -1.0f64..1.0, v1 in 0.0f64..8.0, u in 0.0f64..3.0, n in 0usize..20
    ) {
        let p = ModelParams { g, v1, u, v2: 0.5, ..ModelParams::half_filled(8) };
        let basis = build_fock_basis(8, 4).unwrap();
        let s = eig(&build_hamiltonian(&p).unwrap()).unwrap();
        let e = entanglement_entropy(s.vector(n), &basis, 4).unwrap();
        prop_assert!(e >= -1e-12 && e <= 4.0 * std::f64::consts::LN_2 + 1e-12);
    }
}
