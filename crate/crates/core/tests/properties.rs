use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;

use awgauss::fsde::{lamperti_inverse, lamperti_transform, random_piecewise_controls};
use awgauss::func::ScalarFn;
use awgauss::gauss_aw::{continuous_aw_fbm, discrete_aw, CovMatrix};
use awgauss::quadrature::QuadratureGrid;
use awgauss::specfun::{hyp2f1, HypergeometricParams};

fn spd(n: usize) -> impl Strategy<Value = CovMatrix> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
        let g = DMatrix::from_vec(n, n, v);
        CovMatrix::new(&g * g.transpose() + DMatrix::identity(n, n) * 0.05).unwrap()
    })
}

fn spd_pair() -> impl Strategy<Value = (CovMatrix, CovMatrix)> {
    (1usize..=6).prop_flat_map(|n| (spd(n), spd(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_distance_is_a_symmetric_nonnegative_gap((a, b) in spd_pair()) {
        let ab = discrete_aw(&a, &b).unwrap();
        let ba = discrete_aw(&b, &a).unwrap();
        prop_assert!(ab.distance_squared >= -1e-9);
        prop_assert!((ab.distance_squared - ba.distance_squared).abs() <= 1e-9 * (1.0 + ab.trace_term));
        prop_assert!(discrete_aw(&a, &a).unwrap().distance_squared.abs() <= 1e-9 * a.trace());
        for r in ab.optimal_correlation.unwrap() {
            prop_assert!(r.abs() <= 1.0);
        }
    }

    #[test]
    fn scaling_a_covariance(a in (1usize..=6).prop_flat_map(spd), c in 0.1f64..3.0) {
        // AW^2(X, cX) = (1 - c)^2 E|X|^2
        let d = discrete_aw(&a, &a.scaled(c * c)).unwrap().distance_squared;
        let expected = (1.0 - c).powi(2) * a.trace();
        prop_assert!((d - expected).abs() <= 1e-9 * (1.0 + a.trace() * (1.0 + c * c)), "{} vs {}", d, expected);
    }

    #[test]
    fn hyp2f1_is_symmetric_in_a_and_b(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.2f64..3.0, z in -0.95f64..0.0) {
        let p = HypergeometricParams::new(a, b, c).unwrap();
        let (x, y) = (hyp2f1(p, z).unwrap(), hyp2f1(p.swapped(), z).unwrap());
        prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
    }

    #[test]
    fn random_controls_are_correlations(count in 1usize..5, cells in 1usize..16, seed in any::<u64>()) {
        let cs = random_piecewise_controls(count, cells, seed);
        prop_assert_eq!(cs.len(), count);
        for c in &cs {
            c.validate().unwrap();
            for i in 0..=20 {
                let r = c.rho_at(i as f64 / 20.0, 1.0);
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }
    }

    #[test]
    fn lamperti_round_trip(amp in 0.0f64..1.5, x0 in -1.0f64..1.0, x in -3.0f64..3.0) {
        let sigma = ScalarFn::SinOffset { offset: 2.0, amplitude: amp };
        let y = lamperti_transform(&sigma, x0, x, 16).unwrap();
        let back = lamperti_inverse(&sigma, x0, y, 16).unwrap();
        prop_assert!((back - x).abs() <= 1e-8, "{} -> {} -> {}", x, y, back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fbm_distance_is_symmetric(h1 in 0.2f64..0.9, h2 in 0.2f64..0.9) {
        let g = QuadratureGrid::with_nodes(32, 32);
        let a = continuous_aw_fbm(h1, h2, 1.0, &g).unwrap().distance_squared;
        let b = continuous_aw_fbm(h2, h1, 1.0, &g).unwrap().distance_squared;
        assert_relative_eq!(a, b, epsilon = 1e-12, max_relative = 1e-10);
        prop_assert!(a >= -1e-12);
    }
}

#[test]
fn martingale_infimum_is_below_brownian_motion() {
    use awgauss::gauss_aw::continuous_aw_unit;
    use awgauss::kernels::GaussianProcessSpec;
    use awgauss::mart_approx::mart_approx_distance;
    let g = QuadratureGrid::with_nodes(128, 128);
    let bm = GaussianProcessSpec::brownian(1.0).unwrap();
    for h in [0.3, 0.6, 0.75] {
        let inf = mart_approx_distance(h, 1.0, &g).unwrap().distance_squared;
        let to_bm = continuous_aw_unit(&GaussianProcessSpec::fbm(h, 1.0).unwrap(), &bm, &g).unwrap().distance_squared;
        assert!(inf > 0.0 && inf <= to_bm, "H = {h}: {inf} vs {to_bm}");
    }
}
