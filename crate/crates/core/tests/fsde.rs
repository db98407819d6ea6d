use awgauss::fsde::{
    estimate_coupling_cost, euler_fsde, random_piecewise_controls, simulate_coupled_noise, CouplingControl, FsdeSpec, Method,
    TimeGrid,
};
use awgauss::func::ScalarFn;
use awgauss::kernels::VolterraKernel;
use awgauss::oracles::mc_covariance;

fn fbm_cov(h: f64, t: f64, s: f64) -> f64 {
    0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

#[test]
fn weak_convergence_of_the_noise_covariance() {
    let k = VolterraKernel::molchan_golosov(0.75, 1.0).unwrap();
    for (i, (t, s)) in [(1.0, 1.0), (1.0, 0.5), (0.5, 0.5), (0.75, 0.25)].into_iter().enumerate() {
        let mc = mc_covariance(&k, t, s, 256, 100_000, 40 + i as u64).unwrap();
        let exact = fbm_cov(0.75, t, s);
        assert!((mc.mean - exact).abs() <= 4.0 * mc.std_error, "({t}, {s}): {} +- {} vs {exact}", mc.mean, mc.std_error);
    }
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let k1 = VolterraKernel::molchan_golosov(0.6, 1.0).unwrap();
    let k2 = VolterraKernel::riemann_liouville(0.8, 1.0).unwrap();
    let s1 = FsdeSpec::new(ScalarFn::Tanh, ScalarFn::constant(1.0), 0.0, k1).unwrap();
    let s2 = FsdeSpec::new(ScalarFn::linear(-0.5), ScalarFn::SinOffset { offset: 2.0, amplitude: 0.5 }, 0.3, k2)
        .unwrap()
        .with_method(Method::Lamperti);
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let control = random_piecewise_controls(1, 4, 2).remove(0);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_coupling_cost(&s1, &s2, &control, grid, 500, 9).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}

#[test]
fn synchronous_noise_is_shared() {
    let k = VolterraKernel::molchan_golosov(0.7, 1.0).unwrap();
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let (z1, z2) = simulate_coupled_noise(&k, &k, &CouplingControl::Synchronous, grid, 20, 4).unwrap();
    assert_eq!(z1, z2);
    let (a1, a2) = simulate_coupled_noise(&k, &k, &CouplingControl::Antithetic, grid, 20, 4).unwrap();
    assert_eq!(a1, z1);
    for (p, q) in a1.paths.iter().zip(&a2.paths) {
        for (x, y) in p.iter().zip(q) {
            assert_eq!(*x, -*y);
        }
    }
}

#[test]
fn lamperti_and_direct_euler_agree_pathwise() {
    // H > 1/2: both schemes approximate the same pathwise solution
    let k = VolterraKernel::molchan_golosov(0.75, 1.0).unwrap();
    let sigma = ScalarFn::SinOffset { offset: 2.0, amplitude: 1.0 };
    let direct = FsdeSpec::new(ScalarFn::Tanh, sigma, 0.5, k.clone()).unwrap();
    let lamperti = direct.clone().with_method(Method::Lamperti);
    let mut gaps = Vec::new();
    for steps in [64, 512] {
        let grid = TimeGrid::new(1.0, steps).unwrap();
        let (z, _) = simulate_coupled_noise(&k, &k, &CouplingControl::Synchronous, grid, 200, 6).unwrap();
        let (x, y) = (euler_fsde(&direct, &z).unwrap(), euler_fsde(&lamperti, &z).unwrap());
        let gap = x.column(steps).iter().zip(y.column(steps)).map(|(a, b)| (a - b).abs()).sum::<f64>() / 200.0;
        gaps.push(gap);
    }
    assert!(gaps[1] < gaps[0], "{gaps:?}");
    assert!(gaps[1] < 0.05, "{gaps:?}");
}
